###############################################################################
#                                                                             #
#    This program is free software: you can redistribute it and/or modify     #
#    it under the terms of the GNU General Public License as published by     #
#    the Free Software Foundation, either version 3 of the License, or        #
#    (at your option) any later version.                                      #
#                                                                             #
#    This program is distributed in the hope that it will be useful,          #
#    but WITHOUT ANY WARRANTY; without even the implied warranty of           #
#    MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the            #
#    GNU General Public License for more details.                             #
#                                                                             #
#    You should have received a copy of the GNU General Public License        #
#    along with this program. If not, see <http://www.gnu.org/licenses/>.     #
#                                                                             #
###############################################################################

"""
Run orchestration: strict JSON configuration, the five scenarios, and persistence of tables
(CSV), field snapshots (VKF1) and the XML run manifest.
"""

import hashlib
import json
import os
import time
from dataclasses import dataclass, field, asdict, replace
from typing import List, Optional, Tuple

import numpy as np
import pandas as pd
import xmltodict
from scipy import fft
from sciutil import SciUtil

from scilandau import __version__
from scilandau.diagnostics import (convergence_study, kernel_time_integral_rows, quasi_random,
                                   time_averaged_V_norm)
from scilandau.errors import *
from scilandau.grid_fields import (MAX_NORM_ORDER, WEIGHTS, ScalarField, VelocityGrid, build_grid, maxwellian,
                                   sample, write_field)
from scilandau.kernels import CutoffSpec, landau_kernel, laplace_kernel, memory_kernel, potential_ft
from scilandau.landau_solver import LandauConfig, LandauSolver, landau_stationarity_residual
from scilandau.memory_solver import MODES, MemoryConfig, MemorySolver, stationarity_residual

EXIT_OK, EXIT_CONFIG, EXIT_ABORT, EXIT_CHECK = 0, 2, 3, 4
SCENARIOS = ('memory', 'landau', 'converge', 'kernel-check', 'stationarity')
PERTURBATION_KINDS = ('shifted', 'isotropic', 'mixture')
# Largest admissible C in 0 <= v0(v) <= C exp(-|v|/2), checked on the grid.
PERTURBATION_BOUND = 25.0
EMPIRICAL_NOTE = 'delta1, delta2 and eps defaults and the acceptance thresholds are empirical ' \
                 'regression bounds, not theoretical constants.'

ORACLE_TOL = 1e-6
INTEGRAL_TOL = 1e-8
LAPLACE_POINTS = (0.5, 1 + 2j, 2 + 5j)
MIN_ERROR_RATIO = 1.3
MIN_STATIONARITY_ORDER = 0.8
MIN_CONVERGENCE_ORDER = 0.8


@dataclass
class PerturbationSpec:
    """ v0 as a sum of weighted Gaussians exp(-|v - center|^2 / width^2). """
    kind: str = 'shifted'
    center: Tuple[float, float, float] = (1.0, 0.0, 0.0)
    width: float = 1.5
    components: List[dict] = field(default_factory=list)

    def gaussians(self):
        if self.kind == 'shifted':
            return [(1.0, self.center, self.width)]
        if self.kind == 'isotropic':
            return [(1.0, (0.0, 0.0, 0.0), self.width)]
        return [(c.get('weight', 1.0), c.get('center', (0.0, 0.0, 0.0)), c.get('width', 1.5))
                for c in self.components]

    def validate(self):
        if self.kind not in PERTURBATION_KINDS:
            raise ConfigError(PERTURBATION_ERR.format(f'unknown kind "{self.kind}"'))
        if self.kind == 'mixture':
            if not self.components:
                raise ConfigError(PERTURBATION_ERR.format('a mixture needs components'))
            for component in self.components:
                _check_keys(component, ('weight', 'center', 'width'), 'perturbation component')
        for weight, center, width in self.gaussians():
            if weight < 0:
                raise ConfigError(PERTURBATION_ERR.format(f'negative weight {weight}'))
            if not width > 0 or len(center) != 3:
                raise ConfigError(PERTURBATION_ERR.format(f'width {width}, center {center}'))


@dataclass
class VNormSpec:
    A: float = 1.0
    order: int = 0
    weight: str = 'lambda'


@dataclass
class SimulationConfig:
    scenario: str
    n: int = 32
    L: float = 8.0
    kappa: float = 0.25
    eps: float = 0.1
    eps_list: List[float] = field(default_factory=lambda: [0.05, 0.025, 0.0125])
    dt: Optional[float] = None
    cfl_factor: float = 0.05
    t_end: float = 0.5
    delta2: float = 0.05
    perturbation: PerturbationSpec = field(default_factory=PerturbationSpec)
    record_stride: int = 1
    mode: str = 'windowed'
    tail_tol: float = 1e-10
    max_window: int = 4096
    linearized: bool = False
    cross_check: bool = False
    n_records: int = 5
    l_doubling: bool = False
    v_norm: Optional[VNormSpec] = None
    growth_limit: float = 1e3
    output: str = 'scilandau_out'

    def memory_config(self, eps: float) -> MemoryConfig:
        return MemoryConfig(eps=eps, dt=self.dt, t_end=self.t_end, record_stride=self.record_stride, mode=self.mode,
                            tail_tol=self.tail_tol, n=self.n, L=self.L, kappa=self.kappa,
                            cfl_factor=self.cfl_factor, max_window=self.max_window, linearized=self.linearized,
                            growth_limit=self.growth_limit)

    def landau_config(self) -> LandauConfig:
        return LandauConfig(n=self.n, L=self.L, kappa=self.kappa, t_end=self.t_end, dt=self.dt,
                            cfl_factor=self.cfl_factor, record_stride=self.record_stride,
                            growth_limit=self.growth_limit)

    def validate(self):
        if self.scenario not in SCENARIOS:
            raise ConfigError(SCENARIO_ERR.format(self.scenario, ', '.join(SCENARIOS)))
        build_grid(self.n, self.L)
        CutoffSpec(self.kappa)
        if not 0 < self.t_end <= 1:
            raise ConfigError(HORIZON_ERR.format(self.t_end))
        if self.delta2 < 0:
            raise ConfigError(PERTURBATION_ERR.format(f'delta2={self.delta2} < 0'))
        if self.mode not in MODES:
            raise ConfigError(MODE_ERR.format(self.mode))
        if int(self.n_records) != self.n_records or self.n_records < 1:
            raise ConfigError(POSITIVE_ERR.format('n_records', self.n_records))
        self.perturbation.validate()
        if self.scenario in ('converge', 'stationarity'):
            eps_list = list(self.eps_list)
            if not eps_list or any(b >= a for a, b in zip(eps_list[:-1], eps_list[1:])):
                raise ConfigError(EPS_ORDER_ERR.format(eps_list))
            for eps in eps_list:
                self.memory_config(eps).validate()
        elif self.scenario == 'memory':
            self.memory_config(self.eps).validate()
        else:
            self.landau_config().validate()
        if self.v_norm is not None:
            if self.v_norm.A < 1:
                raise ConfigError(DECAY_RATE_ERR.format(self.v_norm.A))
            if int(self.v_norm.order) != self.v_norm.order or not 0 <= self.v_norm.order <= MAX_NORM_ORDER:
                raise ConfigError(ORDER_ERR.format(MAX_NORM_ORDER, self.v_norm.order))
            if self.v_norm.weight not in WEIGHTS:
                raise ConfigError(WEIGHT_ERR.format(self.v_norm.weight, ', '.join(WEIGHTS)))


TOP_KEYS = ('scenario', 'grid', 'kappa', 'eps', 'eps_list', 'dt', 'cfl_factor', 't_end', 'delta2', 'perturbation',
            'record_stride', 'mode', 'tail_tol', 'max_window', 'linearized', 'cross_check', 'n_records',
            'l_doubling', 'v_norm', 'growth_limit', 'output')


def _check_keys(document, allowed, where):
    if not isinstance(document, dict):
        raise ConfigError(CONFIG_PARSE_ERR.format(f'{where} must be an object'))
    unknown = sorted(set(document) - set(allowed))
    if unknown:
        raise ConfigError(UNKNOWN_KEY_ERR.format(where, ', '.join(unknown)))


def parse_config(text: str, scenario: Optional[str] = None) -> SimulationConfig:
    """
    Read a JSON document into a validated SimulationConfig. ``scenario`` comes from the command
    line; when the document also names one they must agree.
    """
    try:
        document = json.loads(text) if text.strip() else {}
    except json.JSONDecodeError as e:
        raise ConfigError(CONFIG_PARSE_ERR.format(e))
    _check_keys(document, TOP_KEYS, 'config')
    chosen = document.pop('scenario', None)
    if chosen and scenario and chosen != scenario:
        raise ConfigError(SCENARIO_MISMATCH_ERR.format(chosen, scenario))
    chosen = chosen or scenario
    if chosen is None:
        raise ConfigError(CONFIG_PARSE_ERR.format('no scenario selected'))
    grid = document.pop('grid', {})
    _check_keys(grid, ('n', 'L'), 'grid')
    perturbation = document.pop('perturbation', {})
    _check_keys(perturbation, ('kind', 'center', 'width', 'components'), 'perturbation')
    if 'center' in perturbation:
        perturbation['center'] = tuple(perturbation['center'])
    v_norm = document.pop('v_norm', None)
    if v_norm is not None:
        _check_keys(v_norm, ('A', 'order', 'weight'), 'v_norm')
        v_norm = VNormSpec(**v_norm)
    try:
        config = SimulationConfig(scenario=chosen, perturbation=PerturbationSpec(**perturbation), v_norm=v_norm,
                                  **grid, **document)
        config.validate()
    except (TypeError, ValueError) as e:
        raise ConfigError(CONFIG_PARSE_ERR.format(e))
    return config


def default_perturbation(spec: PerturbationSpec, grid: VelocityGrid) -> ScalarField:
    """ Sample v0 and check 0 <= v0 <= C exp(-|v|/2) on the grid. """
    spec.validate()

    def v0(v):
        total = np.zeros(v.shape[:-1])
        for weight, center, width in spec.gaussians():
            total += weight * np.exp(-np.sum((v - np.asarray(center)) ** 2, axis=-1) / width ** 2)
        return total

    sampled = sample(grid, v0)
    if np.min(sampled.values) < 0:
        raise ConfigError(PERTURBATION_ERR.format('negative samples'))
    constant = float(np.max(sampled.values * np.exp(grid.speed / 2)))
    if constant > PERTURBATION_BOUND:
        raise ConfigError(PERTURBATION_BOUND_ERR.format(PERTURBATION_BOUND, constant))
    return sampled


def initial_datum(config: SimulationConfig, grid: VelocityGrid) -> ScalarField:
    """ m + delta2 v0; the exact tagged Maxwellian when delta2 is zero. """
    m = maxwellian(grid)
    if config.delta2 == 0:
        return m
    return m + config.delta2 * default_perturbation(config.perturbation, grid)


def _xml_value(value):
    if isinstance(value, dict):
        return {str(k): _xml_value(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return ' '.join(str(_xml_value(v)) for v in value)
    if value is None:
        return ''
    if isinstance(value, (bool, np.bool_)):
        return 'true' if value else 'false'
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def sha256(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, 'rb') as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b''):
            digest.update(chunk)
    return digest.hexdigest()


class Harness:

    def __init__(self, config: SimulationConfig, out_dir: Optional[str] = None, threads: Optional[int] = None,
                 seedless: bool = False):
        self.config = config
        self.out_dir = out_dir or config.output
        self.threads = threads or 1
        self.seedless = seedless
        self.u = SciUtil()
        self.artifacts = []
        self.details = {}
        self.timings = {}

    # ----------------------------------------------------------------- persistence
    def path(self, name: str) -> str:
        return os.path.join(self.out_dir, name)

    def save_table(self, df: pd.DataFrame, name: str) -> str:
        path = self.path(name)
        df.to_csv(path, index=False, float_format='%.17g')
        self.artifacts.append(name)
        return path

    def save_field(self, field: ScalarField, name: str) -> str:
        path = write_field(self.path(name), field)
        self.artifacts.append(name)
        return path

    def save_trajectory(self, trajectory, prefix: str):
        self.save_table(trajectory.moments_frame(), f'{prefix}moments.csv')
        for i, state in enumerate(trajectory.states):
            self.save_field(state, f'{prefix}snapshot_{i:04d}.vkf')
        if trajectory.manifest:
            self.details[f'{prefix}run' if prefix else 'run'] = trajectory.manifest

    def write_manifest(self, status: int, reason: Optional[str]) -> str:
        artifacts = [{'@name': name, '@sha256': sha256(self.path(name))} for name in self.artifacts]
        body = _xml_value({
            'version': __version__,
            'scenario': self.config.scenario,
            'exit_status': status,
            'abort_reason': reason,
            'threads': self.threads,
            'seedless': self.seedless,
            'note': EMPIRICAL_NOTE,
            'config': asdict(self.config),
            'details': self.details,
            'wall_clock': self.timings,
        })
        # Artifacts are listed in write order with the checksum of their bytes.
        body['artifacts'] = {'artifact': artifacts}
        manifest = {'manifest': body}
        path = self.path('manifest.xml')
        with open(path, 'w') as fh:
            fh.write(xmltodict.unparse(manifest, pretty=True))
        return path

    # ----------------------------------------------------------------- scenarios
    def grid(self) -> VelocityGrid:
        return build_grid(self.config.n, self.config.L)

    def v_norm(self, trajectory, key: str):
        spec = self.config.v_norm
        if spec is not None:
            self.details[key] = {'A': spec.A, 'order': spec.order, 'weight': spec.weight,
                                 'value': time_averaged_V_norm(trajectory, spec.A, spec.order, spec.weight)}

    def simulate_memory(self) -> int:
        cfg = self.config
        u0 = initial_datum(cfg, self.grid())
        solver = MemorySolver(cfg.memory_config(cfg.eps))
        trajectory = solver.run(u0)
        self.timings['memory'] = trajectory.manifest['wall_clock']
        self.save_trajectory(trajectory, '')
        self.v_norm(trajectory, 'v_norm')
        if not cfg.cross_check:
            return EXIT_OK
        other_mode = 'naive' if cfg.mode == 'windowed' else 'windowed'
        other = MemorySolver(replace(cfg.memory_config(cfg.eps), mode=other_mode))
        reference = other.run(u0)
        deviation = max(float(np.max(np.abs(a.values - b.values)))
                        for a, b in zip(trajectory.states, reference.states))
        rows = [{'mode': cfg.mode, 'lag_evaluations': solver.lag_evaluations,
                 'integrate_seconds': trajectory.manifest['wall_clock']['integrate'], 'max_deviation': deviation},
                {'mode': other_mode, 'lag_evaluations': other.lag_evaluations,
                 'integrate_seconds': reference.manifest['wall_clock']['integrate'], 'max_deviation': deviation}]
        # Timings make this table run-dependent; it is excluded from the byte-identity guarantee.
        self.save_table(pd.DataFrame(rows), 'cross_check.csv')
        self.details['cross_check'] = {'max_deviation': deviation, 'bound': 10 * cfg.tail_tol}
        if deviation > 10 * cfg.tail_tol:
            self.u.warn_p(['Windowed and naive runs differ by ', deviation])
            return EXIT_CHECK
        return EXIT_OK

    def simulate_landau(self) -> int:
        u0 = initial_datum(self.config, self.grid())
        trajectory = LandauSolver(self.config.landau_config()).run(u0)
        self.timings['landau'] = trajectory.manifest['wall_clock']
        self.save_trajectory(trajectory, '')
        self.v_norm(trajectory, 'v_norm')
        return EXIT_OK

    def converge(self) -> int:
        cfg = self.config
        u0 = initial_datum(cfg, self.grid())
        start = time.perf_counter()
        try:
            report = convergence_study(cfg.eps_list, cfg.memory_config(cfg.eps_list[0]), u0, cfg.n_records,
                                       initial=lambda grid: initial_datum(cfg, grid), l_doubling=cfg.l_doubling)
        except SolverAbort as e:
            if getattr(e, 'report', None) is not None:
                self.save_table(e.report.to_frame(), 'convergence.csv')
            raise
        finally:
            self.timings['converge'] = time.perf_counter() - start
        self.save_table(report.to_frame(), 'convergence.csv')
        self.details['convergence'] = {'order': report.order, 'monotone': report.monotone, 'ratios': report.ratios,
                                       'l_doubling_change': report.l_doubling_change,
                                       'l_doubling_ok': report.l_doubling_ok}
        passed = report.monotone and all(r >= MIN_ERROR_RATIO for r in report.ratios) \
            and report.order >= MIN_CONVERGENCE_ORDER
        if report.l_doubling_ok is False:
            passed = False
        if not passed:
            self.u.warn_p(['Convergence check failed: errors ', report.errors, ' order ', report.order])
        return EXIT_OK if passed else EXIT_CHECK

    def kernel_check(self) -> int:
        from scilandau import oracles

        spec = CutoffSpec(self.config.kappa)
        start = time.perf_counter()
        rows = []
        # Samples keep |w|^2 >= kappa (cutoff equal to one) and tau |w| <= 4 so relative errors stay meaningful.
        for q in quasi_random(20, 4):
            w = _direction(q[:2]) * (0.5 + 5.5 * q[2])
            tau = min(5.0, 4.0 / np.linalg.norm(w)) * q[3]
            error = _relative(memory_kernel(tau, w, spec).data, oracles.oracle_memory_kernel(tau, w).data)
            rows.append(_row('memory_kernel', w, tau=tau, error=error, tol=ORACLE_TOL))
        for z in LAPLACE_POINTS:
            for q in quasi_random(5, 3):
                w = _direction(q[:2]) * (0.5 + 5.5 * q[2])
                error = _relative(laplace_kernel(z, w, spec).data, oracles.oracle_laplace(z, w, spec).data)
                rows.append(_row('laplace_kernel', w, z=z, error=error, tol=ORACLE_TOL))
        for q in quasi_random(5, 3):
            w = _direction(q[:2]) * (0.5 + 5.5 * q[2])
            error = _relative(landau_kernel(w, spec).data, oracles.oracle_landau_kernel(w).data)
            rows.append(_row('landau_kernel', w, error=error, tol=ORACLE_TOL))
        for k in (0.0, 1.0, 5.0):
            error = abs(potential_ft(k) - oracles.oracle_potential_ft(k)) / potential_ft(k)
            rows.append(_row('potential_ft', (k, 0.0, 0.0), error=error, tol=ORACLE_TOL))
        integral = kernel_time_integral_rows(self.grid(), spec)
        for _, r in integral.iterrows():
            rows.append(_row('time_integral', (r['w1'], r['w2'], r['w3']), error=r['rel_error'], tol=INTEGRAL_TOL))
        self.timings['kernel_check'] = time.perf_counter() - start
        table = pd.DataFrame(rows)
        self.save_table(table, 'kernel_check.csv')
        failed = table[table['rel_error'] > table['tolerance']]
        self.details['kernel_check'] = {'checks': len(table), 'failed': len(failed),
                                        'max_rel_error': float(table['rel_error'].max())}
        if len(failed):
            self.u.warn_p(['Kernel checks failed:', failed['check'].unique().tolist()])
            return EXIT_CHECK
        return EXIT_OK

    def stationarity(self) -> int:
        cfg = self.config
        start = time.perf_counter()
        rows = []
        for eps in cfg.eps_list:
            rows.append({'solver': 'memory', 'eps': eps,
                         'residual': stationarity_residual(eps, cfg.memory_config(eps))})
        memory = pd.DataFrame(rows)
        order = float('nan')
        if len(memory) >= 2 and (memory['residual'] > 0).all():
            order = float(np.polyfit(np.log(memory['eps']), np.log(memory['residual']), 1)[0])
        landau_residual = landau_stationarity_residual(cfg.landau_config())
        table = pd.concat([memory, pd.DataFrame([{'solver': 'landau', 'eps': 0.0, 'residual': landau_residual}])],
                          ignore_index=True)
        table['fitted_order'] = order
        self.timings['stationarity'] = time.perf_counter() - start
        self.save_table(table, 'stationarity.csv')
        decreasing = bool(np.all(np.diff(memory['residual'].values) < 0))
        self.details['stationarity'] = {'fitted_order': order, 'decreasing': decreasing,
                                        'landau_residual': landau_residual}
        if not (decreasing and order >= MIN_STATIONARITY_ORDER):
            self.u.warn_p(['Stationarity check failed: order ', order])
            return EXIT_CHECK
        return EXIT_OK

    def run(self) -> int:
        os.makedirs(self.out_dir, exist_ok=True)
        handlers = {'memory': self.simulate_memory, 'landau': self.simulate_landau, 'converge': self.converge,
                    'kernel-check': self.kernel_check, 'stationarity': self.stationarity}
        self.u.dp(['Running scenario ', self.config.scenario, ' into ', self.out_dir])
        status, reason = EXIT_OK, None
        with fft.set_workers(self.threads):
            try:
                status = handlers[self.config.scenario]()
            except SolverAbort as e:
                status, reason = EXIT_ABORT, e.reason
                self.u.err_p(['Solver aborted: ', e.reason])
                if e.trajectory is not None:
                    self.save_trajectory(e.trajectory, 'partial_')
                if e.snapshot is not None:
                    self.save_field(e.snapshot, 'abort_snapshot.vkf')
            except ConfigError as e:
                status, reason = EXIT_CONFIG, str(e)
                self.u.err_p(['Configuration rejected: ', reason])
        self.write_manifest(status, reason)
        return status


def _direction(q) -> np.ndarray:
    """ Unit vector from two numbers in [0, 1). """
    cos_theta = 2 * q[0] - 1
    phi = 2 * np.pi * q[1]
    sin_theta = np.sqrt(1 - cos_theta ** 2)
    return np.array([sin_theta * np.cos(phi), sin_theta * np.sin(phi), cos_theta])


def _relative(value: np.ndarray, reference: np.ndarray) -> float:
    scale = np.sqrt(np.sum(np.abs(reference) ** 2))
    return float(np.sqrt(np.sum(np.abs(value - reference) ** 2)) / scale)


def _row(check, w, tau=np.nan, z=np.nan, error=np.nan, tol=np.nan) -> dict:
    z = complex(z)
    return {'check': check, 'w1': float(w[0]), 'w2': float(w[1]), 'w3': float(w[2]), 'tau': float(tau),
            'z_real': z.real, 'z_imag': z.imag, 'rel_error': float(error), 'tolerance': tol}


def run(config: SimulationConfig, out_dir: Optional[str] = None, threads: Optional[int] = None,
        seedless: bool = False) -> int:
    return Harness(config, out_dir, threads, seedless).run()
