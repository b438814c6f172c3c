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
Diagnostics built on the solvers: the boundary layer and its b profile, Laplace transforms of
recorded traces, time-averaged weighted norms, the kernel time-integral identity and the
eps -> 0 convergence study.
"""

from dataclasses import dataclass, field, replace
from typing import Callable, List, Optional, Sequence

import numpy as np
import pandas as pd
from scipy.integrate import romb, trapezoid
from sciutil import SciUtil

from scilandau.base import KineticSolver, Trajectory
from scilandau.errors import *
from scilandau.grid_fields import (ScalarField, VectorField, VelocityGrid, build_grid, build_multiplier,
                                   coefficient_fields, divergence_values, field_spectra, gradient_values,
                                   maxwellian_gradient, tensor_dot, weighted_sobolev_norm)
from scilandau.kernels import COMPONENTS, CutoffSpec, SymMat3, landau_kernel, memory_kernel, transverse_kernel
from scilandau.landau_solver import LandauConfig, LandauSolver
from scilandau.memory_solver import MemoryConfig, MemorySolver

# Below this product t*r the closed form of b loses its digits to cancellation.
SERIES_THRESHOLD = 1e-4
PRIMES = (2, 3, 5, 7, 11, 13)


def quasi_random(count: int, dim: int) -> np.ndarray:
    """ Deterministic low-discrepancy points in [0, 1)^dim (Kronecker sequence). """
    alphas = np.mod(np.sqrt(PRIMES[:dim]), 1.0)
    return np.mod(0.5 + np.outer(np.arange(1, count + 1), alphas), 1.0)


def _check_rate(r):
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise DomainError(DOMAIN_ERR.format('b_profile', 'rate r must be positive'))
    return r


def _check_time(t):
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise DomainError(DOMAIN_ERR.format('b_profile', 'time must be nonnegative'))
    return t


def _value(x):
    return x.item() if np.ndim(x) == 0 else x


def b_profile(t, r):
    """ b(t, r) = exp(-tr)/r^2 + t/r - 1/r^2, with a Taylor branch for small tr. """
    t, r = _check_time(t), _check_rate(r)
    x = t * r
    small = x < SERIES_THRESHOLD
    xs = np.where(small, x, 0.0)
    series = t ** 2 * (0.5 - xs / 6 + xs ** 2 / 24 - xs ** 3 / 120)
    closed = (np.expm1(-x) + x) / r ** 2
    return _value(np.where(small, series, closed))


def b_profile_dt(t, r):
    t, r = _check_time(t), _check_rate(r)
    return _value(-np.expm1(-t * r) / r)


def b_profile_dtt(t, r):
    t, r = _check_time(t), _check_rate(r)
    return _value(np.exp(-t * r) * np.ones_like(r))


def b_profile_laplace(z: complex, r):
    """ Laplace transform of b in t, defined for Re z > 0. """
    z = complex(z)
    if z.real <= 0:
        raise DomainError(DOMAIN_ERR.format('b_profile_laplace', f'Re z={z.real} <= 0'))
    r = _check_rate(r)
    return _value(1 / (r * z ** 2) - 1 / (r * (z + r) * z))


def _bracket(u0: ScalarField, data: np.ndarray):
    """ Flux k*u0 grad u0 - (k*grad u0) u0 for a tensor kernel spectrum, and its divergence. """
    grid = u0.grid
    gradient = maxwellian_gradient(u0) if u0.maxwellian else gradient_values(u0.values, grid)
    spectra = field_spectra(u0.values, gradient, grid)
    tensor, vector = coefficient_fields(data, spectra[0], spectra[1:], grid)
    flux = tensor_dot(tensor, gradient) - vector * u0.values
    return ScalarField(grid, divergence_values(flux, grid)), VectorField(grid, flux)


def boundary_layer(t: float, u0: ScalarField, eps: float, spec: CutoffSpec):
    """
    Boundary layer (B, B_F) with kernel pi^2/4 b(t, |w|/eps)/eps eta P_w^perp. Tagged
    Maxwellians use their exact gradient, which makes both fields vanish.
    """
    if t < 0:
        raise DomainError(DOMAIN_ERR.format('boundary_layer', f't={t} < 0'))
    grid = u0.grid
    if t == 0:
        return ScalarField(grid, np.zeros(grid.shape)), VectorField(grid, np.zeros((3,) + grid.shape))
    multiplier = build_multiplier(grid, lambda w: transverse_kernel(w, spec, lambda s: b_profile(t, s / eps) / eps))
    return _bracket(u0, multiplier.data)


def boundary_layer_acceleration(t: float, u0: ScalarField, eps: float, spec: CutoffSpec):
    """ Second time derivative of the boundary layer: kernel pi^2/4 exp(-t|w|/eps)/eps eta P_w^perp. """
    if t < 0:
        raise DomainError(DOMAIN_ERR.format('boundary_layer_acceleration', f't={t} < 0'))
    multiplier = build_multiplier(u0.grid, lambda w: transverse_kernel(w, spec, lambda s: np.exp(-t * s / eps) / eps))
    return _bracket(u0, multiplier.data)


def laplace_transform_trace(times, values, z: complex):
    """ Trapezoid of exp(-z t) values(t) over the recorded times (time is the first axis). """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values)
    decay = np.exp(-complex(z) * times).reshape((-1,) + (1,) * (values.ndim - 1))
    return trapezoid(decay * values, times, axis=0)


def laplace_probe(trajectory: Trajectory, z: complex, nodes: Optional[Sequence] = None):
    """ Laplace transform of a recorded run at every node, or at the listed node indices. """
    z = complex(z)
    if z.real <= 0:
        raise DomainError(DOMAIN_ERR.format('laplace_probe', f'Re z={z.real} <= 0'))
    values = np.stack([state.values for state in trajectory.states])
    if nodes is not None:
        index = tuple(np.asarray(nodes).T)
        values = values[(slice(None),) + index]
    return laplace_transform_trace(trajectory.times, values, z)


def laplace_truncation_bound(trajectory: Trajectory, z: complex) -> float:
    """ Remainder bound sup|u| exp(-Re z T) / Re z for the part of the transform beyond the run. """
    z = complex(z)
    if z.real <= 0:
        raise DomainError(DOMAIN_ERR.format('laplace_truncation_bound', f'Re z={z.real} <= 0'))
    sup = max(state.sup_norm() for state in trajectory.states)
    return sup * np.exp(-z.real * trajectory.times[-1]) / z.real


def plancherel_check(times, trace, A: float, omega_max: float, n_omega: int = 4001, block: int = 128):
    """
    Both sides of int |L u(A/2 + i w)|^2 dw = 2 pi int exp(-A t) |u|^2 dt for a scalar trace,
    the trace being zero after its last time.
    """
    times = np.asarray(times, dtype=float)
    trace = np.asarray(trace)
    time_side = 2 * np.pi * trapezoid(np.exp(-A * times) * np.abs(trace) ** 2, times)
    omega = np.linspace(-omega_max, omega_max, n_omega)
    energy = np.empty(n_omega)
    for lo in range(0, n_omega, block):
        z = A / 2 + 1j * omega[lo:lo + block]
        transform = trapezoid(np.exp(-np.outer(z, times)) * trace, times, axis=1)
        energy[lo:lo + block] = np.abs(transform) ** 2
    return float(time_side), float(trapezoid(energy, omega))


def lattice_samples(grid: VelocityGrid, count: int) -> np.ndarray:
    """ Quasi-random nonzero difference-lattice velocities, shape (count, 3). """
    points = quasi_random(count, 3)
    index = np.floor(points * (2 * grid.n - 1)).astype(int) - (grid.n - 1)
    index[np.all(index == 0, axis=1)] = (1, 0, 0)
    return grid.dv * index


def kernel_time_integral_rows(grid: VelocityGrid, spec: CutoffSpec, T_factor: float = 40.0,
                              samples: int = 10, dtau_factor: float = 0.01) -> pd.DataFrame:
    """ Per-sample Romberg integral of the memory kernel up to T_factor/|w| against the Landau kernel. """
    if T_factor < 20:
        raise ConfigError(f'T_factor must be at least 20, got {T_factor}.')
    rows = []
    for w in lattice_samples(grid, samples):
        speed = float(np.linalg.norm(w))
        exact = landau_kernel(w, spec).data
        levels = int(np.ceil(np.log2(T_factor / dtau_factor)))
        integrals = []
        for k in (levels, levels + 1):
            taus = np.linspace(0.0, T_factor / speed, 2 ** k + 1)
            integrals.append(romb(memory_kernel(taus, w, spec).data, dx=taus[1] - taus[0], axis=-1))
        scale = SymMat3(exact).frobenius()
        error = SymMat3(integrals[0] - exact).frobenius()
        rows.append({'w1': w[0], 'w2': w[1], 'w3': w[2], 'speed': speed,
                     'rel_error': float(error / scale) if scale > 0 else float(error),
                     'halving_change': float(SymMat3(integrals[1] - integrals[0]).frobenius() / max(scale, 1.0))})
    return pd.DataFrame(rows)


def kernel_time_integral_check(grid: VelocityGrid, spec: CutoffSpec, T_factor: float = 40.0,
                               samples: int = 10) -> float:
    """ Largest relative error of int_0^{T/|w|} G dtau against a over the sampled w. """
    return float(kernel_time_integral_rows(grid, spec, T_factor, samples)['rel_error'].max())


def time_averaged_V_norm(trajectory: Trajectory, A: float, order: int = 0, weight: str = 'lambda') -> float:
    """ sqrt(int exp(-A t) ||u(t)||^2_{H^n_nu} dt) over the recorded times. """
    if A < 1:
        raise ConfigError(DECAY_RATE_ERR.format(A))
    times = np.asarray(trajectory.times)
    squares = np.array([weighted_sobolev_norm(state, order, weight) ** 2 for state in trajectory.states])
    return float(np.sqrt(trapezoid(np.exp(-A * times) * squares, times)))


@dataclass
class ConvergenceReport:
    eps_list: List[float]
    errors: List[float] = field(default_factory=list)
    record_times: List[float] = field(default_factory=list)
    order: float = float('nan')
    monotone: bool = False
    ratios: List[float] = field(default_factory=list)
    l_doubling_change: Optional[float] = None
    l_doubling_ok: Optional[bool] = None

    def finish(self):
        errors = np.asarray(self.errors, dtype=float)
        self.ratios = [float(a / b) if b > 0 else float('inf') for a, b in zip(errors[:-1], errors[1:])]
        self.monotone = bool(np.all(np.diff(errors) < 0))
        if len(errors) >= 2 and np.all(errors > 0):
            eps = np.asarray(self.eps_list[:len(errors)], dtype=float)
            self.order = float(np.polyfit(np.log(eps), np.log(errors), 1)[0])
        return self

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({'eps': self.eps_list[:len(self.errors)], 'error': self.errors,
                             'fitted_order': [self.order] * len(self.errors)})


class ConvergenceStudy:
    """ Memory runs for a decreasing list of eps against one Landau run from the same datum. """

    def __init__(self, config: MemoryConfig, n_records: int = 5):
        self.config = config
        self.n_records = n_records
        self.u = SciUtil()

    def record_times(self):
        return [self.config.t_end * (k / self.n_records) for k in range(1, self.n_records + 1)]

    def errors(self, eps_list, u0: ScalarField, report: ConvergenceReport) -> List[float]:
        cfg = self.config
        grid = u0.grid
        landau_view = KineticSolver(grid, CutoffSpec(cfg.kappa))
        tensor, _ = landau_view.landau_coefficients(u0)
        limit, _ = landau_view.diffusion_limit(tensor.values, cfg.cfl_factor)
        landau = LandauConfig(n=grid.n, L=grid.L, kappa=cfg.kappa, t_end=cfg.t_end, cfl_factor=cfg.cfl_factor,
                              record_times=self.record_times(), growth_limit=cfg.growth_limit)
        reference = LandauSolver(landau, grid=grid).run(u0).states
        interval = cfg.t_end / self.n_records
        errors = []
        for eps in eps_list:
            dt_max = min(eps / 4, limit, cfg.dt or np.inf)
            per_record = int(np.ceil(interval / dt_max - 1e-9))
            run_config = replace(cfg, n=grid.n, L=grid.L, eps=eps, dt=interval / per_record, record_stride=per_record)
            states = MemorySolver(run_config, grid=grid).run(u0).states
            error = max(weighted_sobolev_norm(a - b, 0, 'lambda') for a, b in zip(states, reference))
            errors.append(error)
            report.errors = list(errors)
            self.u.dp(['eps=', eps, ' error=', error])
        return errors

    def run(self, eps_list, u0: ScalarField, initial: Optional[Callable[[VelocityGrid], ScalarField]] = None,
            l_doubling: bool = False) -> ConvergenceReport:
        eps_list = [float(e) for e in eps_list]
        if len(eps_list) == 0 or any(b >= a for a, b in zip(eps_list[:-1], eps_list[1:])):
            raise ConfigError(EPS_ORDER_ERR.format(eps_list))
        if l_doubling and initial is None:
            raise ConfigError('The L-doubling run needs an initial-datum factory.')
        report = ConvergenceReport(eps_list, record_times=self.record_times())
        try:
            self.errors(eps_list, u0, report)
            if l_doubling:
                grid = u0.grid
                wide = build_grid(2 * grid.n, 2 * grid.L)
                doubled = self.errors(eps_list[:1], initial(wide), ConvergenceReport(eps_list[:1]))[0]
                base = report.errors[0]
                report.l_doubling_change = abs(doubled - base) / base if base > 0 else 0.0
                report.l_doubling_ok = report.l_doubling_change < 0.05
                if not report.l_doubling_ok:
                    self.u.warn_p(['Doubling L changed the error by ', report.l_doubling_change])
        except SolverAbort as e:
            e.report = report.finish()
            raise
        return report.finish()


def convergence_study(eps_list, config: MemoryConfig, u0: ScalarField, n_records: int = 5,
                      initial: Optional[Callable[[VelocityGrid], ScalarField]] = None,
                      l_doubling: bool = False) -> ConvergenceReport:
    return ConvergenceStudy(config, n_records).run(eps_list, u0, initial, l_doubling)
