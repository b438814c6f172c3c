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
Non-Markovian kinetic equation with a memory kernel on the scale eps:

    du/dt = div flux,
    flux_i(t) = (1/eps) int_0^t sum_j (G((t-s)/eps) * u(s))_ij d_j u(s) - (G((t-s)/eps) * d_j u(s))_ij u(s) ds

The history integral is a composite trapezoid over lags k dt/eps, cut at the certified window W
(windowed mode) or carried to s = 0 (naive mode). Time stepping is Heun: the predictor is
pushed as the provisional newest history entry and then overwritten by the corrected state.
"""

import time
from collections import deque
from dataclasses import dataclass, asdict, replace
from typing import NamedTuple, Optional

import numpy as np

from scilandau.base import KineticSolver, Trajectory
from scilandau.errors import *
from scilandau.grid_fields import (MemoryMultiplierTable, ScalarField, VectorField, VelocityGrid, build_grid,
                                   build_memory_table, certified_window, coefficient_fields, divergence_values,
                                   gradient_values, maxwellian, pad_spectrum, tensor_dot, weighted_sobolev_norm)
from scilandau.kernels import CutoffSpec

MODES = ('windowed', 'naive')


@dataclass
class MemoryConfig:
    eps: float = 0.1
    dt: Optional[float] = None  # default min(eps/4, CFL limit of K[u0])
    t_end: float = 0.25
    record_stride: int = 1
    mode: str = 'windowed'
    tail_tol: float = 1e-10
    n: int = 32
    L: float = 8.0
    kappa: float = 0.25
    cfl_factor: float = 0.05
    max_window: int = 4096
    linearized: bool = False
    growth_limit: float = 1e3

    def validate(self):
        build_grid(self.n, self.L)
        CutoffSpec(self.kappa)
        for name in ('eps', 'tail_tol', 'cfl_factor', 'growth_limit'):
            if not getattr(self, name) > 0:
                raise ConfigError(POSITIVE_ERR.format(name, getattr(self, name)))
        if not 0 < self.t_end <= 1:
            raise ConfigError(HORIZON_ERR.format(self.t_end))
        if self.mode not in MODES:
            raise ConfigError(MODE_ERR.format(self.mode))
        if int(self.record_stride) != self.record_stride or self.record_stride < 1:
            raise ConfigError(POSITIVE_ERR.format('record_stride', self.record_stride))
        if self.dt is not None:
            if not self.dt > 0:
                raise ConfigError(POSITIVE_ERR.format('dt', self.dt))
            if self.dt > self.eps / 4 * (1 + 1e-12):
                raise ConfigError(KERNEL_RESOLUTION_ERR.format(self.dt, self.eps / 4))


class HistoryEntry(NamedTuple):
    spectrum: np.ndarray  # rfftn of the zero-padded state
    values: np.ndarray
    gradient: np.ndarray  # unpadded spectral gradient, (3, n, n, n)


class HistoryBuffer:
    """
    Past states indexed by step. With a capacity the oldest entries fall off (windowed mode);
    without one every step is kept (naive mode). The step-0 entry is also kept aside for the
    linearized equation.
    """

    def __init__(self, capacity: Optional[int] = None):
        self._entries = deque(maxlen=capacity)
        self._first = 0
        self.initial = None

    def __len__(self):
        return len(self._entries)

    @property
    def capacity(self):
        return self._entries.maxlen

    @property
    def first(self) -> int:
        return self._first

    @property
    def step(self) -> int:
        """ Index of the newest entry. """
        return self._first + len(self._entries) - 1

    def push(self, entry: HistoryEntry):
        if self.initial is None:
            self.initial = entry
        if self.capacity is not None and len(self._entries) == self.capacity:
            self._first += 1
        self._entries.append(entry)

    def replace_last(self, entry: HistoryEntry):
        self._entries[-1] = entry

    def entry(self, index: int) -> HistoryEntry:
        position = index - self._first
        if not 0 <= position < len(self._entries):
            raise HistoryError(HISTORY_ERR.format(index, self._first, self.step))
        return self._entries[position]


@dataclass
class MemoryState:
    step: int
    t: float
    values: np.ndarray
    history: HistoryBuffer


def lags_in_use(table: MemoryMultiplierTable, t_index: int) -> int:
    """ Largest lag entering the quadrature at step t_index. """
    return min(t_index, table.lag_count)


def planned_lag_evaluations(n_steps: int, lag_count: int) -> int:
    """ Lag terms a run of n_steps Heun steps evaluates when lags 0..lag_count are stored. """
    s = np.arange(int(n_steps))
    return int(np.sum(np.minimum(s, lag_count) + np.minimum(s + 1, lag_count) + 2))


def memory_flux_values(history: HistoryBuffer, table: MemoryMultiplierTable, t_index: int,
                       linearized: bool = False, cache: Optional[dict] = None) -> np.ndarray:
    """
    Trapezoid in s of the memory flux at step t_index, with the table's endpoint correction folded
    into lag 0. ``cache`` keeps per-lag coefficient fields of the frozen initial state when
    ``linearized`` is set.
    """
    grid = table.grid
    flux = np.zeros((3,) + grid.shape)
    reach = lags_in_use(table, t_index)
    if reach == 0:
        return flux
    for k in range(reach + 1):
        weight = 0.5 if k in (0, reach) else 1.0
        data = table.multipliers[k].data
        if k == 0 and table.end_correction is not None:
            data, weight = weight * data + table.end_correction.data, 1.0
        current = history.entry(t_index - k)
        if linearized and cache is not None and k in cache:
            tensor, vector = cache[k]
        else:
            source = history.initial if linearized else current
            tensor, vector = coefficient_fields(data, source.spectrum,
                                                pad_spectrum(source.gradient, grid), grid)
            if linearized and cache is not None:
                cache[k] = (tensor, vector)
        flux += weight * (tensor_dot(tensor, current.gradient) - vector * current.values)
    return table.dtau * flux


def memory_flux(history: HistoryBuffer, table: MemoryMultiplierTable, t_index: int,
                linearized: bool = False) -> VectorField:
    return VectorField(table.grid, memory_flux_values(history, table, t_index, linearized))


class MemorySolver(KineticSolver):

    def __init__(self, config: MemoryConfig, grid: Optional[VelocityGrid] = None):
        config.validate()
        super().__init__(grid or build_grid(config.n, config.L), CutoffSpec(config.kappa), config.growth_limit)
        self.config = config
        self.table = None
        self.dt = None
        self.n_steps = None
        self.k_max = None
        self.lag_evaluations = 0
        self._coefficients = {}
        self._timings = {}

    def entry(self, values: np.ndarray) -> HistoryEntry:
        return HistoryEntry(pad_spectrum(values, self.grid), values, gradient_values(values, self.grid))

    def step_size(self, u0: ScalarField):
        """ dt dividing t_end evenly, under eps/4 and the diffusion limit of K[u0]. """
        cfg = self.config
        tensor, _ = self.landau_coefficients(u0)
        limit, self.k_max = self.diffusion_limit(tensor.values, cfg.cfl_factor)
        if cfg.dt is not None:
            if cfg.dt > limit * (1 + 1e-12):
                raise ConfigError(CFL_ERR.format(cfg.dt, limit, self.k_max))
            dt_max = cfg.dt
        else:
            dt_max = min(cfg.eps / 4, limit)
        n_steps = max(int(np.ceil(cfg.t_end / dt_max - 1e-9)), 1)
        return cfg.t_end / n_steps, n_steps

    def prepare(self, u0: ScalarField) -> MemoryState:
        cfg = self.config
        self.check_grid(u0)
        start = time.perf_counter()
        self.dt, self.n_steps = self.step_size(u0)
        if cfg.mode == 'windowed':
            window = certified_window(self.dt / cfg.eps, self.spec, cfg.tail_tol)
            lags, capacity = min(window, self.n_steps), window + 1
        else:
            lags, capacity = self.n_steps, None
        self.table = build_memory_table(self.grid, self.spec, cfg.eps, self.dt, cfg.tail_tol,
                                        max_window=cfg.max_window, lags=lags)
        self._coefficients = {}
        self.lag_evaluations = 0
        history = HistoryBuffer(capacity)
        history.push(self.entry(np.array(u0.values)))
        self._timings['setup'] = time.perf_counter() - start
        self.u.dp(['Memory table: eps=', cfg.eps, ' dt=', self.dt, ' W=', self.table.window,
                   ' lags built=', self.table.lag_count, ' tail bound=', self.table.tail_bound])
        return MemoryState(0, 0.0, history.entry(0).values, history)

    def rate(self, history: HistoryBuffer, t_index: int) -> np.ndarray:
        self.lag_evaluations += lags_in_use(self.table, t_index) + 1
        flux = memory_flux_values(history, self.table, t_index, self.config.linearized, self._coefficients)
        return divergence_values(flux, self.grid)

    def memory_step(self, state: MemoryState) -> MemoryState:
        """ One Heun step; advances the history ring. """
        dt = self.dt
        current = self.rate(state.history, state.step)
        predictor = state.values + dt * current
        state.history.push(self.entry(predictor))
        corrected = state.values + 0.5 * dt * (current + self.rate(state.history, state.step + 1))
        state.history.replace_last(self.entry(corrected))
        step = state.step + 1
        return MemoryState(step, self.config.t_end * step / self.n_steps, corrected, state.history)

    def run(self, u0: ScalarField) -> Trajectory:
        cfg = self.config
        trajectory = self.start(u0)
        state = self.prepare(u0)
        start = time.perf_counter()
        try:
            while state.step < self.n_steps:
                state = self.memory_step(state)
                self.guard(state.values, state.t, trajectory)
                if state.step % cfg.record_stride == 0 or state.step == self.n_steps:
                    trajectory.append(state.t, ScalarField(self.grid, state.values))
        finally:
            self._timings['integrate'] = time.perf_counter() - start
            trajectory.manifest = self.manifest()
        self.u.dp(['Memory run finished: ', self.n_steps, ' steps, ', self.lag_evaluations, ' lag evaluations in ',
                   round(self._timings['integrate'], 3), 's'])
        return trajectory

    def manifest(self) -> dict:
        return {'solver': 'memory', 'config': asdict(self.config), 'dt': self.dt, 'steps': self.n_steps,
                'k_max': self.k_max, 'window': self.table.window, 'tail_bound': self.table.tail_bound,
                'lags_built': self.table.lag_count, 'lag_evaluations': self.lag_evaluations,
                'planned_lag_evaluations': planned_lag_evaluations(self.n_steps, self.table.lag_count),
                'wall_clock': dict(self._timings)}


def memory_step(state: MemoryState, solver: MemorySolver) -> MemoryState:
    return solver.memory_step(state)


def run_memory(config: MemoryConfig, u0: ScalarField) -> Trajectory:
    return MemorySolver(config).run(u0)


def stationarity_residual(eps: float, config: MemoryConfig, sigma2: float = 1.0, m0: float = 1.0) -> float:
    """ Largest L2_lambda distance from the Maxwellian along a memory run started at it. """
    solver = MemorySolver(replace(config, eps=eps))
    m = maxwellian(solver.grid, sigma2, m0)
    trajectory = solver.run(m)
    return max(weighted_sobolev_norm(state - m, 0, 'lambda') for state in trajectory.states)
