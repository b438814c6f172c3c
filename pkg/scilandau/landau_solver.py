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
Cutoff Landau equation du/dt = div(K[u] grad u - P[u] u), K[u] = a * u, P[u] = a * grad u,
integrated with classical RK4 and an adaptive step from the diffusion CFL limit.
"""

import time
from dataclasses import dataclass, asdict
from typing import List, Optional

import numpy as np

from scilandau.base import KineticSolver, Trajectory
from scilandau.errors import *
from scilandau.grid_fields import (ScalarField, VelocityGrid, build_grid, coefficient_fields, divergence_values,
                                   field_spectra, gradient_values, maxwellian, tensor_dot, weighted_sobolev_norm)
from scilandau.kernels import CutoffSpec


@dataclass
class LandauConfig:
    n: int = 32
    L: float = 8.0
    kappa: float = 0.25
    t_end: float = 0.5
    dt: Optional[float] = None  # upper bound, the CFL limit may shorten steps further
    cfl_factor: float = 0.05
    record_stride: int = 1
    record_times: Optional[List[float]] = None
    growth_limit: float = 1e3

    def validate(self):
        build_grid(self.n, self.L)
        CutoffSpec(self.kappa)
        for name in ('t_end', 'cfl_factor', 'growth_limit'):
            if not getattr(self, name) > 0:
                raise ConfigError(POSITIVE_ERR.format(name, getattr(self, name)))
        if self.dt is not None and not self.dt > 0:
            raise ConfigError(POSITIVE_ERR.format('dt', self.dt))
        if int(self.record_stride) != self.record_stride or self.record_stride < 1:
            raise ConfigError(POSITIVE_ERR.format('record_stride', self.record_stride))
        if self.record_times is not None and any(not 0 < t <= self.t_end for t in self.record_times):
            raise ConfigError(f'record_times must lie in (0, t_end={self.t_end}]: {self.record_times}')


class LandauSolver(KineticSolver):

    def __init__(self, config: LandauConfig, grid: Optional[VelocityGrid] = None):
        config.validate()
        super().__init__(grid or build_grid(config.n, config.L), CutoffSpec(config.kappa), config.growth_limit)
        self.config = config

    def rate(self, values: np.ndarray):
        """ Right-hand side on raw samples, plus the K[u] components used for the CFL limit. """
        gradient = gradient_values(values, self.grid)
        spectra = field_spectra(values, gradient, self.grid)
        tensor, vector = coefficient_fields(self.landau_multiplier.data, spectra[0], spectra[1:], self.grid)
        flux = tensor_dot(tensor, gradient) - vector * values
        return divergence_values(flux, self.grid), tensor

    def rhs(self, field: ScalarField) -> ScalarField:
        self.check_grid(field)
        return ScalarField(self.grid, self.rate(field.values)[0])

    def _targets(self):
        cfg = self.config
        if cfg.record_times is None:
            return [cfg.t_end]
        targets = []
        for t in sorted(cfg.record_times):
            if not targets or t - targets[-1] > 1e-12 * cfg.t_end:
                targets.append(float(t))
        if cfg.t_end - targets[-1] > 1e-12 * cfg.t_end:
            targets.append(cfg.t_end)
        return targets

    def run(self, u0: ScalarField) -> Trajectory:
        cfg = self.config
        trajectory = self.start(u0)
        targets = self._targets()
        by_stride = cfg.record_times is None
        self.u.dp(['Landau run: n=', self.grid.n, ' L=', self.grid.L, ' t_end=', cfg.t_end])
        start = time.perf_counter()
        values = np.array(u0.values)
        t, step, smallest, k_max = 0.0, 0, np.inf, 0.0
        for stop in targets:
            while stop - t > 1e-12 * cfg.t_end:
                k1, tensor = self.rate(values)
                limit, k_max = self.diffusion_limit(tensor, cfg.cfl_factor)
                dt = min(limit, cfg.dt or np.inf)
                landed = dt >= stop - t - 1e-12 * cfg.t_end
                dt = stop - t if landed else dt
                k2, _ = self.rate(values + 0.5 * dt * k1)
                k3, _ = self.rate(values + 0.5 * dt * k2)
                k4, _ = self.rate(values + dt * k3)
                values = values + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
                t = stop if landed else t + dt
                step += 1
                smallest = min(smallest, dt)
                self.guard(values, t, trajectory)
                if by_stride and not landed and step % cfg.record_stride == 0:
                    trajectory.append(t, ScalarField(self.grid, values))
            t = stop
            if len(trajectory.times) == 0 or trajectory.times[-1] < t:
                trajectory.append(t, ScalarField(self.grid, values))
        elapsed = time.perf_counter() - start
        trajectory.manifest = {'solver': 'landau', 'config': asdict(cfg), 'steps': step,
                               'smallest_dt': float(smallest), 'final_k_max': float(k_max),
                               'wall_clock': {'integrate': elapsed}}
        self.u.dp(['Landau run finished: ', step, ' steps in ', round(elapsed, 3), 's'])
        return trajectory


def landau_coefficients(u: ScalarField, spec: Optional[CutoffSpec] = None):
    """ (K[u], P[u]) as a SymTensorField and a VectorField. """
    return KineticSolver(u.grid, spec or CutoffSpec()).landau_coefficients(u)


def landau_rhs(u: ScalarField, spec: Optional[CutoffSpec] = None) -> ScalarField:
    spec = spec or CutoffSpec()
    config = LandauConfig(n=u.grid.n, L=u.grid.L, kappa=spec.kappa)
    return LandauSolver(config, grid=u.grid).rhs(u)


def run_landau(config: LandauConfig, u0: ScalarField) -> Trajectory:
    return LandauSolver(config).run(u0)


def landau_stationarity_residual(config: LandauConfig, sigma2: float = 1.0, m0: float = 1.0) -> float:
    """ Largest L2_lambda distance from the Maxwellian along a run started at it. """
    solver = LandauSolver(config)
    m = maxwellian(solver.grid, sigma2, m0)
    trajectory = solver.run(m)
    return max(weighted_sobolev_norm(state - m, 0, 'lambda') for state in trajectory.states)
