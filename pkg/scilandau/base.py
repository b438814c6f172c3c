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
Shared plumbing for the time-dependent solvers: grid and cutoff, the Landau multiplier, the
diffusion CFL estimate, recording into a Trajectory and the blow-up guard.
"""

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
import pandas as pd
from sciutil import SciUtil

from scilandau.errors import *
from scilandau.grid_fields import (MomentsRecord, ScalarField, SymTensorField, VectorField, VelocityGrid,
                                   build_landau_multiplier, coefficient_fields, field_spectra, gradient_values,
                                   max_eigenvalue, moments)
from scilandau.kernels import CutoffSpec

MOMENT_COLUMNS = ['t', 'mass', 'p1', 'p2', 'p3', 'energy', 'entropy', 'l2_lambda_norm']


@dataclass
class Trajectory:
    """ Recorded states with their moments; times are strictly increasing. """
    times: List[float] = field(default_factory=list)
    states: List[ScalarField] = field(default_factory=list)
    moments: List[MomentsRecord] = field(default_factory=list)
    manifest: dict = field(default_factory=dict)

    def append(self, t: float, state: ScalarField):
        if self.times and t <= self.times[-1]:
            raise SciLandauException(f'Recorded times must increase: {t} after {self.times[-1]}')
        self.times.append(float(t))
        self.states.append(state)
        self.moments.append(moments(state))

    def __len__(self):
        return len(self.times)

    @property
    def final(self) -> ScalarField:
        return self.states[-1]

    def state_at(self, index: int) -> ScalarField:
        return self.states[index]

    def moments_frame(self) -> pd.DataFrame:
        rows = [dict(t=t, **record.as_row()) for t, record in zip(self.times, self.moments)]
        return pd.DataFrame(rows, columns=MOMENT_COLUMNS)


class KineticSolver:

    def __init__(self, grid: VelocityGrid, spec: CutoffSpec, growth_limit: float = 1e3):
        self.grid = grid
        self.spec = spec
        self.growth_limit = growth_limit
        self.u = SciUtil()
        self._reference = 0.0

    @property
    def landau_multiplier(self):
        return build_landau_multiplier(self.grid, self.spec)

    def check_grid(self, field: ScalarField):
        if field.grid != self.grid:
            raise ConfigError(GRID_MISMATCH_ERR.format(field.grid, self.grid))

    def landau_coefficients(self, field: ScalarField):
        """ K[u] = a * u and P[u]_i = sum_j a_ij * d_j u, with d_j the working-grid spectral derivative. """
        self.check_grid(field)
        spectra = field_spectra(field.values, gradient_values(field.values, self.grid), self.grid)
        tensor, vector = coefficient_fields(self.landau_multiplier.data, spectra[0], spectra[1:], self.grid)
        return SymTensorField(self.grid, tensor), VectorField(self.grid, vector)

    def diffusion_limit(self, tensor: np.ndarray, cfl_factor: float):
        """ (cfl_factor dv^2 / k_max, k_max) for stored tensor components; the limit is infinite for k_max <= 0. """
        k_max = max_eigenvalue(tensor)
        if k_max <= 0:
            return np.inf, k_max
        return cfl_factor * self.grid.dv ** 2 / k_max, k_max

    def start(self, u0: ScalarField) -> Trajectory:
        self.check_grid(u0)
        trajectory = Trajectory()
        trajectory.append(0.0, u0)
        self._reference = u0.sup_norm()
        return trajectory

    def guard(self, values: np.ndarray, t: float, trajectory: Trajectory):
        """ Abort on non-finite states or growth past growth_limit times the initial sup norm. """
        if not np.all(np.isfinite(values)):
            message = NON_FINITE_STATE_ERR.format(t)
            snapshot = trajectory.final
        else:
            sup = float(np.max(np.abs(values)))
            if sup <= self.growth_limit * self._reference:
                return
            message = GROWTH_ERR.format(sup, self.growth_limit, t)
            snapshot = ScalarField(self.grid, values)
        self.u.err_p([type(self).__name__, message])
        raise SolverAbort(message, trajectory=trajectory, snapshot=snapshot)
