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

__title__ = 'scilandau'
__description__ = 'Velocity-space kinetic simulator for a memory-kernel equation and its Landau limit.'
__url__ = 'https://github.com/ArianeMora/scilandau.git'
__version__ = '1.0.0'
__author__ = 'Ariane Mora'
__author_email__ = 'ariane.n.mora@gmail.com'
__license__ = 'GPL3'

from scilandau.kernels import (CutoffSpec, SymMat3, potential, potential_ft, cutoff, memory_kernel, landau_kernel,
                               laplace_kernel, memory_kernel_dtau)
from scilandau.grid_fields import (VelocityGrid, ScalarField, VectorField, SymTensorField, SpectralMultiplier,
                                   MemoryMultiplierTable, build_grid, sample, maxwellian, spectral_gradient,
                                   spectral_divergence, spectral_derivative, build_multiplier, convolve,
                                   build_memory_table, field_spectra, weighted_sobolev_norm, moments, read_field,
                                   write_field)
from scilandau.base import Trajectory
from scilandau.landau_solver import LandauConfig, LandauSolver, landau_coefficients, landau_rhs, run_landau
from scilandau.memory_solver import (MemoryConfig, MemorySolver, memory_flux, memory_step, planned_lag_evaluations,
                                     run_memory)
from scilandau.diagnostics import (boundary_layer, laplace_probe, time_averaged_V_norm, convergence_study,
                                   kernel_time_integral_check)
from scilandau.harness import SimulationConfig, parse_config, run
from scilandau.__main__ import gen_parser
