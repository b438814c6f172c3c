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

import unittest

import numpy as np
from scipy.integrate import quad

from scilandau.base import Trajectory
from scilandau.diagnostics import *
from scilandau.errors import *
from scilandau.grid_fields import ScalarField, build_grid, maxwellian, sample, weighted_sobolev_norm
from scilandau.kernels import CutoffSpec
from scilandau.landau_solver import LandauConfig, run_landau
from scilandau.memory_solver import MemoryConfig, stationarity_residual


def perturbed(grid, delta=0.05):
    v0 = sample(grid, lambda v: np.exp(-np.sum((v - np.array([1.0, 0.0, 0.0])) ** 2, axis=-1) / 2.25))
    return maxwellian(grid) + delta * v0


def constant_trajectory(grid, times, value=2.0):
    state = ScalarField(grid, np.full(grid.shape, value))
    return Trajectory(times=list(times), states=[state] * len(times))


class TestProfiles(unittest.TestCase):

    def test_b_profile(self):
        assert b_profile(0.0, 1.0) == 0.0
        self.assertAlmostEqual(b_profile(1e-6, 1.0) / 5e-13, 1.0, places=6)
        t, r = 2.0, 1.5
        self.assertAlmostEqual(b_profile(t, r), np.exp(-t * r) / r ** 2 + t / r - 1 / r ** 2, places=14)
        # Both branches agree across the series threshold.
        below, above = b_profile(0.99e-4, 1.0), b_profile(1.01e-4, 1.0)
        exact = lambda x: x ** 2 / 2 - x ** 3 / 6 + x ** 4 / 24
        assert abs(below / exact(0.99e-4) - 1) < 1e-10 and abs(above / exact(1.01e-4) - 1) < 1e-10
        with self.assertRaises(DomainError):
            b_profile(-1.0, 1.0)
        with self.assertRaises(DomainError):
            b_profile(1.0, 0.0)

    def test_b_profile_derivatives(self):
        t, r, h = 0.7, 2.0, 1e-5
        numeric = (b_profile(t + h, r) - b_profile(t - h, r)) / (2 * h)
        self.assertAlmostEqual(numeric, b_profile_dt(t, r), places=8)
        numeric = (b_profile_dt(t + h, r) - b_profile_dt(t - h, r)) / (2 * h)
        self.assertAlmostEqual(numeric, b_profile_dtt(t, r), places=8)
        assert b_profile_dt(0.0, r) == 0.0 and b_profile_dtt(0.0, r) == 1.0

    def test_b_profile_laplace(self):
        z, r = 1.5, 0.8
        numeric = quad(lambda t: np.exp(-z * t) * b_profile(t, r), 0, np.inf)[0]
        self.assertAlmostEqual(b_profile_laplace(z, r).real, numeric, places=10)
        with self.assertRaises(DomainError):
            b_profile_laplace(0.0, r)

    def test_quasi_random(self):
        points = quasi_random(50, 3)
        assert points.shape == (50, 3)
        assert np.all((points >= 0) & (points < 1))
        assert np.array_equal(points, quasi_random(50, 3))
        assert len(np.unique(points[:, 0])) == 50


class TestBoundaryLayer(unittest.TestCase):

    def setUp(self):
        self.grid = build_grid(8, 4.0)
        self.spec = CutoffSpec()
        self.eps = 0.1

    def test_maxwellian(self):
        m = maxwellian(self.grid)
        for t in (0.1 * self.eps, self.eps, 10 * self.eps):
            b, flux = boundary_layer(t, m, self.eps, self.spec)
            assert b.sup_norm() <= 1e-10
            assert np.max(np.abs(flux.values)) <= 1e-10

    def test_initial_time(self):
        b, flux = boundary_layer(0.0, perturbed(self.grid), self.eps, self.spec)
        assert b.sup_norm() == 0.0 and np.all(flux.values == 0)
        with self.assertRaises(DomainError):
            boundary_layer(-1.0, perturbed(self.grid), self.eps, self.spec)

    def test_acceleration(self):
        u0 = perturbed(self.grid, 0.3)
        t0, h = self.eps, 1e-3 * self.eps
        layers = [boundary_layer(t, u0, self.eps, self.spec)[0].values for t in (t0 - h, t0, t0 + h)]
        numeric = (layers[0] - 2 * layers[1] + layers[2]) / h ** 2
        exact = boundary_layer_acceleration(t0, u0, self.eps, self.spec)[0].values
        assert np.max(np.abs(exact)) > 0
        assert np.max(np.abs(numeric - exact)) <= 1e-4 * np.max(np.abs(exact))


class TestLaplace(unittest.TestCase):

    def setUp(self):
        self.grid = build_grid(8, 4.0)

    def test_constant_trace(self):
        trajectory = constant_trajectory(self.grid, np.linspace(0, 20, 1001))
        values = laplace_probe(trajectory, 1.0, nodes=[(0, 0, 0), (3, 4, 5)])
        assert values.shape == (2,)
        assert np.max(np.abs(values - 2.0)) < 1e-4 * 2.0
        bound = laplace_truncation_bound(trajectory, 1.0)
        self.assertAlmostEqual(bound, 2.0 * np.exp(-20), places=15)
        with self.assertRaises(DomainError):
            laplace_probe(trajectory, 0.0)

    def test_stationary_landau_run(self):
        grid = build_grid(16, 5.0)
        m = maxwellian(grid)
        trajectory = run_landau(LandauConfig(n=16, L=5.0, t_end=1.0, dt=0.005), m)
        nodes = [(8, 8, 8), (6, 9, 8), (3, 8, 12)]
        expected = m.values[tuple(np.asarray(nodes).T)]
        for z in (8.0, 8 + 3j):
            values = laplace_probe(trajectory, z, nodes=nodes)
            allowed = laplace_truncation_bound(trajectory, z) + 1e-3 * np.max(expected) / abs(z)
            assert np.max(np.abs(values - expected / z)) <= allowed

    def test_complex_transform(self):
        times = np.linspace(0, 30, 30001)
        z = 1 + 2j
        numeric = laplace_transform_trace(times, np.exp(-times), z)
        assert abs(numeric - 1 / (z + 1)) < 1e-6

    def test_plancherel(self):
        times = np.linspace(0, 20, 10001)
        trace = times * np.exp(-times)
        time_side, laplace_side = plancherel_check(times, trace, 1.0, 60.0, n_omega=2401)
        self.assertAlmostEqual(time_side, 4 * np.pi / 27, places=6)
        assert abs(laplace_side - time_side) <= 0.02 * time_side

    def test_v_norm(self):
        times = np.linspace(0, 10, 2001)
        trajectory = constant_trajectory(self.grid, times)
        value = time_averaged_V_norm(trajectory, 1.0)
        expected = weighted_sobolev_norm(trajectory.states[0]) * np.sqrt(1 - np.exp(-10))
        assert abs(value - expected) <= 1e-4 * expected
        with self.assertRaises(ConfigError):
            time_averaged_V_norm(trajectory, 0.5)


class TestKernelIntegral(unittest.TestCase):

    def test_time_integral(self):
        grid = build_grid(8, 4.0)
        rows = kernel_time_integral_rows(grid, CutoffSpec())
        assert len(rows) == 10
        assert rows['rel_error'].max() <= 1e-8
        assert rows['halving_change'].max() < 1e-10
        assert kernel_time_integral_check(grid, CutoffSpec(), samples=4) <= 1e-8
        with self.assertRaises(ConfigError):
            kernel_time_integral_rows(grid, CutoffSpec(), T_factor=10)


class TestConvergence(unittest.TestCase):

    def setUp(self):
        self.grid = build_grid(8, 4.0)
        self.config = MemoryConfig(n=8, L=4.0, t_end=0.05, tail_tol=1e-6)

    def test_small_study(self):
        report = convergence_study([0.2, 0.1], self.config, perturbed(self.grid), n_records=2)
        assert report.record_times == [0.025, 0.05]
        assert len(report.errors) == 2 and all(np.isfinite(report.errors))
        assert len(report.ratios) == 1
        frame = report.to_frame()
        assert list(frame.columns) == ['eps', 'error', 'fitted_order']
        assert report.l_doubling_ok is None

    def test_maxwellian_study_matches_stationarity(self):
        grid = build_grid(16, 5.0)
        config = MemoryConfig(n=16, L=5.0, t_end=0.1, dt=0.005, record_stride=4, tail_tol=1e-6)
        eps_list = [0.1, 0.05]
        report = convergence_study(eps_list, config, maxwellian(grid), n_records=5)
        residuals = [stationarity_residual(eps, config) for eps in eps_list]
        assert all(r > 0 for r in residuals)
        assert np.allclose(report.errors, residuals, rtol=1e-2, atol=0)

    def test_rejects_unsorted(self):
        with self.assertRaises(ConfigError):
            convergence_study([0.1, 0.2], self.config, perturbed(self.grid))
        with self.assertRaises(ConfigError):
            convergence_study([0.2, 0.1], self.config, perturbed(self.grid), l_doubling=True)
