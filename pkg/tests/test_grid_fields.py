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

import os
import shutil
import tempfile
import unittest

import numpy as np
from scipy import fft

from scilandau.errors import *
from scilandau.grid_fields import *
from scilandau.kernels import CutoffSpec, SymMat3, landau_kernel, memory_kernel, memory_kernel_dtau

AXES = (-3, -2, -1)


def bump(grid, center=(0.5, -0.25, 0.0)):
    return sample(grid, lambda v: np.exp(-np.sum((v - np.asarray(center)) ** 2, axis=-1)) * (1 + 0.3 * v[..., 0]))


class TestGridFields(unittest.TestCase):

    def setUp(self):
        self.tmp_dir = tempfile.mkdtemp(prefix='scilandau_tmp_')
        self.spec = CutoffSpec()

    def tearDown(self):
        shutil.rmtree(self.tmp_dir)

    def test_grid(self):
        grid = build_grid(8, 4.0)
        assert grid.dv == 1.0
        assert grid.axis[0] == -4.0 and grid.axis[-1] == 3.0
        assert grid.velocities.shape == (8, 8, 8, 3)
        assert grid.lattice.shape == (16, 16, 16, 3)
        assert grid.lattice[15, 0, 0, 0] == -1.0 and grid.lattice[8, 0, 0, 0] == -8.0
        assert grid.node((4, 4, 4)) == (0.0, 0.0, 0.0)
        for n, L in ((7, 1.0), (6, 1.0), (8, 0.0)):
            with self.assertRaises(ConfigError):
                build_grid(n, L)

    def test_fields_are_checked(self):
        grid = build_grid(8, 4.0)
        values = np.ones(grid.shape)
        values[1, 2, 3] = np.nan
        with self.assertRaises(FieldError) as e:
            ScalarField(grid, values)
        assert '(1, 2, 3)' in str(e.exception)
        with self.assertRaises(FieldError):
            ScalarField(grid, np.ones((8, 8)))
        field = zero_field(grid)
        with self.assertRaises(ValueError):
            field.values[0, 0, 0] = 1.0
        with self.assertRaises(FieldError):
            field + zero_field(build_grid(10, 4.0))
        assert ((2 * field + 1) - 1).sup_norm() == 0.0

    def test_maxwellian_moments(self):
        grid = build_grid(32, 8.0)
        m = maxwellian(grid)
        assert m.maxwellian == (1.0, 1.0)
        record = moments(m)
        assert abs(record.mass - 1) < 1e-10
        assert max(abs(p) for p in record.momentum) < 1e-8
        assert abs(record.energy - 3) < 1e-8
        # Shifting by one node moves the momentum by dv times the mass.
        shifted = sample(grid, lambda v: np.exp(-np.sum((v - [grid.dv, 0, 0]) ** 2, axis=-1) / 2) / (2 * np.pi) ** 1.5)
        record = moments(shifted)
        assert abs(record.mass - 1) < 1e-10
        assert abs(record.momentum[0] - grid.dv) < 1e-8
        with self.assertRaises(ConfigError):
            maxwellian(grid, sigma2=0.0)

    def test_spectral_gradient(self):
        grid = build_grid(16, 4.0)
        k = np.pi / grid.L
        field = sample(grid, lambda v: np.sin(k * v[..., 0]))
        gradient = spectral_gradient(field)
        assert np.max(np.abs(gradient.values[0] - k * np.cos(k * grid.velocities[..., 0]))) < 1e-12
        assert np.max(np.abs(gradient.values[1:])) < 1e-12
        assert np.max(np.abs(spectral_divergence(gradient).values + k ** 2 * field.values)) < 1e-11
        second = spectral_derivative(field, (2, 0, 0))
        assert np.max(np.abs(second + k ** 2 * field.values)) < 1e-11

    def test_maxwellian_gradient(self):
        grid = build_grid(32, 8.0)
        m = maxwellian(grid)
        exact = maxwellian_gradient(m)
        assert np.allclose(exact, -np.moveaxis(grid.velocities, -1, 0) * m.values)
        assert np.max(np.abs(spectral_gradient(m).values - exact)) < 1e-8

    def test_convolve_direct_sum(self):
        grid = build_grid(8, 4.0)
        mult = build_landau_multiplier(grid, self.spec)
        assert mult.hermitian_defect < 1e-12
        field = bump(grid)
        points = grid.velocities.reshape(-1, 3)
        values = field.values.reshape(-1)
        kernel = landau_kernel(points[:, None, :] - points[None, :, :], self.spec)
        for i, j in ((0, 0), (1, 2), (2, 2)):
            direct = kernel.component(i, j) @ values * grid.cell_volume
            spectral = convolve(mult, field, i, j).values.reshape(-1)
            assert np.max(np.abs(spectral - direct)) < 1e-10 * np.max(np.abs(direct))

    def test_convolve_delta(self):
        grid = build_grid(8, 4.0)
        mult = build_landau_multiplier(grid, self.spec)
        delta = np.zeros(grid.shape)
        delta[4, 4, 4] = 1 / grid.cell_volume
        kernel = landau_kernel(grid.velocities, self.spec)
        for i, j in ((0, 0), (0, 1), (1, 1)):
            result = convolve(mult, ScalarField(grid, delta), i, j).values
            assert np.max(np.abs(result - kernel.component(i, j))) < 1e-12
        # Zero frequency carries the lattice sum without the -2L planes.
        inner = np.arange(grid.n_pad) != grid.n
        sampled = landau_kernel(grid.lattice, self.spec).data[:, inner][:, :, inner][:, :, :, inner]
        lattice_sum = sampled.sum(axis=(1, 2, 3)) * grid.cell_volume
        assert np.allclose(mult.data[:, 0, 0, 0], lattice_sum, rtol=1e-12)

    def test_multiplier_cache(self):
        grid = build_grid(8, 4.0)
        assert build_landau_multiplier(grid, self.spec) is build_landau_multiplier(grid, self.spec)
        with self.assertRaises(ValueError):
            build_landau_multiplier(grid, self.spec).data[0, 0, 0, 0] = 1.0

    def test_coefficient_fields(self):
        grid = build_grid(8, 4.0)
        field = bump(grid)
        mult = build_landau_multiplier(grid, self.spec)
        gradient = gradient_values(field.values, grid)
        spectra = field_spectra(field.values, gradient, grid)
        assert spectra.shape == (4, 16, 16, 9)
        tensor, vector = coefficient_fields(mult.data, spectra[0], spectra[1:], grid)
        assert np.allclose(tensor[1], convolve(mult, field, 1, 1).values, rtol=1e-12, atol=1e-12)
        for i in range(3):
            expected = sum(convolve(mult, ScalarField(grid, gradient[j]), i, j).values for j in range(3))
            assert np.allclose(vector[i], expected, rtol=1e-12, atol=1e-12)
        assert max_eigenvalue(tensor) > 0
        assert tensor_dot(tensor, np.ones((3,) + grid.shape)).shape == (3,) + grid.shape

    def test_hermitian_defect(self):
        for n, L in ((8, 4.0), (16, 4.0), (32, 8.0)):
            grid = build_grid(n, L)
            assert build_landau_multiplier(grid, self.spec).hermitian_defect < 1e-12
            lag = build_multiplier(grid, lambda w: memory_kernel(0.5, w, self.spec))
            assert lag.hermitian_defect < 1e-12

    def test_padded_divergence_identity(self):
        grid = build_grid(16, 4.0)
        field = bump(grid)
        mult = build_landau_multiplier(grid, self.spec)
        spectrum = pad_spectrum(field.values, grid)
        padded_gradient = np.stack([1j * k * spectrum for k in grid.padded_wavenumbers])
        tensor, vector = coefficient_fields(mult.data, spectrum, padded_gradient, grid)
        # Divergence of the uncropped tensor on the padded grid, cropped afterwards.
        uncropped = fft.irfftn(mult.data * spectrum, s=grid.padded_shape, axes=AXES)
        stored = SymMat3(fft.rfftn(uncropped, axes=AXES))
        divergence = np.stack([sum(1j * k * stored.component(i, j) for j, k in enumerate(grid.padded_wavenumbers))
                               for i in range(3)])
        divergence = crop_inverse(divergence, grid)
        assert np.allclose(tensor, uncropped[:, :16, :16, :16], rtol=0, atol=1e-14 * np.max(np.abs(tensor)))
        assert np.max(np.abs(vector - divergence)) < 1e-12 * np.max(np.abs(vector))

    def test_working_grid_vector_matches_padded_form(self):
        grid = build_grid(32, 8.0)
        m = maxwellian(grid)
        mult = build_landau_multiplier(grid, self.spec)
        spectra = field_spectra(m.values, gradient_values(m.values, grid), grid)
        _, working = coefficient_fields(mult.data, spectra[0], spectra[1:], grid)
        padded_gradient = np.stack([1j * k * spectra[0] for k in grid.padded_wavenumbers])
        _, padded = coefficient_fields(mult.data, spectra[0], padded_gradient, grid)
        assert np.max(np.abs(working - padded)) < 1e-7 * np.max(np.abs(padded))

    def test_flux_sums(self):
        # The paired bracket conserves mass and momentum of the flux to round-off.
        grid = build_grid(16, 6.0)
        field = bump(grid) + maxwellian(grid)
        mult = build_landau_multiplier(grid, self.spec)
        gradient = gradient_values(field.values, grid)
        spectra = field_spectra(field.values, gradient, grid)
        tensor, vector = coefficient_fields(mult.data, spectra[0], spectra[1:], grid)
        flux = tensor_dot(tensor, gradient) - vector * field.values
        scale = np.sum(np.abs(tensor_dot(tensor, gradient)))
        v = np.moveaxis(grid.velocities, -1, 0)
        assert np.max(np.abs(flux.sum(axis=AXES))) < 1e-13 * scale
        assert abs(np.sum(v * flux)) < 1e-13 * scale * grid.L

    def test_memory_table(self):
        grid = build_grid(8, 4.0)
        table = build_memory_table(grid, self.spec, eps=0.1, dt=0.025, tail_tol=1e-6)
        self.assertAlmostEqual(table.dtau, 0.25, places=15)
        assert table.lag_count == table.window
        assert memory_tail_bound(table.window * table.dtau, self.spec) <= 1e-6
        assert memory_tail_bound((table.window - 1) * table.dtau, self.spec) > 1e-6
        assert table.tail_bound <= table.tail_tol
        lag0 = build_multiplier(grid, lambda w: memory_kernel(0.0, w, self.spec))
        assert np.array_equal(table.multipliers[0].data, lag0.data)
        short = build_memory_table(grid, self.spec, eps=0.1, dt=0.025, tail_tol=1e-6, lags=3)
        assert short.lag_count == 3 and short.window == table.window
        assert np.array_equal(short.multipliers[3].data, table.multipliers[3].data)

    def test_end_correction(self):
        grid = build_grid(8, 2.0)
        table = build_memory_table(grid, self.spec, eps=0.1, dt=0.025, tail_tol=1e-10)
        expected = build_multiplier(grid, lambda w: memory_kernel_dtau(0.0, w, self.spec) * (table.dtau / 12))
        assert np.array_equal(table.end_correction.data, expected.data)
        # Summed over all lags the corrected rule is much closer to the Landau multiplier.
        landau = build_landau_multiplier(grid, self.spec).data
        plain = table.dtau * (sum(m.data for m in table.multipliers) - 0.5 * table.multipliers[0].data)
        corrected = plain + table.dtau * table.end_correction.data
        assert np.max(np.abs(corrected - landau)) < 0.25 * np.max(np.abs(plain - landau))

    def test_last_lag_multiplier(self):
        grid = build_grid(8, 4.0)
        for tol in (1e-4, 1e-6):
            table = build_memory_table(grid, self.spec, eps=0.1, dt=0.025, tail_tol=tol)
            assert np.max(np.abs(table.multipliers[table.window].data)) <= 10 * tol
            assert np.max(np.abs(table.multipliers[0].data)) > 10 * tol

    def test_memory_table_rejections(self):
        grid = build_grid(8, 4.0)
        with self.assertRaises(ConfigError):
            build_memory_table(grid, self.spec, eps=0.1, dt=0.03, tail_tol=1e-6)
        with self.assertRaises(ConfigError):
            build_memory_table(grid, self.spec, eps=0.1, dt=0.025, tail_tol=1e-10, max_window=10)
        with self.assertRaises(ConfigError):
            build_memory_table(grid, self.spec, eps=0.1, dt=0.025, tail_tol=0.0)

    def test_certified_window(self):
        spec = self.spec
        for tol in (1e-4, 1e-10):
            window = certified_window(0.25, spec, tol)
            assert memory_tail_bound(window * 0.25, spec) <= tol < memory_tail_bound((window - 1) * 0.25, spec)
        assert certified_window(0.25, spec, 1e3) == 0

    def test_weighted_norm(self):
        grid = build_grid(16, 4.0)
        field = bump(grid)
        plain = weighted_sobolev_norm(field, 0, 'lambda')
        expected = np.sqrt(np.sum(np.exp(grid.speed) * field.values ** 2) * grid.cell_volume)
        self.assertAlmostEqual(plain, expected, places=12)
        assert weighted_sobolev_norm(field, 0, 'lambda_tilde') < plain
        orders = [weighted_sobolev_norm(field, order) for order in range(4)]
        assert all(a < b for a, b in zip(orders[:-1], orders[1:]))
        with self.assertRaises(ConfigError):
            weighted_sobolev_norm(field, 5)
        with self.assertRaises(ConfigError):
            weighted_sobolev_norm(field, 1, 'gaussian')

    def test_vkf_round_trip(self):
        grid = build_grid(8, 4.0)
        field = bump(grid)
        path = write_field(os.path.join(self.tmp_dir, 'snapshot_0000.vkf'), field)
        with open(path, 'rb') as fh:
            data = fh.read()
        assert data[:4] == b'VKF1'
        assert len(data) == 4 + 12 + 8 * 512 + 8
        loaded = read_field(path)
        assert loaded.grid == grid
        assert np.array_equal(loaded.values, field.values)
        bad = os.path.join(self.tmp_dir, 'bad.vkf')
        with open(bad, 'wb') as fh:
            fh.write(b'VKF0' + data[4:])
        with self.assertRaises(FieldError):
            read_field(bad)
        with open(bad, 'wb') as fh:
            fh.write(data[:-16])
        with self.assertRaises(FieldError):
            read_field(bad)
