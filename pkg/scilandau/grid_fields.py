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
Velocity grid, field containers and the spectral engine.

The grid is [-L, L)^3 with n points per axis. Convolutions are linear (not circular): fields
are zero-padded to 2n points per axis and kernels are sampled on the periodic difference
lattice of the padded grid, so the cropped result is the truncated-domain integral.
Derivatives are periodic spectral derivatives on the unpadded grid with the Nyquist mode
removed.
"""

import itertools
from dataclasses import dataclass, field as dc_field
from functools import cached_property, lru_cache
from typing import Callable, List, Optional, Tuple

import numpy as np
from scipy import fft
from scipy.optimize import bisect

from scilandau.errors import *
from scilandau.kernels import (LANDAU_CONSTANT, COMPONENTS, CutoffSpec, SymMat3, landau_kernel,
                               memory_kernel, memory_kernel_dtau)

MAX_NORM_ORDER = 4
ENTROPY_FLOOR = 1e-300
VKF_MAGIC = b'VKF1'
_AXES = (-3, -2, -1)


def _wavenumbers(count: int, dv: float, real: bool = False) -> np.ndarray:
    if real:
        k = 2 * np.pi * fft.rfftfreq(count, dv)
        k[-1] = 0.0
    else:
        k = 2 * np.pi * fft.fftfreq(count, dv)
        k[count // 2] = 0.0
    return k


@dataclass(frozen=True)
class VelocityGrid:
    n: int
    L: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 8 or self.n % 2:
            raise ConfigError(GRID_PARITY_ERR.format(self.n))
        if not self.L > 0:
            raise ConfigError(GRID_WIDTH_ERR.format(self.L))

    @property
    def dv(self) -> float:
        return 2 * self.L / self.n

    @property
    def n_pad(self) -> int:
        return 2 * self.n

    @property
    def cell_volume(self) -> float:
        return self.dv ** 3

    @property
    def shape(self) -> Tuple[int, int, int]:
        return (self.n,) * 3

    @property
    def padded_shape(self) -> Tuple[int, int, int]:
        return (self.n_pad,) * 3

    @cached_property
    def axis(self) -> np.ndarray:
        return -self.L + np.arange(self.n) * self.dv

    @cached_property
    def velocities(self) -> np.ndarray:
        """ Node velocities, shape (n, n, n, 3). """
        return np.stack(np.meshgrid(self.axis, self.axis, self.axis, indexing='ij'), axis=-1)

    @cached_property
    def speed(self) -> np.ndarray:
        return np.linalg.norm(self.velocities, axis=-1)

    @cached_property
    def wavenumbers(self):
        """ Broadcastable (kx, ky, kz) for the unpadded real-to-complex layout. """
        k = _wavenumbers(self.n, self.dv)
        kz = _wavenumbers(self.n, self.dv, real=True)
        return k[:, None, None], k[None, :, None], kz[None, None, :]

    @cached_property
    def padded_wavenumbers(self):
        k = _wavenumbers(self.n_pad, self.dv)
        kz = _wavenumbers(self.n_pad, self.dv, real=True)
        return k[:, None, None], k[None, :, None], kz[None, None, :]

    @cached_property
    def lattice(self) -> np.ndarray:
        """ Difference vectors v_i - v_j on the padded periodic lattice, shape (2n, 2n, 2n, 3). """
        j = np.arange(self.n_pad)
        offsets = self.dv * np.where(j < self.n, j, j - self.n_pad)
        return np.stack(np.meshgrid(offsets, offsets, offsets, indexing='ij'), axis=-1)

    def node(self, index) -> Tuple[float, float, float]:
        return tuple(float(self.axis[i]) for i in index)


def _check_grid(a: VelocityGrid, b: VelocityGrid):
    if a != b:
        raise FieldError(GRID_MISMATCH_ERR.format(a, b))


def _check_finite(grid: VelocityGrid, values: np.ndarray):
    bad = ~np.isfinite(values)
    if bad.any():
        index = tuple(int(i) for i in np.argwhere(bad)[0])
        node = grid.node(index[-3:])
        raise FieldError(NON_FINITE_ERR.format(values[index], index, node))


def _frozen(grid, values, shape):
    values = np.array(values, dtype=float)
    if values.shape != shape:
        raise FieldError(FIELD_SHAPE_ERR.format(shape, values.shape))
    _check_finite(grid, values)
    values.setflags(write=False)
    return values


@dataclass(frozen=True, eq=False)
class ScalarField:
    """
    Immutable real samples on a grid. ``maxwellian`` tags fields built from the closed form
    m(sigma2, m0) so consumers can use the exact gradient.
    """
    grid: VelocityGrid
    values: np.ndarray
    maxwellian: Optional[Tuple[float, float]] = None

    def __post_init__(self):
        object.__setattr__(self, 'values', _frozen(self.grid, self.values, self.grid.shape))

    def _combine(self, other, op):
        if isinstance(other, ScalarField):
            _check_grid(self.grid, other.grid)
            other = other.values
        return ScalarField(self.grid, op(self.values, other))

    def __add__(self, other):
        return self._combine(other, np.add)

    __radd__ = __add__

    def __sub__(self, other):
        return self._combine(other, np.subtract)

    def __rsub__(self, other):
        return self._combine(other, lambda a, b: b - a)

    def __mul__(self, other):
        return self._combine(other, np.multiply)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self._combine(other, np.true_divide)

    def __neg__(self):
        return ScalarField(self.grid, -self.values)

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))


@dataclass(frozen=True, eq=False)
class VectorField:
    grid: VelocityGrid
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, 'values', _frozen(self.grid, self.values, (3,) + self.grid.shape))

    def component(self, j: int) -> ScalarField:
        return ScalarField(self.grid, self.values[j])


@dataclass(frozen=True, eq=False)
class SymTensorField:
    grid: VelocityGrid
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, 'values', _frozen(self.grid, self.values, (6,) + self.grid.shape))

    def as_symmat(self) -> SymMat3:
        return SymMat3(self.values)

    def component(self, i: int, j: int) -> ScalarField:
        return ScalarField(self.grid, self.as_symmat().component(i, j))

    def max_eigenvalue(self) -> float:
        """ Largest eigenvalue over all nodes. """
        return max_eigenvalue(self.values)


@dataclass(frozen=True, eq=False)
class SpectralMultiplier:
    """
    Real half-spectrum (rfftn layout on the padded grid) of an even symmetric-tensor kernel,
    already scaled by dv^3. The lattice planes at index n on each axis (offsets of exactly -2L,
    never reached by a cropped convolution) are zeroed before the transform; what remains is
    even under w -> -w, so the transform is real up to round-off. ``hermitian_defect`` is the
    discarded imaginary part relative to the largest entry.
    """
    grid: VelocityGrid
    data: np.ndarray
    hermitian_defect: float = 0.0

    def component(self, i: int, j: int) -> np.ndarray:
        return SymMat3(self.data).component(i, j)


@dataclass
class MemoryMultiplierTable:
    grid: VelocityGrid
    spec: CutoffSpec
    eps: float
    dt: float
    window: int
    tail_bound: float
    tail_tol: float
    multipliers: List[SpectralMultiplier] = dc_field(default_factory=list)
    end_correction: Optional[SpectralMultiplier] = None  # dtau/12 dG/dtau(0), added to lag 0

    @property
    def dtau(self) -> float:
        return self.dt / self.eps

    @property
    def lags(self) -> np.ndarray:
        return self.dtau * np.arange(len(self.multipliers))

    @property
    def lag_count(self) -> int:
        """ Largest lag index with a stored multiplier. """
        return len(self.multipliers) - 1


@dataclass(frozen=True)
class MomentsRecord:
    mass: float
    momentum: Tuple[float, float, float]
    energy: float
    entropy: float
    l2_lambda: float

    def as_row(self) -> dict:
        return {'mass': self.mass, 'p1': self.momentum[0], 'p2': self.momentum[1],
                'p3': self.momentum[2], 'energy': self.energy, 'entropy': self.entropy,
                'l2_lambda_norm': self.l2_lambda}


def build_grid(n: int, L: float) -> VelocityGrid:
    return VelocityGrid(int(n), float(L))


def sample(grid: VelocityGrid, f: Callable[[np.ndarray], np.ndarray]) -> ScalarField:
    """ Sample f at every node; f receives the (n, n, n, 3) velocity array. """
    values = np.broadcast_to(np.asarray(f(grid.velocities), dtype=float), grid.shape)
    return ScalarField(grid, values)


def zero_field(grid: VelocityGrid) -> ScalarField:
    return ScalarField(grid, np.zeros(grid.shape))


def maxwellian(grid: VelocityGrid, sigma2: float = 1.0, m0: float = 1.0) -> ScalarField:
    """ Gaussian equilibrium with mass m0 and variance sigma2 per axis. """
    if sigma2 <= 0:
        raise ConfigError(POSITIVE_ERR.format('sigma2', sigma2))
    values = m0 * np.exp(-grid.speed ** 2 / (2 * sigma2)) / (2 * np.pi * sigma2) ** 1.5
    return ScalarField(grid, values, maxwellian=(float(sigma2), float(m0)))


def maxwellian_gradient(field: ScalarField) -> np.ndarray:
    """ Exact gradient -v m / sigma2 of a tagged Maxwellian, shape (3, n, n, n). """
    sigma2, _ = field.maxwellian
    return -np.moveaxis(field.grid.velocities, -1, 0) * field.values / sigma2


def gradient_values(values: np.ndarray, grid: VelocityGrid) -> np.ndarray:
    """ Spectral gradient of raw samples, shape (3, n, n, n). """
    spectrum = fft.rfftn(values)
    stacked = np.stack([1j * k * spectrum for k in grid.wavenumbers])
    return fft.irfftn(stacked, s=grid.shape, axes=_AXES)


def divergence_values(values: np.ndarray, grid: VelocityGrid) -> np.ndarray:
    spectra = fft.rfftn(values, axes=_AXES)
    total = sum(1j * k * spectra[j] for j, k in enumerate(grid.wavenumbers))
    return fft.irfftn(total, s=grid.shape)


def spectral_gradient(field: ScalarField) -> VectorField:
    return VectorField(field.grid, gradient_values(field.values, field.grid))


def spectral_divergence(vector: VectorField) -> ScalarField:
    return ScalarField(vector.grid, divergence_values(vector.values, vector.grid))


def spectral_derivative(field: ScalarField, alpha: Tuple[int, int, int], spectrum=None) -> np.ndarray:
    """ D^alpha of the field; ``spectrum`` may carry a precomputed rfftn of the values. """
    if sum(alpha) == 0:
        return np.asarray(field.values)
    grid = field.grid
    spectrum = fft.rfftn(field.values) if spectrum is None else spectrum
    factor = np.ones(1)
    for k, a in zip(grid.wavenumbers, alpha):
        factor = factor * (1j * k) ** a
    return fft.irfftn(factor * spectrum, s=grid.shape)


def pad_spectrum(values: np.ndarray, grid: VelocityGrid) -> np.ndarray:
    """ rfftn of the zero-padded values; leading axes are batched. """
    return fft.rfftn(values, s=grid.padded_shape, axes=_AXES)


def crop_inverse(spectra: np.ndarray, grid: VelocityGrid) -> np.ndarray:
    n = grid.n
    return fft.irfftn(spectra, s=grid.padded_shape, axes=_AXES)[..., :n, :n, :n]


def convolve(mult: SpectralMultiplier, field: ScalarField, i: int = 0, j: int = 0) -> ScalarField:
    """ Linear convolution of the (i, j) kernel component with the field. """
    _check_grid(mult.grid, field.grid)
    spectrum = pad_spectrum(field.values, field.grid)
    return ScalarField(field.grid, crop_inverse(mult.component(i, j) * spectrum, field.grid))


def field_spectra(values: np.ndarray, gradient: np.ndarray, grid: VelocityGrid) -> np.ndarray:
    """ Padded spectra of u and of its working-grid gradient, shape (4, 2n, 2n, n + 1). """
    return pad_spectrum(np.concatenate([values[None], gradient]), grid)


def coefficient_fields(data: np.ndarray, spectrum: np.ndarray, gradient_spectra: np.ndarray,
                       grid: VelocityGrid):
    """
    Tensor kernel*u (six components) and vector (kernel*g)_i = sum_j kernel_ij * g_j, where g is
    the working-grid spectral gradient of u (padded spectra in ``gradient_spectra``).

    Pairing the vector with the same g that multiplies the tensor in the flux makes the discrete
    bracket antisymmetric, so the flux sums to zero and its first velocity moment vanishes for
    the Landau kernel. The identity vector = div(tensor) then holds only on the padded lattice,
    before cropping, with the padded-grid derivative.
    """
    products = np.empty((9,) + spectrum.shape, dtype=complex)
    products[:6] = data * spectrum
    for i in range(3):
        products[6 + i] = sum(SymMat3(data).component(i, j) * gradient_spectra[j] for j in range(3))
    physical = crop_inverse(products, grid)
    return physical[:6], physical[6:]


def tensor_dot(tensor: np.ndarray, vector: np.ndarray) -> np.ndarray:
    """ Node-wise product of stored symmetric components (6, ...) with a vector (3, ...). """
    xx, yy, zz, xy, xz, yz = tensor
    return np.stack([xx * vector[0] + xy * vector[1] + xz * vector[2],
                     xy * vector[0] + yy * vector[1] + yz * vector[2],
                     xz * vector[0] + yz * vector[1] + zz * vector[2]])


def max_eigenvalue(tensor: np.ndarray) -> float:
    """ Largest eigenvalue over all nodes of stored symmetric components (6, ...). """
    matrices = SymMat3(tensor).to_matrix().reshape(-1, 3, 3)
    return float(np.max(np.linalg.eigvalsh(matrices)[:, -1]))


def build_multiplier(grid: VelocityGrid, kernel: Callable[[np.ndarray], SymMat3]) -> SpectralMultiplier:
    """ Sample an even tensor kernel on the difference lattice and transform it. """
    sampled = np.array(kernel(grid.lattice).data, dtype=float)
    n = grid.n
    sampled[:, n] = 0.0
    sampled[:, :, n] = 0.0
    sampled[:, :, :, n] = 0.0
    spectrum = fft.rfftn(sampled, axes=_AXES)
    scale = float(np.max(np.abs(spectrum.real))) or 1.0
    defect = float(np.max(np.abs(spectrum.imag))) / scale
    return SpectralMultiplier(grid, spectrum.real * grid.cell_volume, defect)


@lru_cache(maxsize=8)
def build_landau_multiplier(grid: VelocityGrid, spec: CutoffSpec) -> SpectralMultiplier:
    """ Cached per (grid, cutoff); the returned arrays are read-only. """
    multiplier = build_multiplier(grid, lambda w: landau_kernel(w, spec))
    multiplier.data.setflags(write=False)
    return multiplier


def memory_tail_bound(tau: float, spec: CutoffSpec) -> float:
    """ Bound on the memory kernel mass beyond lag tau, uniform over the cutoff support. """
    w_min = spec.w_min
    return LANDAU_CONSTANT * (1 + tau * w_min) * np.exp(-tau * w_min) / w_min


def certified_window(dtau: float, spec: CutoffSpec, tail_tol: float) -> int:
    """ Smallest W with memory_tail_bound(W * dtau) <= tail_tol. """
    if memory_tail_bound(0.0, spec) <= tail_tol:
        return 0
    excess = lambda tau: np.log(memory_tail_bound(tau, spec)) - np.log(tail_tol)
    upper = 1.0
    while excess(upper) > 0:
        upper *= 2
    tau = bisect(excess, 0.0, upper, xtol=1e-12)
    window = max(int(np.ceil(tau / dtau)), 1)
    # Bisection only brackets the root; settle on the minimal integer.
    while window > 1 and memory_tail_bound((window - 1) * dtau, spec) <= tail_tol:
        window -= 1
    while memory_tail_bound(window * dtau, spec) > tail_tol:
        window += 1
    return window


def build_memory_table(grid: VelocityGrid, spec: CutoffSpec, eps: float, dt: float, tail_tol: float,
                       max_window: int = 4096, lags: Optional[int] = None) -> MemoryMultiplierTable:
    """
    Multipliers of the memory kernel at lags tau_k = k dt / eps. The certified window W is always
    computed; multipliers are built for k = 0..lags (default W), since a run never reads past its
    own number of steps. ``end_correction`` is the Euler-Maclaurin endpoint term at lag 0; without
    it the trapezoid over an infinite lag range overshoots the longitudinal kernel mass by
    dtau^2 |w| / 6, a defect that does not shrink with eps.
    """
    for name, value in (('eps', eps), ('dt', dt), ('tail_tol', tail_tol)):
        if not value > 0:
            raise ConfigError(POSITIVE_ERR.format(name, value))
    if dt > eps / 4 * (1 + 1e-12):
        raise ConfigError(KERNEL_RESOLUTION_ERR.format(dt, eps / 4))
    dtau = dt / eps
    window = certified_window(dtau, spec, tail_tol)
    if window > max_window:
        raise ConfigError(WINDOW_CAP_ERR.format(window, max_window))
    count = window if lags is None else int(lags)
    multipliers = [build_multiplier(grid, lambda w, tau=k * dtau: memory_kernel(tau, w, spec))
                   for k in range(count + 1)]
    correction = build_multiplier(grid, lambda w: memory_kernel_dtau(0.0, w, spec) * (dtau / 12))
    return MemoryMultiplierTable(grid, spec, eps, dt, window, memory_tail_bound(window * dtau, spec),
                                 tail_tol, multipliers, correction)


WEIGHTS = {
    'lambda': lambda speed: np.exp(speed),
    'lambda_tilde': lambda speed: np.exp(speed) / (1 + speed),
}


def weight_values(grid: VelocityGrid, weight: str) -> np.ndarray:
    if weight not in WEIGHTS:
        raise ConfigError(WEIGHT_ERR.format(weight, ', '.join(WEIGHTS)))
    return WEIGHTS[weight](grid.speed)


def multi_indices(order: int):
    return [alpha for alpha in itertools.product(range(order + 1), repeat=3) if sum(alpha) <= order]


def weighted_sobolev_norm(field: ScalarField, order: int = 0, weight: str = 'lambda') -> float:
    """ sqrt(sum over |alpha| <= order of sum_v nu(v) |D^alpha u|^2 dv^3). """
    if int(order) != order or not 0 <= order <= MAX_NORM_ORDER:
        raise ConfigError(ORDER_ERR.format(MAX_NORM_ORDER, order))
    grid = field.grid
    nu = weight_values(grid, weight)
    spectrum = fft.rfftn(field.values) if order > 0 else None
    total = 0.0
    for alpha in multi_indices(int(order)):
        derivative = spectral_derivative(field, alpha, spectrum)
        total += float(np.sum(nu * derivative ** 2))
    return float(np.sqrt(total * grid.cell_volume))


def moments(field: ScalarField) -> MomentsRecord:
    grid = field.grid
    u = field.values
    dv3 = grid.cell_volume
    v = grid.velocities
    momentum = tuple(float(np.sum(v[..., j] * u) * dv3) for j in range(3))
    entropy = float(np.sum(u * np.log(np.maximum(u, ENTROPY_FLOOR))) * dv3)
    return MomentsRecord(mass=float(np.sum(u) * dv3), momentum=momentum,
                         energy=float(np.sum(grid.speed ** 2 * u) * dv3), entropy=entropy,
                         l2_lambda=weighted_sobolev_norm(field, 0, 'lambda'))


def write_field(path: str, field: ScalarField) -> str:
    """ Dump a field in the VKF1 layout: magic, three <u4 dims, <f8 values (C order), <f8 L. """
    with open(path, 'wb') as fh:
        fh.write(VKF_MAGIC)
        fh.write(np.asarray(field.values.shape, dtype='<u4').tobytes())
        fh.write(np.ascontiguousarray(field.values, dtype='<f8').tobytes())
        fh.write(np.asarray([field.grid.L], dtype='<f8').tobytes())
    return path


def read_field(path: str) -> ScalarField:
    with open(path, 'rb') as fh:
        data = fh.read()
    if data[:4] != VKF_MAGIC:
        raise FieldError(VKF_MAGIC_ERR.format(path))
    if len(data) < 24:
        raise FieldError(VKF_SIZE_ERR.format(path))
    dims = np.frombuffer(data, dtype='<u4', count=3, offset=4).astype(int)
    count = int(np.prod(dims))
    if len(data) != 16 + 8 * count + 8 or len(set(dims)) != 1:
        raise FieldError(VKF_SIZE_ERR.format(path))
    values = np.frombuffer(data, dtype='<f8', count=count, offset=16).reshape(dims)
    L = float(np.frombuffer(data, dtype='<f8', count=1, offset=16 + 8 * count)[0])
    return ScalarField(build_grid(int(dims[0]), L), values)
