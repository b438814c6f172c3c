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
Closed-form kernels of the weak-coupling kinetic model.

Everything here is vectorised over velocities: a relative velocity ``w`` is any array whose
last axis has length 3, and symmetric matrices are returned as :class:`SymMat3` holding the
six independent components along the first axis.
"""

from dataclasses import dataclass

import numpy as np
from scipy import special

from scilandau.errors import *

# Diffusion constant pi^2/4 fixed by the potential sqrt(2/pi) K0(|x|).
LANDAU_CONSTANT = np.pi ** 2 / 4

# Storage order of the symmetric components.
COMPONENTS = ((0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2))
_INDEX = {pair: c for c, pair in enumerate(COMPONENTS)}
_IDENTITY = np.array([1.0, 1.0, 1.0, 0.0, 0.0, 0.0])


@dataclass(frozen=True)
class CutoffSpec:
    """ Smooth cutoff eta: zero below kappa/2, one above kappa. """
    kappa: float = 0.25

    def __post_init__(self):
        if not 0 < self.kappa < 0.5:
            raise ConfigError(KAPPA_RANGE_ERR.format(self.kappa))

    @property
    def w_min(self):
        """ Smallest relative speed where the cutoff is nonzero. """
        return np.sqrt(self.kappa / 2)


@dataclass(frozen=True, eq=False)
class SymMat3:
    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data)
        if data.shape[:1] != (6,):
            raise FieldError(FIELD_SHAPE_ERR.format('(6, ...)', data.shape))
        object.__setattr__(self, 'data', data)

    @property
    def shape(self):
        return self.data.shape[1:]

    def component(self, i: int, j: int):
        return self.data[_INDEX[(min(i, j), max(i, j))]]

    def to_matrix(self) -> np.ndarray:
        """ Dense (..., 3, 3) view. """
        out = np.empty(self.shape + (3, 3), dtype=self.data.dtype)
        for c, (i, j) in enumerate(COMPONENTS):
            out[..., i, j] = self.data[c]
            out[..., j, i] = self.data[c]
        return out

    def trace(self):
        return self.data[0] + self.data[1] + self.data[2]

    def frobenius(self):
        sq = np.abs(self.data) ** 2
        return np.sqrt(sq[0] + sq[1] + sq[2] + 2 * (sq[3] + sq[4] + sq[5]))

    def dot(self, w) -> np.ndarray:
        return np.einsum('...ij,...j->...i', self.to_matrix(), np.asarray(w))

    def __add__(self, other):
        return SymMat3(self.data + other.data)

    def __sub__(self, other):
        return SymMat3(self.data - other.data)

    def __mul__(self, scale):
        return SymMat3(self.data * scale)

    __rmul__ = __mul__

    def __truediv__(self, scale):
        return SymMat3(self.data / scale)


def identity_like(shape, dtype=float) -> np.ndarray:
    return np.broadcast_to(_IDENTITY.reshape((6,) + (1,) * len(shape)), (6,) + tuple(shape)).astype(dtype)


def _scalar_or_array(x):
    x = np.asarray(x)
    return x.item() if x.ndim == 0 else x


def _split(w):
    """ Speed, safe speed (1 where zero) and unit direction of w. """
    w = np.asarray(w, dtype=float)
    if w.shape[-1:] != (3,):
        raise DomainError(DOMAIN_ERR.format('relative velocity', f'last axis must be 3, got shape {w.shape}'))
    speed = np.linalg.norm(w, axis=-1)
    safe = np.where(speed > 0, speed, 1.0)
    return speed, safe, w / safe[..., None]


def projection(unit) -> np.ndarray:
    """ Components of the projector onto the direction ``unit``. """
    return np.stack([unit[..., i] * unit[..., j] for i, j in COMPONENTS])


def _flat_exp(s):
    positive = s > 0
    return np.where(positive, np.exp(-1.0 / np.where(positive, s, 1.0)), 0.0)


def potential(r):
    """ The interaction potential sqrt(2/pi) K0(r) for r > 0. """
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise DomainError(DOMAIN_ERR.format('potential', 'r must be positive'))
    return _scalar_or_array(np.sqrt(2 / np.pi) * special.k0(r))


def potential_ft(k):
    """ Fourier transform of the potential, (1 + k^2)^(-3/2). """
    k = np.asarray(k, dtype=float)
    if np.any(k < 0):
        raise DomainError(DOMAIN_ERR.format('potential_ft', 'k must be nonnegative'))
    return _scalar_or_array((1 + k ** 2) ** -1.5)


def cutoff(r, spec: CutoffSpec):
    """
    Smooth cutoff eta(r): 0 for |r| <= kappa/2, 1 for |r| >= kappa, with a C-infinity
    monotone transition built from exp(-1/s).
    """
    half = spec.kappa / 2
    s = (np.abs(np.asarray(r, dtype=float)) - half) / half
    rising = _flat_exp(s)
    return _scalar_or_array(rising / (rising + _flat_exp(1 - s)))


def memory_kernel(tau, w, spec: CutoffSpec) -> SymMat3:
    """
    Time-domain memory kernel G(tau, w) = pi^2/4 eta(|w|^2) exp(-tau|w|) (I - tau|w| P_w).

    ``tau`` may be an array broadcasting against the velocity shape. Not positive semidefinite
    once tau|w| > 1.
    """
    tau = np.asarray(tau, dtype=float)
    if np.any(tau < 0):
        raise DomainError(DOMAIN_ERR.format('memory_kernel', 'tau must be nonnegative'))
    speed, _, unit = _split(w)
    shape = np.broadcast_shapes(tau.shape, speed.shape)

    def lift(components):
        return components.reshape((6,) + (1,) * (len(shape) - speed.ndim) + speed.shape)

    decay = LANDAU_CONSTANT * cutoff(speed ** 2, spec) * np.exp(-tau * speed)
    return SymMat3(decay * (lift(identity_like(speed.shape)) - tau * speed * lift(projection(unit))))


def memory_kernel_dtau(tau, w, spec: CutoffSpec) -> SymMat3:
    """ d/dtau of the memory kernel: -pi^2/4 eta |w| exp(-tau|w|) (I + (1 - tau|w|) P_w). """
    tau = np.asarray(tau, dtype=float)
    if np.any(tau < 0):
        raise DomainError(DOMAIN_ERR.format('memory_kernel_dtau', 'tau must be nonnegative'))
    speed, _, unit = _split(w)
    shape = np.broadcast_shapes(tau.shape, speed.shape)

    def lift(components):
        return components.reshape((6,) + (1,) * (len(shape) - speed.ndim) + speed.shape)

    rate = -LANDAU_CONSTANT * cutoff(speed ** 2, spec) * speed * np.exp(-tau * speed)
    return SymMat3(rate * (lift(identity_like(speed.shape)) + (1 - tau * speed) * lift(projection(unit))))


def transverse_kernel(w, spec: CutoffSpec, profile) -> SymMat3:
    """
    pi^2/4 eta(|w|^2) profile(|w|) (I - P_w). ``profile`` is only called on positive speeds;
    zero relative velocity lies in the dead zone.
    """
    speed, safe, unit = _split(w)
    scale = LANDAU_CONSTANT * cutoff(speed ** 2, spec) * profile(safe)
    return SymMat3(scale * (identity_like(speed.shape) - projection(unit)))


def landau_kernel(w, spec: CutoffSpec) -> SymMat3:
    """ Landau diffusion matrix pi^2/(4|w|) eta(|w|^2) (I - P_w); zero inside the dead zone. """
    return transverse_kernel(w, spec, lambda speed: 1.0 / speed)


def laplace_kernel(z: complex, w, spec: CutoffSpec) -> SymMat3:
    """ Laplace transform in tau of the memory kernel at Re z >= 0. """
    z = complex(z)
    if z.real < 0:
        raise DomainError(DOMAIN_ERR.format('laplace_kernel', f'Re z={z.real} < 0'))
    speed, _, unit = _split(w)
    if np.any(speed == 0):
        raise DomainError(DOMAIN_ERR.format('laplace_kernel', '|w| must be positive'))
    eta = cutoff(speed ** 2, spec)
    proj = projection(unit)
    shifted = z + speed
    perp = (identity_like(speed.shape) - proj) / shifted
    parallel = z * proj / shifted ** 2
    return SymMat3(LANDAU_CONSTANT * eta * (perp + parallel))
