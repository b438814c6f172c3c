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
Brute-force quadrature counterparts of the closed-form kernels. Slow; used by the test suite
and the kernel-check scenario only, never by the solvers.

All oscillatory integrals over half-lines go through QUADPACK's Fourier-weighted routine
(quad with weight='cos' or 'sin'), which integrates cycle by cycle.
"""

import numpy as np
from scipy.integrate import quad

from scilandau.errors import *
from scilandau.kernels import COMPONENTS, CutoffSpec, SymMat3, identity_like, memory_kernel, potential, projection

DEFAULT_TOL = 1e-8


def _integrate(name, f, tol, weight=None, frequency=0.0, upper=np.inf):
    """ quad on [0, upper) with an optional Fourier weight; raises when the error estimate exceeds tol. """
    if weight is not None and frequency != 0.0:
        result = quad(f, 0.0, upper, weight=weight, wvar=frequency, epsabs=tol * 1e-2, limlst=200,
                      full_output=1)
    else:
        if weight == 'sin':
            return 0.0
        result = quad(f, 0.0, upper, epsabs=tol * 1e-2, epsrel=1e-12, limit=500, full_output=1)
    value, error = result[0], result[1]
    # A message beyond (value, error, info) means QUADPACK flagged the result.
    if len(result) > 3 and error > tol:
        raise OracleError(ORACLE_ERR.format(name, error, tol), achieved=error)
    return value


def _direction(w):
    w = np.asarray(w, dtype=float)
    speed = float(np.linalg.norm(w))
    unit = w / speed if speed > 0 else np.array([1.0, 0.0, 0.0])
    return speed, unit


def oracle_memory_kernel(tau: float, w, tol: float = DEFAULT_TOL) -> SymMat3:
    """
    G(tau, w) = int k (x) k (1 + |k|^2)^-3 cos(tau k.w) dk, without the cutoff. In cylindrical
    coordinates along w the radial integral is explicit, leaving
    int_R [pi u^2 / (2 (1+u^2)^2) P_w + pi / (4 (1+u^2)) P_w^perp] cos(tau |w| u) du.
    """
    if tau < 0:
        raise DomainError(DOMAIN_ERR.format('oracle_memory_kernel', f'tau={tau} < 0'))
    speed, unit = _direction(w)
    frequency = tau * speed
    axial = 2 * _integrate('oracle_memory_kernel', lambda u: np.pi * u ** 2 / (2 * (1 + u ** 2) ** 2),
                           tol, 'cos', frequency)
    transverse = 2 * _integrate('oracle_memory_kernel', lambda u: np.pi / (4 * (1 + u ** 2)),
                                tol, 'cos', frequency)
    parallel = projection(unit)
    return SymMat3(axial * parallel + transverse * (identity_like(()) - parallel))


def oracle_laplace(z: complex, w, spec: CutoffSpec = None, tol: float = DEFAULT_TOL) -> SymMat3:
    """ int_0^inf exp(-z tau) G(tau, w) dtau, componentwise over memory_kernel. """
    z = complex(z)
    if z.real <= 0:
        raise DomainError(DOMAIN_ERR.format('oracle_laplace', f'Re z={z.real} <= 0'))
    spec = spec or CutoffSpec()
    w = np.asarray(w, dtype=float)
    data = np.zeros(6, dtype=complex)
    for c in range(len(COMPONENTS)):
        f = lambda tau, c=c: np.exp(-z.real * tau) * memory_kernel(tau, w, spec).data[c]
        real = _integrate('oracle_laplace', f, tol, 'cos', z.imag)
        imag = _integrate('oracle_laplace', f, tol, 'sin', z.imag)
        data[c] = real - 1j * imag
    return SymMat3(data)


def oracle_landau_kernel(w, tol: float = DEFAULT_TOL) -> SymMat3:
    """
    pi int k (x) k delta(k.w) |phi_hat(k)|^2 dk as polar quadrature on the plane normal to w,
    without the cutoff.
    """
    speed, unit = _direction(w)
    if speed == 0:
        raise DomainError(DOMAIN_ERR.format('oracle_landau_kernel', '|w| must be positive'))
    # Orthonormal basis of the plane normal to w.
    helper = np.eye(3)[int(np.argmin(np.abs(unit)))]
    e1 = np.cross(unit, helper)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(unit, e1)
    radial = _integrate('oracle_landau_kernel', lambda rho: rho ** 3 * (1 + rho ** 2) ** -3, tol)
    data = np.empty(6)
    for c, (i, j) in enumerate(COMPONENTS):
        def angular(theta, i=i, j=j):
            direction = np.cos(theta) * e1 + np.sin(theta) * e2
            return direction[i] * direction[j]
        data[c] = _integrate('oracle_landau_kernel', angular, tol, upper=2 * np.pi)
    return SymMat3(np.pi * radial * data / speed)


def oracle_potential_ft(k: float, tol: float = DEFAULT_TOL) -> float:
    """ (2 pi)^-3/2 (4 pi / k) int_0^inf r sin(kr) phi(r) dr, with the k -> 0 limit at k = 0. """
    if k < 0:
        raise DomainError(DOMAIN_ERR.format('oracle_potential_ft', f'k={k} < 0'))
    norm = (2 * np.pi) ** -1.5 * 4 * np.pi
    if k == 0:
        return norm * _integrate('oracle_potential_ft', lambda r: r * r * potential(r) if r > 0 else 0.0, tol)
    return norm / k * _integrate('oracle_potential_ft', lambda r: r * potential(r) if r > 0 else 0.0,
                                 tol, 'sin', k)
