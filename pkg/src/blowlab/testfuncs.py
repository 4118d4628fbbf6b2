"""Radial test functions for the coupled damped-wave/wave system.

The central object is the positive, radially symmetric function

    phi(x) = integral over the unit sphere S^{n-1} of exp(x . w) dsigma_w,

which satisfies phi - Laplace(phi) = 0 and grows like
C_n |x|^{-(n-1)/2} e^{|x|}.  Two exponentially damped versions of phi,

    psi1(t, x) = exp(-((sqrt(5)-1)/2) t) phi(x)   (damped-wave adjoint),
    psi2(t, x) = exp(-t) phi(x)                   (wave adjoint),

solve the adjoint equations psi_tt - Laplace(psi) - psi_t = 0 and
psi_tt - Laplace(psi) = 0 respectively.  The decay rate of psi1 is the
positive number d with (-d)^2 - (-d) - 1 = 0, i.e. d = (sqrt(5)-1)/2.

Closed forms are used for n = 1 (2 cosh r) and n = 3 (4 pi sinh(r)/r);
every other dimension goes through adaptive Gauss-Legendre quadrature
over the polar angle.
"""

from __future__ import annotations

import enum
import math

import numpy as np

__all__ = [
    "DomainError",
    "OverflowGuardError",
    "TestFunctionKind",
    "phi",
    "phi_quadrature",
    "phi_asymptotic",
    "psi",
    "verify_wave_identity",
    "weighted_power_integral",
    "sphere_area",
    "ball_volume",
    "adaptive_gauss",
]

#: Largest admissible exponential argument before we refuse to evaluate.
OVERFLOW_LIMIT = 700.0

MAX_DIMENSION = 8


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of the operation."""


class OverflowGuardError(ValueError):
    """An exponential argument would exceed the double-precision range."""


class TestFunctionKind(enum.Enum):
    """The two damped copies of phi used as adjoint test functions."""

    PSI1 = "psi1"
    PSI2 = "psi2"

    @property
    def decay_rate(self) -> float:
        if self is TestFunctionKind.PSI1:
            return _GOLDEN_DECAY
        return 1.0


_GOLDEN_DECAY = (math.sqrt(5.0) - 1.0) / 2.0

# The psi1 rate must be a root of lambda^2 - lambda - 1 with lambda = -d,
# i.e. d^2 + d - 1 = 0; this is what makes psi1 solve the damped adjoint
# equation.  Guard it at import time.
assert abs(_GOLDEN_DECAY**2 + _GOLDEN_DECAY - 1.0) < 1e-15


def sphere_area(n: int) -> float:
    """Surface measure of the unit sphere S^{n-1} in R^n (|S^0| = 2)."""
    _check_dimension(n)
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)


def ball_volume(n: int) -> float:
    """Volume of the unit ball in R^n."""
    return sphere_area(n) / n


def _check_dimension(n: int) -> None:
    if not isinstance(n, (int, np.integer)) or isinstance(n, bool):
        raise DomainError(f"dimension must be an integer, got {n!r}")
    if n < 1 or n > MAX_DIMENSION:
        raise DomainError(f"dimension must satisfy 1 <= n <= {MAX_DIMENSION}, got {n}")


def _check_radius(r: float, overflow_limit: float) -> None:
    if r < 0.0:
        raise DomainError(f"radius must be nonnegative, got {r}")
    if r > overflow_limit:
        raise OverflowGuardError(
            f"radius {r} exceeds the overflow guard {overflow_limit}"
        )


def adaptive_gauss(f, a: float, b: float, rtol: float = 1e-12,
                   nodes: int = 16, max_doublings: int = 16) -> float:
    """Panel-doubled Gauss-Legendre quadrature of a vectorized integrand.

    Doubles the number of equal panels (each carrying an n-node rule)
    until two successive estimates agree to ``rtol`` relative.  Intended
    for smooth, possibly exponentially growing integrands.
    """
    x0, w0 = np.polynomial.legendre.leggauss(nodes)
    previous = None
    panels = 1
    for _ in range(max_doublings):
        edges = np.linspace(a, b, panels + 1)
        mid = 0.5 * (edges[:-1] + edges[1:])
        half = 0.5 * (edges[1:] - edges[:-1])
        pts = (mid[:, None] + half[:, None] * x0[None, :]).ravel()
        wts = (half[:, None] * w0[None, :]).ravel()
        estimate = float(np.dot(wts, f(pts)))
        if previous is not None:
            if abs(estimate - previous) <= rtol * max(abs(estimate), 1e-300):
                return estimate
        previous = estimate
        panels *= 2
    return previous


def phi_quadrature(r: float, n: int, overflow_limit: float = OVERFLOW_LIMIT) -> float:
    """Evaluate phi(r) by quadrature over the polar angle.

    For n >= 2 this is |S^{n-2}| int_0^pi exp(r cos(theta)) sin(theta)^{n-2}
    dtheta; for n = 1 the sphere S^0 = {-1, +1} is discrete and the
    "quadrature" degenerates to the two-point sum e^r + e^{-r}.
    """
    _check_dimension(n)
    _check_radius(r, overflow_limit)
    if n == 1:
        return math.exp(r) + math.exp(-r)
    ring = sphere_area(n - 1)

    def integrand(theta):
        return np.exp(r * np.cos(theta)) * np.sin(theta) ** (n - 2)

    return ring * adaptive_gauss(integrand, 0.0, math.pi)


def phi(r, n: int, overflow_limit: float = OVERFLOW_LIMIT):
    """The spherical exponential mean phi at radius ``r`` in dimension ``n``.

    Uses the closed forms 2 cosh(r) for n = 1 and 4 pi sinh(r)/r for
    n = 3; other dimensions fall back to ``phi_quadrature``.  Accepts a
    scalar or an ndarray of radii.
    """
    _check_dimension(n)
    arr = np.asarray(r, dtype=float)
    if np.any(arr < 0.0):
        raise DomainError("radius must be nonnegative")
    if np.any(arr > overflow_limit):
        raise OverflowGuardError(
            f"radius exceeds the overflow guard {overflow_limit}"
        )
    if n == 1:
        out = 2.0 * np.cosh(arr)
    elif n == 3:
        # sinh(r)/r has a removable singularity at the origin (limit 1).
        out = 4.0 * math.pi * np.where(arr > 1e-8, np.sinh(arr) / np.where(arr > 0, arr, 1.0),
                                       1.0 + arr**2 / 6.0)
    else:
        if arr.ndim == 0:
            return phi_quadrature(float(arr), n, overflow_limit)
        out = np.array([phi_quadrature(float(x), n, overflow_limit) for x in arr])
    if np.ndim(r) == 0:
        return float(out)
    return out


def phi_asymptotic(r, n: int, overflow_limit: float = OVERFLOW_LIMIT):
    """Leading-order growth C_n r^{-(n-1)/2} e^r with C_n = (2 pi)^{(n-1)/2}.

    The constant follows from Laplace's method applied to the polar-angle
    integral (and reduces to the elementary expansions for n = 1, 3).
    """
    _check_dimension(n)
    arr = np.asarray(r, dtype=float)
    if np.any(arr <= 0.0):
        raise DomainError("asymptotic form requires r > 0")
    if np.any(arr > overflow_limit):
        raise OverflowGuardError(
            f"radius exceeds the overflow guard {overflow_limit}"
        )
    c_n = (2.0 * math.pi) ** ((n - 1) / 2.0)
    out = c_n * arr ** (-(n - 1) / 2.0) * np.exp(arr)
    if np.ndim(r) == 0:
        return float(out)
    return out


def psi(kind: TestFunctionKind, t: float, r, n: int,
        overflow_limit: float = OVERFLOW_LIMIT):
    """Damped test function psi_kind(t, r) = exp(-d t) phi(r)."""
    if t < 0.0:
        raise DomainError(f"time must be nonnegative, got {t}")
    return math.exp(-kind.decay_rate * t) * phi(r, n, overflow_limit)


def verify_wave_identity(kind: TestFunctionKind, n: int,
                         grid_spacing: float, r_max: float = 10.0) -> float:
    """Max-norm residual of the adjoint wave identity for psi_kind.

    Discretizes psi_tt - Laplace(psi) - psi_t (PSI1) or
    psi_tt - Laplace(psi) (PSI2) with second-order central differences.
    The radial Laplacian is f'' + (n-1)/r f', with the symmetric origin
    stencil 2 n (f(h) - f(0)) / h^2.  The residual is scaled pointwise by
    phi(r) so that the exponential growth of the test function does not
    mask the truncation error; it shrinks as O(grid_spacing^2).

    The time step is half the spatial spacing: with equal steps the
    temporal and spatial truncation errors of the undamped kind cancel
    identically in n = 1 (both stencils act on plain exponentials),
    leaving a roundoff-dominated residual that cannot exhibit the
    second-order convergence this check is meant to demonstrate.
    """
    _check_dimension(n)
    h = float(grid_spacing)
    if h <= 0.0 or h > r_max / 4.0:
        raise DomainError(f"grid spacing {h} does not fit the window [0, {r_max}]")
    d = kind.decay_rate
    r = np.arange(0.0, r_max + h / 2.0, h)
    t0 = 1.0
    ht = h / 2.0
    base = phi(r, n)
    # psi factorizes, so the three time levels share the spatial profile.
    f_mid = math.exp(-d * t0) * base
    f_lo = math.exp(-d * (t0 - ht)) * base
    f_hi = math.exp(-d * (t0 + ht)) * base

    psi_tt = (f_hi - 2.0 * f_mid + f_lo) / ht**2
    lap = np.empty_like(f_mid)
    lap[0] = 2.0 * n * (f_mid[1] - f_mid[0]) / h**2
    lap[1:-1] = (f_mid[2:] - 2.0 * f_mid[1:-1] + f_mid[:-2]) / h**2
    if n > 1:
        lap[1:-1] += (n - 1) / r[1:-1] * (f_mid[2:] - f_mid[:-2]) / (2.0 * h)
    residual = psi_tt - lap
    if kind is TestFunctionKind.PSI1:
        psi_t = (f_hi - f_lo) / (2.0 * ht)
        residual = residual - psi_t
    scaled = np.abs(residual[:-1]) / (math.exp(-d * t0) * base[:-1])
    return float(np.max(scaled))


def weighted_power_integral(kind: TestFunctionKind, conj_exponent: float,
                            t: float, R: float, n: int,
                            overflow_limit: float = OVERFLOW_LIMIT) -> float:
    """Integral of psi_kind(t, .)^{s'} over the ball of radius t + R.

    ``conj_exponent`` is the conjugate exponent s' = s / (s - 1) of the
    relevant nonlinearity power s.  Computed by radial quadrature

        |S^{n-1}| int_0^{t+R} psi(t, r)^{s'} r^{n-1} dr.

    These are the denominators of the reverse-Hoelder weights; callers
    bound them by C2 (t+R)^{n-1-(n-1)p'/2} and
    C2t e^{((3-sqrt(5))/2) q' t} (t+R)^{n-1-(n-1)q'/2}.
    """
    if conj_exponent <= 1.0:
        raise DomainError(f"conjugate exponent must exceed 1, got {conj_exponent}")
    if t < 0.0 or R <= 0.0:
        raise DomainError("need t >= 0 and R > 0")
    top = t + R
    if conj_exponent * top > overflow_limit:
        raise OverflowGuardError(
            f"exponent argument {conj_exponent * top:.3g} exceeds the "
            f"overflow guard {overflow_limit}"
        )
    _check_dimension(n)
    damp = math.exp(-kind.decay_rate * t)

    def integrand(r):
        vals = np.asarray(phi(r, n), dtype=float)
        return (damp * vals) ** conj_exponent * r ** (n - 1)

    return sphere_area(n) * adaptive_gauss(integrand, 0.0, top)
