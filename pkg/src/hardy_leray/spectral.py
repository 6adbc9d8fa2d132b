"""The reduced minimization problem in (lambda, nu) coordinates.

After the log-radial Fourier transform and elimination of the radial
component, the angular infimum is

    inf over lambda, nu of  f(lambda^2, alpha_nu, gamma)

with ``alpha_nu = nu (nu + n - 2)`` the eigenvalues of the polar operator
``T``.  For n = 2 the same expression holds with ``alpha_nu = nu^2``, where
``nu`` is the Fourier index in the polar angle.  The decoupled azimuthal
component contributes ``lambda^2 + alpha_nu`` (its angular operator has the
same spectrum), whose infimum is ``n - 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import (TWO_D_NU_ONE_INTERVAL, Params, inner_min_closed_form,
                        inner_min_coefficients)


class SpectralDomainError(ZeroDivisionError):
    """A reduced-problem denominator vanishes."""


def eigenvalue(nu, n: int):
    """alpha_nu = nu (nu + n - 2); works elementwise on arrays."""
    return nu * (nu + n - 2)


@dataclass(frozen=True)
class SpectralPoint:
    lam: float
    nu: int
    n: int

    def __post_init__(self):
        if int(self.nu) != self.nu or self.nu < 0:
            raise ValueError(f"nu must be a non-negative integer, got {self.nu!r}")
        if self.n > 2 and self.nu < 1:
            raise ValueError("the poloidal branch needs nu >= 1 when n > 2")

    @property
    def alpha(self) -> int:
        return eigenvalue(int(self.nu), self.n)


@dataclass(frozen=True)
class ReducedQuotient:
    numerator_form: float
    denominator_form: float

    def __post_init__(self):
        if not self.denominator_form > 0:
            raise ValueError("denominator form must be positive")

    @property
    def value(self) -> float:
        return self.numerator_form / self.denominator_form


def f_axisym(x, alpha, p: Params):
    """x - n + 3 + alpha (1 - 16 (1 - g) / (4x + 4 alpha + (n - 2g)^2))."""
    if p.n <= 2:
        raise ValueError("f_axisym is the n > 2 reduction; use f_2d for n = 2")
    x = np.asarray(x, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    if np.any(x < 0) or np.any(alpha < 0):
        raise ValueError("x and alpha must be non-negative")
    n, g = p.n, p.gamma
    den = 4.0 * x + 4.0 * alpha + (n - 2.0 * g) ** 2
    if np.any(den == 0):
        raise SpectralDomainError("4x + 4alpha + (n - 2 gamma)^2 vanishes")
    # expanded about the first mode (x, alpha) = (0, n - 1), where the plain
    # form cancels down to 2 (n + 2g - 2)^2 / den near the excluded gamma
    z = x + alpha - (n - 1.0)
    s = n + 2.0 * g - 2.0
    num = (4.0 * z * z + z * (4.0 * (n - 1.0) + (n - 2.0 * g) ** 2 + 8.0) + 2.0 * s * s
           - 16.0 * (1.0 - g) * (alpha - (n - 1.0)))
    out = num / den
    return out[()] if out.ndim == 0 else out


def f_2d(x, nu, gamma: float):
    """Planar reduced function at Fourier index ``nu``.

    The polar-angle eigenvalue entering the formula is ``nu**2``:
    ``x + 1 + nu^2 (1 - 4 (1 - g) / (x + nu^2 + (1 - g)^2))``.
    """
    x = np.asarray(x, dtype=float)
    nu = np.asarray(nu)
    if np.any(x < 0) or np.any(nu < 0):
        raise ValueError("x and nu must be non-negative")
    a = nu.astype(float) ** 2
    den = x + a + (1.0 - gamma) ** 2
    if np.any(den == 0):
        raise SpectralDomainError("x = nu = 0 with gamma = 1")
    out = x + 1.0 + a * (1.0 - 4.0 * (1.0 - gamma) / den)
    return out[()] if out.ndim == 0 else out


def _reduced_forms(lam, alpha, p: Params):
    lam2 = np.asarray(lam, dtype=float) ** 2
    alpha = np.asarray(alpha, dtype=float)
    n, g = p.n, p.gamma
    dl = lam2 + (n / 2.0 - g) ** 2
    if np.any(dl == 0):
        raise SpectralDomainError("lambda = 0 with gamma = n/2")
    num = ((-n - 1.0 + lam2 + 4.0 * g) / dl + 1.0) * alpha + lam2 - n + 3.0 + alpha**2 / dl
    den = alpha / dl + 1.0
    return num, den


def reduced_quotient(s: SpectralPoint, p: Params) -> ReducedQuotient:
    """Ratio of the forms Q and q on a single (lambda, nu) mode.

    Valid for every n >= 2; for n = 2 it is the planar quotient with
    alpha = nu^2.  Algebraically equal to ``f(lambda^2, alpha, gamma)``.
    """
    if s.n != p.n:
        raise ValueError("spectral point and params disagree on n")
    num, den = _reduced_forms(s.lam, s.alpha, p)
    return ReducedQuotient(float(num), float(den))


def reduced_quotient_values(lam, alpha, p: Params):
    """Vectorized value of :func:`reduced_quotient` (broadcasts lam, alpha).

    Both forms are multiplied through by ``lambda^2 + (n/2 - gamma)^2``, so
    the point lambda = 0, gamma = n/2 gets its continuous limit instead of
    a division by zero.
    """
    lam2 = np.asarray(lam, dtype=float) ** 2
    alpha = np.asarray(alpha, dtype=float)
    n, g = p.n, p.gamma
    dl = lam2 + (n / 2.0 - g) ** 2
    num = (-n - 1.0 + lam2 + 4.0 * g + dl) * alpha + (lam2 - n + 3.0) * dl + alpha**2
    den = alpha + dl
    # alpha = 0 and dl = 0 together: the quotient is lambda^2 - n + 3 there
    safe = np.where(den == 0, 1.0, den)
    return np.where(den == 0, lam2 - n + 3.0, num / safe)


def poloidal_infimum(p: Params) -> float:
    if p.n <= 2:
        raise ValueError("poloidal/azimuthal split applies to n > 2")
    n, g = p.n, p.gamma
    if g <= 1.0:
        return 2.0 * (g - 1.0 + n / 2.0) ** 2 / (n - 1.0 + (g - n / 2.0) ** 2)
    a_coef, b_coef = inner_min_coefficients(p)
    return 2.0 + inner_min_closed_form(a_coef, b_coef)[1]


def azimuthal_infimum(p: Params) -> float:
    if p.n <= 2:
        raise ValueError("poloidal/azimuthal split applies to n > 2")
    return p.n - 1.0


def _two_d_candidates(gamma: float) -> dict[int, float]:
    # f(0, nu) increases for nu >= 2 when gamma <= 1, so index 2 bounds the tail.
    # f(x, 0) = x + 1 identically; evaluating it avoids the 0/0 at gamma = 1.
    return {0: 1.0, 1: float(f_2d(0.0, 1, gamma)), 2: float(f_2d(0.0, 2, gamma))}


def total_infimum(p: Params) -> float:
    """Infimum of the reduced quotient over all admissible modes."""
    if p.n > 2:
        return min(poloidal_infimum(p), azimuthal_infimum(p))
    if p.gamma > 1.0:
        return 1.0
    return min(_two_d_candidates(p.gamma).values())


@dataclass(frozen=True)
class Minimizer:
    """Where an infimum is attained: value, frequency, angular index, branch."""

    value: float
    lam: float
    nu: int
    branch: str


def locate_infimum(p: Params) -> Minimizer:
    """Closed-form minimizer; ties between branches go to the poloidal one."""
    value = total_infimum(p)
    if p.n == 2:
        if p.gamma > 1.0:
            return Minimizer(value, 0.0, 0, "nu=0")
        cands = _two_d_candidates(p.gamma)
        nu = min(cands, key=lambda k: (cands[k], k))
        return Minimizer(value, 0.0, nu, f"nu={nu}")
    pol = poloidal_infimum(p)
    lam = 0.0
    if p.gamma > 1.0:
        x_star, _ = inner_min_closed_form(*inner_min_coefficients(p))
        lam = math.sqrt(x_star)
    if pol <= azimuthal_infimum(p):
        return Minimizer(value, lam, 1, "poloidal")
    return Minimizer(value, 0.0, 1, "azimuthal")


def brute_force_search(p: Params, lambda_max: float = 10.0, nu_max: int = 64,
                       grid: int = 2001) -> Minimizer:
    """Minimum over a uniform lambda grid (including 0) and nu <= nu_max.

    Uses only the raw Q/q quotient and ``lambda^2 + alpha_nu`` for the
    azimuthal part, with no knowledge of where the analytic minimum sits.
    Ties break toward smaller lambda, then smaller nu.
    """
    if not lambda_max > 0:
        raise ValueError("lambda_max must be positive")
    if nu_max < 2 or grid < 100:
        raise ValueError("degenerate grid: need nu_max >= 2 and grid >= 100")
    lam = np.linspace(0.0, lambda_max, int(grid))
    nu_min = 0 if p.n == 2 else 1
    nus = np.arange(nu_min, int(nu_max) + 1)
    alpha = eigenvalue(nus, p.n).astype(float)
    vals = reduced_quotient_values(lam[:, None], alpha[None, :], p)
    i, j = np.unravel_index(np.argmin(vals), vals.shape)
    best = Minimizer(float(vals[i, j]), float(lam[i]), int(nus[j]),
                     "poloidal" if p.n > 2 else f"nu={int(nus[j])}")
    if p.n > 2:
        azi = lam[:, None] ** 2 + alpha[None, :]
        ia, ja = np.unravel_index(np.argmin(azi), azi.shape)
        if azi[ia, ja] < best.value:
            best = Minimizer(float(azi[ia, ja]), float(lam[ia]), int(nus[ja]), "azimuthal")
    return best


def brute_force_infimum(p: Params, lambda_max: float = 10.0, nu_max: int = 64,
                        grid: int = 2001) -> float:
    return brute_force_search(p, lambda_max, nu_max, grid).value


def two_d_branch(gamma: float) -> str:
    lo, hi = TWO_D_NU_ONE_INTERVAL
    return "nu=1" if lo <= gamma <= hi else "nu=0"
