"""Closed-form sharp constants of the weighted Hardy-Leray inequality.

The inequality under study is

    int |x|^(2g-2) |u|^2 dx  <=  C  int |x|^(2g) |grad u|^2 dx

for divergence-free ``u`` (axisymmetric when n > 2).  Every constant is
decomposed as ``1/C = (n/2 + g - 1)^2 + angular infimum``: the first term is
what the radial substitution ``v = u |x|^(g - 1 + n/2)`` produces, the second
is the infimum of the reduced angular/log-radial quotient.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass
from typing import Callable

SQRT3 = math.sqrt(3.0)
# n = 2 branch interval for the nu = 1 minimizer
TWO_D_NU_ONE_INTERVAL = (-SQRT3 - 1.0, SQRT3 - 1.0)

#: |gamma - gamma_forbidden| below this triggers a NearForbiddenGammaWarning.
GUARD_BAND = 1e-9
#: default relative tolerance for comparisons between double-precision routes.
RTOL = 1e-10


class ForbiddenGammaError(ValueError):
    """Raised for the excluded exponent (1 - n/2 for n > 2, 0 for n = 2)."""

    def __init__(self, n: int, gamma: float):
        self.n = n
        self.gamma = gamma
        if n == 2:
            msg = f"gamma = 0 is excluded for n = 2 (got gamma = {gamma!r})"
        else:
            msg = (f"gamma = 1 - n/2 = {1 - n / 2:g} is excluded for n = {n} "
                   f"(got gamma = {gamma!r})")
        super().__init__(msg)


class NearForbiddenGammaWarning(RuntimeWarning):
    pass


class Branch(str, enum.Enum):
    """Which closed form produced the constant."""

    POLOIDAL_GAMMA_LE1 = "PoloidalGammaLE1"
    GAMMA_GT1_TWO_LEVEL_MIN = "GammaGT1TwoLevelMin"
    TWOD_NU_ONE = "TwoD_NuOne"
    TWOD_NU_ZERO = "TwoD_NuZero"

    def __str__(self) -> str:
        return self.value


def forbidden_gamma(n: int) -> float:
    return 0.0 if n == 2 else 1.0 - n / 2.0


@dataclass(frozen=True)
class Params:
    """Dimension ``n`` and weight exponent ``gamma``."""

    n: int
    gamma: float

    def __post_init__(self):
        if isinstance(self.n, bool) or int(self.n) != self.n:
            raise ValueError(f"n must be an integer, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "gamma", float(self.gamma))
        if self.n < 2:
            raise ValueError(f"n must be >= 2, got {self.n}")
        if not math.isfinite(self.gamma):
            raise ValueError(f"gamma must be finite, got {self.gamma}")
        g0 = forbidden_gamma(self.n)
        if self.gamma == g0:
            raise ForbiddenGammaError(self.n, self.gamma)
        if abs(self.gamma - g0) < GUARD_BAND:
            warnings.warn(
                f"gamma = {self.gamma!r} is within {GUARD_BAND:g} of the excluded "
                f"value {g0:g}; the constant blows up there",
                NearForbiddenGammaWarning, stacklevel=3)

    @property
    def radial_term(self) -> float:
        """(n/2 + gamma - 1)^2, which equals gamma^2 when n = 2."""
        return (self.n / 2.0 + self.gamma - 1.0) ** 2


@dataclass(frozen=True)
class ConstantBreakdown:
    c: float
    c_inverse: float
    radial_term: float
    angular_infimum: float
    branch: Branch


def classical_constant(p: Params) -> float:
    """Sharp constant 4/(2 gamma + n - 2)^2 without the divergence constraint."""
    return 4.0 / (2.0 * p.gamma + p.n - 2.0) ** 2


def golden_section_minimize(func: Callable[[float], float], a: float, b: float,
                            tol: float = 1e-10, max_iter: int = 500):
    """Minimize a unimodal ``func`` on the closed interval [a, b].

    Returns ``(x, func(x))``; the endpoints are compared too, so a minimum
    sitting on the boundary is found exactly.
    """
    if not b > a:
        raise ValueError("need b > a")
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    lo, hi = a, b
    c = hi - invphi * (hi - lo)
    d = lo + invphi * (hi - lo)
    fc, fd = func(c), func(d)
    for _ in range(max_iter):
        if hi - lo <= tol:
            break
        if fc <= fd:
            hi, d, fd = d, c, fc
            c = hi - invphi * (hi - lo)
            fc = func(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + invphi * (hi - lo)
            fd = func(d)
    x = 0.5 * (lo + hi)
    best = min((func(x), x), (func(a), a), (func(b), b))
    return best[1], best[0]


def inner_min_coefficients(p: Params) -> tuple[float, float]:
    """``(A, B)`` of the gamma > 1 inner problem min_{x>=0} x + A/(x + B)."""
    n, g = p.n, p.gamma
    return 4.0 * (n - 1) * (g - 1.0), (n - 1) + (g - n / 2.0) ** 2


def inner_min_closed_form(a_coef: float, b_coef: float) -> tuple[float, float]:
    """Minimizer and minimum of ``x + A/(x + B)`` over x >= 0, for A >= 0, B > 0."""
    root = math.sqrt(a_coef)
    if b_coef >= root:
        return 0.0, a_coef / b_coef
    return root - b_coef, 2.0 * root - b_coef


def inner_min_search(a_coef: float, b_coef: float, tol: float = 1e-10) -> tuple[float, float]:
    """Golden-section cross-check of :func:`inner_min_closed_form`."""
    return golden_section_minimize(lambda x: x + a_coef / (x + b_coef),
                                   0.0, math.sqrt(a_coef) + 1.0, tol=tol)


def _gamma_gt1_angular(p: Params) -> float:
    a_coef, b_coef = inner_min_coefficients(p)
    _, inner = inner_min_closed_form(a_coef, b_coef)
    if __debug__:
        _, searched = inner_min_search(a_coef, b_coef)
        assert abs(searched - inner) <= 1e-8 * max(1.0, abs(inner)), (inner, searched)
    return min(p.n - 1.0, 2.0 + inner)


def sharp_constant(p: Params) -> ConstantBreakdown:
    """Best constant C_{n,gamma} together with its 1/C decomposition."""
    n, g = p.n, p.gamma
    radial = p.radial_term
    if n == 2:
        s = (1.0 - g) ** 2
        lo, hi = TWO_D_NU_ONE_INTERVAL
        if lo <= g <= hi:
            c = (1.0 + s) / (3.0 + s) / g**2
            angular = 2.0 * g**2 / (1.0 + s)
            branch = Branch.TWOD_NU_ONE
        else:
            c = 1.0 / (g**2 + 1.0)
            angular = 1.0
            branch = Branch.TWOD_NU_ZERO
        return ConstantBreakdown(c, 1.0 / c, radial, angular, branch)

    if g <= 1.0:
        shift = (g - n / 2.0) ** 2
        c = 4.0 / (2.0 * g + n - 2.0) ** 2 * (1.0 - 2.0 / (n + 1.0 + shift))
        angular = 2.0 * (g - 1.0 + n / 2.0) ** 2 / (n - 1.0 + shift)
        return ConstantBreakdown(c, 1.0 / c, radial, angular, Branch.POLOIDAL_GAMMA_LE1)

    angular = _gamma_gt1_angular(p)
    c_inv = radial + angular
    return ConstantBreakdown(1.0 / c_inv, c_inv, radial, angular,
                             Branch.GAMMA_GT1_TWO_LEVEL_MIN)


def sharp_constant_3d(gamma: float) -> float:
    """The n = 3 specialization, evaluated from its own (simpler) formula."""
    gamma = float(gamma)
    if gamma == -0.5:
        raise ForbiddenGammaError(3, gamma)
    if gamma <= 1.0:
        s = (gamma - 1.5) ** 2
        return 4.0 / (2.0 * gamma + 1.0) ** 2 * (2.0 + s) / (4.0 + s)
    return 4.0 / (8.0 + (1.0 + 2.0 * gamma) ** 2)


def improvement_ratio(p: Params) -> float:
    """sharp / classical; always < 1."""
    return sharp_constant(p).c / classical_constant(p)
