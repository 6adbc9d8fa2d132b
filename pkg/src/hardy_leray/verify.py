"""Field-level verification: minimizing sequences, random fields, sweeps."""

from __future__ import annotations

import enum
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from numpy.polynomial import legendre as npleg
from scipy.integrate import cumulative_trapezoid

from .constants import Branch, Params, classical_constant, sharp_constant
from .operators import (AxisymFieldV, GridTooNarrowError, LogRadialGrid, QuotientReport,
                        ZeroFieldError, rayleigh_quotient, solve_v_rho)
from .spectral import brute_force_search, locate_infimum, total_infimum

# ---------------------------------------------------------------- sequences


class SequenceKind(str, enum.Enum):
    POLOIDAL_N3PLUS = "PoloidalN3plus"
    AZIMUTHAL_N3PLUS = "AzimuthalN3plus"
    TWOD_NU_ZERO = "TwoD_NuZero"
    TWOD_NU_ONE = "TwoD_NuOne"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class MinimizingSequenceSpec:
    """One member of a minimizing family; ``k`` is the t-width of the profile."""

    kind: SequenceKind
    k: float
    p: Params
    phi0: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", SequenceKind(self.kind))
        if not self.k >= 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        two_d = self.kind in (SequenceKind.TWOD_NU_ZERO, SequenceKind.TWOD_NU_ONE)
        if two_d != (self.p.n == 2):
            raise ValueError(f"{self.kind} does not apply to n = {self.p.n}")


def default_kind(p: Params) -> SequenceKind:
    """Sequence whose limit is the sharp value for these parameters."""
    if p.n == 2:
        return (SequenceKind.TWOD_NU_ONE if sharp_constant(p).branch is Branch.TWOD_NU_ONE
                else SequenceKind.TWOD_NU_ZERO)
    if locate_infimum(p).branch == "poloidal":
        return SequenceKind.POLOIDAL_N3PLUS
    return SequenceKind.AZIMUTHAL_N3PLUS


def gaussian_profile(t: np.ndarray, k: float) -> np.ndarray:
    """t-profile whose Fourier transform is proportional to exp(-k^2 lambda^2 / 2)."""
    return np.exp(-0.5 * (t / k) ** 2)


@dataclass(frozen=True, eq=False)
class PolarGrid:
    """Uniform periodic grid in (t, phi) for planar fields."""

    t_min: float = -12.0
    t_max: float = 12.0
    nt: int = 1024
    n_phi: int = 8
    t: np.ndarray = field(init=False, repr=False)
    phi: np.ndarray = field(init=False, repr=False)
    lambdas: np.ndarray = field(init=False, repr=False)
    modes: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.nt < 8 or self.nt & (self.nt - 1):
            raise ValueError(f"nt must be a power of two >= 8, got {self.nt}")
        if self.n_phi < 4:
            raise ValueError("need at least 4 phi samples")
        if not self.t_max > self.t_min:
            raise ValueError("need t_max > t_min")
        dt = (self.t_max - self.t_min) / self.nt
        object.__setattr__(self, "t", self.t_min + dt * np.arange(self.nt))
        object.__setattr__(self, "phi", 2 * math.pi * np.arange(self.n_phi) / self.n_phi)
        lam = 2 * math.pi * np.fft.fftfreq(self.nt, dt)
        lam[self.nt // 2] = 0.0
        object.__setattr__(self, "lambdas", lam)
        m = np.fft.fftfreq(self.n_phi, 1.0 / self.n_phi)
        if self.n_phi % 2 == 0:
            m[self.n_phi // 2] = 0.0
        object.__setattr__(self, "modes", m)

    @property
    def dt(self) -> float:
        return (self.t_max - self.t_min) / self.nt

    def describe(self) -> str:
        return f"{self.nt}x{self.n_phi} t[{self.t_min:g},{self.t_max:g}]"

    def d_t(self, f):
        return np.fft.ifft(1j * self.lambdas[:, None] * np.fft.fft(f, axis=0), axis=0).real

    def d_phi(self, f):
        return np.fft.ifft(1j * self.modes[None, :] * np.fft.fft(f, axis=1), axis=1).real

    def integrate(self, f) -> float:
        return float(f.sum() * self.dt * (2 * math.pi / self.n_phi))


@dataclass(eq=False)
class PolarField2D:
    """Planar reduced field v = u |x|^gamma in (t, phi); arrays are (nt, n_phi)."""

    grid: PolarGrid
    v_rho: np.ndarray
    v_phi: np.ndarray
    gamma: float

    def __post_init__(self):
        self.params  # validates gamma
        scale = max(np.abs(self.v_rho).max(), np.abs(self.v_phi).max())
        edge = max(np.abs(self.v_rho[[0, -1]]).max(), np.abs(self.v_phi[[0, -1]]).max())
        if scale > 0 and edge > 1e-8 * scale:
            raise GridTooNarrowError(f"field is {edge / scale:.2e} of its maximum at the t-boundary")

    @property
    def params(self) -> Params:
        return Params(2, self.gamma)


def polar_solve_v_rho(v_phi: np.ndarray, gamma: float, grid: PolarGrid) -> np.ndarray:
    """w_rho = -d_phi w_phi / (i lambda + 1 - gamma), mode by mode."""
    c = 1.0 - gamma
    rhs = np.fft.fft(grid.d_phi(v_phi), axis=0)
    den = 1j * grid.lambdas + c
    zero = den == 0
    if zero.any():
        if np.abs(rhs[zero]).max() > 1e-12 * max(np.abs(rhs).max(), 1e-300):
            raise ZeroDivisionError("gamma = 1 and the lambda = 0 mode of d_phi v_phi is nonzero")
        den[zero] = 1.0
    return np.fft.ifft(-rhs / den[:, None], axis=0).real


def polar_divergence_residual(f: PolarField2D) -> np.ndarray:
    g = f.grid
    return g.d_t(f.v_rho) + (1.0 - f.gamma) * f.v_rho + g.d_phi(f.v_phi)


def polar_rayleigh_quotient(f: PolarField2D) -> QuotientReport:
    """int |grad v|^2 over int |v|^2/|x|^2, from the standard polar gradient."""
    g = f.grid
    vr, vp = f.v_rho, f.v_phi
    dens = (g.d_t(vr) ** 2 + g.d_t(vp) ** 2
            + (g.d_phi(vr) - vp) ** 2 + (g.d_phi(vp) + vr) ** 2)
    den = g.integrate(vr ** 2 + vp ** 2)
    if den == 0:
        raise ZeroFieldError("the field is identically zero")
    return QuotientReport(g.integrate(dens), den, total_infimum(f.params))


def radial_tail(spec: MinimizingSequenceSpec) -> float:
    """Extra t-room for the exp(-c t) tail that 1/(i lambda + c) puts on v_rho.

    Only the families with a radial component have one; 20/c brings the tail
    to e^-20 of the peak.
    """
    if spec.kind is SequenceKind.POLOIDAL_N3PLUS:
        c = spec.p.n / 2.0 - spec.p.gamma
    elif spec.kind is SequenceKind.TWOD_NU_ONE:
        c = 1.0 - spec.p.gamma
    else:
        return 0.0
    return 20.0 / abs(c) if c != 0 else 0.0


def sequence_grid(spec: MinimizingSequenceSpec, nt: int = 2048, n_theta: int = 256,
                  n_phi: int = 8, span: float = 8.0):
    """Grid of half-width ``span * k`` plus the radial tail allowance."""
    half = span * spec.k + radial_tail(spec)
    if spec.p.n == 2:
        return PolarGrid(-half, half, nt, n_phi)
    return LogRadialGrid(spec.p.n, -half, half, nt, n_theta)


def build_minimizing_field(spec: MinimizingSequenceSpec, grid=None):
    """Realize one member of a minimizing sequence on ``grid``."""
    if grid is None:
        grid = sequence_grid(spec)
    p = spec.p
    g_t = gaussian_profile(grid.t, spec.k)[:, None]
    kind = spec.kind
    if kind is SequenceKind.POLOIDAL_N3PLUS:
        v_theta = g_t * grid.theta.sin
        v_rho = solve_v_rho(v_theta, p, grid)
        return AxisymFieldV(grid, v_rho, v_theta, np.zeros_like(v_theta), p.gamma)
    if kind is SequenceKind.AZIMUTHAL_N3PLUS:
        v_phi = g_t * grid.theta.sin
        zero = np.zeros_like(v_phi)
        return AxisymFieldV(grid, zero, zero.copy(), v_phi, p.gamma)
    if kind is SequenceKind.TWOD_NU_ZERO:
        v_phi = np.repeat(g_t, grid.n_phi, axis=1)
        return PolarField2D(grid, np.zeros_like(v_phi), v_phi, p.gamma)
    v_phi = g_t * np.cos(grid.phi - spec.phi0)[None, :]
    v_rho = polar_solve_v_rho(v_phi, p.gamma, grid)
    return PolarField2D(grid, v_rho, v_phi, p.gamma)


def field_quotient(f) -> QuotientReport:
    if isinstance(f, PolarField2D):
        return polar_rayleigh_quotient(f)
    return rayleigh_quotient(f)


def minimizing_quotient(spec: MinimizingSequenceSpec, **grid_kw) -> QuotientReport:
    return field_quotient(build_minimizing_field(spec, sequence_grid(spec, **grid_kw)))


# ------------------------------------------------------------ random fields


def random_axisym_field(seed: int, p: Params, grid: LogRadialGrid, num_bumps: int = 3,
                        max_degree: int = 4, azimuthal: bool = True) -> AxisymFieldV:
    """Random smooth divergence-free axisymmetric v-field.

    ``v_theta = (d_t + n/2 - gamma) Phi`` for a random Gaussian-times-
    polynomial potential ``Phi``, so the radial part returned by
    :func:`solve_v_rho` decays as fast as ``Phi`` does.
    """
    if p.n != grid.n:
        raise ValueError("params and grid disagree on n")
    rng = np.random.default_rng(seed)
    mid = 0.5 * (grid.t_min + grid.t_max)
    half = 0.5 * (grid.t_max - grid.t_min)
    x = grid.theta.cos

    def random_profile():
        out = np.zeros((grid.nt, grid.n_theta))
        for _ in range(num_bumps):
            centre = mid + rng.uniform(-0.25, 0.25) * half
            width = rng.uniform(0.4, 0.09 * half)
            coef = rng.normal(size=rng.integers(1, max_degree + 2))
            angular = grid.theta.sin * npleg.legval(x, coef)
            out += rng.normal() * np.exp(-0.5 * ((grid.t - centre) / width) ** 2)[:, None] * angular
        return out

    potential = random_profile()
    c = p.n / 2.0 - p.gamma
    v_theta = grid.t_derivative(potential) + c * potential
    v_rho = solve_v_rho(v_theta, p, grid)
    v_phi = random_profile() if azimuthal else np.zeros_like(v_theta)
    return AxisymFieldV(grid, v_rho, v_theta, v_phi, p.gamma)


def _smoothstep(x):
    """C-infinity step: 0 for x <= 0, 1 for x >= 1."""
    x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        a = np.where(x > 0, np.exp(-1.0 / np.where(x > 0, x, 1.0)), 0.0)
        b = np.where(x < 1, np.exp(-1.0 / np.where(x < 1, 1.0 - x, 1.0)), 0.0)
    return a / (a + b)


@dataclass(eq=False)
class StreamField2D:
    """Stream function on a square grid whose nodes avoid the origin by h/2."""

    psi: np.ndarray
    spacing: float
    gamma: float

    def __post_init__(self):
        self.psi = np.asarray(self.psi, dtype=float)
        size = self.psi.shape[0]
        if self.psi.ndim != 2 or self.psi.shape[1] != size or size % 2:
            raise ValueError("psi must be a square array with an even side")
        Params(2, self.gamma)

    @property
    def coords(self) -> np.ndarray:
        size = self.psi.shape[0]
        return (np.arange(size) - (size - 1) / 2.0) * self.spacing

    @property
    def radius(self) -> np.ndarray:
        x = self.coords
        return np.hypot(x[:, None], x[None, :])

    def scaled(self, c: float) -> "StreamField2D":
        return StreamField2D(c * self.psi, self.spacing, self.gamma)


def cartesian_grid(size: int, half_width: float):
    h = 2.0 * half_width / size
    x = (np.arange(size) - (size - 1) / 2.0) * h
    return h, x[:, None], x[None, :]


def random_divfree_2d(seed: int, num_bumps: int, p: Params, size: int = 320,
                      half_width: float = 10.0) -> StreamField2D:
    """Random compactly supported stream function; ``u = curl psi`` is divergence-free.

    For gamma < 0 the bumps are centred at radius >= 2.5 and an inner cutoff
    makes psi constant (zero) on |x| < 1, so grad psi(0) = 0.
    """
    if p.n != 2:
        raise ValueError("random_divfree_2d builds planar fields (n = 2)")
    rng = np.random.default_rng(seed)
    h, x1, x2 = cartesian_grid(size, half_width)
    r = np.hypot(x1, x2)
    psi = np.zeros((size, size))
    for _ in range(num_bumps):
        width = rng.uniform(0.35, 0.9)
        ang = rng.uniform(0, 2 * math.pi)
        rad = rng.uniform(2.5, 5.0) if p.gamma < 0 else 5.0 * math.sqrt(rng.uniform())
        cx, cy = rad * math.cos(ang), rad * math.sin(ang)
        psi += rng.normal() * np.exp(-((x1 - cx) ** 2 + (x2 - cy) ** 2) / (2 * width**2))
    psi *= 1.0 - _smoothstep((r - 0.75 * half_width) / (0.2 * half_width))
    if p.gamma < 0:
        psi *= _smoothstep(r - 1.0)
    return StreamField2D(psi, h, p.gamma)


def radial_stream_function(profile, gamma: float, size: int, half_width: float,
                           tau_min: float = -8.0, tau_max: float = 8.0,
                           samples: int = 20001) -> StreamField2D:
    """Radial psi whose velocity is azimuthal with u_phi = rho^-gamma profile(log rho).

    ``psi(r) = int_r^inf u_phi(s) ds`` so psi vanishes outside the support.
    """
    tau = np.linspace(tau_min, tau_max, samples)
    integrand = np.exp(tau * (1.0 - gamma)) * profile(tau)
    tail = cumulative_trapezoid(integrand[::-1], -tau[::-1], initial=0.0)[::-1]
    h, x1, x2 = cartesian_grid(size, half_width)
    r = np.hypot(x1, x2)
    psi = np.interp(np.log(r), tau, tail, left=tail[0], right=0.0)
    return StreamField2D(psi, h, gamma)


def _grad(a, h):
    return np.gradient(a, h, axis=0), np.gradient(a, h, axis=1)


def velocity(f: StreamField2D):
    """u = (d psi/d x2, -d psi/d x1) by centred differences."""
    d1, d2 = _grad(f.psi, f.spacing)
    return d2, -d1


def check_inequality_2d(f: StreamField2D) -> QuotientReport:
    """Weighted gradient energy over weighted L2 energy of u = curl psi."""
    h, g = f.spacing, f.gamma
    u1, u2 = velocity(f)
    r2 = f.radius ** 2
    lhs = np.sum(r2 ** (g - 1.0) * (u1**2 + u2**2)) * h * h
    if lhs == 0:
        raise ZeroFieldError("u vanishes identically")
    grad_u = sum(d**2 for comp in (u1, u2) for d in _grad(comp, h))
    rhs = np.sum(r2**g * grad_u) * h * h
    return QuotientReport(float(rhs), float(lhs), 1.0 / sharp_constant(Params(2, g)).c)


def check_corollary2(f: StreamField2D) -> QuotientReport:
    """The same functional written with the Hessian of psi."""
    h, g = f.spacing, f.gamma
    p1, p2 = _grad(f.psi, h)
    p11, p12 = _grad(p1, h)
    p22 = np.gradient(p2, h, axis=1)
    r2 = f.radius ** 2
    lhs = np.sum(r2 ** (g - 1.0) * (p1**2 + p2**2)) * h * h
    if lhs == 0:
        raise ZeroFieldError("grad psi vanishes identically")
    rhs = np.sum(r2**g * (p11**2 + 2 * p12**2 + p22**2)) * h * h
    return QuotientReport(float(rhs), float(lhs), 1.0 / sharp_constant(Params(2, g)).c)


# ------------------------------------------------------------------ sweeps


class Route(str, enum.Enum):
    CLOSED_FORM = "ClosedForm"
    SPECTRAL_ORACLE = "SpectralOracle"
    FIELD_QUOTIENT = "FieldQuotient"

    def __str__(self) -> str:
        return self.value


ROUTE_TOLERANCE = {
    Route.CLOSED_FORM: 1e-12,
    Route.SPECTRAL_ORACLE: 1e-6,
    Route.FIELD_QUOTIENT: 0.05,
}

REPORT_COLUMNS = ("n", "gamma", "route", "C_value", "target", "deviation", "branch", "grid", "pass")


def thread_count() -> int:
    try:
        return max(1, int(os.environ.get("HARDY_LERAY_THREADS", "1")))
    except ValueError:
        return 1


def ordered_map(fn, items: Sequence):
    """map() in input order, spread over HARDY_LERAY_THREADS workers."""
    workers = thread_count()
    if workers == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


@dataclass(frozen=True)
class SweepSettings:
    k: float = 16.0
    k_max: float = 512.0
    nt: int = 2048
    n_theta: int = 256
    lambda_max: float = 10.0
    nu_max: int = 64
    lambda_grid: int = 2001


def _field_route(p: Params, target_c: float, s: SweepSettings):
    """Minimizing-sequence estimate of C, doubling k until within tolerance."""
    kind = default_kind(p)
    k = s.k
    while True:
        spec = MinimizingSequenceSpec(kind, k, p)
        rep = minimizing_quotient(spec, nt=s.nt, n_theta=s.n_theta)
        c_val = 1.0 / (p.radial_term + rep.value)
        dev = abs(c_val / target_c - 1.0)
        if dev <= ROUTE_TOLERANCE[Route.FIELD_QUOTIENT] or 2 * k > s.k_max:
            grid = sequence_grid(spec, nt=s.nt, n_theta=s.n_theta).describe()
            return c_val, f"{grid} k={k:g} {kind}"
        k *= 2


def _sweep_row(n: int, gamma: float, routes: Sequence[Route], s: SweepSettings) -> list[dict]:
    try:
        p = Params(n, gamma)
    except ValueError as exc:
        return [dict(n=n, gamma=gamma, route=str(r), C_value=math.nan, target=math.nan,
                     deviation=math.nan, branch=f"ERROR: {exc}", grid="", **{"pass": False})
                for r in routes]
    br = sharp_constant(p)
    rows = []
    for route in routes:
        try:
            if route is Route.CLOSED_FORM:
                c_val, grid = br.c, "closed-form"
            elif route is Route.SPECTRAL_ORACLE:
                m = brute_force_search(p, s.lambda_max, s.nu_max, s.lambda_grid)
                c_val = 1.0 / (p.radial_term + m.value)
                grid = f"lambda[0,{s.lambda_max:g}]x{s.lambda_grid} nu<={s.nu_max}"
            else:
                c_val, grid = _field_route(p, br.c, s)
            dev = abs(c_val / br.c - 1.0)
            ok = dev <= ROUTE_TOLERANCE[route]
            rows.append(dict(n=n, gamma=gamma, route=str(route), C_value=c_val, target=br.c,
                             deviation=dev, branch=str(br.branch), grid=grid, **{"pass": ok}))
        except Exception as exc:  # a failing row must not abort the sweep
            rows.append(dict(n=n, gamma=gamma, route=str(route), C_value=math.nan,
                             target=br.c, deviation=math.nan,
                             branch=f"ERROR: {type(exc).__name__}: {exc}", grid="",
                             **{"pass": False}))
    return rows


def sweep_report(p_list: Iterable, routes: Iterable, settings: SweepSettings | None = None) -> list[dict]:
    """One row per (params, route) with C, deviation from the closed form, pass flag.

    ``p_list`` holds :class:`Params` or raw ``(n, gamma)`` pairs; the latter
    may include excluded exponents, which come back as error rows.
    """
    routes = [Route(r) for r in routes]
    if not routes:
        raise ValueError("no routes requested")
    pairs = [(q.n, q.gamma) if isinstance(q, Params) else (int(q[0]), float(q[1])) for q in p_list]
    if not pairs:
        raise ValueError("empty parameter list")
    s = settings or SweepSettings()
    chunks = ordered_map(lambda ng: _sweep_row(ng[0], ng[1], routes, s), pairs)
    return [row for chunk in chunks for row in chunk]


def classical_and_sharp(p: Params) -> tuple[float, float]:
    return classical_constant(p), sharp_constant(p).c
