"""Discretized operators on the (t = log rho, theta) plane for n > 2.

Fields are stored after the substitution ``v = u |x|^(gamma - 1 + n/2)`` as
arrays of shape ``(nt, n_theta)``.  The t-axis is a uniform periodic grid
handled with the FFT; the polar angle uses Gauss-Legendre nodes on (0, pi)
with the weight ``sin(theta)^(n-2)`` folded into the quadrature weights.

Profiles that vanish at the poles are differentiated through the
factorization ``f = sin(theta) g``, which removes the ``cot`` and ``1/sin^2``
singularities analytically before any numerical differentiation.
"""

from __future__ import annotations

import csv
import functools
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from numpy.polynomial import legendre as npleg
from scipy.special import gammaln

from .constants import Params
from .spectral import total_infimum

#: |cot(theta) f| / max|f| allowed on the two outermost nodes at each pole.
POLE_BOUND = 25.0
#: relative size a field may keep on the first/last t-sample.
DECAY_TOL = 1e-8
PLANCHEREL_RTOL = 1e-10


class PoleSingularityError(ValueError):
    pass


class GridTooNarrowError(ValueError):
    pass


class ZeroFieldError(ValueError):
    pass


def wallis_integral(m: float) -> float:
    """int_0^pi sin(theta)^m d theta."""
    return math.sqrt(math.pi) * math.exp(gammaln((m + 1) / 2) - gammaln(m / 2 + 1))


def sphere_area(d: int) -> float:
    """Surface measure of the unit sphere S^d in R^(d+1)."""
    return 2.0 * math.pi ** ((d + 1) / 2) / math.exp(gammaln((d + 1) / 2))


@functools.lru_cache(maxsize=16)
def _legendre_diff_matrix(n_theta: int) -> np.ndarray:
    # Differentiate the interpolating polynomial through the nodes.  The
    # modal transform is the exact inverse of the Vandermonde matrix, not the
    # quadrature-based one, which is off by ~1e-12 at degree 255 and spoils
    # second derivatives near the poles.
    y, _ = npleg.leggauss(n_theta)
    vander = npleg.legvander(y, n_theta - 1)
    deriv = np.zeros((n_theta, n_theta))
    for k in range(1, n_theta):
        e = np.zeros(k + 1)
        e[k] = 1.0
        dk = npleg.legder(e)
        deriv[: dk.size, k] = dk
    mat = vander @ deriv @ np.linalg.inv(vander)
    return mat * (2.0 / math.pi)


def _fornberg_weights(x0: float, x: np.ndarray, order: int = 1) -> np.ndarray:
    """Finite-difference weights for the ``order``-th derivative at ``x0``."""
    npts = len(x)
    c = np.zeros((npts, order + 1))
    c1, c4 = 1.0, x[0] - x0
    c[0, 0] = 1.0
    for i in range(1, npts):
        mn = min(i, order)
        c2, c5, c4 = 1.0, c4, x[i] - x0
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c[:, order]


@functools.lru_cache(maxsize=16)
def _fd4_diff_matrix(n_theta: int) -> np.ndarray:
    y, _ = npleg.leggauss(n_theta)
    theta = (y + 1.0) * math.pi / 2.0
    mat = np.zeros((n_theta, n_theta))
    for i in range(n_theta):
        lo = min(max(i - 2, 0), n_theta - 5)
        idx = np.arange(lo, lo + 5)
        mat[i, idx] = _fornberg_weights(theta[i], theta[idx])
    return mat


@dataclass(frozen=True, eq=False)
class ThetaGrid:
    """Gauss-Legendre nodes on (0, pi) with ``sin^(n-2)`` folded into the weights."""

    n: int
    n_theta: int = 256
    diff: str = "spectral"
    nodes: np.ndarray = field(init=False, repr=False)
    weights: np.ndarray = field(init=False, repr=False)
    sin: np.ndarray = field(init=False, repr=False)
    cos: np.ndarray = field(init=False, repr=False)
    dmat: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.n < 3:
            raise ValueError("the theta machinery is for n > 2")
        if self.n_theta < 5:
            raise ValueError("need at least 5 theta nodes")
        y, w = npleg.leggauss(self.n_theta)
        theta = (y + 1.0) * math.pi / 2.0
        s = np.sin(theta)
        weights = w * (math.pi / 2.0) * s ** (self.n - 2)
        exact = wallis_integral(self.n - 2)
        if abs(weights.sum() - exact) > 1e-10 * exact:
            raise ValueError(f"theta quadrature misses the Wallis integral: "
                             f"{weights.sum()!r} vs {exact!r}")
        if self.diff == "spectral":
            dmat = _legendre_diff_matrix(self.n_theta)
        elif self.diff == "fd4":
            dmat = _fd4_diff_matrix(self.n_theta)
        else:
            raise ValueError(f"unknown theta differentiation {self.diff!r}")
        for name, val in [("nodes", theta), ("weights", weights), ("sin", s),
                          ("cos", np.cos(theta)), ("dmat", dmat)]:
            val.setflags(write=False)
            object.__setattr__(self, name, val)

    def derivative(self, f: np.ndarray) -> np.ndarray:
        """d/d theta along the last axis."""
        return f @ self.dmat.T

    def integrate(self, f: np.ndarray) -> np.ndarray:
        """int_0^pi f sin^(n-2) d theta along the last axis."""
        return f @ self.weights

    def check_pole_vanishing(self, f: np.ndarray, bound: float = POLE_BOUND, name: str = "profile"):
        f = np.asarray(f)
        scale = np.abs(f).max()
        if scale == 0:
            return
        idx = [0, 1, self.n_theta - 2, self.n_theta - 1]
        cot_f = np.abs(f[..., idx] * (self.cos[idx] / self.sin[idx]))
        if cot_f.max() > bound * scale:
            raise PoleSingularityError(
                f"{name} does not vanish at the poles: |cot(theta) f| reaches "
                f"{cot_f.max() / scale:.3g} x max|f| (bound {bound:g})")


def d_op(f: np.ndarray, tg: ThetaGrid, check: bool = True) -> np.ndarray:
    """(d/d theta + (n-2) cot theta) f for a pole-vanishing profile ``f``.

    Operates on the last axis; complex input is fine.
    """
    if check:
        tg.check_pole_vanishing(f)
    g = f / tg.sin
    return (tg.n - 1) * tg.cos * g + tg.sin * tg.derivative(g)


def t_op(f: np.ndarray, tg: ThetaGrid, form: str = "composition", check: bool = True) -> np.ndarray:
    """The self-adjoint polar operator T = -d/d theta D.

    ``form="composition"`` differentiates ``D f`` numerically;
    ``form="laplace_beltrami"`` uses ``-delta_theta + (n-2)/sin^2`` rewritten
    for ``f = sin(theta) g`` as ``sin((n-1) g - g'') - n cos g'``.
    """
    if form == "composition":
        return -tg.derivative(d_op(f, tg, check=check))
    if form == "laplace_beltrami":
        if check:
            tg.check_pole_vanishing(f)
        g = f / tg.sin
        dg = tg.derivative(g)
        return tg.sin * ((tg.n - 1) * g - tg.derivative(dg)) - tg.n * tg.cos * dg
    raise ValueError(f"unknown form {form!r}")


def t_matrix(tg: ThetaGrid) -> np.ndarray:
    """Dense matrix of the composition form of T acting on nodal values."""
    eye = np.eye(tg.n_theta)
    return t_op(eye, tg, check=False).T


def t_spectrum(tg: ThetaGrid, count: int = 5) -> np.ndarray:
    """Lowest ``count`` eigenvalues of the discretized T.

    The discrete matrix also carries a null mode with ``D f = 0`` on the
    nodes: a pole-growing profile at large node counts, a node-to-node
    sawtooth at small ones.  The continuous T has no kernel on profiles
    vanishing at the poles (``<Tf, f> = |Df|^2`` and ``Df = 0`` forces
    ``f ~ sin^(2-n)``), so both the pole test and a near-zero cut drop it.
    """
    vals, vecs = np.linalg.eig(t_matrix(tg))
    floor = 1e-6 * (tg.n - 1)  # far below the lowest true eigenvalue n - 1
    keep = []
    for lam, vec in zip(vals, vecs.T):
        if abs(lam.imag) > 1e-8 * max(1.0, abs(lam.real)):
            continue
        if abs(lam.real) <= floor:
            continue
        try:
            tg.check_pole_vanishing(vec.real)
        except PoleSingularityError:
            continue
        keep.append(lam.real)
    keep.sort()
    return np.array(keep[:count])


@dataclass(frozen=True, eq=False)
class LogRadialGrid:
    """Uniform periodic t-grid times a Gauss-Legendre theta-grid."""

    n: int
    t_min: float = -12.0
    t_max: float = 12.0
    nt: int = 1024
    n_theta: int = 256
    theta_diff: str = "spectral"
    theta: ThetaGrid = field(init=False, repr=False)
    t: np.ndarray = field(init=False, repr=False)
    lambdas: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.nt < 8 or self.nt & (self.nt - 1):
            raise ValueError(f"nt must be a power of two >= 8, got {self.nt}")
        if not self.t_max > self.t_min:
            raise ValueError("need t_max > t_min")
        object.__setattr__(self, "theta", ThetaGrid(self.n, self.n_theta, self.theta_diff))
        dt = (self.t_max - self.t_min) / self.nt
        object.__setattr__(self, "t", self.t_min + dt * np.arange(self.nt))
        object.__setattr__(self, "lambdas", 2.0 * math.pi * np.fft.fftfreq(self.nt, dt))

    @property
    def dt(self) -> float:
        return (self.t_max - self.t_min) / self.nt

    @property
    def dlam(self) -> float:
        return 2.0 * math.pi / (self.t_max - self.t_min)

    @property
    def sphere_factor(self) -> float:
        """|S^(n-2)|; cancels in every quotient."""
        return sphere_area(self.n - 2)

    @property
    def theta_nodes(self) -> np.ndarray:
        return self.theta.nodes

    @property
    def theta_weights(self) -> np.ndarray:
        return self.theta.weights

    def describe(self) -> str:
        return f"{self.nt}x{self.n_theta} t[{self.t_min:g},{self.t_max:g}]"

    def fourier(self, f: np.ndarray) -> np.ndarray:
        """Unitary Fourier transform in t (axis 0), sampled at ``lambdas``."""
        phase = np.exp(-1j * self.lambdas * self.t_min)[:, None]
        return np.fft.fft(f, axis=0) * phase * (self.dt / math.sqrt(2.0 * math.pi))

    def inverse_fourier(self, w: np.ndarray) -> np.ndarray:
        phase = np.exp(1j * self.lambdas * self.t_min)[:, None]
        return np.fft.ifft(w * phase, axis=0) * (math.sqrt(2.0 * math.pi) / self.dt)

    def _nyquist(self) -> np.ndarray:
        mask = np.zeros(self.nt, dtype=bool)
        mask[self.nt // 2] = True
        return mask

    def t_derivative(self, f: np.ndarray) -> np.ndarray:
        """Spectral d/dt along axis 0 (Nyquist mode dropped)."""
        mult = 1j * self.lambdas
        mult[self._nyquist()] = 0.0
        out = np.fft.ifft(mult[:, None] * np.fft.fft(f, axis=0), axis=0)
        return out.real if np.isrealobj(f) else out

    def integrate(self, f: np.ndarray) -> float:
        """|S^(n-2)| * int int f sin^(n-2) d theta dt."""
        return float(self.sphere_factor * self.dt * self.theta.integrate(f).sum())

    def integrate_spectral(self, f: np.ndarray) -> float:
        return float(self.sphere_factor * self.dlam * self.theta.integrate(f).sum())


@dataclass(eq=False)
class AxisymFieldV:
    """Reduced field v on a :class:`LogRadialGrid`; arrays are (nt, n_theta)."""

    grid: LogRadialGrid
    v_rho: np.ndarray
    v_theta: np.ndarray
    v_phi: np.ndarray
    gamma: float
    check: bool = True

    def __post_init__(self):
        shape = (self.grid.nt, self.grid.n_theta)
        for name in ("v_rho", "v_theta", "v_phi"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != shape:
                raise ValueError(f"{name} has shape {arr.shape}, expected {shape}")
            setattr(self, name, arr)
        self.params  # validates gamma
        if self.check:
            self.grid.theta.check_pole_vanishing(self.v_theta, name="v_theta")
            self.grid.theta.check_pole_vanishing(self.v_phi, name="v_phi")
            self.check_decay()

    @property
    def params(self) -> Params:
        return Params(self.grid.n, self.gamma)

    def check_decay(self, tol: float = DECAY_TOL):
        scale = max(np.abs(a).max() for a in (self.v_rho, self.v_theta, self.v_phi))
        if scale == 0:
            return
        edge = max(np.abs(a[[0, -1]]).max() for a in (self.v_rho, self.v_theta, self.v_phi))
        if edge > tol * scale:
            raise GridTooNarrowError(
                f"field is {edge / scale:.2e} of its maximum at the t-boundary "
                f"(limit {tol:g}); widen [t_min, t_max]")

    def scaled(self, c: float) -> "AxisymFieldV":
        return AxisymFieldV(self.grid, c * self.v_rho, c * self.v_theta, c * self.v_phi,
                            self.gamma, check=False)


@dataclass(eq=False)
class SpectralField:
    grid: LogRadialGrid
    w_rho: np.ndarray
    w_theta: np.ndarray
    w_phi: np.ndarray

    @property
    def lambdas(self) -> np.ndarray:
        return self.grid.lambdas


def to_spectral(v: AxisymFieldV) -> SpectralField:
    g = v.grid
    return SpectralField(g, g.fourier(v.v_rho), g.fourier(v.v_theta), g.fourier(v.v_phi))


@dataclass(frozen=True)
class QuotientReport:
    numerator: float
    denominator: float
    target: float

    @property
    def value(self) -> float:
        return self.numerator / self.denominator

    @property
    def gap(self) -> float:
        """Relative excess of the quotient over its target."""
        return self.value / self.target - 1.0

    def passes(self, eps: float) -> bool:
        return self.value >= self.target * (1.0 - eps)


def divergence_residual(v: AxisymFieldV) -> np.ndarray:
    """d_t v_rho + (n/2 - gamma) v_rho + D v_theta, zero iff div u = 0."""
    g = v.grid
    c = g.n / 2.0 - v.gamma
    return g.t_derivative(v.v_rho) + c * v.v_rho + d_op(v.v_theta, g.theta)


def solve_v_rho(v_theta: np.ndarray, p: Params, grid: LogRadialGrid) -> np.ndarray:
    """Radial component making (v_rho, v_theta) divergence-free.

    Frequency by frequency, ``w_rho = -D w_theta / (i lambda + n/2 - gamma)``.
    """
    if p.n != grid.n:
        raise ValueError("params and grid disagree on n")
    c = p.n / 2.0 - p.gamma
    dv = np.fft.fft(d_op(np.asarray(v_theta, dtype=float), grid.theta), axis=0)
    lam = grid.lambdas.copy()
    lam[grid._nyquist()] = 0.0  # consistent with the truncated t-derivative
    den = 1j * lam + c
    zero = den == 0
    if zero.any():
        if np.abs(dv[zero]).max() > 1e-12 * max(np.abs(dv).max(), 1e-300):
            raise ZeroDivisionError(
                "gamma = n/2 and the lambda = 0 mode of D v_theta does not vanish")
        den[zero] = 1.0
    return np.fft.ifft(-dv / den[:, None], axis=0).real


def gradient_density(n, vr, vt, vp, dt_vr, dt_vt, dt_vp, dth_vr, dth_vt, dth_vp, sin, cos):
    """rho^2 |grad v|^2 for an axisymmetric field, from components and derivatives.

    ``dt_*`` are rho d/d rho = d/dt, ``dth_*`` are d/d theta.  Plain
    arithmetic only, so it accepts scalars as well as arrays.
    """
    cot_vt = cos * (vt / sin)
    d_vt = dth_vt + (n - 2) * cot_vt
    poloidal = (dt_vr ** 2 + dt_vt ** 2 + dth_vr ** 2 + dth_vt ** 2
                + vt ** 2 + (n - 1) * vr ** 2 + (n - 2) * cot_vt ** 2
                + 2.0 * (vr * d_vt - vt * dth_vr))
    azimuthal = dt_vp ** 2 + dth_vp ** 2 + (n - 2) * (vp / sin) ** 2
    return poloidal + azimuthal


def gradient_energy(v: AxisymFieldV) -> float:
    """int |grad v|^2 / |x|^(n-2) dx from the pointwise t-space expansion."""
    g, tg = v.grid, v.grid.theta
    vr, vt, vp = v.v_rho, v.v_theta, v.v_phi
    if v.check:
        tg.check_pole_vanishing(vt, name="v_theta")
        tg.check_pole_vanishing(vp, name="v_phi")
    dens = gradient_density(g.n, vr, vt, vp,
                            g.t_derivative(vr), g.t_derivative(vt), g.t_derivative(vp),
                            tg.derivative(vr), tg.derivative(vt), tg.derivative(vp),
                            tg.sin, tg.cos)
    return g.integrate(dens)


def _azimuthal_spectral(w_phi, lam2, tg: ThetaGrid):
    return (lam2 * np.abs(w_phi) ** 2 + np.abs(tg.derivative(w_phi)) ** 2
            + (tg.n - 2) * np.abs(w_phi / tg.sin) ** 2)


def gradient_energy_spectral(v: AxisymFieldV, form: str = "eliminated") -> float:
    """The same energy evaluated on the Fourier side.

    ``"full"`` uses both transformed components; ``"eliminated"`` rebuilds
    everything from ``w_theta`` alone via the divergence constraint (so it
    only matches :func:`gradient_energy` for divergence-free fields);
    ``"forms"`` is the eliminated energy written with the operator T.
    """
    g, tg = v.grid, v.grid.theta
    n, gam = g.n, v.gamma
    w = to_spectral(v)
    lam2 = (g.lambdas ** 2)[:, None]
    wt = w.w_theta
    if form == "full":
        wr = w.w_rho
        dens = ((lam2 + n - 1) * np.abs(wr) ** 2 + (lam2 - n + 3) * np.abs(wt) ** 2
                + np.abs(tg.derivative(wr)) ** 2 + np.abs(tg.derivative(wt)) ** 2
                + (n - 2) * np.abs(wt / tg.sin) ** 2
                + 4.0 * np.real(np.conj(wr) * d_op(wt, tg, check=False)))
    elif form in ("eliminated", "forms"):
        c = n / 2.0 - gam
        dl = lam2 + c ** 2
        if np.any(dl == 0):
            raise ZeroDivisionError("lambda = 0 with gamma = n/2")
        if form == "eliminated":
            dw = d_op(wt, tg, check=False)
            dens = ((lam2 + n - 1) * np.abs(dw) ** 2 / dl + (lam2 - n + 3) * np.abs(wt) ** 2
                    + np.abs(tg.derivative(wt)) ** 2 + (n - 2) * np.abs(wt / tg.sin) ** 2
                    + np.abs(tg.derivative(dw)) ** 2 / dl - 4.0 * c * np.abs(dw) ** 2 / dl)
        else:
            tw = t_op(wt, tg, check=False)
            dens = (((-n - 1 + lam2 + 4 * gam) / dl + 1.0) * np.real(tw * np.conj(wt))
                    + (lam2 - n + 3) * np.abs(wt) ** 2 + np.abs(tw) ** 2 / dl)
    else:
        raise ValueError(f"unknown form {form!r}")
    dens = dens + _azimuthal_spectral(w.w_phi, lam2, tg)
    return g.integrate_spectral(dens)


def weight_energy_spectral(v: AxisymFieldV) -> float:
    w = to_spectral(v)
    dens = np.abs(w.w_rho) ** 2 + np.abs(w.w_theta) ** 2 + np.abs(w.w_phi) ** 2
    return v.grid.integrate_spectral(dens)


def weight_energy(v: AxisymFieldV, check_plancherel: bool = True) -> float:
    """int |v|^2 / |x|^n dx, optionally cross-checked on the Fourier side."""
    val = v.grid.integrate(v.v_rho ** 2 + v.v_theta ** 2 + v.v_phi ** 2)
    if check_plancherel:
        spec = weight_energy_spectral(v)
        if abs(spec - val) > PLANCHEREL_RTOL * max(abs(val), 1e-300):
            raise ArithmeticError(f"Plancherel mismatch: {val!r} vs {spec!r}")
    return val


def rayleigh_quotient(v: AxisymFieldV) -> QuotientReport:
    """Gradient energy over weight energy, against the reduced infimum."""
    den = weight_energy(v)
    if den == 0:
        raise ZeroFieldError("the field is identically zero")
    return QuotientReport(gradient_energy(v), den, total_infimum(v.params))


FIELD_CSV_COLUMNS = ("t", "theta", "v_rho", "v_theta", "v_phi")


def write_field_csv(v: AxisymFieldV, path) -> None:
    g = v.grid
    tt, th = np.meshgrid(g.t, g.theta_nodes, indexing="ij")
    cols = [tt, th, v.v_rho, v.v_theta, v.v_phi]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(FIELD_CSV_COLUMNS)
        for row in zip(*(c.ravel() for c in cols)):
            w.writerow([repr(float(x)) for x in row])


def read_field_csv(path, grid: LogRadialGrid, gamma: float) -> AxisymFieldV:
    data = np.loadtxt(Path(path), delimiter=",", skiprows=1)
    shape = (grid.nt, grid.n_theta)
    if data.shape != (shape[0] * shape[1], len(FIELD_CSV_COLUMNS)):
        raise ValueError("CSV does not match the grid")
    return AxisymFieldV(grid, data[:, 2].reshape(shape), data[:, 3].reshape(shape),
                        data[:, 4].reshape(shape), gamma)
