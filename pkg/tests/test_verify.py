import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hardy_leray.constants import SQRT3, Params, sharp_constant
from hardy_leray.operators import GridTooNarrowError, ZeroFieldError, divergence_residual
from hardy_leray.spectral import total_infimum
from hardy_leray.verify import (REPORT_COLUMNS, MinimizingSequenceSpec, PolarField2D,
                                PolarGrid, Route, SequenceKind, StreamField2D, SweepSettings,
                                build_minimizing_field, cartesian_grid, check_corollary2,
                                check_inequality_2d, default_kind, field_quotient,
                                minimizing_quotient, polar_divergence_residual,
                                polar_rayleigh_quotient, polar_solve_v_rho,
                                radial_stream_function, random_divfree_2d, sequence_grid,
                                sweep_report, velocity)


def f_x_at_first_mode(n, g):
    """d f / d x at x = 0, alpha = n - 1 (hand derivative of the reduced function)."""
    a, d = n - 1, (n - 2 * g) ** 2
    return 1 + 64 * a * (1 - g) / (4 * a + d) ** 2


# -------------------------------------------------------------- sequences


def test_spec_validation():
    with pytest.raises(ValueError):
        MinimizingSequenceSpec(SequenceKind.POLOIDAL_N3PLUS, 0.5, Params(3, 0))
    with pytest.raises(ValueError):
        MinimizingSequenceSpec(SequenceKind.TWOD_NU_ONE, 4, Params(3, 0))
    with pytest.raises(ValueError):
        MinimizingSequenceSpec(SequenceKind.AZIMUTHAL_N3PLUS, 4, Params(2, 1))
    assert MinimizingSequenceSpec("TwoD_NuZero", 2, Params(2, 2)).kind is SequenceKind.TWOD_NU_ZERO


def test_default_kind():
    assert default_kind(Params(3, 0)) is SequenceKind.POLOIDAL_N3PLUS
    assert default_kind(Params(3, 2)) is SequenceKind.AZIMUTHAL_N3PLUS
    assert default_kind(Params(2, -1)) is SequenceKind.TWOD_NU_ONE
    assert default_kind(Params(2, 2)) is SequenceKind.TWOD_NU_ZERO


def test_poloidal_k8_gap_matches_prediction():
    p = Params(3, 0)
    rep = minimizing_quotient(MinimizingSequenceSpec(SequenceKind.POLOIDAL_N3PLUS, 8, p),
                              n_theta=64)
    excess = rep.value - rep.target
    predicted = f_x_at_first_mode(3, 0) / (2 * 8**2)
    assert excess > 0
    assert abs(excess / predicted - 1) < 0.01
    c_field = 1 / (p.radial_term + rep.value)
    assert abs(c_field / sharp_constant(p).c - 1) < 0.05


def test_poloidal_field_is_divergence_free():
    spec = MinimizingSequenceSpec(SequenceKind.POLOIDAL_N3PLUS, 4, Params(3, 0.4))
    v = build_minimizing_field(spec, sequence_grid(spec, nt=512, n_theta=48))
    assert np.abs(divergence_residual(v)).max() < 1e-8 * np.abs(v.v_theta).max()


def test_azimuthal_sequence_stops_at_n_minus_1():
    # with gamma <= 1 the azimuthal family converges to n - 1, not to the sharp value
    p = Params(3, 0)
    rep = minimizing_quotient(MinimizingSequenceSpec(SequenceKind.AZIMUTHAL_N3PLUS, 16, p),
                              n_theta=64)
    assert abs(rep.value - 2) < 0.01
    assert rep.value > 10 * total_infimum(p)


@pytest.mark.parametrize("kind, n, g", [("PoloidalN3plus", 4, 1.2), ("AzimuthalN3plus", 5, 3.0),
                                        ("TwoD_NuOne", 2, 0.5), ("TwoD_NuZero", 2, -4.0)])
def test_sequences_decrease_from_above(kind, n, g):
    p = Params(n, g)
    vals = [minimizing_quotient(MinimizingSequenceSpec(kind, k, p), nt=1024, n_theta=48).value
            for k in (4, 8, 16)]
    target = total_infimum(p)
    assert all(v >= target * (1 - 1e-9) for v in vals)
    assert vals[0] > vals[1] > vals[2]


def test_two_d_nu_one_phase_invariant():
    p = Params(2, -1)
    a = minimizing_quotient(MinimizingSequenceSpec("TwoD_NuOne", 8, p, phi0=0.0)).value
    b = minimizing_quotient(MinimizingSequenceSpec("TwoD_NuOne", 8, p, phi0=1.1)).value
    assert abs(a - b) < 1e-10 * a


def test_two_d_fields_divergence_free():
    spec = MinimizingSequenceSpec("TwoD_NuOne", 4, Params(2, -1), phi0=0.3)
    f = build_minimizing_field(spec)
    assert np.abs(polar_divergence_residual(f)).max() < 1e-10 * np.abs(f.v_phi).max()


def test_polar_singular_frequency():
    g = PolarGrid(-20, 20, 256)
    v_phi = np.exp(-0.5 * g.t**2)[:, None] * np.cos(g.phi)[None, :]
    with pytest.raises(ZeroDivisionError):
        polar_solve_v_rho(v_phi, 1.0, g)


def test_polar_field_checks():
    g = PolarGrid(-5, 5, 64)
    wide = np.ones((64, g.n_phi))
    with pytest.raises(GridTooNarrowError):
        PolarField2D(g, wide, wide, 2.0)
    zero = np.zeros((64, g.n_phi))
    with pytest.raises(ZeroFieldError):
        polar_rayleigh_quotient(PolarField2D(g, zero, zero, 2.0))
    with pytest.raises(ValueError):
        PolarGrid(nt=100)


@settings(max_examples=15, deadline=None)
@given(st.floats(-3, 3))
def test_translation_invariance(shift):
    p = Params(2, -1)
    g = PolarGrid(-64, 64, 1024)
    prof = np.exp(-0.5 * ((g.t - shift) / 4) ** 2)[:, None]
    base = np.exp(-0.5 * (g.t / 4) ** 2)[:, None]
    qs = []
    for h in (prof, base):
        v_phi = h * np.cos(g.phi)[None, :]
        qs.append(polar_rayleigh_quotient(PolarField2D(g, polar_solve_v_rho(v_phi, -1, g),
                                                       v_phi, -1.0)).value)
    assert abs(qs[0] - qs[1]) < 1e-9 * qs[1]


# ---------------------------------------------------------- stream functions


def test_stream_field_validation():
    with pytest.raises(ValueError):
        StreamField2D(np.zeros((5, 5)), 0.1, 1.0)
    with pytest.raises(ValueError):
        StreamField2D(np.zeros((4, 6)), 0.1, 1.0)
    with pytest.raises(ValueError):
        StreamField2D(np.zeros((4, 4)), 0.1, 0.0)


def test_grid_avoids_origin():
    h, x1, _ = cartesian_grid(64, 4.0)
    assert np.abs(x1).min() == pytest.approx(h / 2)


def test_random_stream_divergence_free():
    f = random_divfree_2d(4, 3, Params(2, 1))
    u1, u2 = velocity(f)
    h = f.spacing
    div = np.gradient(u1, h, axis=0) + np.gradient(u2, h, axis=1)
    assert np.abs(div).max() < 1e-10 * np.abs(u1).max() / h


def test_random_stream_deterministic():
    a = random_divfree_2d(11, 3, Params(2, 0.5))
    b = random_divfree_2d(11, 3, Params(2, 0.5))
    c = random_divfree_2d(12, 3, Params(2, 0.5))
    assert np.array_equal(a.psi, b.psi)
    assert not np.array_equal(a.psi, c.psi)


@pytest.mark.parametrize("seed", range(5))
def test_random_stream_flat_at_origin(seed):
    f = random_divfree_2d(seed, 3, Params(2, -1))
    u1, u2 = velocity(f)
    centre = f.radius < 2 * f.spacing
    scale = np.hypot(u1, u2).max()
    assert np.hypot(u1, u2)[centre].max() <= 1e-10 * scale


def test_random_stream_compact_support():
    f = random_divfree_2d(2, 4, Params(2, 1))
    edge = np.concatenate([f.psi[:8].ravel(), f.psi[-8:].ravel(), f.psi[:, :8].ravel(),
                           f.psi[:, -8:].ravel()])
    assert np.all(edge == 0)


def test_single_bump_gamma_one():
    h, x1, x2 = cartesian_grid(320, 10.0)
    psi = np.exp(-((x1 - 3) ** 2 + (x2 + 1) ** 2) / (2 * 0.6**2))
    f = StreamField2D(psi, h, 1.0)
    rep = check_inequality_2d(f)
    assert rep.target == pytest.approx(2.0)
    assert rep.value >= 2.0


@given(st.floats(-50, 50).filter(lambda c: abs(c) > 1e-3))
@settings(max_examples=20, deadline=None)
def test_scaling_invariance_2d(c):
    f = random_divfree_2d(3, 2, Params(2, 2), size=96, half_width=8)
    a, b = check_inequality_2d(f).value, check_inequality_2d(f.scaled(c)).value
    assert abs(a - b) <= 1e-12 * a


@pytest.mark.parametrize("g", [-1.0, 0.5, 1.0, 2.0])
def test_hessian_route_matches_vector_route(g):
    for seed in range(3):
        f = random_divfree_2d(seed, 3, Params(2, g))
        a, b = check_inequality_2d(f), check_corollary2(f)
        assert abs(a.value / b.value - 1) <= 1e-6
        assert a.target == b.target == 1 / sharp_constant(Params(2, g)).c


def test_zero_stream_function():
    f = StreamField2D(np.zeros((16, 16)), 0.1, 1.0)
    with pytest.raises(ZeroFieldError):
        check_inequality_2d(f)
    with pytest.raises(ZeroFieldError):
        check_corollary2(f)


def test_radial_stream_function_nu_zero():
    # exact finite-width value: gamma^2 + 1 + <lambda^2>, <lambda^2> = 1/(2 sigma^2)
    sigma = 0.5
    f = radial_stream_function(lambda t: np.exp(-0.5 * (t / sigma) ** 2), 2.0, 1200, 15.0)
    rep = check_inequality_2d(f)
    predicted = 2.0**2 + 1 + 1 / (2 * sigma**2)
    assert abs(rep.value / predicted - 1) < 1e-3
    assert rep.value >= rep.target
    assert abs(check_corollary2(f).value / rep.value - 1) < 1e-6


def test_radial_stream_trend_toward_nu_zero_value():
    vals = []
    for sigma, hw, size in [(0.5, 15.0, 1200), (1.0, 60.0, 2000)]:
        f = radial_stream_function(lambda t: np.exp(-0.5 * (t / sigma) ** 2), 2.0, size, hw)
        vals.append(check_inequality_2d(f).value)
    assert vals[0] > vals[1] > 5.0


# ------------------------------------------------------------------ sweeps


def test_sweep_headline_row():
    rows = sweep_report([Params(3, 0)], list(Route), SweepSettings(n_theta=64))
    assert [r["route"] for r in rows] == ["ClosedForm", "SpectralOracle", "FieldQuotient"]
    assert all(tuple(r) == REPORT_COLUMNS for r in rows)
    assert rows[0]["C_value"] == pytest.approx(2.72, rel=1e-14)
    assert all(r["pass"] for r in rows)
    assert rows[1]["deviation"] <= 1e-6 and rows[2]["deviation"] <= 0.05


def test_sweep_two_d_branch_flip():
    gammas = np.linspace(-3.5, 1.5, 50)
    rows = sweep_report([(2, g) for g in gammas], ["ClosedForm", "SpectralOracle"])
    lo, hi = -1 - SQRT3, SQRT3 - 1
    for r in rows:
        inside = lo <= r["gamma"] <= hi
        assert r["branch"] == ("TwoD_NuOne" if inside else "TwoD_NuZero")
        assert r["pass"]


def test_sweep_errors():
    with pytest.raises(ValueError):
        sweep_report([Params(3, 0)], [])
    with pytest.raises(ValueError):
        sweep_report([], ["ClosedForm"])
    rows = sweep_report([(3, -0.5), (3, 0.0)], ["ClosedForm"])
    assert rows[0]["branch"].startswith("ERROR") and not rows[0]["pass"]
    assert math.isnan(rows[0]["C_value"])
    assert rows[1]["pass"]


def test_sweep_deterministic(monkeypatch):
    pairs = [(3, g) for g in (-1.0, 0.5, 2.0)] + [(2, -1.0)]
    a = sweep_report(pairs, ["ClosedForm", "SpectralOracle"])
    monkeypatch.setenv("HARDY_LERAY_THREADS", "3")
    b = sweep_report(pairs, ["ClosedForm", "SpectralOracle"])
    assert a == b


def test_field_route_doubles_k_near_forbidden():
    rows = sweep_report([(3, -0.45)], ["FieldQuotient"], SweepSettings(n_theta=64))
    assert rows[0]["pass"]
    assert "k=16" not in rows[0]["grid"]


def test_field_quotient_dispatch():
    spec = MinimizingSequenceSpec("TwoD_NuZero", 2, Params(2, 3))
    rep = field_quotient(build_minimizing_field(spec))
    assert rep.value >= 1.0
