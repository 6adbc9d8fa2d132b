"""Acceptance criteria, one test per criterion.

Each test records a single ``criterion N: PASS/FAIL`` line (see conftest.py);
the lines are repeated in the terminal summary. Run on its own with

    pytest tests/test_acceptance.py -v
"""
import math
import time

import numpy as np

from hardy_leray.cli import main
from hardy_leray.constants import (SQRT3, Params, improvement_ratio, sharp_constant,
                                   sharp_constant_3d)
from hardy_leray.operators import (LogRadialGrid, ThetaGrid, gradient_energy,
                                   gradient_energy_spectral, rayleigh_quotient, t_op, t_spectrum, weight_energy,
                                   weight_energy_spectral)
from hardy_leray.spectral import (SpectralPoint, brute_force_infimum, eigenvalue, f_axisym,
                                  reduced_quotient, total_infimum)
from hardy_leray.verify import (MinimizingSequenceSpec, SequenceKind, check_corollary2,
                                check_inequality_2d, minimizing_quotient, random_axisym_field,
                                random_divfree_2d)


def rel(a, b):
    return abs(a - b) / abs(b)


def forbidden(n):
    return 0.0 if n == 2 else 1 - n / 2


# ----------------------------------------------------------------------- 1


def test_criterion_1_headline(criterion):
    t0 = time.perf_counter()
    c = sharp_constant(Params(3, 0)).c
    r = improvement_ratio(Params(3, 0))
    ok = abs(c - 68 / 25) <= 1e-14 * 68 / 25 and abs(r - 17 / 25) <= 1e-14
    criterion(1, "headline constant", ok, f"C = {c!r}, ratio = {r!r}", time.perf_counter() - t0)


# ----------------------------------------------------------------------- 2


def test_criterion_2_formula_consistency(criterion):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2)
    pairs = []
    while len(pairs) < 500:
        n, g = int(rng.integers(3, 11)), float(rng.uniform(-5, 5))
        if abs(g - forbidden(n)) > 1e-6:
            pairs.append((n, g))
    # every pair gets a finite positive constant; n = 3 pairs use the 3D formula too
    worst3 = 0.0
    for n, g in pairs:
        c = sharp_constant(Params(n, g)).c
        assert c > 0 and math.isfinite(c)
        if n == 3:
            worst3 = max(worst3, rel(sharp_constant_3d(g), c))
    grid = np.linspace(-5, 5, 401)
    for g in grid[grid != -0.5]:
        worst3 = max(worst3, rel(sharp_constant_3d(g), sharp_constant(Params(3, g)).c))
    worst1 = max(rel(sharp_constant(Params(n, 1 + 1e-13)).c, sharp_constant(Params(n, 1.0)).c)
                 for n in range(3, 11))
    worst2 = 0.0
    for edge in (-SQRT3 - 1, SQRT3 - 1):
        nu_one = (1 + (1 - edge) ** 2) / (3 + (1 - edge) ** 2) / edge**2
        nu_zero = 1 / (edge**2 + 1)
        worst2 = max(worst2, rel(nu_one, nu_zero))
        for side in (-1e-12, 1e-12):
            worst2 = max(worst2, rel(sharp_constant(Params(2, edge + side)).c, nu_zero))
    ok = worst3 <= 1e-12 and worst1 <= 1e-10 and worst2 <= 1e-10
    criterion(2, "formula consistency", ok,
              f"3D {worst3:.1e}, gamma=1 {worst1:.1e}, 2D edges {worst2:.1e}",
              time.perf_counter() - t0)


# ----------------------------------------------------------------------- 3


def test_criterion_3_oracle_equivalence(criterion):
    t0 = time.perf_counter()
    rng = np.random.default_rng(3)
    params = []
    while len(params) < 50:
        n = int(rng.choice([2, 3, 4, 5, 8]))
        # alternate the gamma <= 1 and gamma > 1 branches
        g = float(rng.uniform(-5, 1) if len(params) % 2 == 0 else rng.uniform(1, 5))
        if abs(g - forbidden(n)) < 1e-3 or abs(g - n / 2) < 1e-3:
            continue
        params.append(Params(n, g))
    worst = max(rel(brute_force_infimum(p, 10.0, 64, 2001), total_infimum(p)) for p in params)
    criterion(3, "oracle equivalence", worst <= 1e-6, f"max rel dev {worst:.1e} over 50 params",
              time.perf_counter() - t0)


# ----------------------------------------------------------------------- 4


def test_criterion_4_identities(criterion):
    t0 = time.perf_counter()
    rng = np.random.default_rng(4)
    worst_q = 0.0
    for _ in range(10_000):
        n = int(rng.integers(3, 11))
        g = float(rng.uniform(-5, 5))
        if abs(g - forbidden(n)) < 1e-9:
            continue
        p, lam, nu = Params(n, g), float(rng.uniform(0, 10)), int(rng.integers(1, 40))
        a = reduced_quotient(SpectralPoint(lam, nu, n), p).value
        b = f_axisym(lam**2, eigenvalue(nu, n), p)
        worst_q = max(worst_q, abs(a - b) / max(abs(b), 1.0))
    worst_41 = 0.0
    mono = True
    for n in range(3, 11):
        for g in np.linspace(-5, 5, 101):
            if g == forbidden(n) or g == n / 2:
                continue
            p = Params(n, float(g))
            closed = 2 * (g - 1 + n / 2) ** 2 / (n - 1 + (g - n / 2) ** 2)
            worst_41 = max(worst_41, abs(f_axisym(0.0, n - 1, p) - closed) / max(closed, 1e-300))
            alphas = eigenvalue(np.arange(1, 60), n) if g <= 1 else np.linspace(0, 400, 801)
            for x in (0.0, 0.5, 4.0):
                mono = mono and bool(np.all(np.diff(f_axisym(x, alphas, p)) > 0))
    ok = worst_q <= 1e-12 and worst_41 <= 1e-12 and mono
    criterion(4, "algebraic identities", ok,
              f"quotient {worst_q:.1e}, first mode {worst_41:.1e}, monotone {mono}",
              time.perf_counter() - t0)


# ----------------------------------------------------------------------- 5


def test_criterion_5_operator_spectrum(criterion):
    t0 = time.perf_counter()
    worst = 0.0
    for n in (3, 4, 5):
        tg = ThetaGrid(n, 256)
        lam = t_spectrum(tg, 5)
        exact = np.array([nu * (nu + n - 2) for nu in range(1, 6)], dtype=float)
        worst = max(worst, float(np.max(np.abs(lam - exact) / exact)))
    pointwise = 0.0
    for n in (3, 4, 5):
        tg = ThetaGrid(n, 256)
        pointwise = max(pointwise, float(np.max(np.abs(t_op(tg.sin, tg) - (n - 1) * tg.sin))))
    ok = worst <= 1e-6 and pointwise <= 1e-8
    criterion(5, "operator spectrum", ok, f"eigen rel {worst:.1e}, T(sin) {pointwise:.1e}",
              time.perf_counter() - t0)


# ----------------------------------------------------------------------- 6


def test_criterion_6_energy_identities(criterion):
    t0 = time.perf_counter()
    grids = {n: LogRadialGrid(n, -12.0, 12.0, 1024, 256) for n in (3, 4, 5)}
    rng = np.random.default_rng(6)
    worst_p = worst_e = 0.0
    for seed in range(100):
        n = 3 + seed % 3
        g = float(rng.uniform(-3, 3))
        if abs(g - forbidden(n)) < 0.05 or abs(g - n / 2) < 0.05:
            g += 0.2
        v = random_axisym_field(seed, Params(n, g), grids[n])
        a, b = weight_energy(v, check_plancherel=False), weight_energy_spectral(v)
        worst_p = max(worst_p, rel(b, a))
        e = gradient_energy(v)
        worst_e = max(worst_e, rel(gradient_energy_spectral(v, "eliminated"), e))
    ok = worst_p <= 1e-10 and worst_e <= 1e-8
    criterion(6, "Plancherel and energy identities", ok,
              f"Plancherel {worst_p:.1e}, energy {worst_e:.1e} (100 fields, 1024x256)",
              time.perf_counter() - t0)


# ----------------------------------------------------------------------- 7


LADDER = [
    (SequenceKind.POLOIDAL_N3PLUS, Params(3, 0.0), None),
    (SequenceKind.AZIMUTHAL_N3PLUS, Params(3, 2.0), 2.0),
    (SequenceKind.TWOD_NU_ONE, Params(2, -1.0), None),
    (SequenceKind.TWOD_NU_ZERO, Params(2, 2.0), None),
]


def test_criterion_7_sharpness_convergence(criterion):
    t0 = time.perf_counter()
    ok, parts = True, []
    for kind, p, target in LADDER:
        gaps = []
        for k in (8, 16, 32):
            rep = minimizing_quotient(MinimizingSequenceSpec(kind, k, p), nt=2048, n_theta=256)
            tgt = rep.target if target is None else target
            ok = ok and rep.value > tgt and rep.value > total_infimum(p)
            gaps.append(rep.value / tgt - 1)
        ratios = [gaps[0] / gaps[1], gaps[1] / gaps[2]]
        ok = ok and all(3 <= r <= 5 for r in ratios) and gaps[2] <= 0.01
        parts.append(f"{kind} ratios {ratios[0]:.3f},{ratios[1]:.3f} final {gaps[2]:.3%}")
    criterion(7, "sharpness convergence", ok, "; ".join(parts), time.perf_counter() - t0)


# ----------------------------------------------------------------------- 8


def test_criterion_8_never_violated(criterion):
    t0 = time.perf_counter()
    eps = 0.02
    worst2 = worst3 = math.inf
    worst_cor = 0.0
    for i, g in enumerate((-1.0, 0.5, 1.0, 2.0)):
        p = Params(2, g)
        for seed in range(125):
            f = random_divfree_2d(1000 * i + seed, 1 + seed % 4, p)
            vec, cor = check_inequality_2d(f), check_corollary2(f)
            worst2 = min(worst2, vec.value / vec.target, cor.value / cor.target)
            worst_cor = max(worst_cor, rel(cor.value, vec.value))
    for g in (0.0, 2.0):
        p = Params(3, g)
        grid = LogRadialGrid(3, -12.0, 12.0, 1024, 256)
        for seed in range(50):
            rep = rayleigh_quotient(random_axisym_field(seed, p, grid))
            worst3 = min(worst3, rep.value / rep.target)
    ok = worst2 >= 1 - eps and worst3 >= 1 - eps and worst_cor <= 1e-6
    criterion(8, "never-violated property", ok,
              f"min ratio 2D {worst2:.3f}, 3D {worst3:.3f}, Hessian route {worst_cor:.1e}",
              time.perf_counter() - t0)


# ----------------------------------------------------------------------- 9


def _run(capsys, *args):
    code = main(list(args))
    out = capsys.readouterr()
    return code, out.out


def test_criterion_9_cli(criterion, capsys, tmp_path):
    t0 = time.perf_counter()
    checks = {}
    code, out = _run(capsys, "constant", "-n", "3", "-g", "0")
    checks["constant prints 2.72"] = code == 0 and "2.72\n" in out
    checks["forbidden gamma exits 2"] = _run(capsys, "constant", "-n", "3", "-g", "-0.5")[0] == 2
    commands = [
        ("constant", "-n", "2", "-g", "-1", "--output", "json"),
        ("reduce", "-n", "4", "-g", "1.2", "--output", "csv"),
        ("verify", "-n", "3", "-g", "0", "--n-theta", "48", "--nt", "1024"),
        ("random-test", "-n", "2", "-g", "0.5", "--trials", "12"),
        ("sweep", "-n", "3", "-g", "-3:3:121", "--routes", "closed,spectral", "--output", "csv"),
        ("sweep", "-n", "2", "-g", "-1:2:3", "--routes", "field", "--output", "json"),
    ]
    for args in commands:
        first, second = _run(capsys, *args), _run(capsys, *args)
        checks[f"{args[0]} deterministic"] = first == second
        checks[f"{args[0]} exit 0"] = first[0] == 0
    checks["numerical failure exits 1"] = _run(
        capsys, "random-test", "-n", "2", "-g", "1", "--trials", "2", "--eps", "-999")[0] == 1
    checks["bad grid exits 2"] = _run(capsys, "verify", "-n", "3", "-g", "0", "--nt", "0")[0] == 2
    bad = [name for name, passed in checks.items() if not passed]
    criterion(9, "CLI end-to-end", not bad,
              f"{len(checks) - len(bad)}/{len(checks)} checks" + (f", failed: {bad}" if bad else ""),
              time.perf_counter() - t0)
