"""Command-line front end.

    hardy-leray constant -n 3 -g 0
    hardy-leray reduce -n 4 -g 1.2 --output json
    hardy-leray verify -n 3 -g 0 -k 8
    hardy-leray random-test -n 2 -g 1 --trials 100 --seed 7
    hardy-leray sweep -n 3 -g -3:3:121 --routes all -o out.csv

Exit codes: 0 all checks pass, 1 a numerical check failed, 2 usage or
domain error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .constants import Params, classical_constant, improvement_ratio, sharp_constant
from .operators import LogRadialGrid
from .spectral import brute_force_search, locate_infimum, total_infimum
from .verify import (MinimizingSequenceSpec, PolarGrid, Route,
                     SequenceKind, SweepSettings, build_minimizing_field, check_corollary2,
                     check_inequality_2d, default_kind, field_quotient, ordered_map,
                     random_axisym_field, random_divfree_2d, sequence_grid, sweep_report)

COMMANDS = ("constant", "reduce", "verify", "sweep", "random-test")
OUTPUTS = ("table", "csv", "json")
ROUTE_ALIASES = {"closed": Route.CLOSED_FORM, "spectral": Route.SPECTRAL_ORACLE,
                 "field": Route.FIELD_QUOTIENT}

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

# default tolerances, overridable with --eps
RANDOM_EPS = 0.02
ORACLE_EPS = 1e-6
# non-monotonicity allowed along a k-ladder
LADDER_SLACK = 1e-3


class UsageError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    n: int
    gamma: Optional[float] = None
    gamma_range: Optional[tuple] = None
    output: str = "table"
    output_file: Optional[str] = None
    nt: Optional[int] = None
    n_theta: Optional[int] = None
    t_min: Optional[float] = None
    t_max: Optional[float] = None
    k: Optional[float] = None
    seed: int = 0
    trials: int = 100
    routes: tuple = ("ClosedForm", "SpectralOracle", "FieldQuotient")
    eps: Optional[float] = None
    kind: Optional[str] = None

    def gammas(self) -> list[float]:
        if self.gamma_range is not None:
            lo, hi, count = self.gamma_range
            return [float(g) for g in np.linspace(lo, hi, count)]
        return [self.gamma]

    def to_argv(self) -> list[str]:
        """Arguments that parse back to this exact config."""
        argv = [self.command, "-n", str(self.n)]
        if self.gamma_range is not None:
            lo, hi, count = self.gamma_range
            argv.append(f"--gamma={lo!r}:{hi!r}:{count}")
        elif self.gamma is not None:
            argv.append(f"--gamma={self.gamma!r}")
        argv += ["--output", self.output]
        if self.output_file is not None:
            argv += ["-o", self.output_file]
        for name, flag in [("nt", "--nt"), ("n_theta", "--n-theta"), ("t_min", "--t-min"),
                           ("t_max", "--t-max"), ("k", "-k"), ("eps", "--eps"),
                           ("kind", "--kind")]:
            val = getattr(self, name)
            if val is not None:
                argv.append(f"{flag}={val!r}" if isinstance(val, float) else f"{flag}={val}")
        argv += ["--seed", str(self.seed), "--trials", str(self.trials),
                 "--routes", ",".join(self.routes)]
        return argv


def parse_gamma(text: str):
    """``'0.5'`` -> (0.5, None); ``'-3:3:121'`` -> (None, (-3.0, 3.0, 121))."""
    parts = text.split(":")
    try:
        if len(parts) == 1:
            return float(text), None
        if len(parts) == 3:
            lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
            if count < 1:
                raise UsageError("gamma range needs count >= 1")
            if count == 1 and lo != hi:
                raise UsageError("a single-point range needs min == max")
            return None, (lo, hi, count)
    except ValueError as exc:
        if isinstance(exc, UsageError):
            raise
    raise UsageError(f"cannot read gamma {text!r}; expected a number or min:max:count")


def parse_routes(text: str) -> tuple:
    if text == "all":
        return tuple(str(r) for r in Route)
    out = []
    for item in text.split(","):
        item = item.strip()
        if item in ROUTE_ALIASES:
            out.append(str(ROUTE_ALIASES[item]))
        else:
            try:
                out.append(str(Route(item)))
            except ValueError:
                raise UsageError(f"unknown route {item!r}") from None
    if not out:
        raise UsageError("no routes requested")
    return tuple(out)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hardy-leray",
                                 description="Sharp constants of the divergence-free "
                                             "Hardy-Leray inequality")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("-n", type=int, required=True, help="dimension (>= 2)")
    ap.add_argument("-g", "--gamma", required=True,
                    help="weight exponent, or min:max:count for sweep")
    ap.add_argument("--output", choices=OUTPUTS,
                    help="format (default: from the -o suffix, else table)")
    ap.add_argument("-o", dest="output_file", help="write output to this file")
    ap.add_argument("--nt", type=int, help="t samples (power of two)")
    ap.add_argument("--n-theta", type=int, dest="n_theta", help="Gauss-Legendre theta nodes")
    ap.add_argument("--t-min", type=float, dest="t_min")
    ap.add_argument("--t-max", type=float, dest="t_max")
    ap.add_argument("-k", type=float, help="minimizing-sequence width (first rung)")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--trials", type=int, default=100)
    ap.add_argument("--routes", default="all",
                    help="comma list of closed,spectral,field or 'all'")
    ap.add_argument("--eps", type=float, help="tolerance override")
    ap.add_argument("--kind", choices=[str(s) for s in SequenceKind],
                    help="minimizing sequence for verify (default: the sharp one)")
    return ap


def _normalize_argv(argv: Sequence[str]) -> list[str]:
    # argparse would read '-3:3:121' as an option; glue the value onto the flag
    out, it = [], iter(argv)
    for a in it:
        if a in ("-g", "--gamma"):
            val = next(it, None)
            out.append("--gamma" if val is None else f"--gamma={val}")
        else:
            out.append(a)
    return out


def parse_config(argv: Sequence[str]) -> RunConfig:
    ns = build_parser().parse_args(_normalize_argv(argv))
    gamma, grange = parse_gamma(ns.gamma)
    output = ns.output
    if output is None:
        suffix = (ns.output_file or "").rsplit(".", 1)[-1].lower()
        output = suffix if suffix in ("csv", "json") else "table"
    if grange is not None and ns.command != "sweep":
        raise UsageError("a gamma range is only accepted by sweep")
    return RunConfig(command=ns.command, n=ns.n, gamma=gamma, gamma_range=grange,
                     output=output, output_file=ns.output_file, nt=ns.nt,
                     n_theta=ns.n_theta, t_min=ns.t_min, t_max=ns.t_max, k=ns.k,
                     seed=ns.seed, trials=ns.trials, routes=parse_routes(ns.routes),
                     eps=ns.eps, kind=ns.kind)


# ------------------------------------------------------------------ output


def _fmt_json(val) -> str:
    if isinstance(val, bool) or val is None:
        return json.dumps(val)
    if isinstance(val, (int, np.integer)):
        return str(int(val))
    if isinstance(val, (float, np.floating)):
        val = float(val)
        return "null" if not math.isfinite(val) else format(val, ".17g")
    return json.dumps(str(val))


def to_json(rows: list[dict]) -> str:
    """Array of flat objects; floats carry 17 significant digits."""
    objs = ["{" + ", ".join(f"{json.dumps(k)}: {_fmt_json(v)}" for k, v in r.items()) + "}"
            for r in rows]
    return "[\n  " + ",\n  ".join(objs) + "\n]\n"


def _fmt_cell(val, digits: str) -> str:
    if isinstance(val, bool):
        return str(val).lower()
    if isinstance(val, (float, np.floating)):
        return "nan" if math.isnan(val) else format(float(val), digits)
    return str(val)


def to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(list(rows[0]))
    for r in rows:
        w.writerow([_fmt_cell(v, ".17g") for v in r.values()])
    return buf.getvalue()


def to_table(rows: list[dict]) -> str:
    cols = list(rows[0])
    cells = [[_fmt_cell(r[c], ".12g") for c in cols] for r in rows]
    widths = [max(len(c), *(len(row[i]) for row in cells)) for i, c in enumerate(cols)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(cols, widths))]
    lines += ["  ".join(x.ljust(w) for x, w in zip(row, widths)) for row in cells]
    return "\n".join(line.rstrip() for line in lines) + "\n"


def render(rows: list[dict], fmt: str) -> str:
    return {"table": to_table, "csv": to_csv, "json": to_json}[fmt](rows)


# ---------------------------------------------------------------- commands


def _single_params(cfg: RunConfig) -> Params:
    if cfg.gamma is None:
        raise UsageError(f"{cfg.command} needs a single gamma value")
    return Params(cfg.n, cfg.gamma)


def cmd_constant(cfg: RunConfig):
    p = _single_params(cfg)
    br = sharp_constant(p)
    row = dict(n=p.n, gamma=p.gamma, C=br.c, C_inverse=br.c_inverse,
               radial_term=br.radial_term, angular_infimum=br.angular_infimum,
               classical=classical_constant(p), improvement_ratio=improvement_ratio(p),
               branch=str(br.branch))
    return [row], EXIT_OK


def cmd_reduce(cfg: RunConfig):
    p = _single_params(cfg)
    tol = ORACLE_EPS if cfg.eps is None else cfg.eps
    exact = locate_infimum(p)
    oracle = brute_force_search(p)
    dev = abs(oracle.value - exact.value) / max(abs(exact.value), 1e-300)
    ok = dev <= tol
    row = dict(n=p.n, gamma=p.gamma, infimum=total_infimum(p), lam=exact.lam, nu=exact.nu,
               branch=exact.branch, oracle=oracle.value, oracle_lam=oracle.lam,
               oracle_nu=oracle.nu, oracle_branch=oracle.branch, deviation=dev,
               C=sharp_constant(p).c, C_oracle=1.0 / (p.radial_term + oracle.value),
               **{"pass": ok})
    return [row], EXIT_OK if ok else EXIT_FAIL


def _sequence_grid(cfg: RunConfig, spec: MinimizingSequenceSpec):
    nt = 2048 if cfg.nt is None else cfg.nt
    n_theta = 256 if cfg.n_theta is None else cfg.n_theta
    if cfg.t_min is None and cfg.t_max is None:
        return sequence_grid(spec, nt=nt, n_theta=n_theta)
    half = 8.0 * spec.k
    lo = -half if cfg.t_min is None else cfg.t_min
    hi = half if cfg.t_max is None else cfg.t_max
    if spec.p.n == 2:
        return PolarGrid(lo, hi, nt)
    return LogRadialGrid(spec.p.n, lo, hi, nt, n_theta)


def cmd_verify(cfg: RunConfig):
    p = _single_params(cfg)
    kind = SequenceKind(cfg.kind) if cfg.kind else default_kind(p)
    k0 = 8.0 if cfg.k is None else cfg.k
    rows, prev = [], None
    ok = True
    for k in (k0, 2 * k0, 4 * k0):
        spec = MinimizingSequenceSpec(kind, k, p)
        grid = _sequence_grid(cfg, spec)
        rep = field_quotient(build_minimizing_field(spec, grid))
        excess = rep.value - rep.target
        ratio = math.nan if prev is None or excess == 0 else prev / excess
        above = rep.value >= rep.target * (1.0 - LADDER_SLACK)
        monotone = prev is None or excess <= prev + LADDER_SLACK * abs(rep.target)
        ok = ok and above and monotone
        rows.append(dict(n=p.n, gamma=p.gamma, kind=str(kind), k=k, quotient=rep.value,
                         target=rep.target, gap=rep.gap, gap_ratio=ratio,
                         grid=grid.describe(), **{"pass": above and monotone}))
        prev = excess
    return rows, EXIT_OK if ok else EXIT_FAIL


def _random_row(cfg: RunConfig, p: Params, seed: int, eps: float, grid):
    if p.n == 2:
        f = random_divfree_2d(seed, 1 + seed % 4, p)
        vec, cor = check_inequality_2d(f), check_corollary2(f)
        agree = abs(cor.value / vec.value - 1.0)
        return dict(seed=seed, quotient=vec.value, target=vec.target, ratio=vec.value / vec.target,
                    corollary2=cor.value, corollary2_deviation=agree,
                    **{"pass": vec.passes(eps) and cor.passes(eps)})
    rep = field_quotient(random_axisym_field(seed, p, grid))
    return dict(seed=seed, quotient=rep.value, target=rep.target, ratio=rep.value / rep.target,
                **{"pass": rep.passes(eps)})


def cmd_random_test(cfg: RunConfig):
    p = _single_params(cfg)
    if cfg.trials < 1:
        raise UsageError("--trials must be >= 1")
    eps = RANDOM_EPS if cfg.eps is None else cfg.eps
    grid = None
    if p.n > 2:
        grid = LogRadialGrid(p.n, -12.0 if cfg.t_min is None else cfg.t_min,
                             12.0 if cfg.t_max is None else cfg.t_max,
                             1024 if cfg.nt is None else cfg.nt,
                             256 if cfg.n_theta is None else cfg.n_theta)
    seeds = list(range(cfg.seed, cfg.seed + cfg.trials))
    rows = ordered_map(lambda s: _random_row(cfg, p, s, eps, grid), seeds)
    return rows, EXIT_OK if all(r["pass"] for r in rows) else EXIT_FAIL


def summarize_random(rows: list[dict], cfg: RunConfig) -> str:
    worst = min(rows, key=lambda r: r["ratio"])
    eps = RANDOM_EPS if cfg.eps is None else cfg.eps
    verdict = "PASS" if all(r["pass"] for r in rows) else "FAIL"
    lines = [f"trials           {len(rows)} (seeds {rows[0]['seed']}..{rows[-1]['seed']})",
             f"min quotient     {worst['quotient']:.12g} (seed {worst['seed']})",
             f"target           {worst['target']:.12g}",
             f"min ratio        {worst['ratio']:.12g} (floor {1 - eps:g})"]
    if "corollary2_deviation" in rows[0]:
        lines.append(f"max cor2 dev     {max(r['corollary2_deviation'] for r in rows):.3g}")
    lines.append(verdict)
    return "\n".join(lines) + "\n"


def cmd_sweep(cfg: RunConfig):
    s = SweepSettings()
    if cfg.k is not None:
        s = SweepSettings(k=cfg.k)
    if cfg.nt is not None or cfg.n_theta is not None:
        s = SweepSettings(k=s.k, nt=cfg.nt or s.nt, n_theta=cfg.n_theta or s.n_theta)
    rows = sweep_report([(cfg.n, g) for g in cfg.gammas()], cfg.routes, s)
    errors = [r["branch"].startswith("ERROR") for r in rows]
    if all(errors):
        return rows, EXIT_USAGE
    failed = any(not r["pass"] for r, e in zip(rows, errors) if not e)
    return rows, EXIT_FAIL if failed else EXIT_OK


HANDLERS = {"constant": cmd_constant, "reduce": cmd_reduce, "verify": cmd_verify,
            "sweep": cmd_sweep, "random-test": cmd_random_test}


def run(cfg: RunConfig, stdout=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    rows, code = HANDLERS[cfg.command](cfg)
    if cfg.command == "constant" and cfg.output == "table":
        text = "".join(f"{k:<19}{_fmt_cell(v, '.12g')}\n" for k, v in rows[0].items())
    elif cfg.command == "random-test" and cfg.output == "table":
        text = summarize_random(rows, cfg)
    else:
        text = render(rows, cfg.output)
    if cfg.output_file:
        with open(cfg.output_file, "w", newline="") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    if cfg.command == "sweep" and code == EXIT_USAGE:
        print("every row of the sweep is an error", file=sys.stderr)
    return code


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        cfg = parse_config(argv)
        return run(cfg)
    except SystemExit as exc:  # argparse usage errors
        return EXIT_USAGE if exc.code else EXIT_OK
    except (ValueError, ZeroDivisionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
