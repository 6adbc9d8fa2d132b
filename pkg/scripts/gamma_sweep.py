"""Sharp constant, classical constant and their ratio over a gamma range.

Writes a CSV with one row per (n, gamma) and prints the branch changes.
With --field the finite-k Rayleigh quotient is added as a third column
(slow: a few seconds per point).

    python scripts/gamma_sweep.py --n 2 3 4 --gamma -3 3 --count 601 -o sweep.csv
"""
import argparse
import csv
import math

import numpy as np

from hardy_leray.constants import ForbiddenGammaError, Params, classical_constant, sharp_constant
from hardy_leray.verify import MinimizingSequenceSpec, default_kind, minimizing_quotient


def rows_for(n, gammas, field_k=None):
    out = []
    for g in gammas:
        try:
            p = Params(n, float(g))
        except ForbiddenGammaError:
            continue
        br = sharp_constant(p)
        row = dict(n=n, gamma=float(g), C=br.c, classical=classical_constant(p),
                   ratio=br.c / classical_constant(p), branch=br.branch.value)
        if field_k:
            rep = minimizing_quotient(MinimizingSequenceSpec(default_kind(p), field_k, p),
                                      nt=1024, n_theta=96)
            row["C_field"] = 1.0 / (p.radial_term + rep.value)
        out.append(row)
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, nargs="+", default=[2, 3, 4, 5])
    ap.add_argument("--gamma", type=float, nargs=2, default=[-3.0, 3.0], metavar=("LO", "HI"))
    ap.add_argument("--count", type=int, default=241)
    ap.add_argument("--field", type=float, default=None, metavar="K",
                    help="add the Rayleigh-quotient constant at width K")
    ap.add_argument("-o", "--output", default="gamma_sweep.csv")
    args = ap.parse_args()

    gammas = np.linspace(args.gamma[0], args.gamma[1], args.count)
    rows = []
    for n in args.n:
        part = rows_for(n, gammas, args.field)
        for a, b in zip(part, part[1:]):
            if a["branch"] != b["branch"]:
                print(f"n={n}: {a['branch']} -> {b['branch']} between gamma {a['gamma']:.4f} "
                      f"and {b['gamma']:.4f}")
        best = min(part, key=lambda r: r["ratio"] if math.isfinite(r["ratio"]) else 1)
        print(f"n={n}: smallest C/classical = {best['ratio']:.6f} at gamma {best['gamma']:.4f}")
        rows += part

    with open(args.output, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        w.writerows(rows)
    print(f"wrote {len(rows)} rows to {args.output}")


if __name__ == "__main__":
    main()
