"""Quotient gap of the minimizing families against k.

For each family the gap should drop by about 4 per doubling of k (the
Gaussian profile leaves an O(k^-2) excess). Prints one row per (family, k)
and, with --csv, writes the table too.

    python scripts/convergence_study.py --kmax 64
"""
import argparse
import csv
import time

from hardy_leray.constants import Params
from hardy_leray.verify import MinimizingSequenceSpec, SequenceKind, minimizing_quotient

FAMILIES = [
    (SequenceKind.POLOIDAL_N3PLUS, Params(3, 0.0)),
    (SequenceKind.POLOIDAL_N3PLUS, Params(5, -1.0)),
    (SequenceKind.AZIMUTHAL_N3PLUS, Params(3, 2.0)),
    (SequenceKind.TWOD_NU_ONE, Params(2, -1.0)),
    (SequenceKind.TWOD_NU_ZERO, Params(2, 2.0)),
]


def study(kmin, kmax, nt, n_theta):
    rows = []
    for kind, p in FAMILIES:
        k, prev = kmin, None
        while k <= kmax:
            t0 = time.perf_counter()
            rep = minimizing_quotient(MinimizingSequenceSpec(kind, k, p), nt=nt, n_theta=n_theta)
            rows.append(dict(kind=str(kind), n=p.n, gamma=p.gamma, k=k, quotient=rep.value,
                             target=rep.target, gap=rep.gap,
                             ratio=prev / rep.gap if prev else float("nan"),
                             seconds=time.perf_counter() - t0))
            prev, k = rep.gap, 2 * k
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--kmin", type=float, default=4)
    ap.add_argument("--kmax", type=float, default=32)
    ap.add_argument("--nt", type=int, default=2048)
    ap.add_argument("--n-theta", type=int, default=256)
    ap.add_argument("--csv", help="also write the rows here")
    args = ap.parse_args()

    rows = study(args.kmin, args.kmax, args.nt, args.n_theta)
    print(f"{'family':<18}{'n':>3}{'gamma':>7}{'k':>6}{'quotient':>14}{'gap':>11}{'ratio':>8}")
    for r in rows:
        print(f"{r['kind']:<18}{r['n']:>3}{r['gamma']:>7g}{r['k']:>6g}{r['quotient']:>14.8f}"
              f"{r['gap']:>11.3e}{r['ratio']:>8.3f}")
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=list(rows[0]))
            w.writeheader()
            w.writerows(rows)


if __name__ == "__main__":
    main()
