"""Continuity tables d(Pl(u_n), Pl(u)) against d(u_n, u) for u_n = u + zigzag / n.

    python3 scripts/continuity_tables.py --terms 16 --amplitude 0.1
"""
import argparse

from ncplay import presets
from ncplay.propcheck import continuity_experiment, standard_suite


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--terms", type=int, default=16)
    ap.add_argument("--amplitude", type=float, default=0.1)
    ap.add_argument("--teeth", type=int, default=8)
    ap.add_argument("--cases", default="ball,complement,union")
    args = ap.parse_args()
    wanted = args.cases.split(",")
    for case in standard_suite():
        if case.name not in wanted:
            continue
        pert = presets.zigzag(T=case.u.T, teeth=args.teeth, amplitude=args.amplitude, direction=(0.6, 0.8))
        for mode in ("bv", "strict"):
            rep = continuity_experiment(case.set, case.u, case.z0, mode, args.terms, pert)
            print(f"\n{case.name} / {mode}  grid gap {rep.params['grid_gap']:.3g}  [{'pass' if rep.passed else 'fail'}]")
            print(f"{'n':>4}{'input':>14}{'output':>14}{'ratio':>10}")
            for _, row in rep.rows:
                ratio = row["output_distance"] / row["input_distance"] if row["input_distance"] else float("nan")
                print(f"{row['n']:>4.0f}{row['input_distance']:>14.6g}{row['output_distance']:>14.6g}{ratio:>10.3f}")


if __name__ == "__main__":
    main()
