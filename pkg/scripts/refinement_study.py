"""Refinement tables for the standard suite: rate independence under
phi(t) = t^2/T, normality defects and convergence order.

    python3 scripts/refinement_study.py --levels 3 --n 129
"""
import argparse

from ncplay.propcheck import check_normality, check_rate_independence, convergence_order, quadratic_time_change, standard_suite

def table(rep, metrics):
    print(f"  {rep.name}  [{'pass' if rep.passed else 'fail'}]")
    print("    " + "".join(f"{m:>20}" for m in ["level", *metrics]))
    for label, row in rep.rows:
        print("    " + f"{label:>20}" + "".join(f"{row[m]:>20.6g}" for m in metrics))

def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--levels", type=int, default=3)
    ap.add_argument("--n", type=int, default=129)
    args = ap.parse_args()
    for case in standard_suite(args.n):
        print(f"\n== {case.name} ({case.set.kind}) ==")
        phi = quadratic_time_change(case.u.T, len(case.u))
        table(check_rate_independence(case.set, case.u, case.z0, phi, levels=args.levels), ["points", "error"])
        table(check_normality(case.set, case.u, case.z0, levels=args.levels), ["normality_ratio", "variation_defect"])
        table(convergence_order(case.set, case.u, case.z0, levels=max(3, args.levels)), ["error", "order"])

if __name__ == "__main__":
    main()
