"""Leading-byte chi-square p-values across system sizes and adversaries.

    python scripts/uniformity_table.py --runs 2000
"""

import argparse

from randsolomon.harness.config import MASTER_SEED, ExperimentConfig
from randsolomon.harness.experiments import uniformity


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--runs", type=int, default=2000)
    ap.add_argument("--sizes", type=int, nargs="+", default=[4, 7])
    ap.add_argument("--seed", type=int, default=MASTER_SEED)
    args = ap.parse_args()

    print(f"{'N':>3} {'adversary':<12} {'chi2':>8} {'p':>8}")
    for n in args.sizes:
        for name in (None, "constant", "equivocate", "silent"):
            extra = dict(byzantine="auto", strategy=name, policy="adversary") if name else {}
            cfg = ExperimentConfig(n=n, seed=args.seed, runs=args.runs, **extra).validate()
            u = uniformity(cfg).uniformity
            if u.degenerate:
                print(f"{n:>3} {name or 'none':<12} {'degenerate':>17}")
            else:
                print(f"{n:>3} {name or 'none':<12} {u.statistic:>8.1f} {u.p_value:>8.4f}")


if __name__ == "__main__":
    main()
