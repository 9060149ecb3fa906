"""Exhaustive reveal-schedule search for the divergence attack at N=4.

Prints the differential report and one divergent schedule found with the
re-encoding check switched off.

    python scripts/attack_search.py
"""

import argparse
import sys

from randsolomon.harness.experiments import attack_demo


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--victims", type=int, nargs="+", default=[0])
    args = ap.parse_args()
    ok = True
    for f in (1, 0):
        rep = attack_demo(4, f, victims=args.victims)
        print(rep.text())
        ok &= rep.ok
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
