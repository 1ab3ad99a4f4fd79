"""Measure the slack in the uniform-convexity inequality of the map space:
for random triples, how far below r(1 - tau(eps)) the midpoint actually sits.

    python scripts/uc_margin_sweep.py [--samples N]
"""

import argparse

from busemann.verify import suite_uc_witness


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--samples", type=int, default=5000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    for r in suite_uc_witness(samples=args.samples, seed=args.seed):
        print(f"{'PASS' if r.passed else 'FAIL'} {r.name:28s} violations={int(r.worst)}  {r.detail}")


if __name__ == "__main__":
    main()
