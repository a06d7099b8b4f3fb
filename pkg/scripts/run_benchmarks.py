#!/usr/bin/env python3
"""Run both stock benchmark scenarios and write reports under results/.

Desk-scale defaults (20 replicates) finish in a couple of minutes; pass
--replicates 100 to match the full study size.
"""

import argparse
import sys
from pathlib import Path

from mtspike.benchmark import SCENARIOS, run_scenario


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--replicates", type=int, default=20)
    ap.add_argument("--seed", type=int, default=20260401)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--out", default="results")
    args = ap.parse_args()

    for scenario in SCENARIOS:
        out_dir = Path(args.out) / scenario
        res = run_scenario(
            scenario,
            replicates=args.replicates,
            seed=args.seed,
            threads=args.threads,
            out_dir=out_dir,
        )
        print(
            f"{scenario}: VP reduction {res.vp_reduction_pct:.1f}%, "
            f"rate-RMSE reduction {res.l2_reduction_pct:.1f}% "
            f"({res.runtime_s:.0f}s, report in {out_dir})"
        )
    return 0


if __name__ == "__main__":
    sys.exit(main())
