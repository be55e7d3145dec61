"""Run the s -> 1 and s -> 0 limit checks and write one JSON report per case.

    python3 scripts/run_limits.py --out results/limits
    python3 scripts/run_limits.py --only 1d        # seconds
"""

import argparse
import json
import time
from pathlib import Path

from gaugefrac.bodies import ConvexBody
from gaugefrac.experiment import write_atomic
from gaugefrac.functions import TestFunction
from gaugefrac.limits import verify_bbm_1d, verify_bbm_limit, verify_ms_1d, verify_ms_limit

TENT = TestFunction.make("tent", 1)
BUMP2 = TestFunction.make("smooth_bump", 2)


def cases():
    for p in (1.0, 2.0):
        yield "1d", f"bbm_1d_tent_p{p:g}", lambda p=p: verify_bbm_1d(TENT, p)
        yield "1d", f"ms_1d_tent_p{p:g}", lambda p=p: verify_ms_1d(TENT, p)
    yield "2d", "bbm_disk_p2", lambda: verify_bbm_limit(BUMP2, ConvexBody.ball(2), 2.0)
    yield "2d", "bbm_box_p1", lambda: verify_bbm_limit(BUMP2, ConvexBody.box([1.0, 1.0]), 1.0)
    yield "2d", "bbm_cross_p1", lambda: verify_bbm_limit(BUMP2, ConvexBody.cross_polytope(2), 1.0)
    yield "2d", "ms_box_p1", lambda: verify_ms_limit(BUMP2, ConvexBody.box([1.0, 1.0]), 1.0)


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--out", type=Path, default=Path("results/limits"))
    ap.add_argument("--only", choices=["1d", "2d"])
    args = ap.parse_args()

    print(f"{'case':<16} {'limit':>12} {'target':>12} {'rel err':>9} {'verdict':>13} {'time':>7}")
    for group, name, run in cases():
        if args.only and group != args.only:
            continue
        t0 = time.perf_counter()
        rep = run()
        dt = time.perf_counter() - t0
        write_atomic(args.out / f"{name}.json", json.dumps(rep.to_dict(), indent=2, sort_keys=True) + "\n")
        print(f"{name:<16} {rep.fitted_limit:>12.6f} {rep.target:>12.6f} {rep.rel_error:>9.2e} {rep.verdict:>13} {dt:>6.1f}s")


if __name__ == "__main__":
    main()
