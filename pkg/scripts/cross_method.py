"""Compare the direct polar route with the line-integral route on a small matrix."""

import argparse

from gaugefrac.bodies import ConvexBody
from gaugefrac.functions import TestFunction
from gaugefrac.quadrature import QuadratureSpec
from gaugefrac.seminorm import seminorm_direct, seminorm_via_bp

BODIES = {
    "box": ConvexBody.box([1.0, 1.0]),
    "disk": ConvexBody.ball(2),
    "cross": ConvexBody.cross_polytope(2),
    "ellipse": ConvexBody.ellipsoid([[2.0, 0.6], [0.6, 1.0]]),
}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--bodies", nargs="+", choices=sorted(BODIES), default=["box", "disk"])
    ap.add_argument("--cases", nargs="+", default=["0.3:1", "0.7:1", "0.5:2"], help="s:p pairs")
    ap.add_argument("--angular-points", type=int, default=QuadratureSpec().angular_points)
    args = ap.parse_args()

    spec = QuadratureSpec(angular_points=args.angular_points)
    f = TestFunction.make("smooth_bump", 2)
    print(f"{'body':<8} {'s':>5} {'p':>4} {'direct':>14} {'bp':>14} {'|diff|':>10} {'3*err':>10}")
    for name in args.bodies:
        for case in args.cases:
            s, p = map(float, case.split(":"))
            a = seminorm_direct(f, BODIES[name], s, p, spec)
            b = seminorm_via_bp(f, BODIES[name], s, p, spec)
            diff, allowed = abs(a.value - b.value), 3 * (a.std_error + b.std_error)
            flag = "" if diff <= allowed else "  <-- disagree"
            print(f"{name:<8} {s:>5g} {p:>4g} {a.value:>14.8g} {b.value:>14.8g} {diff:>10.2e} {allowed:>10.2e}{flag}")


if __name__ == "__main__":
    main()
