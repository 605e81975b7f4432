"""Volume ascent on the perturbed two-cube triangulation for several guard margins.

The supremum sits at the partially flat point, so the iterates run into the
boundary of the angle polytope. Prints status, iterations, volume, the gap to
the volume of the flat point and the smallest constraint margin.
"""

from __future__ import annotations

import argparse
import math

from anglers.angles import PartiallyFlatAssignment, perturb, t_max
from anglers.census import two_cube_decomposition
from anglers.geometry import tet_volume
from anglers.layered import build, decomposition_from_dict
from anglers.volume import MaximizeOptions, maximize


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--guards", type=float, nargs="+", default=[1e-2, 1e-3, 1e-8])
    ap.add_argument("--max-iters", type=int, default=2000)
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()

    out = build(decomposition_from_dict(two_cube_decomposition()), geometric=True)
    tri, beta = out.triangulation, out.beta
    target = math.fsum(
        tet_volume([math.pi * float(beta.values[6 * t + e]) for e in range(6)])
        for t in range(tri.tet_count)
        if beta.tags[t] != "flat"
    )
    start = perturb(tri, beta, t_max(tri, beta).value / 2)
    print(f"volume at the flat point: {target:.12f}")
    for guard in args.guards:
        opts = MaximizeOptions(guard=guard, max_iters=args.max_iters, threads=args.threads)
        res = maximize(tri, start, opts)
        print(
            f"guard {guard:.0e}: {res.status:9s} iters {res.iterations:5d} "
            f"volume {res.report.total_volume:.12f} gap {target - res.report.total_volume:.2e} "
            f"min margin {res.margin_history[-1]:.2e}"
        )


if __name__ == "__main__":
    main()
