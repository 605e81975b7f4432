"""Regenerate the example files in data/ (deterministic)."""

from __future__ import annotations

import argparse
from fractions import Fraction
from pathlib import Path

from anglers import census
from anglers.angles import AngleAssignment
from anglers.io import write_json
from anglers.surfaces import boundary_parallel, edge_tube


def uniform(tri, value: Fraction) -> dict:
    return AngleAssignment([value] * (6 * tri.tet_count)).to_dict()


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=str(Path(__file__).resolve().parent.parent / "data"))
    out = Path(ap.parse_args().out)
    out.mkdir(parents=True, exist_ok=True)

    one = census.one_edge()
    write_json(one.to_dict(), out / "one_edge.triangulation.json")
    write_json(uniform(one, Fraction(1, 6)), out / "one_edge.uniform.angles.json")
    write_json(edge_tube(one, [0]).to_dict(), out / "one_edge.tube.surface.json")
    write_json(boundary_parallel(one).to_dict(), out / "one_edge.boundary.surface.json")

    eight = census.valence_eight()
    write_json(eight.to_dict(), out / "valence_eight.triangulation.json")
    write_json(uniform(eight, Fraction(1, 4)), out / "valence_eight.uniform.angles.json")

    write_json(census.two_boundary().to_dict(), out / "two_boundary.triangulation.json")
    write_json(census.low_valence(2).to_dict(), out / "valence_two.triangulation.json")

    even = one.to_dict()
    even["gluings"][0]["perm"] = [1, 0, 3, 2]
    write_json(even, out / "even_perm.triangulation.json")

    write_json(census.heptagon_pyramids(), out / "heptagon_pyramids.decomposition.json")
    write_json(census.two_cube_decomposition(), out / "two_cubes.decomposition.json")


if __name__ == "__main__":
    main()
