"""Canonical JSON and file loaders shared by the CLI and the scripts."""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path
from typing import Any

from .angles import AngleAssignment, AngleError, FLAT, HYPERIDEAL, assignment_from_dict
from .layered import Decomposition, LayeredError, decomposition_from_dict
from .surfaces import SurfaceComplex, SurfaceError, surface_from_dict
from .triangulation import Corner, IdealTriangulation, TriangulationError, from_dict


class InputError(ValueError):
    """Unreadable or malformed input file."""


def canonical(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=True, allow_nan=False) + "\n"


def write_json(obj: Any, path: str | Path) -> None:
    Path(path).write_text(canonical(obj))


def read_json(path: str | Path) -> Any:
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror or exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: malformed JSON ({exc.msg} at line {exc.lineno})") from exc


def load_triangulation(path: str | Path, require_oriented: bool = True) -> IdealTriangulation:
    try:
        return from_dict(read_json(path), require_oriented=require_oriented)
    except TriangulationError as exc:
        raise InputError(f"{path}: {exc}") from exc


def load_angles(path: str | Path, tri: IdealTriangulation) -> AngleAssignment:
    data = read_json(path)
    if not isinstance(data, dict):
        raise InputError(f"{path}: expected an object")
    try:
        return assignment_from_dict(data, tri.tet_count)
    except (AngleError, ValueError, ZeroDivisionError) as exc:
        raise InputError(f"{path}: {exc}") from exc


def load_fixed(path: str | Path, tri: IdealTriangulation) -> tuple[dict[int, Fraction], list[str]]:
    """Tags file: tetrahedron tags plus exact values for some corners (flat ones)."""
    data = read_json(path)
    try:
        if data.get("mode", "rational-pi") != "rational-pi":
            raise InputError(f"{path}: fixed corners must be in rational-pi mode")
        fixed = {}
        for key, v in data.get("values", {}).items():
            c = Corner.parse(key)
            if not (0 <= c.tet < tri.tet_count and 0 <= c.edge < 6):
                raise InputError(f"{path}: corner {key} out of range")
            fixed[c.slot] = Fraction(v)
        tags = [data.get("tags", {}).get(str(t), HYPERIDEAL) for t in range(tri.tet_count)]
        if any(t not in (FLAT, HYPERIDEAL) for t in tags):
            raise InputError(f"{path}: unknown tetrahedron tag")
    except (AttributeError, TypeError, ValueError, ZeroDivisionError) as exc:
        if isinstance(exc, InputError):
            raise
        raise InputError(f"{path}: {exc}") from exc
    return fixed, tags


def load_surface(path: str | Path) -> SurfaceComplex:
    try:
        return surface_from_dict(read_json(path))
    except SurfaceError as exc:
        raise InputError(f"{path}: {exc}") from exc


def load_decomposition(path: str | Path) -> Decomposition:
    try:
        return decomposition_from_dict(read_json(path))
    except LayeredError as exc:
        raise InputError(f"{path}: {exc}") from exc
