from __future__ import annotations

import os
from dataclasses import dataclass


@dataclass
class Tolerances:
    realizability_margin: float = 1e-12
    degeneration: float = 1e-9
    float_check: float = 1e-12
    segment: float = 1e-10


def float_tolerance() -> float:
    """Default verification tolerance; ``ANGLERS_TOL`` overrides it."""
    raw = os.environ.get("ANGLERS_TOL")
    if not raw:
        return TOLERANCES.float_check
    try:
        tol = float(raw)
    except ValueError:
        raise ValueError(f"ANGLERS_TOL={raw!r} is not a number") from None
    if not tol >= 0:
        raise ValueError(f"ANGLERS_TOL={raw!r} must be non-negative")
    return tol


TOLERANCES = Tolerances()
