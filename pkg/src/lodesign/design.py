"""Approximate designs on a canonical-variable region.

A design is a finite probability measure: distinct support points c_i
inside a closed region [lo, hi] with strictly positive weights summing
to one.  ``design(...)`` is the validating constructor; the reducer's
internal stages work on raw point lists and only build a Design at
their boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError

#: support points closer than this are treated as one
MERGE_RADIUS = 1e-9

#: weights below this are dropped when assembling a reduced design
WEIGHT_FLOOR = 1e-12


@dataclass(frozen=True)
class Design:
    points: tuple[tuple[float, float], ...]   # (point, weight) pairs
    region: tuple[float, float]

    @property
    def k(self) -> int:
        return len(self.points)

    def support(self) -> tuple[float, ...]:
        return tuple(c for c, _ in self.points)

    def weights(self) -> tuple[float, ...]:
        return tuple(w for _, w in self.points)


def design(points, region) -> Design:
    """Validated design; points are (c, weight) pairs.

    An empty support is allowed (it represents "no first stage" in
    multi-stage work); all other invariants are enforced.
    """
    lo, hi = float(region[0]), float(region[1])
    if math.isnan(lo) or math.isnan(hi) or lo >= hi:
        raise DomainError(f"region [{lo}, {hi}] is not a proper interval")
    pts = sorted((float(c), float(w)) for c, w in points)
    if not pts:
        return Design(points=(), region=(lo, hi))
    total = 0.0
    for c, w in pts:
        if not math.isfinite(c):
            raise DomainError(f"support point {c!r} is not finite")
        if not (lo <= c <= hi):
            raise DomainError(f"support point {c!r} outside region [{lo}, {hi}]")
        if w <= 0.0:
            raise DomainError(f"weight {w!r} at point {c!r} is not positive")
        total += w
    if abs(total - 1.0) > 1e-12 * max(1.0, total):
        raise DomainError(f"weights sum to {total!r}, expected 1")
    for (c1, _), (c2, _) in zip(pts, pts[1:]):
        if c2 - c1 <= MERGE_RADIUS:
            raise DomainError(f"support points {c1!r} and {c2!r} are not distinct")
    return Design(points=tuple(pts), region=(lo, hi))


def merge_coincident(points) -> list[tuple[float, float]]:
    """Sum weights of points within MERGE_RADIUS of each other."""
    pts = sorted((float(c), float(w)) for c, w in points)
    out: list[tuple[float, float]] = []
    for c, w in pts:
        if out and c - out[-1][0] <= MERGE_RADIUS:
            c0, w0 = out[-1]
            # weight-averaged location keeps moments as close as possible
            out[-1] = ((c0 * w0 + c * w) / (w0 + w), w0 + w)
        else:
            out.append((c, w))
    return out


def finalize(points, region, renormalize: bool = False) -> Design:
    """Assemble a Design from raw stage output.

    Coincident points are merged, negligible weights dropped, and the
    result validated.  ``renormalize`` rescales weights to exactly one;
    reduction stages preserve total mass algebraically so they leave it
    off and let validation confirm the invariant.
    """
    pts = [(c, w) for c, w in merge_coincident(points) if w > WEIGHT_FLOOR]
    if renormalize and pts:
        total = sum(w for _, w in pts)
        pts = [(c, w / total) for c, w in pts]
    return design(pts, region)
