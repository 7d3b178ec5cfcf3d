"""Mushroom domain family: stalk rectangle plus semidisk cap.

The domain with cap radius ``r2``, mouth half-width ``r1`` and stalk length
``t`` is the union of the rectangle ``[-r1, r1] x [-t, 0]`` and the closed
upper semidisk of radius ``r2`` centred at the origin.  All other modules
take their coordinates from here: semidisk centred at the origin, stalk
hanging below, boundary oriented counterclockwise with outward normals.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field


class RegionTag(enum.Enum):
    STALK = "stalk"
    INNER_SEMIDISK = "inner-semidisk"
    SEMI_ANNULUS = "semi-annulus"
    OUTSIDE = "outside"
    BOUNDARY = "boundary"


# boundary tiling order; also the wall codes used by the trace kernel
SEGMENT_KINDS = (
    "stalk-bottom",
    "stalk-right-wall",
    "hat-right-shelf",
    "cap-arc",
    "hat-left-shelf",
    "stalk-left-wall",
)


@dataclass(frozen=True)
class MushroomGeometry:
    r1: float = 1.0
    r2: float = 2.0
    t: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "r1", float(self.r1))
        object.__setattr__(self, "r2", float(self.r2))
        object.__setattr__(self, "t", float(self.t))
        if not (0.0 < self.r1 < self.r2):
            raise ValueError(f"need 0 < r1 < r2, got r1={self.r1}, r2={self.r2}")
        if not (0.0 < self.t <= 2.0):
            raise ValueError(f"need 0 < t <= 2, got t={self.t}")

    @property
    def aspect(self) -> float:
        """C = r2/r1."""
        return self.r2 / self.r1

    @property
    def boundary_tol(self) -> float:
        return 1e-12 * self.r2

    def area(self) -> float:
        return 0.5 * math.pi * self.r2 ** 2 + 2.0 * self.r1 * self.t

    def area_rate(self) -> float:
        """dA/dt; the stalk bottom sweeps at unit speed."""
        return 2.0 * self.r1

    def corners(self):
        r1, r2, t = self.r1, self.r2, self.t
        return (
            (-r1, -t),
            (r1, -t),
            (r1, 0.0),
            (r2, 0.0),
            (-r2, 0.0),
            (-r1, 0.0),
        )

    def contains(self, x: float, y: float) -> bool:
        """Strict interior test (boundary excluded)."""
        if y > 0.0:
            return x * x + y * y < self.r2 ** 2
        if y == 0.0:
            return abs(x) < self.r1
        return abs(x) < self.r1 and y > -self.t


def area(g: MushroomGeometry) -> float:
    return g.area()


def classify_point(g: MushroomGeometry, x: float, y: float,
                   tol: float | None = None) -> RegionTag:
    """Region tag of a planar point; points within ``tol`` of the boundary
    (default ``1e-12 * r2``) report BOUNDARY."""
    if tol is None:
        tol = g.boundary_tol
    r = math.hypot(x, y)
    # distance to the boundary pieces
    d = _boundary_distance(g, x, y, r)
    if d <= tol:
        return RegionTag.BOUNDARY
    if g.contains(x, y):
        if y <= 0.0:
            return RegionTag.STALK
        return RegionTag.INNER_SEMIDISK if r < g.r1 else RegionTag.SEMI_ANNULUS
    return RegionTag.OUTSIDE


def _segment_distance(px, py, ax, ay, bx, by):
    vx, vy = bx - ax, by - ay
    L2 = vx * vx + vy * vy
    u = ((px - ax) * vx + (py - ay) * vy) / L2
    u = min(1.0, max(0.0, u))
    return math.hypot(px - (ax + u * vx), py - (ay + u * vy))


def _boundary_distance(g, x, y, r):
    r1, r2, t = g.r1, g.r2, g.t
    d = min(
        _segment_distance(x, y, -r1, -t, r1, -t),
        _segment_distance(x, y, r1, -t, r1, 0.0),
        _segment_distance(x, y, r1, 0.0, r2, 0.0),
        _segment_distance(x, y, -r2, 0.0, -r1, 0.0),
        _segment_distance(x, y, -r1, 0.0, -r1, -t),
    )
    if y >= 0.0:
        # radial projection onto the circle stays in the upper half plane
        d = min(d, abs(r - r2))
    else:
        # nearest arc points from below are the endpoints (+-r2, 0)
        d = min(d, math.hypot(abs(x) - r2, y))
    return d


@dataclass(frozen=True)
class BoundarySegment:
    """One smooth piece of the boundary, parametrised by arclength.

    ``point(s)`` and ``normal(s)`` take local arclength s in [0, length];
    the global interval [s0, s0+length] places the piece in the CCW tiling.
    """

    kind: str
    length: float
    s0: float
    _geom: MushroomGeometry = field(repr=False)

    def point(self, s: float):
        g = self._geom
        r1, r2, t = g.r1, g.r2, g.t
        k = self.kind
        if k == "stalk-bottom":
            return (-r1 + s, -t)
        if k == "stalk-right-wall":
            return (r1, -t + s)
        if k == "hat-right-shelf":
            return (r1 + s, 0.0)
        if k == "cap-arc":
            a = s / r2
            return (r2 * math.cos(a), r2 * math.sin(a))
        if k == "hat-left-shelf":
            return (-r2 + s, 0.0)
        if k == "stalk-left-wall":
            return (-r1, 0.0 if s == 0.0 else -s)
        raise ValueError(k)

    def normal(self, s: float):
        k = self.kind
        if k == "stalk-bottom":
            return (0.0, -1.0)
        if k == "stalk-right-wall":
            return (1.0, 0.0)
        if k in ("hat-right-shelf", "hat-left-shelf"):
            return (0.0, -1.0)
        if k == "cap-arc":
            a = s / self._geom.r2
            return (math.cos(a), math.sin(a))
        if k == "stalk-left-wall":
            return (-1.0, 0.0)
        raise ValueError(k)


def boundary_segments(g: MushroomGeometry) -> list[BoundarySegment]:
    """Closed CCW tiling of the boundary; outward normals; 6 pieces."""
    r1, r2, t = g.r1, g.r2, g.t
    lengths = {
        "stalk-bottom": 2 * r1,
        "stalk-right-wall": t,
        "hat-right-shelf": r2 - r1,
        "cap-arc": math.pi * r2,
        "hat-left-shelf": r2 - r1,
        "stalk-left-wall": t,
    }
    segs = []
    s0 = 0.0
    for kind in SEGMENT_KINDS:
        segs.append(BoundarySegment(kind=kind, length=lengths[kind],
                                    s0=s0, _geom=g))
        s0 += lengths[kind]
    return segs


def total_boundary_length(g: MushroomGeometry) -> float:
    return 2 * g.r1 + 2 * g.t + 2 * (g.r2 - g.r1) + math.pi * g.r2
