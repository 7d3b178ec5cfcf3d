"""Billiard flow on the mushroom: reflection, tracing, trajectory classes.

A phase point is a position inside the domain plus a unit direction.  A
trajectory confined to the upper semi-annulus forever is integrable (it is a
rotated disk-billiard orbit); everything that reaches the stalk or the inner
semidisk is ergodic.  The confinement criterion is analytic: a chord with
impact parameter ``p = |x1*xi2 - x2*xi1| > r1`` never meets ``B(0, r1)``,
and both cap-arc and shelf reflections preserve ``|p|``, so the whole orbit
stays outside the mouth region.  The flow-based check is kept as a property
test, not as the definition.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .geometry import MushroomGeometry, RegionTag, SEGMENT_KINDS, classify_point

TAU_TANGENT = 1e-12

TERMINATION = {
    0: "max-bounces",
    1: "max-time",
    2: "corner",
    3: "tangency",
    4: "no-intersection",
}


class DynamicsError(RuntimeError):
    pass


class TangencyError(DynamicsError):
    """Collision with |<xi, n>| below the tangency tolerance."""


class TrajectoryClass(enum.Enum):
    ERGODIC = "ergodic"
    INTEGRABLE = "integrable"
    EXCEPTIONAL = "exceptional"


@dataclass(frozen=True)
class PhasePoint:
    x: float
    y: float
    dx: float
    dy: float

    def __post_init__(self):
        nrm = math.hypot(self.dx, self.dy)
        if abs(nrm - 1.0) > 1e-12:
            raise ValueError(f"direction must be unit, |xi| = {nrm}")

    @staticmethod
    def of(x, y, dx, dy) -> "PhasePoint":
        nrm = math.hypot(dx, dy)
        if nrm == 0.0:
            raise ValueError("zero direction")
        return PhasePoint(x, y, dx / nrm, dy / nrm)

    @property
    def impact_parameter(self) -> float:
        return abs(self.x * self.dy - self.y * self.dx)


@dataclass
class TrajectorySegmented:
    points: np.ndarray      # (n, 2) bounce positions
    directions: np.ndarray  # (n, 2) outgoing directions
    walls: np.ndarray       # (n,) wall kind names
    times: np.ndarray       # (n,) cumulative time at each bounce
    total_time: float
    termination: str
    start: PhasePoint

    def __len__(self):
        return len(self.points)

    @property
    def incoming(self) -> np.ndarray:
        """Incoming direction at each bounce (outgoing of the previous)."""
        inc = np.empty_like(self.directions)
        inc[0] = (self.start.dx, self.start.dy)
        inc[1:] = self.directions[:-1]
        return inc


def reflect(xi, normal, tau_tan: float = TAU_TANGENT):
    """Specular reflection of outgoing ``xi`` at an outward unit ``normal``."""
    dot = xi[0] * normal[0] + xi[1] * normal[1]
    if dot <= tau_tan:
        raise TangencyError(f"<xi, n> = {dot} <= {tau_tan}")
    rx = xi[0] - 2.0 * dot * normal[0]
    ry = xi[1] - 2.0 * dot * normal[1]
    nrm = math.hypot(rx, ry)
    return (rx / nrm, ry / nrm)


def evolve(g: MushroomGeometry, z: PhasePoint, max_bounces: int,
           max_time: float = math.inf) -> TrajectorySegmented:
    """Trace the broken flow from ``z`` until a budget or a singular hit."""
    tag = classify_point(g, z.x, z.y)
    if tag == RegionTag.BOUNDARY:
        raise DynamicsError("start point lies on the boundary")
    if tag == RegionTag.OUTSIDE:
        raise DynamicsError("start point lies outside the domain")
    n = int(max_bounces)
    bx = np.empty(n)
    by = np.empty(n)
    bdx = np.empty(n)
    bdy = np.empty(n)
    bwall = np.empty(n, dtype=np.int64)
    btime = np.empty(n)
    nb, total, reason = _kernels.trace_mushroom(
        g.r1, g.r2, g.t, z.x, z.y, z.dx, z.dy, n,
        max_time if math.isfinite(max_time) else 1e300,
        bx, by, bdx, bdy, bwall, btime)
    if reason == 4:
        raise DynamicsError(
            f"no forward intersection found after {nb} bounces at "
            f"({bx[max(nb - 1, 0)]}, {by[max(nb - 1, 0)]})")
    walls = np.array([SEGMENT_KINDS[w] for w in bwall[:nb]])
    return TrajectorySegmented(
        points=np.column_stack([bx[:nb], by[:nb]]),
        directions=np.column_stack([bdx[:nb], bdy[:nb]]),
        walls=walls,
        times=btime[:nb].copy(),
        total_time=total,
        termination=TERMINATION[reason],
        start=z,
    )


def classify(g: MushroomGeometry, z: PhasePoint,
             tau_p: float | None = None) -> TrajectoryClass:
    """Ergodic / integrable / exceptional class of a phase point.

    Defined on the closure of the domain: points on the shelves or the arc
    belong to the closed semi-annulus and classify by impact parameter.
    """
    if tau_p is None:
        tau_p = 1e-9 * g.r1
    tag = classify_point(g, z.x, z.y)
    if tag == RegionTag.OUTSIDE:
        raise DynamicsError("phase point outside the closed domain")
    tol = g.boundary_tol
    r = math.hypot(z.x, z.y)
    in_closed_annulus = (z.y >= -tol) and (r >= g.r1 - tol) and (r <= g.r2 + tol)
    if not in_closed_annulus:
        return TrajectoryClass.ERGODIC
    p = z.impact_parameter
    if abs(p - g.r1) <= tau_p:
        return TrajectoryClass.EXCEPTIONAL
    if p > g.r1:
        return TrajectoryClass.INTEGRABLE
    return TrajectoryClass.ERGODIC


def integrable_fraction(g: MushroomGeometry) -> float:
    """Liouville fraction d(t) of the integrable region, in closed form."""
    C = g.aspect
    numer = (0.5 * math.pi * g.r2 ** 2
             - g.r1 ** 2 * math.sqrt(C * C - 1.0)
             - g.r2 ** 2 * math.asin(1.0 / C))
    return numer / g.area()


def integrable_fraction_mc(g: MushroomGeometry, samples: int, seed: int,
                           chunk: int = 65536):
    """Monte Carlo estimate of d(t) with binomial standard error.

    Positions are drawn uniformly in M_t by rejection from the bounding box,
    directions uniformly on the circle.  Sampling is chunked with
    counter-derived child streams so a partition across workers would merge
    associatively; a fixed seed gives a bit-identical estimate.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    n_chunks = (samples + chunk - 1) // chunk
    streams = np.random.SeedSequence(seed).spawn(n_chunks)
    hits = 0
    left = samples
    for ss in streams:
        m = min(chunk, left)
        left -= m
        rng = np.random.Generator(np.random.PCG64(ss))
        xs = np.empty(0)
        ys = np.empty(0)
        while xs.size < m:
            draw = max(int(1.3 * (m - xs.size)) + 16, 32)
            cx = rng.uniform(-g.r2, g.r2, draw)
            cy = rng.uniform(-g.t, g.r2, draw)
            inside = np.where(
                cy > 0.0,
                cx * cx + cy * cy < g.r2 ** 2,
                (np.abs(cx) < g.r1) & (cy > -g.t),
            )
            # points exactly on y = 0 inside the mouth belong to the domain
            inside |= (cy == 0.0) & (np.abs(cx) < g.r1)
            xs = np.concatenate([xs, cx[inside]])
            ys = np.concatenate([ys, cy[inside]])
        xs = xs[:m]
        ys = ys[:m]
        th = rng.uniform(0.0, 2.0 * math.pi, m)
        dxs = np.cos(th)
        dys = np.sin(th)
        p = np.abs(xs * dys - ys * dxs)
        in_annulus = (ys > 0.0) & (xs * xs + ys * ys > g.r1 ** 2)
        hits += int(np.count_nonzero(in_annulus & (p > g.r1)))
    est = hits / samples
    stderr = math.sqrt(max(est * (1.0 - est), 1e-300) / samples)
    return est, stderr
