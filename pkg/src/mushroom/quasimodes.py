"""Cutoff semidisk modes: the quasimode family, residuals, and counting.

A quasimode is a semidisk Dirichlet eigenfunction ``sin(n theta) J_n(alpha
r / r2)`` multiplied by a radial C-infinity cutoff that kills everything
below the mouth radius, then L2-normalised.  The family keeps the pairs
(n, k) whose zero satisfies ``alpha_{n,k} < n r2 / (r1 + eps)``; those modes
live on chords that never reach the mouth, which is what makes the residual
decay faster than any power of n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss

from . import specfun
from .geometry import MushroomGeometry

EPS_MAX = 0.3


class QuadratureError(RuntimeError):
    """Successive quadrature refinements disagree beyond tolerance."""


def _smoothstep(u):
    """C-infinity step: 0 for u <= 0, 1 for u >= 1."""
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    out[u >= 1.0] = 1.0
    mid = (u > 0.0) & (u < 1.0)
    if mid.any():
        um = u[mid]
        a = np.exp(-1.0 / um)
        b = np.exp(-1.0 / (1.0 - um))
        out[mid] = a / (a + b)
    return out


def _smoothstep_derivs(u):
    """(s, s', s'') of the smoothstep at u (array)."""
    u = np.asarray(u, dtype=float)
    s = _smoothstep(u)
    s1 = np.zeros_like(u)
    s2 = np.zeros_like(u)
    mid = (u > 0.0) & (u < 1.0)
    if mid.any():
        um = u[mid]
        v = 1.0 - um
        a = np.exp(-1.0 / um)
        b = np.exp(-1.0 / v)
        den = a + b
        den1 = a / um ** 2 - b / v ** 2
        g1 = 1.0 / um ** 2 + 1.0 / v ** 2
        g1p = -2.0 / um ** 3 + 2.0 / v ** 3
        # s' = a b g1 / den^2; product/quotient rule for s''
        N = a * b * g1
        Np = a * b * ((1.0 / um ** 2 - 1.0 / v ** 2) * g1 + g1p)
        s1[mid] = N / den ** 2
        s2[mid] = Np / den ** 2 - 2.0 * N * den1 / den ** 3
    return s, s1, s2


@dataclass(frozen=True)
class CutoffProfile:
    """Radial cutoff: 0 below ``r_low = r1``, 1 above ``r_high``."""

    r_low: float
    r_high: float

    @staticmethod
    def for_family(g: MushroomGeometry, eps: float) -> "CutoffProfile":
        if not 0.0 < eps < EPS_MAX:
            raise ValueError(f"eps must lie in (0, {EPS_MAX}), got {eps}")
        r_high = (g.r1 + eps) * math.sqrt(1.0 - eps * eps)
        if r_high <= g.r1:
            raise ValueError(f"eps={eps} gives a degenerate collar")
        return CutoffProfile(r_low=g.r1, r_high=r_high)

    @property
    def width(self) -> float:
        return self.r_high - self.r_low

    def chi(self, r):
        return _smoothstep((np.asarray(r, dtype=float) - self.r_low) / self.width)

    def chi_derivs(self, r):
        """(chi, chi', chi'') at r (array)."""
        u = (np.asarray(r, dtype=float) - self.r_low) / self.width
        s, s1, s2 = _smoothstep_derivs(u)
        return s, s1 / self.width, s2 / self.width ** 2


@dataclass
class Quasimode:
    n: int
    k: int
    alpha: float
    eps: float
    norm: float | None = None

    @property
    def quasi_eigenvalue_factor(self) -> float:
        return self.alpha * self.alpha

    def quasi_eigenvalue(self, g: MushroomGeometry) -> float:
        return (self.alpha / g.r2) ** 2


def _gl_nodes(a, b, n):
    x, w = leggauss(n)
    return 0.5 * (b - a) * x + 0.5 * (a + b), 0.5 * (b - a) * w


def _phi_kmax(n, x_cap):
    """Upper bound for #zeros of J_n below x_cap (uniform asymptotics)."""
    z = x_cap / n
    if z <= 1.0:
        return 2
    phi = math.sqrt(z * z - 1.0) - math.acos(1.0 / z)
    return int(n * phi / math.pi) + 3


def family(g: MushroomGeometry, eps: float, lambda_max: float,
           cache: specfun.ZeroCache | None = None) -> list[Quasimode]:
    """All (n, k) with alpha_{n,k}/r2 <= lambda_max inside the eps-family,
    sorted by quasi-eigenvalue with (n, k) tie-break."""
    CutoffProfile.for_family(g, eps)  # validates eps
    if lambda_max <= 0.0:
        return []
    alpha_cap_global = lambda_max * g.r2
    ratio = g.r2 / (g.r1 + eps)
    if ratio <= 1.0:
        return []
    out = []
    n = 0
    while True:
        n += 1
        if n > specfun.N_MAX:
            raise specfun.RangeError(
                f"family needs orders beyond n={specfun.N_MAX}; "
                f"reduce lambda_max")
        cap = min(alpha_cap_global, ratio * n)
        if cap <= n:  # alpha_{n,1} > n always
            if n >= alpha_cap_global:
                break
            continue
        kmax = _phi_kmax(n, cap)
        zeros = specfun.bessel_zeros(n, kmax, cache=cache)
        while zeros[-1] <= cap:  # estimate fell short: extend and refetch
            kmax += max(4, kmax // 4)
            zeros = specfun.bessel_zeros(n, kmax, cache=cache)
        for idx, alpha in enumerate(zeros):
            if alpha > cap or alpha >= ratio * n:
                break
            if alpha <= alpha_cap_global and alpha < ratio * n:
                out.append(Quasimode(n=n, k=idx + 1, alpha=float(alpha), eps=eps))
        if n >= alpha_cap_global:
            break
    out.sort(key=lambda q: (q.alpha, q.n, q.k))
    return out


def quasi_eigenvalues(g, eps, lambda_max, cache=None) -> np.ndarray:
    """Ascending quasi-eigenvalues (alpha/r2)^2 of the family."""
    return np.array([q.quasi_eigenvalue(g) for q in family(g, eps, lambda_max,
                                                           cache=cache)])


def counting(g, eps, lam, cache=None) -> int:
    """N_quasi(lambda): family members with alpha/r2 <= lambda."""
    return len(family(g, eps, lam, cache=cache))


def counting_bound_constant(g: MushroomGeometry) -> float:
    """Limiting lower-bound constant for N_quasi(lambda)/lambda^2 as eps->0."""
    C = g.aspect
    return (g.r2 ** 2 / 8.0) * (
        1.0
        - 2.0 / (math.pi * C * C) * math.sqrt(C * C - 1.0)
        - (2.0 / math.pi) * math.asin(1.0 / C)
    )


def norm_of(q: Quasimode, g: MushroomGeometry, nodes: int = 256) -> float:
    """L2 norm of chi * u_{n,k}, memoised on the quasimode."""
    if q.norm is not None:
        return q.norm
    prof = CutoffProfile.for_family(g, q.eps)
    scale = q.alpha / g.r2
    _, jp = specfun.bessel_j_pair(q.n, q.alpha)
    full = 0.5 * g.r2 ** 2 * jp * jp  # int_0^r2 J_n(alpha r/r2)^2 r dr
    # subtract the mass removed by the cutoff, supported on [0, r_high]
    removed = 0.0
    for a, b in ((0.0, prof.r_low), (prof.r_low, prof.r_high)):
        r, w = _gl_nodes(a, b, nodes)
        chi = prof.chi(r)
        rad = specfun.bessel_j(q.n, scale * r)
        removed += float(np.sum(w * (1.0 - chi * chi) * rad * rad * r))
    val = 0.5 * math.pi * (full - removed)
    if val <= 0.0:
        raise ArithmeticError(f"non-positive norm^2 for (n,k)=({q.n},{q.k})")
    q.norm = math.sqrt(val)
    return q.norm


def evaluate(q: Quasimode, g: MushroomGeometry, r, theta):
    """Normalised quasimode value at polar points (r, theta).

    The underlying mode lives on the semidisk; the quasimode is extended by
    zero elsewhere, so anything with theta outside (0, pi) or r <= r1 is 0.
    """
    r = np.asarray(r, dtype=float)
    theta = np.asarray(theta, dtype=float)
    prof = CutoffProfile.for_family(g, q.eps)
    nrm = norm_of(q, g)
    out = np.zeros(np.broadcast(r, theta).shape)
    rb = np.broadcast_to(r, out.shape)
    tb = np.broadcast_to(theta, out.shape)
    mask = (rb > prof.r_low) & (tb > 0.0) & (tb < math.pi) & (rb <= g.r2)
    if mask.any():
        rm = rb[mask]
        chi = prof.chi(rm)
        rad = specfun.bessel_j(q.n, (q.alpha / g.r2) * rm)
        out[mask] = chi * np.sin(q.n * tb[mask]) * rad / nrm
    if out.ndim == 0:
        return float(out)
    return out


def _collar_integrand(q, g, prof, r):
    """(Delta + (alpha/r2)^2)(chi u) radial factor on the collar."""
    scale = q.alpha / g.r2
    chi, chi1, chi2 = prof.chi_derivs(r)
    jn, jnp = zip(*(specfun.bessel_j_pair(q.n, scale * ri) for ri in r))
    jn = np.array(jn)
    rad_deriv = scale * np.array(jnp)
    return 2.0 * chi1 * rad_deriv + (chi2 + chi1 / r) * jn


def residual_norm(q: Quasimode, g: MushroomGeometry, nodes: int = 256,
                  refine_tol: float = 1e-3) -> float:
    """L2 norm of (Delta + quasi-eigenvalue) v over the collar.

    Evaluated by Gauss-Legendre on the collar at ``nodes`` and ``3*nodes//2``
    points; disagreement beyond ``refine_tol`` relative raises.
    """
    prof = CutoffProfile.for_family(g, q.eps)
    vals = []
    for m in (nodes, 3 * nodes // 2):
        r, w = _gl_nodes(prof.r_low, prof.r_high, m)
        gvals = _collar_integrand(q, g, prof, r)
        vals.append(math.sqrt(0.5 * math.pi * float(np.sum(w * gvals * gvals * r))))
    if abs(vals[1] - vals[0]) > refine_tol * max(vals[1], 1e-300):
        raise QuadratureError(
            f"collar quadrature did not settle: {vals[0]} vs {vals[1]}")
    return vals[1] / norm_of(q, g, nodes=nodes)


def overlap(q1: Quasimode, q2: Quasimode, g: MushroomGeometry,
            nodes: int = 256) -> float:
    """L2 inner product of two normalised quasimodes.

    Distinct angular indices are exactly orthogonal; for equal n the full
    Bessel orthogonality reduces the integral to the cutoff region.
    """
    if q1.n != q2.n:
        return 0.0
    prof = CutoffProfile.for_family(g, q1.eps)
    if q1.eps != q2.eps:
        raise ValueError("overlap requires modes from the same eps family")
    s1 = q1.alpha / g.r2
    s2 = q2.alpha / g.r2
    acc = 0.0
    for a, b in ((0.0, prof.r_low), (prof.r_low, prof.r_high)):
        r, w = _gl_nodes(a, b, nodes)
        chi = prof.chi(r)
        ra = specfun.bessel_j(q1.n, s1 * r)
        rb = specfun.bessel_j(q2.n, s2 * r)
        acc += float(np.sum(w * (1.0 - chi * chi) * ra * rb * r))
    if q1.k == q2.k:
        _, jp = specfun.bessel_j_pair(q1.n, q1.alpha)
        full = 0.5 * g.r2 ** 2 * jp * jp
    else:
        full = 0.0  # distinct zeros: exact radial orthogonality on [0, r2]
    val = 0.5 * math.pi * (full - acc)
    return val / (norm_of(q1, g) * norm_of(q2, g))
