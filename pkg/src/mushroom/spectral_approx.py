"""Quasimode-to-eigenvector approximation and cluster accounting.

Given a finite eigendecomposition and a family of near-orthogonal
quasimodes whose residuals are small against a window half-width c, the
approximation algorithm projects the quasimodes onto the span U of the
eigenvectors with eigenvalues inside the windows, orthonormalises the
projections with the inverse square root of their Gram matrix, and certifies
every eigenvector whose mass in the resulting space W exceeds 1 - sqrt(eps).
Certified eigenvectors sit within eps^(1/4) + 2 delta^(3/2) of the quasimode
span.  All hypotheses are checked strictly from measured quantities; a
violated inequality raises HypothesisViolation naming it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


class HypothesisViolation(ValueError):
    def __init__(self, name: str, detail: str):
        super().__init__(f"{name}: {detail}")
        self.name = name
        self.detail = detail


@dataclass
class QuasiSpectrum:
    """Quasi-eigenvalues (ascending) with optional attached vectors.

    ``vectors`` holds one unit column per quasimode in the ambient
    coordinates of the eigendecomposition it will be tested against.
    """

    values: np.ndarray
    vectors: np.ndarray | None = None
    eps1: float | None = None  # declared residual bound
    eps2: float | None = None  # declared pairwise overlap bound

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if np.any(np.diff(self.values) < 0):
            raise ValueError("quasi-eigenvalues must be ascending")
        if self.vectors is not None:
            self.vectors = np.asarray(self.vectors, dtype=float)
            if self.vectors.shape[1] != len(self.values):
                raise ValueError("one vector column per quasi-eigenvalue")


@dataclass
class Cluster:
    lo: float
    hi: float
    quasi_indices: list[int]
    eigen_indices: list[int] = field(default_factory=list)

    @property
    def n_semidisk(self) -> int:
        return len(self.quasi_indices)

    @property
    def n_mushroom(self) -> int:
        return len(self.eigen_indices)


def build_clusters(quasi_values, c: float) -> list[Cluster]:
    """Connected components of the union of [E'_i - c, E'_i + c].

    Touching windows (zero gap) merge: the closed intervals intersect.
    """
    if c <= 0:
        raise ValueError("c must be positive")
    vals = np.asarray(quasi_values, dtype=float)
    if np.any(np.diff(vals) < 0):
        raise ValueError("quasi values must be ascending")
    clusters: list[Cluster] = []
    for i, v in enumerate(vals):
        lo, hi = v - c, v + c
        if clusters and lo <= clusters[-1].hi:
            clusters[-1].hi = max(clusters[-1].hi, hi)
            clusters[-1].quasi_indices.append(i)
        else:
            clusters.append(Cluster(lo=lo, hi=hi, quasi_indices=[i]))
    return clusters


def fill_eigen_counts(clusters: list[Cluster], eigenvalues) -> list[Cluster]:
    """Attach eigenvalue indices to each cluster (disjoint intervals)."""
    ev = np.asarray(eigenvalues, dtype=float)
    for cl in clusters:
        idx = np.nonzero((ev >= cl.lo) & (ev <= cl.hi))[0]
        cl.eigen_indices = idx.tolist()
    return clusters


def good_time_ratio(eigenvalues, quasi_values, c: float, n: int) -> float:
    """#{j : E_j in union of the first n windows} / n."""
    ev = np.asarray(eigenvalues, dtype=float)
    vals = np.asarray(quasi_values, dtype=float)[:n]
    if len(vals) < n:
        raise ValueError(f"need {n} quasi-eigenvalues, have {len(vals)}")
    hi_max = vals.max() + c
    if ev.max() < hi_max:
        raise ValueError(
            f"spectrum computed to {ev.max():.3f} < window top {hi_max:.3f}")
    inside = np.zeros(len(ev), dtype=bool)
    for v in vals:
        inside |= (ev >= v - c) & (ev <= v + c)
    return float(np.count_nonzero(inside)) / n


@dataclass
class ClusterTally:
    tags: list[str]                  # per cluster: "S", "F", or "other"
    s_quasi_density: float           # fraction of quasi indices in S-clusters
    f_quasi_density: float
    other_quasi_density: float
    running_s_density: np.ndarray    # cumulative over the quasi ordering


def cluster_accounting(clusters: list[Cluster], eps: float) -> ClusterTally:
    """Tag clusters: S if N_semi <= N_mush <= (1+eps) N_semi, F if
    N_mush < N_semi, other otherwise; report quasi-index densities."""
    tags = []
    for cl in clusters:
        ns, nm = cl.n_semidisk, cl.n_mushroom
        if nm < ns:
            tags.append("F")
        elif nm <= (1.0 + eps) * ns:
            tags.append("S")
        else:
            tags.append("other")
    total = sum(cl.n_semidisk for cl in clusters)
    counts = {"S": 0, "F": 0, "other": 0}
    flat = []
    for cl, tag in zip(clusters, tags):
        counts[tag] += cl.n_semidisk
        flat.extend([tag] * cl.n_semidisk)
    run = np.cumsum([1.0 if t == "S" else 0.0 for t in flat])
    run /= np.arange(1, len(flat) + 1)
    return ClusterTally(
        tags=tags,
        s_quasi_density=counts["S"] / total if total else 0.0,
        f_quasi_density=counts["F"] / total if total else 0.0,
        other_quasi_density=counts["other"] / total if total else 0.0,
        running_s_density=run,
    )


@dataclass
class ApproxReport:
    n: int
    m: int
    c: float
    eps: float
    delta: float
    eps1_measured: float
    eps2_measured: float
    gram_deviation: float            # ||M - I||_HS
    bound: float                     # eps^(1/4) + 2 delta^(3/2)
    window_eigen_indices: np.ndarray  # original indices of the m eigenpairs
    certified: np.ndarray            # original indices of certified pairs
    distances: np.ndarray            # ||u_i - pi_V u_i|| per certified index
    w_mass: np.ndarray               # ||pi_W u_i||^2 per window eigenpair
    a_deviation: float               # ||A - I||_HS
    series_agreement: float | None   # ||A_spectral - A_series||_HS if computed


def _binomial_sqrt_inverse(E: np.ndarray, terms: int = 200) -> np.ndarray:
    """(I + E)^(-1/2) as the binomial series; converges for ||E|| < 1."""
    n = E.shape[0]
    A = np.eye(n)
    term = np.eye(n)
    coeff = 1.0
    for k in range(1, terms):
        coeff *= -(2.0 * k - 1.0) / (2.0 * k)
        term = term @ E
        A = A + coeff * term
        if np.linalg.norm(term) * abs(coeff) < 1e-16:
            break
    return A


def approx_eigenvectors(eigenvalues, eigenvectors, quasi: QuasiSpectrum,
                        c: float, eps: float, delta: float) -> ApproxReport:
    """Run the certification algorithm on a finite eigendecomposition.

    ``eigenvectors`` must be a complete orthonormal basis (square); the
    quasimode vectors live in the same coordinates.  Raises
    HypothesisViolation when any required inequality fails; otherwise the
    returned report certifies at least n(1 - sqrt(eps)) eigenvectors at
    distance below eps^(1/4) + 2 delta^(3/2) from the quasimode span.
    """
    ev = np.asarray(eigenvalues, dtype=float)
    U = np.asarray(eigenvectors, dtype=float)
    if quasi.vectors is None:
        raise ValueError("quasi spectrum must carry vectors")
    V = quasi.vectors
    N = U.shape[0]
    if U.shape != (N, len(ev)) or U.shape[1] != N:
        raise ValueError("eigenvectors must form a complete (square) basis")
    ortho = np.linalg.norm(U.T @ U - np.eye(N))
    if ortho > 1e-8:
        raise ValueError(f"eigenbasis not orthonormal: deviation {ortho:.2e}")
    if np.any(ev < 0) or np.any(np.diff(ev) < 0):
        raise ValueError("eigenvalues must be non-negative ascending")
    n = V.shape[1]
    if not (0.0 < eps < 0.5):
        raise HypothesisViolation("eps-range", f"need 0 < eps < 1/2, got {eps}")
    if not (0.0 < delta < 0.5):
        raise HypothesisViolation("delta-range", f"need 0 < delta < 1/2, got {delta}")
    if c <= 0:
        raise HypothesisViolation("c-range", f"need c > 0, got {c}")

    norms = np.linalg.norm(V, axis=0)
    if np.max(np.abs(norms - 1.0)) > 1e-10:
        raise HypothesisViolation(
            "normalisation", f"quasimode norms deviate by {np.max(np.abs(norms - 1.0)):.2e}")

    # measured hypothesis constants
    coeff = U.T @ V                      # (N, n): <u_j, v_i>
    resid = coeff * (ev[:, None] - quasi.values[None, :])
    eps1 = float(np.max(np.linalg.norm(resid, axis=0)))
    gram_v = V.T @ V
    off = gram_v - np.diag(np.diag(gram_v))
    eps2 = float(np.max(np.abs(off))) if n > 1 else 0.0

    inside = np.zeros(N, dtype=bool)
    for val in quasi.values:
        inside |= (ev >= val - c) & (ev <= val + c)
    window_idx = np.nonzero(inside)[0]
    m = len(window_idx)

    if not m < n * (1.0 + eps):
        raise HypothesisViolation(
            "window-count", f"m = {m} >= n(1+eps) = {n * (1.0 + eps)}")
    lhs = eps1 ** 2 / c ** 2 + eps2
    if not lhs < delta / n:
        raise HypothesisViolation(
            "error-matrix-bound",
            f"eps1^2/c^2 + eps2 = {lhs:.3e} >= delta/n = {delta / n:.3e}")

    C = coeff[window_idx, :]             # (m, n): pi_U v_i coordinates
    M = C.T @ C
    E = M - np.eye(n)
    gram_dev = float(np.linalg.norm(E))
    if not gram_dev < delta:
        raise HypothesisViolation(
            "gram-deviation", f"||M - I||_HS = {gram_dev:.3e} >= delta = {delta}")
    if m < n:
        raise HypothesisViolation(
            "rank", f"m = {m} < n = {n} contradicts ||M - I|| < 1/2")

    # post-hoc chain from the proof, asserted numerically
    pu_norms = np.linalg.norm(C, axis=0) ** 2
    if np.any(pu_norms <= 1.0 - delta / n - 1e-13):
        raise AssertionError("projection mass below 1 - delta/n")
    pu_gram = C.T @ C - np.diag(np.diag(C.T @ C))
    if n > 1 and np.max(np.abs(pu_gram)) >= delta / n + 1e-13:
        raise AssertionError("projected overlaps exceed delta/n")

    evals_M, evecs_M = np.linalg.eigh(M)
    if np.any(evals_M <= 0):
        raise HypothesisViolation("gram-singular", "Gram matrix not PD")
    A = evecs_M @ np.diag(evals_M ** -0.5) @ evecs_M.T
    a_dev = float(np.linalg.norm(A - np.eye(n)))
    if not a_dev <= gram_dev / (1.0 - gram_dev) + 1e-12:
        raise AssertionError("||A - I|| exceeds ||E||/(1-||E||)")

    series_agreement = None
    if gram_dev <= 0.3:
        A_series = _binomial_sqrt_inverse(E)
        series_agreement = float(np.linalg.norm(A - A_series))

    W = C @ A                            # (m, n): w_j coordinates, A = A^T
    w_gram_dev = np.linalg.norm(W.T @ W - np.eye(n))
    if w_gram_dev > 1e-8:
        raise AssertionError(f"w basis not orthonormal: {w_gram_dev:.2e}")

    # mass of each window eigenvector in W; eigenvector i has coords e_i
    w_mass = np.sum(W * W, axis=1)       # row i: sum_j <u_i, w_j>^2
    cert_mask = w_mass > 1.0 - math.sqrt(eps)
    certified = window_idx[cert_mask]
    if len(certified) < n * (1.0 - math.sqrt(eps)):
        raise AssertionError(
            f"certified count {len(certified)} below n(1-sqrt(eps))")

    # distances to the quasimode span, via least squares against V
    dists = np.empty(len(certified))
    for out_i, idx in enumerate(certified):
        u_vec = U[:, idx]
        coef, *_ = np.linalg.lstsq(V, u_vec, rcond=None)
        dists[out_i] = np.linalg.norm(u_vec - V @ coef)
    bound = eps ** 0.25 + 2.0 * delta ** 1.5
    if np.any(dists >= bound):
        raise AssertionError("certified distance exceeds the bound")

    return ApproxReport(
        n=n, m=m, c=c, eps=eps, delta=delta,
        eps1_measured=eps1, eps2_measured=eps2,
        gram_deviation=gram_dev, bound=bound,
        window_eigen_indices=window_idx,
        certified=certified, distances=dists,
        w_mass=w_mass, a_deviation=a_dev,
        series_agreement=series_agreement,
    )
