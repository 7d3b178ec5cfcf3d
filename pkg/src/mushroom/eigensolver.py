"""Dirichlet Laplacian eigenpairs on the mushroom by finite differences.

The discretisation is the 5-point grid with nodes strictly inside the
domain.  Where a stencil arm crosses the boundary, the outside neighbour is
eliminated through a linear ghost value pinned to zero at the true crossing
point (found by bisection on the interior predicate).  That one-sided
first-order boundary treatment keeps the matrix symmetric, so the solver is
a plain symmetric shift-invert Lanczos at sigma = 0.

The mushroom is symmetric in x, and by default the solve runs separately on
the even and odd sectors of the half grid, which labels every mode by
parity and halves the work; eigenvectors are returned extended to the full
grid.  Straight walls land on grid lines when h divides r1, so only the arc
needs cut cells.
"""

from __future__ import annotations

import hashlib
import math
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sparse
import scipy.sparse.linalg as spla

from .geometry import MushroomGeometry, BoundarySegment, boundary_segments

_V0_SEED = 1486294913  # fixed Lanczos start vector seed: bit-identical reruns


class SolverError(RuntimeError):
    pass


class Domain:
    """Interior predicate plus bounding box, in grid-friendly form."""

    name = "abstract"

    def inside(self, x: float, y: float) -> bool:
        raise NotImplementedError

    def bbox(self):
        raise NotImplementedError

    def symmetric_in_x(self) -> bool:
        return False


class MushroomDomain(Domain):
    name = "mushroom"

    def __init__(self, g: MushroomGeometry):
        self.g = g

    def inside(self, x, y):
        return self.g.contains(x, y)

    def bbox(self):
        g = self.g
        return (-g.r2, g.r2, -g.t, g.r2)

    def symmetric_in_x(self):
        return True


class RectangleDomain(Domain):
    """Sanity domain [-a, a] x [-b, 0]."""

    name = "rectangle"

    def __init__(self, a: float, b: float):
        self.a = a
        self.b = b

    def inside(self, x, y):
        return abs(x) < self.a and -self.b < y < 0.0

    def bbox(self):
        return (-self.a, self.a, -self.b, 0.0)

    def symmetric_in_x(self):
        return True


class SemidiskDomain(Domain):
    """Sanity domain: open upper semidisk of radius r2."""

    name = "semidisk"

    def __init__(self, r2: float):
        self.r2 = r2

    def inside(self, x, y):
        return y > 0.0 and x * x + y * y < self.r2 ** 2

    def bbox(self):
        return (-self.r2, self.r2, 0.0, self.r2)

    def symmetric_in_x(self):
        return True


@dataclass(frozen=True)
class DiscretizationSpec:
    h: float
    symmetry: bool = True
    method: str = "five-point"

    def __post_init__(self):
        if self.h <= 0:
            raise ValueError("h must be positive")
        if self.method != "five-point":
            raise ValueError(f"unsupported method {self.method!r}")


@dataclass
class EigenBasis:
    energies: np.ndarray           # ascending
    vectors: np.ndarray | None     # (n_nodes, k), h^2-weighted unit norm
    xs: np.ndarray                 # node coordinates (full grid)
    ys: np.ndarray
    h: float
    domain: str
    parities: np.ndarray | None    # +1 even / -1 odd / 0 unknown
    residuals: np.ndarray
    node_index: dict = field(repr=False, default_factory=dict)

    def __len__(self):
        return len(self.energies)

    def grid_image(self, j: int):
        """Eigenvector j as a dense (ny, nx) array plus axis vectors."""
        if self.vectors is None:
            raise SolverError("vectors were not retained for this solve")
        xi = np.unique(self.xs)
        yi = np.unique(self.ys)
        img = np.zeros((len(yi), len(xi)))
        ix = np.searchsorted(xi, self.xs)
        iy = np.searchsorted(yi, self.ys)
        img[iy, ix] = self.vectors[:, j]
        return img, xi, yi


def _cut_fraction(domain: Domain, x0, y0, dx, dy, h):
    """Fraction theta in (0, 1] of the step (dx, dy)*h to the boundary."""
    lo, hi = 0.0, 1.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if domain.inside(x0 + mid * h * dx, y0 + mid * h * dy):
            lo = mid
        else:
            hi = mid
    theta = 0.5 * (lo + hi)
    return max(theta, 1e-4)  # clamp: a 1e-4 h boundary shift is negligible


def _build_nodes(domain: Domain, h: float, sector: str):
    x0, x1, y0, y1 = domain.bbox()
    i_lo = int(math.floor(x0 / h)) - 1
    i_hi = int(math.ceil(x1 / h)) + 1
    j_lo = int(math.floor(y0 / h)) - 1
    j_hi = int(math.ceil(y1 / h)) + 1
    if sector == "even":
        i_lo = 0
    elif sector == "odd":
        i_lo = 1
    nodes = []
    for j in range(j_lo, j_hi + 1):
        y = j * h
        for i in range(i_lo, i_hi + 1):
            if domain.inside(i * h, y):
                nodes.append((i, j))
    return nodes


def _assemble(domain: Domain, h: float, sector: str):
    """Symmetric operator for one sector; returns (B, nodes, dweights).

    B is similar to the generalized pencil (K, D) by D^(1/2) scaling, where
    the even sector carries half weights on the x = 0 column.
    """
    nodes = _build_nodes(domain, h, sector)
    if not nodes:
        raise SolverError("grid too coarse: no interior nodes")
    index = {nd: r for r, nd in enumerate(nodes)}
    n = len(nodes)
    dweight = np.ones(n)
    if sector == "even":
        for (i, j), r in index.items():
            if i == 0:
                dweight[r] = 0.5
    rows, cols, vals = [], [], []
    inv_h2 = 1.0 / (h * h)
    for (i, j), r in index.items():
        diag = 0.0
        for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            if sector == "even" and i == 0 and di == -1:
                continue  # mirror edge of (0 -> 1); accounted once
            # per-direction edge weight (half for the x = 0 column verticals)
            w_e = 0.5 if (sector == "even" and i == 0 and di == 0) else 1.0
            ni, nj = i + di, j + dj
            neighbor = index.get((ni, nj))
            if sector == "odd" and ni == 0:
                neighbor = None  # Dirichlet line x = 0
                theta = 1.0
            if neighbor is not None:
                rows.append(r)
                cols.append(neighbor)
                vals.append(-w_e * inv_h2)
                diag += w_e * inv_h2
            else:
                if sector == "odd" and ni == 0:
                    theta = 1.0
                elif domain.inside(ni * h, nj * h):
                    # node outside the sector can only be the x=0 column,
                    # which the even branch already skipped
                    raise AssertionError("sector bookkeeping error")
                else:
                    theta = _cut_fraction(domain, i * h, j * h, di, dj, h)
                diag += w_e * inv_h2 / theta
        rows.append(r)
        cols.append(r)
        vals.append(diag)
    K = sparse.csr_matrix((vals, (rows, cols)), shape=(n, n))
    if sector == "even":
        dhalf = np.sqrt(dweight)
        Dinv = sparse.diags(1.0 / dhalf)
        B = Dinv @ K @ Dinv
    else:
        B = K
    return B, nodes, dweight


def _eigs_sector(domain, h, sector, k, tol=0.0):
    B, nodes, dweight = _assemble(domain, h, sector)
    n = B.shape[0]
    if k >= n - 1:
        raise SolverError(f"grid too coarse: {n} nodes for {k} modes")
    rng = np.random.default_rng(_V0_SEED)
    v0 = rng.standard_normal(n)
    try:
        vals, vecs = spla.eigsh(B, k=k, sigma=0.0, which="LM", v0=v0,
                                tol=tol, maxiter=5000)
    except spla.ArpackNoConvergence as exc:
        raise SolverError(
            f"ARPACK did not converge in sector {sector}: "
            f"{len(exc.eigenvalues)} of {k} modes converged") from exc
    order = np.argsort(vals)
    vals = vals[order]
    vecs = vecs[:, order]
    resid = np.array([
        float(np.linalg.norm(B @ vecs[:, i] - vals[i] * vecs[:, i]))
        for i in range(k)])
    # undo the similarity scaling: u = D^(-1/2) w
    if sector == "even":
        vecs = vecs / np.sqrt(dweight)[:, None]
    return vals, vecs, nodes, resid


def _extend_full(domain, h, sector, nodes, vecs):
    """Mirror a sector solution onto the full grid node set."""
    full_nodes = _build_nodes(domain, h, "full")
    index = {nd: r for r, nd in enumerate(full_nodes)}
    out = np.zeros((len(full_nodes), vecs.shape[1]))
    sgn = 1.0 if sector == "even" else -1.0
    for r, (i, j) in enumerate(nodes):
        out[index[(i, j)]] = vecs[r]
        if i != 0:
            mirror = index.get((-i, j))
            if mirror is not None:
                out[mirror] = sgn * vecs[r]
    return out, full_nodes


def solve(domain_or_geom, spec: DiscretizationSpec, count: int | None = None,
          lambda_max: float | None = None, keep_vectors: bool = True,
          tol: float = 0.0) -> EigenBasis:
    """Lowest Dirichlet eigenpairs on the domain.

    ``count`` asks for a fixed number of modes; ``lambda_max`` instead asks
    for every eigenvalue below lambda_max^2 (with a Weyl-law sizing pass and
    a coverage check).
    """
    domain = (MushroomDomain(domain_or_geom)
              if isinstance(domain_or_geom, MushroomGeometry)
              else domain_or_geom)
    if isinstance(domain, MushroomDomain) and spec.h > domain.g.r1 / 10 + 1e-12:
        raise SolverError(f"h={spec.h} too coarse: need >= 10 nodes across r1")
    if (count is None) == (lambda_max is None):
        raise ValueError("give exactly one of count, lambda_max")
    if lambda_max is not None:
        area = _domain_area(domain)
        count = int(lambda_max ** 2 * area / (4.0 * math.pi) * 1.25) + 20
    k = int(count)

    use_sym = spec.symmetry and domain.symmetric_in_x()
    if use_sym:
        k_sector = max(4, int(0.58 * k) + 12)
        merged = None
        for _attempt in range(3):
            ev_e, vec_e, nodes_e, res_e = _eigs_sector(domain, spec.h, "even",
                                                       k_sector, tol)
            ev_o, vec_o, nodes_o, res_o = _eigs_sector(domain, spec.h, "odd",
                                                       k_sector, tol)
            # merge: keep the k lowest, but only if both sectors reach them
            top_cover = min(ev_e[-1], ev_o[-1])
            allvals = np.concatenate([ev_e, ev_o])
            if np.sort(allvals)[k - 1] <= top_cover:
                merged = True
                break
            k_sector = int(1.5 * k_sector) + 8
        if merged is None:
            raise SolverError("sector coverage failed; raise count ceiling")
        parity = np.concatenate([np.ones(len(ev_e)), -np.ones(len(ev_o))])
        resid = np.concatenate([res_e, res_o])
        order = np.argsort(np.concatenate([ev_e, ev_o]), kind="stable")[:k]
        energies = np.concatenate([ev_e, ev_o])[order]
        parities = parity[order]
        resid = resid[order]
        if keep_vectors:
            full_e, full_nodes = _extend_full(domain, spec.h, "even", nodes_e, vec_e)
            full_o, _ = _extend_full(domain, spec.h, "odd", nodes_o, vec_o)
            allvec = np.concatenate([full_e.T, full_o.T]).T[:, order]
        else:
            full_nodes = _build_nodes(domain, spec.h, "full")
            allvec = None
    else:
        energies, vecs, full_nodes, resid = _eigs_sector(domain, spec.h,
                                                         "full", k, tol)
        parities = None
        allvec = vecs if keep_vectors else None

    if lambda_max is not None:
        lam2 = lambda_max ** 2
        if energies[-1] < lam2:
            raise SolverError(
                f"requested coverage to {lam2:.2f} but computed only to "
                f"{energies[-1]:.2f}")

    xs = np.array([i * spec.h for i, _ in full_nodes])
    ys = np.array([j * spec.h for _, j in full_nodes])
    if allvec is not None:
        # h^2-weighted normalisation and a deterministic sign convention
        norms = spec.h * np.linalg.norm(allvec, axis=0)
        allvec = allvec / norms
        for col in range(allvec.shape[1]):
            peak = int(np.argmax(np.abs(allvec[:, col])))
            if allvec[peak, col] < 0:
                allvec[:, col] = -allvec[:, col]
    basis = EigenBasis(
        energies=np.asarray(energies), vectors=allvec,
        xs=xs, ys=ys, h=spec.h, domain=domain.name,
        parities=parities, residuals=resid,
        node_index={nd: r for r, nd in enumerate(full_nodes)},
    )
    return basis


def _domain_area(domain: Domain) -> float:
    if isinstance(domain, MushroomDomain):
        return domain.g.area()
    if isinstance(domain, RectangleDomain):
        return 2.0 * domain.a * domain.b
    if isinstance(domain, SemidiskDomain):
        return 0.5 * math.pi * domain.r2 ** 2
    raise NotImplementedError


def counting(energies, Lambda: float) -> int:
    """N(Lambda) = #{j : E_j <= Lambda}; errors beyond the computed range."""
    energies = np.asarray(energies)
    if Lambda > energies.max():
        raise SolverError(
            f"Lambda={Lambda} beyond computed range {energies.max():.2f}")
    return int(np.count_nonzero(energies <= Lambda))


def weyl_ratio(g: MushroomGeometry, energies, Lambda: float) -> float:
    """4 pi N(Lambda) / (Lambda * area): tends to 1 under Weyl's law."""
    return 4.0 * math.pi * counting(energies, Lambda) / (Lambda * g.area())


# ---------------------------------------------------------------------------
# boundary data


def interpolate(basis: EigenBasis, j: int, pts: np.ndarray) -> np.ndarray:
    """Bilinear interpolation of eigenvector j at (m, 2) points.

    Grid values outside the domain are zero, consistent with the Dirichlet
    extension; sample at least ~1.5 h inside for clean one-sided stencils.
    """
    img, xi, yi = basis.grid_image(j)
    h = basis.h
    x = np.asarray(pts)[:, 0]
    y = np.asarray(pts)[:, 1]
    fx = (x - xi[0]) / h
    fy = (y - yi[0]) / h
    ix = np.clip(np.floor(fx).astype(int), 0, len(xi) - 2)
    iy = np.clip(np.floor(fy).astype(int), 0, len(yi) - 2)
    tx = np.clip(fx - ix, 0.0, 1.0)
    ty = np.clip(fy - iy, 0.0, 1.0)
    v00 = img[iy, ix]
    v10 = img[iy, ix + 1]
    v01 = img[iy + 1, ix]
    v11 = img[iy + 1, ix + 1]
    return (v00 * (1 - tx) * (1 - ty) + v10 * tx * (1 - ty)
            + v01 * (1 - tx) * ty + v11 * tx * ty)


def normal_derivative(basis: EigenBasis, g: MushroomGeometry,
                      segment: BoundarySegment, j: int,
                      n_samples: int | None = None):
    """Sampled d_n u along one boundary segment.

    One-sided cubic through u = 0 on the boundary and interpolated values
    at h, 2h, 3h inward along the normal.  Returns (s_values, dn_values).
    """
    h = basis.h
    if n_samples is None:
        n_samples = max(16, int(2 * segment.length / h))
    if segment.length < 4 * h:
        raise SolverError("segment under-resolved by the grid")
    s = (np.arange(n_samples) + 0.5) * (segment.length / n_samples)
    pts = np.array([segment.point(si) for si in s])
    nrm = np.array([segment.normal(si) for si in s])
    ds = (h, 2.0 * h, 3.0 * h)
    fs = [interpolate(basis, j, pts - d * nrm) for d in ds]
    A = np.array([[d, d * d, d ** 3] for d in ds])
    coef = np.linalg.solve(A, np.vstack(fs))
    # coef[0] is f'(0) along -n; d_n u flips the sign
    return s, -coef[0]


def rellich_ratio(basis: EigenBasis, g: MushroomGeometry, j: int) -> float:
    """Boundary identity check: oint (d_n u)^2 (x . n) ds / (2 E_j)."""
    total = 0.0
    for seg in boundary_segments(g):
        s, dn = normal_derivative(basis, g, seg, j)
        pts = np.array([seg.point(si) for si in s])
        nrm = np.array([seg.normal(si) for si in s])
        xdotn = np.sum(pts * nrm, axis=1)
        total += np.sum(dn * dn * xdotn) * (seg.length / len(s))
    return total / (2.0 * basis.energies[j])


# ---------------------------------------------------------------------------
# eigenvalue cache (energies only; vectors are cheap to recompute on demand)


def _cache_key(domain: str, params: tuple, h: float, count: int,
               sym: bool) -> str:
    blob = f"{domain}|{params}|{h:.12g}|{count}|{sym}".encode()
    return hashlib.sha256(blob).hexdigest()[:20]


class EigenCache:
    """CSV cache of eigenvalues keyed by (domain, geometry, h, count)."""

    def __init__(self, directory: str | Path | None):
        self.dir = Path(directory) if directory else None

    def path_for(self, key: str) -> Path:
        return self.dir / f"eig_{key}.csv"

    def load(self, key: str):
        if self.dir is None:
            return None
        p = self.path_for(key)
        if not p.exists():
            return None
        rows = np.loadtxt(p, delimiter=",", skiprows=1, ndmin=2)
        return rows[:, 1], rows[:, 2]

    def store(self, key: str, energies, residuals):
        if self.dir is None:
            return
        self.dir.mkdir(parents=True, exist_ok=True)
        p = self.path_for(key)
        fd, tmp = tempfile.mkstemp(dir=self.dir, suffix=".tmp")
        with os.fdopen(fd, "w") as fh:
            fh.write("j,energy,residual\n")
            for i, (e, r) in enumerate(zip(energies, residuals), start=1):
                fh.write(f"{i},{e:.16e},{r:.3e}\n")
        os.replace(tmp, p)


def solve_energies_cached(g: MushroomGeometry, spec: DiscretizationSpec,
                          count: int, cache: EigenCache | None = None):
    """Eigenvalues only, through the on-disk cache when one is given."""
    key = _cache_key("mushroom", (g.r1, g.r2, g.t), spec.h, count,
                     spec.symmetry)
    if cache is not None:
        hit = cache.load(key)
        if hit is not None and len(hit[0]) >= count:
            return hit[0][:count]
    basis = solve(g, spec, count=count, keep_vectors=False)
    if cache is not None:
        cache.store(key, basis.energies, basis.residuals)
    return basis.energies


def track_branches(t_values, energy_table) -> np.ndarray:
    """Flag suspected branch crossings in a (n_t, k) eigenvalue table.

    Branches are matched by sorted index; a step larger than 3x the median
    |dE| for that branch marks a suspected crossing.  Returns a boolean
    (n_t - 1, k) array of flags.
    """
    E = np.asarray(energy_table)
    steps = np.abs(np.diff(E, axis=0))
    med = np.median(steps, axis=0)
    return steps > 3.0 * np.maximum(med, 1e-12)[None, :]
