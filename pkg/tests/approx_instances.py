"""Randomized accepted instances for the eigenvector approximation tests."""

import numpy as np

from mushroom.spectral_approx import QuasiSpectrum


def random_accepted_instance(rng, dim_max=40, n_max=8):
    """Eigendecomposition + quasimodes satisfying every hypothesis.

    Targets are well-separated eigenvalues; each quasimode is its target
    eigenvector plus small in-window mixing and tiny far noise, so the
    measured residual and overlap constants stay small; eps and delta are
    then chosen strictly above the measured requirements.
    """
    while True:
        N = int(rng.integers(12, dim_max + 1))
        n = int(rng.integers(1, n_max + 1))
        if n > N // 3:
            continue
        ev = np.sort(rng.uniform(0.0, 100.0, N))
        order = rng.permutation(N)
        targets = []
        for j in order:
            if all(abs(ev[j] - ev[t]) > 6.0 for t in targets):
                targets.append(int(j))
            if len(targets) == n:
                break
        if len(targets) < n:
            continue
        Q, _ = np.linalg.qr(rng.standard_normal((N, N)))
        c = float(rng.uniform(0.5, 2.0))
        vals = np.array([ev[t] + rng.uniform(-0.2, 0.2) * c for t in targets])
        idx = np.argsort(vals)
        vals = vals[idx]
        targets = [targets[i] for i in idx]
        V = np.zeros((N, n))
        for i, t in enumerate(targets):
            v = Q[:, t].copy()
            for j in range(N):
                if j != t and abs(ev[j] - vals[i]) <= c:
                    v += rng.uniform(-0.05, 0.05) * Q[:, j]
            v += 1e-4 * rng.standard_normal(N)
            V[:, i] = v / np.linalg.norm(v)
        coeff = Q.T @ V
        eps1 = float(np.max(np.linalg.norm(
            coeff * (ev[:, None] - vals[None, :]), axis=0)))
        gv = V.T @ V - np.eye(n)
        eps2 = float(np.max(np.abs(gv))) if n > 1 else 0.0
        inside = np.zeros(N, dtype=bool)
        for v_ in vals:
            inside |= (ev >= v_ - c) & (ev <= v_ + c)
        m = int(inside.sum())
        lhs = eps1 ** 2 / c ** 2 + eps2
        if n * lhs >= 0.45 or m >= 1.5 * n:
            continue
        delta = min(0.49, max(2.0 * n * lhs, 1e-6) * 1.2 + 1e-6)
        eps = min(0.49, max(m / n - 1 + 0.05, 0.05) + float(rng.uniform(0, 0.3)))
        if eps >= 0.5 or m >= n * (1 + eps):
            continue
        quasi = QuasiSpectrum(values=vals, vectors=V)
        return ev, Q, quasi, c, eps, delta
