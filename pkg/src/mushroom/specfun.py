"""Bessel J_n, Airy Ai, their zeros, and the uniform zero asymptotics.

Scalar evaluation lives in :mod:`mushroom._kernels` (numba-compiled under
the default backend).  This module adds the supported-envelope guards, a
vectorised fallback used for batch zero refinement under the numpy backend,
and the on-disk zero cache shared by the quasimode counting runs.

Supported envelope: integer orders 0 <= n <= 2000, arguments 0 <= x <= 2100,
zero indices k <= 1000 (the order ceiling is set by the largest angular
index the quasimode family reaches at its largest supported frequency).
Outside it a RangeError is raised rather than returning silently degraded
values.
"""

from __future__ import annotations

import math
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _kernels
from ._backend import USE_NUMBA

N_MAX = _kernels.BESSEL_N_MAX
X_MAX = _kernels.BESSEL_X_MAX
K_MAX = 1000


class RangeError(ValueError):
    """Parameter outside the supported evaluation envelope."""


def _check_order(n):
    if not (0 <= int(n) <= N_MAX) or int(n) != n:
        raise RangeError(f"order must be an integer in [0, {N_MAX}], got {n}")
    return int(n)


def _check_arg(x):
    if not (0.0 <= x <= X_MAX):
        raise RangeError(f"argument must lie in [0, {X_MAX}], got {x}")
    return float(x)


@dataclass(frozen=True)
class BesselZero:
    n: int
    k: int
    alpha: float
    residual: float


@dataclass(frozen=True)
class AiryZero:
    k: int
    a: float
    residual: float


def bessel_j(n, x):
    """J_n(x); scalar or ndarray argument."""
    n = _check_order(n)
    if np.ndim(x) == 0:
        return _kernels.bessel_j(n, _check_arg(x))
    xs = np.asarray(x, dtype=float)
    if xs.size and (xs.min() < 0.0 or xs.max() > X_MAX):
        raise RangeError(f"arguments must lie in [0, {X_MAX}]")
    if USE_NUMBA:
        return _kernels.bessel_j_batch(n, np.ascontiguousarray(xs.ravel())).reshape(xs.shape)
    jn, _ = _jn_and_deriv_vec(n, xs.ravel())
    return jn.reshape(xs.shape)


def bessel_j_pair(n, x):
    """(J_n(x), J_n'(x)) for scalar x."""
    n = _check_order(n)
    return _kernels.bessel_j_pair(n, _check_arg(x))


def airy_ai(x):
    """Ai(x) for x <= 8 (small-argument and oscillatory regimes)."""
    if x > 8.0:
        raise RangeError("airy_ai supports x <= 8")
    return _kernels.airy_ai_pair(float(x))[0]


def airy_ai_pair(x):
    if x > 8.0:
        raise RangeError("airy_ai supports x <= 8")
    return _kernels.airy_ai_pair(float(x))


def airy_zero(k: int) -> AiryZero:
    """k-th negative zero of Ai, by safeguarded Newton from the asymptotic seed."""
    if not 1 <= k <= K_MAX:
        raise RangeError(f"k must lie in [1, {K_MAX}]")
    a, res, err = _kernels.airy_zero_refine(k)
    if err != 0:
        raise ArithmeticError(f"airy zero refinement failed for k={k} (code {err})")
    return AiryZero(k=k, a=a, residual=res)


def airy_zeros(kmax: int) -> np.ndarray:
    return np.array([airy_zero(k).a for k in range(1, kmax + 1)])


def z_of_zeta(zeta: float) -> float:
    """Solve (2/3)(-zeta)^(3/2) = sqrt(z^2 - 1) - arcsec(z) for z >= 1."""
    if zeta > 0.0:
        raise ValueError("zeta must be <= 0")
    return _kernels.z_of_zeta(float(zeta))


def zero_uniform_asymptotic(n: int, k: int) -> float:
    """Leading-order uniform approximation n * z(n^(-2/3) a_k) of alpha_{n,k}."""
    n = _check_order(n)
    if n < 1:
        raise RangeError("uniform asymptotic needs n >= 1")
    a_k = airy_zero(k).a
    return n * z_of_zeta(a_k * float(n) ** (-2.0 / 3.0))


# ---------------------------------------------------------------------------
# vectorised fallback evaluation (numpy backend)


def _jn_and_deriv_vec(n, xs):
    """Vectorised (J_n, J_n') over an array of arguments."""
    xs = np.asarray(xs, dtype=float)
    jn = np.empty_like(xs)
    jn1 = np.empty_like(xs)
    series = (xs * xs <= 4.0 * (n + 1.0)) | (xs <= 8.0)
    hankel = ~series & (xs >= 20.0) & (xs >= float(n + 1) ** 2)
    miller = ~series & ~hankel
    if series.any():
        jn[series] = _series_vec(n, xs[series])
        jn1[series] = _series_vec(n + 1, xs[series])
    if hankel.any():
        jn[hankel] = _hankel_vec(n, xs[hankel])
        jn1[hankel] = _hankel_vec(n + 1, xs[hankel])
    if miller.any():
        jn[miller], jn1[miller] = _miller_vec(n, xs[miller])
    with np.errstate(divide="ignore", invalid="ignore"):
        deriv = np.where(xs > 0.0, (n / np.where(xs > 0, xs, 1.0)) * jn - jn1, 0.0)
    if n == 1:
        deriv = np.where(xs == 0.0, 0.5, deriv)
    return jn, deriv


def _series_vec(n, xs):
    half = 0.5 * xs
    t = np.ones_like(xs)
    for i in range(1, n + 1):
        t = t * half / i
    s = t.copy()
    q = half * half
    for k in range(1, 2000):
        t = t * (-q) / (k * (n + k))
        s_new = s + t
        if np.array_equal(s_new, s):
            break
        s = s_new
    return s


def _hankel_vec(n, xs):
    mu = 4.0 * n * n
    p = np.ones_like(xs)
    q = np.zeros_like(xs)
    a = np.ones_like(xs)
    for k in range(1, 40):
        a = a * (mu - (2.0 * k - 1.0) ** 2) / (8.0 * k * xs)
        if k % 2 == 1:
            q += a if k % 4 == 1 else -a
        else:
            p += a if k % 4 == 0 else -a
        if np.max(np.abs(a)) < 1e-18:
            break
    w = xs - (0.5 * n + 0.25) * math.pi
    return np.sqrt(2.0 / (math.pi * xs)) * (p * np.cos(w) - q * np.sin(w))


def _miller_vec(n, xs):
    top = max(float(n), float(np.max(xs)))
    m = int(top + 8.0 * top ** (1.0 / 3.0) + 40.0)
    jp = np.zeros_like(xs)
    jc = np.full_like(xs, 1e-30)
    norm = np.zeros_like(xs)
    jn_val = np.zeros_like(xs)
    jn1_val = np.zeros_like(xs)
    if m == n:
        jn_val[:] = jc
    if m == n + 1:
        jn1_val[:] = jc
    if m % 2 == 0:
        norm += 2.0 * jc
    for k in range(m, 0, -1):
        jm = (2.0 * k / xs) * jc - jp
        jp = jc
        jc = jm
        kk = k - 1
        if kk == n:
            jn_val = jc.copy()
        if kk == n + 1:
            jn1_val = jc.copy()
        if kk > 0 and kk % 2 == 0:
            norm += 2.0 * jc
        big = np.abs(jc) > 1e250
        if big.any():
            jc[big] *= 1e-250
            jp[big] *= 1e-250
            norm[big] *= 1e-250
            jn_val[big] *= 1e-250
            jn1_val[big] *= 1e-250
    norm += jc
    return jn_val / norm, jn1_val / norm


def _bessel_zeros_vec(n, kmax):
    """Vectorised Newton refinement of the first kmax zeros (numpy backend)."""
    ks = np.arange(1, kmax + 1)
    seeds = np.array([_kernels.bessel_zero_seed(n, int(k)) for k in ks])
    x = seeds.copy()
    for _ in range(60):
        f, fp = _jn_and_deriv_vec(n, x)
        step = np.where(fp != 0.0, f / np.where(fp != 0.0, fp, 1.0), 0.0)
        step = np.clip(step, -0.5, 0.5)
        x_new = x - step
        if np.max(np.abs(x_new - x) / x) < 1e-14:
            x = x_new
            break
        x = x_new
    f, fp = _jn_and_deriv_vec(n, x)
    resid = np.abs(f)
    # verification: ordering, spacing > pi - slack, and a true sign change
    if np.any(x[1:] - x[:-1] <= 2.0) or np.any(x <= n):
        raise ArithmeticError(f"zero ordering failed for n={n}")
    delta = 0.3
    lo, _ = _jn_and_deriv_vec(n, x - delta)
    hi, _ = _jn_and_deriv_vec(n, x + delta)
    if np.any(lo * hi >= 0.0):
        raise ArithmeticError(f"sign-change verification failed for n={n}")
    return x, resid


def _compute_zeros(n, kmax):
    if USE_NUMBA:
        alphas = np.empty(kmax)
        resids = np.empty(kmax)
        code = _kernels.bessel_zeros_fill(n, alphas, resids)
        if code != 0:
            msgs = {1: "bracketing failure", 2: "no convergence",
                    3: "ordering violation"}
            raise ArithmeticError(
                f"bessel zero search failed for n={n}: {msgs.get(code, code)}")
        return alphas, resids
    return _bessel_zeros_vec(n, kmax)


# ---------------------------------------------------------------------------
# zero cache


def default_cache_dir() -> Path:
    env = os.environ.get("MUSHROOM_CACHE_DIR")
    if env:
        return Path(env)
    return Path.home() / ".cache" / "mushroom"


class ZeroCache:
    """File-backed store of Bessel zeros, one ``n,k,alpha,residual`` per line.

    Reads are lock-free; writes go to a temp file followed by an atomic
    rename, so concurrent CLI invocations can share a cache directory.
    """

    def __init__(self, path: str | Path | None):
        self.path = Path(path) if path is not None else None
        self._store: dict[int, tuple[np.ndarray, np.ndarray]] = {}
        if self.path is not None and self.path.exists():
            self._load()

    def _load(self):
        per_n: dict[int, list[tuple[int, float, float]]] = {}
        with open(self.path) as fh:
            for line in fh:
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                n_s, k_s, a_s, r_s = line.split(",")
                per_n.setdefault(int(n_s), []).append(
                    (int(k_s), float(a_s), float(r_s)))
        for n, rows in per_n.items():
            rows.sort()
            ks = [r[0] for r in rows]
            if ks != list(range(1, len(ks) + 1)):
                continue  # hole in the record: recompute lazily
            self._store[n] = (np.array([r[1] for r in rows]),
                              np.array([r[2] for r in rows]))

    def _save(self):
        if self.path is None:
            return
        self.path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=self.path.parent,
                                   prefix=self.path.name, suffix=".tmp")
        try:
            with os.fdopen(fd, "w") as fh:
                for n in sorted(self._store):
                    alphas, resids = self._store[n]
                    for k in range(len(alphas)):
                        fh.write(f"{n},{k + 1},{alphas[k]:.16e},{resids[k]:.3e}\n")
            os.replace(tmp, self.path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise

    def zeros(self, n: int, kmax: int, save: bool = True) -> np.ndarray:
        """First kmax positive zeros of J_n, computing and caching on miss."""
        n = _check_order(n)
        if not 1 <= kmax <= K_MAX:
            raise RangeError(f"kmax must lie in [1, {K_MAX}]")
        have = self._store.get(n)
        if have is None or len(have[0]) < kmax:
            alphas, resids = _compute_zeros(n, kmax)
            self._store[n] = (alphas, resids)
            if save:
                self._save()
        return self._store[n][0][:kmax].copy()

    def residuals(self, n: int, kmax: int) -> np.ndarray:
        self.zeros(n, kmax)
        return self._store[n][1][:kmax].copy()


_memory_cache = ZeroCache(None)


def bessel_zeros(n: int, kmax: int, cache: ZeroCache | None = None) -> np.ndarray:
    """First kmax positive zeros of J_n (ascending)."""
    return (cache or _memory_cache).zeros(n, kmax)


def bessel_zero(n: int, k: int, cache: ZeroCache | None = None) -> BesselZero:
    c = cache or _memory_cache
    alphas = c.zeros(n, k)
    resid = c.residuals(n, k)[k - 1]
    return BesselZero(n=n, k=k, alpha=float(alphas[k - 1]), residual=float(resid))


# ---------------------------------------------------------------------------
# classical envelope bounds near the origin (handbook forms)


def envelope_bounds_check(n: int, x: float):
    """Check |J_n(nx)| and |J_n'(nx)| against their x <= 1 envelope bounds.

    Returns (value_bound_holds, derivative_bound_holds).  The bounds are the
    handbook ones with the n-th power applied to the whole bracket,
    [x e^(sqrt(1-x^2)) / (1 + sqrt(1-x^2))]^n.
    """
    n = _check_order(n)
    if n < 1:
        raise RangeError("envelope bounds need n >= 1")
    if not 0.0 < x <= 1.0:
        raise RangeError("envelope bounds hold for 0 < x <= 1")
    s = math.sqrt(max(0.0, 1.0 - x * x))
    log_b = n * (math.log(x) + s - math.log1p(s))
    rhs1 = math.exp(log_b)
    jn, jnp = bessel_j_pair(n, n * x)
    ok1 = abs(jn) <= rhs1 * (1.0 + 1e-12)
    rhs2 = (1.0 + x * x) ** 0.25 / (x * math.sqrt(2.0 * math.pi * n)) * rhs1
    ok2 = abs(jnp) <= rhs2 * (1.0 + 1e-12)
    return ok1, ok2
