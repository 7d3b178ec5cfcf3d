import math

import numpy as np
import pytest

import mushroom.specfun as sf
from mushroom.specfun import RangeError, ZeroCache


def test_bessel_small_argument_values():
    assert sf.bessel_j(0, 0.0) == 1.0
    assert sf.bessel_j(1, 0.0) == 0.0
    assert sf.bessel_j(7, 0.0) == 0.0


def _j0_series(x):
    """Independent plain ascending series for J_0 (oracle use only)."""
    t, s, k = 1.0, 1.0, 0
    while True:
        k += 1
        t *= -(x * x / 4.0) / (k * k)
        if s + t == s:
            return s
        s += t


def test_j0_first_zero_against_series_bisection():
    lo, hi = 2.0, 3.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if _j0_series(lo) * _j0_series(mid) <= 0:
            hi = mid
        else:
            lo = mid
    oracle = 0.5 * (lo + hi)
    assert abs(oracle - 2.404826) < 1e-6
    assert abs(sf.bessel_j(0, oracle)) < 1e-6
    assert sf.bessel_zero(0, 1).alpha == pytest.approx(oracle, abs=1e-9)


def test_bessel_against_reference():
    import scipy.special as sp
    rng = np.random.default_rng(12)
    for n in (0, 1, 2, 5, 13, 40, 111, 300):
        xs = np.concatenate([np.linspace(0.01, 30, 61),
                             rng.uniform(0.0, 1000.0, 60)])
        ref = sp.jv(n, xs)
        mine = sf.bessel_j(n, xs)
        amp = np.sqrt(2.0 / (math.pi * np.maximum(xs, n + 1.0)))
        # relative accuracy away from the zeros of J_n, amplitude-scaled
        # absolute accuracy everywhere
        mask = np.abs(ref) > 1e-2 * amp
        assert np.max(np.abs(mine[mask] - ref[mask]) / np.abs(ref[mask])) < 1e-10
        assert np.max(np.abs(mine - ref) / amp) < 1e-11


def test_bessel_deep_decay_relative_accuracy():
    import scipy.special as sp
    for n, x in ((100, 30.0), (200, 60.0), (300, 100.0)):
        ref = sp.jv(n, x)
        assert abs(sf.bessel_j(n, x) - ref) / abs(ref) < 1e-10


def test_bessel_ode_residual():
    """x^2 J'' + x J' + (x^2 - n^2) J = 0; J' by recurrence, J'' by an
    independent second difference."""
    for n in (0, 3, 17, 60):
        for x in (0.5, 4.0, 21.0, 173.0, 800.0):
            jn, jp = sf.bessel_j_pair(n, x)
            h = 1e-5 * max(1.0, x)
            d2 = (sf.bessel_j(n, x + h) - 2 * jn + sf.bessel_j(n, x - h)) / h ** 2
            resid = x * x * d2 + x * jp + (x * x - n * n) * jn
            assert abs(resid) < 1e-6 * (1 + x * x)


def test_zero_examples_and_residual_contract():
    z = sf.bessel_zero(0, 1)
    assert z.alpha == pytest.approx(2.404826, abs=1e-6)
    z = sf.bessel_zero(1, 1)
    assert z.alpha == pytest.approx(3.831706, abs=1e-6)
    for n, k in ((0, 1), (1, 1), (7, 3), (55, 20), (200, 8)):
        z = sf.bessel_zero(n, k)
        jn, jp = sf.bessel_j_pair(n, z.alpha)
        assert abs(jn) <= 1e-10 * max(1.0, abs(jp) * z.alpha)
        assert z.alpha > n


def test_zero_interlacing():
    a51 = sf.bessel_zero(5, 1).alpha
    a61 = sf.bessel_zero(6, 1).alpha
    a52 = sf.bessel_zero(5, 2).alpha
    assert a51 < a61 < a52
    for n in (0, 3, 12):
        zn = sf.bessel_zeros(n, 12)
        zn1 = sf.bessel_zeros(n + 1, 12)
        assert np.all(zn[:-1] < zn1[:-1])
        assert np.all(zn1[:-1] < zn[1:])


def _airy_maclaurin_oracle(x):
    """Small-argument Maclaurin evaluation, independent term recurrences."""
    c1, c2 = 0.3550280538878172, 0.2588194037928068
    f = t = 1.0
    gsum = u = x
    for k in range(60):
        t *= x ** 3 / ((3 * k + 2.0) * (3 * k + 3.0))
        u *= x ** 3 / ((3 * k + 3.0) * (3 * k + 4.0))
        f += t
        gsum += u
    return c1 * f - c2 * gsum


def test_airy_first_zero_against_maclaurin_bisection():
    lo, hi = -3.0, -2.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if _airy_maclaurin_oracle(lo) * _airy_maclaurin_oracle(mid) <= 0:
            hi = mid
        else:
            lo = mid
    oracle = 0.5 * (lo + hi)
    assert oracle == pytest.approx(-2.338107, abs=1e-6)
    assert sf.airy_zero(1).a == pytest.approx(oracle, abs=1e-9)


def test_airy_zero_asymptotic_seed_quality():
    # |a_k + (3 pi k / 2)^(2/3)| stays below 0.5 k^(-1/3); at k = 10 the
    # measured gap is 0.193, so the remainder really is O(k^(-1/3)) scale
    for k in (1, 2, 3, 10, 100, 1000):
        a = sf.airy_zero(k).a
        seed = -(1.5 * math.pi * k) ** (2.0 / 3.0)
        assert abs(a - seed) <= 0.5 * k ** (-1.0 / 3.0)
    gap10 = abs(sf.airy_zero(10).a + (15.0 * math.pi) ** (2.0 / 3.0))
    assert 0.15 < gap10 < 0.25  # measured 0.2177: the remainder is genuine


def test_airy_zeros_monotone_and_residuals():
    zs = sf.airy_zeros(100)
    assert np.all(np.diff(zs) < 0)
    for k in (1, 10, 100):
        assert sf.airy_zero(k).residual < 1e-10


def test_z_of_zeta():
    assert sf.z_of_zeta(0.0) == 1.0
    # round trip at z = 2
    y = math.sqrt(3.0) - math.acos(0.5)
    zeta = -(1.5 * y) ** (2.0 / 3.0)
    assert sf.z_of_zeta(zeta) == pytest.approx(2.0, abs=1e-10)
    zs = [sf.z_of_zeta(z) for z in np.linspace(-8.0, 0.0, 40)]
    assert all(a > b for a, b in zip(zs, zs[1:]))
    with pytest.raises(ValueError):
        sf.z_of_zeta(0.5)


def test_uniform_asymptotic_accuracy_and_trend():
    assert abs(sf.zero_uniform_asymptotic(100, 1)
               - sf.bessel_zero(100, 1).alpha) / sf.bessel_zero(100, 1).alpha < 0.01
    assert abs(sf.zero_uniform_asymptotic(50, 10)
               - sf.bessel_zero(50, 10).alpha) / sf.bessel_zero(50, 10).alpha < 0.02
    worsts = []
    for n in (25, 50, 100, 200):
        km = max(2, n // 6)
        zs = sf.bessel_zeros(n, km)
        worsts.append(max(
            abs(sf.zero_uniform_asymptotic(n, k) - zs[k - 1]) / zs[k - 1]
            for k in range(1, km + 1)))
    assert all(a > b for a, b in zip(worsts, worsts[1:]))


def test_envelope_bounds():
    assert sf.envelope_bounds_check(20, 0.5) == (True, True)
    assert sf.envelope_bounds_check(5, 1.0) == (True, True)
    for n in (5, 10, 50):
        for x in np.arange(0.1, 1.0001, 0.1):
            ok1, ok2 = sf.envelope_bounds_check(n, float(x))
            assert ok1 and ok2, (n, x)


def test_range_errors():
    with pytest.raises(RangeError):
        sf.bessel_j(-1, 1.0)
    with pytest.raises(RangeError):
        sf.bessel_j(sf.N_MAX + 1, 1.0)
    with pytest.raises(RangeError):
        sf.bessel_j(0, sf.X_MAX + 1.0)
    with pytest.raises(RangeError):
        sf.bessel_zero(0, sf.K_MAX + 1)
    with pytest.raises(RangeError):
        sf.airy_ai(9.0)


def test_zero_cache_roundtrip_and_extension(tmp_path):
    path = tmp_path / "zeros.csv"
    c1 = ZeroCache(path)
    z5 = c1.zeros(4, 5)
    assert path.exists()
    # reload sees the same values bit for bit
    c2 = ZeroCache(path)
    assert np.array_equal(c2.zeros(4, 5), z5)
    # extension recomputes consistently
    z9 = c2.zeros(4, 9)
    assert np.allclose(z9[:5], z5, rtol=0, atol=1e-12)
    text = path.read_text()
    assert text.splitlines()[0].startswith("4,1,")
    # a second cache object writing concurrently leaves a valid file
    c3 = ZeroCache(path)
    c3.zeros(7, 3)
    c2.zeros(2, 3)
    merged = ZeroCache(path)
    assert len(merged.zeros(2, 3)) == 3


def test_bessel_array_matches_scalar():
    xs = np.linspace(0.0, 400.0, 57)
    for n in (0, 3, 41):
        batch = sf.bessel_j(n, xs)
        scalars = np.array([sf.bessel_j(n, float(x)) for x in xs])
        amp = np.sqrt(2.0 / (math.pi * np.maximum(xs, n + 1.0)))
        assert np.max(np.abs(batch - scalars) / amp) < 1e-11


def test_zero_cache_concurrent_cli_writers(tmp_path):
    """Parallel CLI invocations sharing a cache leave a parseable file."""
    import subprocess
    import sys
    procs = [
        subprocess.Popen(
            [sys.executable, "-m", "mushroom.cli", "specfun", "zeros",
             "--n", str(n), "--kmax", "6", "--cache-dir", str(tmp_path)],
            stdout=subprocess.DEVNULL, stderr=subprocess.PIPE)
        for n in (2, 3, 5, 8)
    ]
    for p in procs:
        _, err = p.communicate(timeout=120)
        assert p.returncode == 0, err.decode()
    cache = ZeroCache(tmp_path / "bessel_zeros.csv")
    # at least the last writer's rows survive intact; the file always parses
    assert any(len(cache._store.get(n, ((), ()))[0]) == 6
               for n in (2, 3, 5, 8))
    z = cache.zeros(5, 6)
    assert np.all(np.diff(z) > 0)
