from fractions import Fraction

import numpy as np
import pytest

from mushroom.density import DensityInstance, HypothesisError, assemble, d_n


def test_d_n_examples():
    evens = set(range(2, 101, 2))
    assert d_n(evens, 10) == Fraction(1, 2)
    assert d_n(set(), 10) == 0
    assert d_n({1}, 1) == 1


def test_d_n_exact_additivity_and_monotonicity():
    rng = np.random.default_rng(31)
    for _ in range(50):
        pool = list(range(1, 201))
        rng.shuffle(pool)
        cut = int(rng.integers(0, 120))
        cut2 = int(rng.integers(cut, 180))
        A = set(pool[:cut])
        B = set(pool[cut:cut2])
        n = int(rng.integers(1, 200))
        assert d_n(A, n) + d_n(B, n) == d_n(A | B, n)
        assert d_n(A, n) <= d_n(A | B, n)


def _harmonic_instance(n_max=10_000, J=7):
    return DensityInstance(
        g=[1.0 / k for k in range(1, n_max + 1)],
        subsets=[set(range(j + 1, n_max + 1)) for j in range(1, J + 1)],
        eps=[2.0 ** -j for j in range(1, J + 1)],
        eps_prime=[2.0 ** -j for j in range(1, J + 1)],
        d=1.0, n_max=n_max)


def test_assemble_trivial_instance():
    inst = DensityInstance(g=[0.0] * 100, subsets=[set(range(1, 101))],
                           eps=[0.25], eps_prime=[0.25], d=1.0, n_max=100)
    res = assemble(inst)
    assert res.S == set(range(1, 101))


def test_assemble_harmonic_example():
    res = assemble(_harmonic_instance())
    # thresholds are minimal and strictly increasing: N_j = 4^(j-1) + 1
    assert res.N == [2, 5, 17, 65, 257, 1025, 4097]
    # S is cofinite at the horizon (here: everything survives)
    assert len(res.S) == 10_000
    # g < 2 eps'_j on S beyond N_j, exactly the construction's guarantee
    for j, N_j in enumerate(res.N, start=1):
        tail = [k for k in res.S if k >= N_j]
        assert max(1.0 / k for k in tail) < 2.0 * 2.0 ** -j


def test_assemble_density_floor():
    res = assemble(_harmonic_instance())
    inst = _harmonic_instance()
    for j, (N_j, e_j) in enumerate(zip(res.N, inst.eps), start=1):
        hi = res.N[j] if j < len(res.N) else inst.n_max + 1
        for n in range(N_j, min(hi, inst.n_max + 1)):
            assert d_n(res.S, n) >= inst.d - 2 * e_j


def test_assemble_brute_force_equivalence():
    inst = _harmonic_instance(n_max=1000, J=5)
    res = assemble(inst)
    B = set()
    for j, ep in enumerate(inst.eps_prime, start=1):
        B_j = {k for k in range(1, 1001) if inst.g_at(k) >= 2 * ep}
        B |= {k for k in B_j if k >= res.N[j - 1]}
    assert res.S == set(range(1, 1001)) - B


def test_adversarial_refusal():
    inst = DensityInstance(g=[1.0] * 200, subsets=[set(range(1, 201))],
                           eps=[0.5], eps_prime=[0.25], d=1.0, n_max=200)
    with pytest.raises(HypothesisError) as exc:
        assemble(inst)
    assert exc.value.j == 1
    assert exc.value.n is not None


def test_density_hypothesis_refusal():
    # S_1 too sparse for d = 1
    inst = DensityInstance(g=[0.0] * 100, subsets=[set(range(1, 101, 2))],
                           eps=[0.1], eps_prime=[0.5], d=1.0, n_max=100)
    with pytest.raises(HypothesisError):
        assemble(inst)


def test_validation_errors():
    with pytest.raises(ValueError):
        DensityInstance(g=[0.0] * 10, subsets=[{1}], eps=[0.5, 0.2],
                        eps_prime=[0.5], d=1.0, n_max=10).validate()
    with pytest.raises(ValueError):
        DensityInstance(g=[0.0] * 10, subsets=[{1}, {2}], eps=[0.5, 0.5],
                        eps_prime=[0.5, 0.2], d=1.0, n_max=10).validate()
    with pytest.raises(ValueError):
        DensityInstance(g=[0.0] * 10, subsets=[{11}], eps=[0.5],
                        eps_prime=[0.5], d=1.0, n_max=10).validate()


def _random_instance(rng, n_max):
    """Generator mirrored by the brute-force acceptance check."""
    J = int(rng.integers(1, 5))
    eps = sorted(rng.uniform(0.05, 0.45, J), reverse=True)
    eps_p = sorted(rng.uniform(0.05, 0.45, J), reverse=True)
    eps = [float(v) for v in eps]
    eps_p = [float(v) for v in eps_p]
    for arr in (eps, eps_p):
        for i in range(1, len(arr)):
            if arr[i] >= arr[i - 1]:
                arr[i] = arr[i - 1] * 0.9
    d = float(rng.uniform(0.3, 1.0))
    g_vals = rng.uniform(0.0, 0.08, n_max)
    bad = rng.random(n_max) < 0.05
    g_vals[bad] = rng.uniform(0.5, 1.5, int(bad.sum()))
    g_vals[n_max // 2:] = np.minimum(g_vals[n_max // 2:], 0.05)
    subsets = []
    for j in range(J):
        keep = rng.random(n_max) > (1.0 - d) * 0.5
        S = {k + 1 for k in range(n_max)
             if keep[k] and g_vals[k] < eps_p[j] * 0.9}
        subsets.append(S)
    return DensityInstance(g=list(map(float, g_vals)), subsets=subsets,
                           eps=eps, eps_prime=eps_p, d=d, n_max=n_max)


def test_randomized_brute_force_suite():
    rng = np.random.default_rng(7)
    accepted = 0
    for _ in range(100):
        inst = _random_instance(rng, 400)
        try:
            res = assemble(inst)
        except HypothesisError:
            continue
        accepted += 1
        B = set()
        for j, ep in enumerate(inst.eps_prime, start=1):
            B_j = {k for k in range(1, inst.n_max + 1)
                   if inst.g_at(k) >= 2 * ep}
            B |= {k for k in B_j if k >= res.N[j - 1]}
        assert res.S == set(range(1, inst.n_max + 1)) - B
        assert res.N == sorted(res.N)
        assert len(set(res.N)) == len(res.N)
    assert accepted > 30  # the generator mostly produces valid instances
