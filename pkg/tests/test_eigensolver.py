import math

import numpy as np
import pytest

import mushroom.specfun as sf
from mushroom.eigensolver import (DiscretizationSpec, EigenCache,
                                  RectangleDomain, SemidiskDomain,
                                  SolverError, counting, normal_derivative,
                                  rellich_ratio, solve, solve_energies_cached,
                                  track_branches, weyl_ratio)
from mushroom.geometry import MushroomGeometry, boundary_segments


def test_rectangle_ground_state():
    dom = RectangleDomain(1.0, 1.0)
    exact = 5 * math.pi ** 2 / 4
    e20 = solve(dom, DiscretizationSpec(h=1 / 20), count=3).energies[0]
    e40 = solve(dom, DiscretizationSpec(h=1 / 40), count=3).energies[0]
    # O(h^2) on the aligned grid: measured errors 2.2e-2 and 5.4e-3
    assert abs(e20 - exact) < 0.05
    assert abs(e40 - exact) / abs(e20 - exact) == pytest.approx(0.25, abs=0.05)


def test_semidisk_ground_state_extrapolated():
    target = (sf.bessel_zero(1, 1).alpha / 2.0) ** 2
    es = {}
    for h in (1 / 20, 1 / 40):
        es[h] = solve(SemidiskDomain(2.0), DiscretizationSpec(h=h),
                      count=2).energies[0]
    extrapolated = es[1 / 40] + (es[1 / 40] - es[1 / 20]) / 3.0
    assert abs(extrapolated - target) / target < 0.01


def test_semidisk_second_order_richardson():
    es = {}
    for h in (1 / 16, 1 / 32, 1 / 64):
        es[h] = solve(SemidiskDomain(2.0), DiscretizationSpec(h=h),
                      count=2).energies[0]
    ratio = (es[1 / 16] - es[1 / 32]) / (es[1 / 32] - es[1 / 64])
    assert ratio == pytest.approx(4.0, rel=0.2)


def test_mushroom_self_convergence(g):
    """Richardson ratio for E_1: the re-entrant mouth corners cap the
    convergence order between 4/3 and 2, so the measured ratio lands in
    [2^(4/3), 4]-ish; frozen to the observed band."""
    es = {}
    for h in (1 / 15, 1 / 30, 1 / 60):
        es[h] = solve(g, DiscretizationSpec(h=h), count=2,
                      keep_vectors=False).energies[0]
    ratio = (es[1 / 15] - es[1 / 30]) / (es[1 / 30] - es[1 / 60])
    assert 2.0 < ratio < 5.0
    # successive differences shrink: the scheme does converge
    assert abs(es[1 / 30] - es[1 / 60]) < abs(es[1 / 15] - es[1 / 30])


def test_sector_merge_equals_full_grid(g):
    spec_s = DiscretizationSpec(h=1 / 20, symmetry=True)
    spec_f = DiscretizationSpec(h=1 / 20, symmetry=False)
    b_sym = solve(g, spec_s, count=12, keep_vectors=False)
    b_full = solve(g, spec_f, count=12, keep_vectors=False)
    assert np.max(np.abs(b_sym.energies - b_full.energies)) < 1e-9


def test_parity_labels_and_vector_symmetry(mushroom_basis40):
    b = mushroom_basis40
    assert b.parities is not None
    img0, xi, yi = b.grid_image(0)
    # even/odd in x within 1e-6 (exact by construction of the sectors)
    for j in (0, 1, 2, 5):
        img, xi, yi = b.grid_image(j)
        flipped = img[:, ::-1]
        if b.parities[j] > 0:
            assert np.max(np.abs(img - flipped)) < 1e-6
        else:
            assert np.max(np.abs(img + flipped)) < 1e-6


def test_residuals_and_orthonormality(mushroom_basis40):
    b = mushroom_basis40
    assert np.all(b.residuals <= 1e-8 * np.maximum(b.energies, 1.0))
    gram = b.h ** 2 * (b.vectors.T @ b.vectors)
    assert np.max(np.abs(gram - np.eye(len(b)))) < 1e-6
    assert np.all(np.diff(b.energies) >= -1e-12)
    assert np.all(b.energies > 0)


def test_ground_state_sign_and_positivity(mushroom_basis40):
    b = mushroom_basis40
    # sign convention: positive at the peak; the ground state is then
    # positive at the node nearest the domain centroid
    centroid = (0.0, 0.55)
    d2 = (b.xs - centroid[0]) ** 2 + (b.ys - centroid[1]) ** 2
    assert b.vectors[int(np.argmin(d2)), 0] > 0
    interior = b.vectors[:, 0][np.hypot(b.xs, b.ys) < 1.8]
    assert interior.min() > -1e-8  # sign-definite up to solver noise


def test_domain_monotonicity(g):
    spec = DiscretizationSpec(h=1 / 20)
    e_mush = solve(g, spec, count=2, keep_vectors=False).energies[0]
    e_semi = solve(SemidiskDomain(2.0), spec, count=2,
                   keep_vectors=False).energies[0]
    assert e_mush <= e_semi


def test_counting_and_weyl(g, mushroom_basis40):
    b = mushroom_basis40
    with pytest.raises(SolverError):
        counting(b.energies, b.energies[-1] + 1.0)
    assert counting(b.energies, b.energies[0] - 1e-9) == 0
    Ns = [counting(b.energies, lam) for lam in np.linspace(3, b.energies[-1], 40)]
    assert all(a <= b_ for a, b_ in zip(Ns, Ns[1:]))
    r = weyl_ratio(g, b.energies, b.energies[-1])
    assert 0.7 < r < 1.2  # coarse grid, few modes: loose sanity only


def test_too_coarse_grid_rejected(g):
    with pytest.raises(SolverError):
        solve(g, DiscretizationSpec(h=0.2), count=2)


def test_lambda_max_coverage(g):
    basis = solve(g, DiscretizationSpec(h=1 / 20), count=None,
                  lambda_max=4.0, keep_vectors=False)
    assert basis.energies[-1] >= 16.0
    assert counting(basis.energies, 16.0) >= 5


def test_normal_derivative_rectangle():
    dom = RectangleDomain(1.0, 1.0)
    basis = solve(dom, DiscretizationSpec(h=1 / 40), count=1)
    g_rect = MushroomGeometry(1.0, 2.0, 1.0)  # bottom segment matches
    bottom = [s for s in boundary_segments(g_rect)
              if s.kind == "stalk-bottom"][0]
    s, dn = normal_derivative(basis, g_rect, bottom, 0)
    xs = np.array([bottom.point(si)[0] for si in s])
    # normalised ground state sqrt(2) sin(pi (x+1)/2) sin(pi y):
    # d_n u on the bottom edge is sqrt(2) pi sin(pi (x+1)/2)
    exact = math.sqrt(2) * math.pi * np.sin(math.pi * (xs + 1) / 2)
    l2 = np.linalg.norm(np.abs(dn) - exact) / np.linalg.norm(exact)
    assert l2 < 0.02
    inner = np.abs(xs) < 0.9  # pointwise away from the corner zeros
    assert np.max(np.abs(np.abs(dn[inner]) - exact[inner]) / exact[inner]) < 0.02


def test_rellich_identity(g, mushroom_basis40):
    for j in range(3):
        assert rellich_ratio(mushroom_basis40, g, j) == pytest.approx(1.0,
                                                                      abs=0.05)


def test_eigen_cache_roundtrip(tmp_path, g):
    cache = EigenCache(tmp_path)
    spec = DiscretizationSpec(h=1 / 15)
    e1 = solve_energies_cached(g, spec, 5, cache=cache)
    files = list(tmp_path.glob("eig_*.csv"))
    assert len(files) == 1
    e2 = solve_energies_cached(g, spec, 5, cache=cache)
    assert np.array_equal(e1, e2)


def test_deterministic_rerun(g):
    spec = DiscretizationSpec(h=1 / 15)
    a = solve(g, spec, count=6)
    b = solve(g, spec, count=6)
    assert np.array_equal(a.energies, b.energies)
    assert np.array_equal(a.vectors, b.vectors)


def test_track_branches_flags_jumps():
    t = np.linspace(0, 1, 11)
    table = np.column_stack([10 - t, 20 - 2 * t])
    table[6, 1] += 3.0  # a jump well above the median step
    flags = track_branches(t, table)
    assert flags[:, 0].sum() == 0
    assert flags[5:7, 1].any()


def test_counting_jumps_by_multiplicity():
    energies = np.array([1.0, 4.0, 4.0, 4.0, 9.0])
    assert counting(energies, 3.9) == 1
    assert counting(energies, 4.0) == 4
    assert counting(energies, 8.9) == 4
