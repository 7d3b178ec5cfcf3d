"""Assembling a full-density index set along which a function tends to zero.

Given sets S_j that each carry density > d - eps_j and on which g eventually
drops below eps'_j, the construction removes the union of the bad sets
``B_j = {k : g(k) >= 2 eps'_j}`` from threshold indices N_j onward.  All
asymptotic hypotheses are checked over a finite horizon: "for all large n"
means "for every n in [tail_start, N_max]" with ``tail_start = N_max // 2``
unless the instance overrides it.  Densities are exact rationals.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction


class HypothesisError(ValueError):
    """An instance hypothesis fails at the finite horizon; names (j, n)."""

    def __init__(self, message, j=None, n=None):
        super().__init__(message)
        self.j = j
        self.n = n


def d_n(A, n: int) -> Fraction:
    """Windowed density #{k <= n : k in A} / n, exact."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not isinstance(A, (set, frozenset)):
        A = set(A)
    count = sum(1 for k in A if 1 <= k <= n)
    return Fraction(count, n)


@dataclass
class DensityInstance:
    """Finite-horizon instance of the assembly lemma.

    ``g`` maps indices 1..N_max to reals; ``subsets`` lists the S_j;
    ``eps`` and ``eps_prime`` are the matching strictly decreasing positive
    sequences; ``d`` is the target density.
    """

    g: dict | list
    subsets: list[set]
    eps: list[float]
    eps_prime: list[float]
    d: float
    n_max: int
    tail_start: int | None = None

    def g_at(self, k: int) -> float:
        if isinstance(self.g, dict):
            return self.g[k]
        return self.g[k - 1]

    def validate(self):
        J = len(self.subsets)
        if not (len(self.eps) == len(self.eps_prime) == J):
            raise ValueError("eps sequences must match the number of subsets")
        for name, seq in (("eps", self.eps), ("eps_prime", self.eps_prime)):
            if any(a <= 0 for a in seq):
                raise ValueError(f"{name} must be positive")
            if any(a <= b for a, b in zip(seq, seq[1:])):
                raise ValueError(f"{name} must be strictly decreasing")
        for j, S in enumerate(self.subsets, start=1):
            for k in S:
                if not 1 <= k <= self.n_max:
                    raise ValueError(f"S_{j} contains {k} outside [1, {self.n_max}]")


@dataclass
class AssemblyResult:
    S: set
    N: list[int]            # thresholds N_j, strictly increasing
    B: list[set] = field(repr=False)  # bad sets B_j
    tail_start: int = 0


def _check_hypotheses(inst: DensityInstance, tail_start: int):
    """Finite proxies of the density and decay hypotheses."""
    for j, (S_j, e_j, ep_j) in enumerate(
            zip(inst.subsets, inst.eps, inst.eps_prime), start=1):
        sorted_S = sorted(S_j)
        count = 0
        idx = 0
        for n in range(1, inst.n_max + 1):
            while idx < len(sorted_S) and sorted_S[idx] <= n:
                count += 1
                idx += 1
            if n >= tail_start and Fraction(count, n) <= inst.d - e_j:
                raise HypothesisError(
                    f"density hypothesis fails for S_{j} at n={n}: "
                    f"d_n = {count}/{n} <= d - eps_{j}", j=j, n=n)
        # limsup_{n in S_j} g(n) < eps'_j, finite proxy on the tail
        for k in sorted_S:
            if k >= tail_start and inst.g_at(k) >= ep_j:
                raise HypothesisError(
                    f"decay hypothesis fails for S_{j} at n={k}: "
                    f"g = {inst.g_at(k)} >= eps'_{j}", j=j, n=k)


def assemble(inst: DensityInstance) -> AssemblyResult:
    """Construct S = [1, N_max] \\ union_j (B_j intersect [N_j, N_max]).

    ``N_j`` is the minimal threshold past ``N_{j-1}`` from which the density
    of ``B_j = {k : g(k) >= 2 eps'_j}`` stays below ``1 - d + 2 eps_j`` up to
    the horizon; a missing threshold is a hypothesis failure.
    """
    inst.validate()
    tail_start = inst.tail_start if inst.tail_start is not None else max(
        1, inst.n_max // 2)
    _check_hypotheses(inst, tail_start)
    bad_sets = []
    thresholds = []
    prev = 0
    for j, ep_j in enumerate(inst.eps_prime, start=1):
        B_j = {k for k in range(1, inst.n_max + 1)
               if inst.g_at(k) >= 2.0 * ep_j}
        bound = Fraction(1) - Fraction(inst.d).limit_denominator(10 ** 12) \
            + 2 * Fraction(inst.eps[j - 1]).limit_denominator(10 ** 12)
        # suffix scan: minimal N > prev with d_n(B_j) < bound for all
        # n in [N, N_max]
        sorted_B = sorted(B_j)
        counts = [0] * (inst.n_max + 1)
        c = 0
        idx = 0
        for n in range(1, inst.n_max + 1):
            while idx < len(sorted_B) and sorted_B[idx] <= n:
                c += 1
                idx += 1
            counts[n] = c
        # the scan floor prev+1 keeps the thresholds strictly increasing
        N_j = None
        for n in range(inst.n_max, prev, -1):
            if Fraction(counts[n], n) < bound:
                N_j = n
            else:
                break
        if N_j is None:
            raise HypothesisError(
                f"no threshold N_{j} satisfies the B_{j} density bound "
                f"{bound} up to the horizon", j=j, n=inst.n_max)
        bad_sets.append(B_j)
        thresholds.append(N_j)
        prev = N_j
    excluded = set()
    for B_j, N_j in zip(bad_sets, thresholds):
        excluded |= {k for k in B_j if k >= N_j}
    S = set(range(1, inst.n_max + 1)) - excluded
    return AssemblyResult(S=S, N=thresholds, B=bad_sets, tail_start=tail_start)
