"""Hereditary orderings and the ordering-driven collapse algorithm.

An ordering on a complex is *hereditary* when higher-dimensional simplices
are always larger, and within a dimension simplices are compared through
their largest facets first.  Given such an ordering, removing the pairs
``(sigma, mu(sigma))`` for all ``sigma`` outside ``M(K)`` in descending
order is a sequence of elementary collapses, provided the union condition
on simplices with a common largest facet holds.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .errors import HypothesisViolated, IllegalStep, InternalError, MaximalSimplex
from .simplicial import Complex, Simplex, facets, homology_ranks, simplex

#: vertex ``u`` is larger than ``v`` iff ``u < v`` (vertex 1 is the largest)
BASE_VERTEX_ORDER = "descending-label"

TIE_BREAKS = ("lex-min", "lex-max")


class HereditaryOrdering:
    """A strict total order on the nonempty simplices of a complex.

    ``rank[s]`` is an integer; larger rank means larger under the order.  The
    empty simplex carries rank -1 and sits below everything.
    """

    __slots__ = ("rank", "complex", "tie_break", "_mu")

    def __init__(self, K: Complex, rank: dict, tie_break: str | None = None):
        missing = [s for s in K.simplex_set if s and s not in rank]
        if missing:
            raise ValueError(f"ordering does not rank {list(missing[0])}")
        self.complex = K
        self.rank = dict(rank)
        self.rank[()] = -1
        if len(set(self.rank.values())) != len(self.rank):
            raise ValueError("ranks must be distinct")
        self.tie_break = tie_break
        self._mu: dict = {}

    @classmethod
    def from_sequence(cls, K: Complex, ascending) -> "HereditaryOrdering":
        """Order given explicitly as a list of simplices, smallest first."""
        return cls(K, {simplex(s): i for i, s in enumerate(ascending) if len(s)})

    def key(self, s: Simplex) -> int:
        return self.rank[s]

    def greater(self, s: Simplex, t: Simplex) -> bool:
        return self.rank[s] > self.rank[t]

    def descending(self, simplices=None) -> list:
        pool = self.complex.simplex_set if simplices is None else simplices
        return sorted((s for s in pool if s), key=self.rank.__getitem__, reverse=True)

    def mu(self, s: Simplex) -> Simplex:
        try:
            return self._mu[s]
        except KeyError:
            pass
        if not s:
            raise ValueError("the empty simplex has no facets")
        out = max(facets(s), key=self.rank.__getitem__)
        self._mu[s] = out
        return out

    def to_json(self) -> list:
        return [list(s) for s in reversed(self.descending())]


def mu(sigma: Simplex, ord: HereditaryOrdering) -> Simplex:
    """Largest facet of ``sigma``."""
    return ord.mu(tuple(sigma))


def mu_j(sigma: Simplex, j: int, ord: HereditaryOrdering) -> Simplex:
    """Largest ``j``-face of ``sigma`` (found by brute force over faces)."""
    sigma = tuple(sigma)
    if not -1 <= j <= len(sigma) - 1:
        raise ValueError(f"j={j} out of range for a {len(sigma) - 1}-simplex")
    if j == -1:
        return ()
    return max(itertools.combinations(sigma, j + 1), key=ord.rank.__getitem__)


def lam(sigma: Simplex, ord: HereditaryOrdering) -> Simplex:
    """Smallest simplex of one dimension higher containing ``sigma``."""
    cof = ord.complex.cofaces(tuple(sigma))
    if not cof:
        raise MaximalSimplex(f"{list(sigma)} has no proper coface")
    return min(cof, key=ord.rank.__getitem__)


def m_set(K: Complex, ord: HereditaryOrdering) -> set:
    """``M(K)``: the set of largest facets of nonempty simplices."""
    return {ord.mu(s) for s in K.simplex_set if s}


def _pair_magnitude(G, w: int, z: int) -> float:
    if G is None:
        return 0.0
    return G.log2_distance(w, z)


def build_hereditary_ordering(K: Complex, G=None, tie_break: str = "lex-min") -> HereditaryOrdering:
    """Construct the Gram-driven hereditary ordering on ``K``.

    Vertices follow the base order (vertex 1 largest).  Simplices of each
    dimension are grouped by their largest facet ``rho``; groups are ranked by
    the rank of ``rho``.  Inside a group the candidate vertices are peeled off
    one at a time: among the remaining vertices, the ordered pair ``(w, z)``
    with the largest ``|g_wz - 1|`` is found and ``w`` becomes the next (largest
    remaining) simplex ``rho + {w}``.

    Ties among pairs are broken by the lexicographically smallest ordered pair
    of labels (``"lex-min"``) or the largest (``"lex-max"``).  With ``G=None``
    every pair ties, giving a deterministic lexicographic extension.
    """
    if tie_break not in TIE_BREAKS:
        raise ValueError(f"tie_break must be one of {TIE_BREAKS}")
    rank: dict = {(): -1}
    next_rank = 0
    verts = sorted(K.vertices(), reverse=True)  # smallest rank first
    for v in verts:
        rank[(v,)] = next_rank
        next_rank += 1

    def peel(candidates: list[int]) -> list[int]:
        # returns the candidates largest-first
        remaining = sorted(candidates)
        out = []
        while len(remaining) > 1:
            best = None
            best_key = None
            for w in remaining:
                for z in remaining:
                    if w == z:
                        continue
                    mag = _pair_magnitude(G, w, z)
                    pair = (w, z) if tie_break == "lex-min" else (-w, -z)
                    key = (-mag, pair)
                    if best_key is None or key < best_key:
                        best_key, best = key, w
            out.append(best)
            remaining.remove(best)
        out.extend(remaining)
        return out

    for s in range(1, K.dim + 1):
        groups: dict = {}
        for sigma in K.simplices(s):
            rho = max(facets(sigma), key=rank.__getitem__)
            v = next(x for x in sigma if x not in rho)
            groups.setdefault(rho, []).append(v)
        for rho in sorted(groups, key=rank.__getitem__):
            ordered = peel(groups[rho])
            for v in reversed(ordered):
                rank[tuple(sorted(rho + (v,)))] = next_rank
                next_rank += 1
    return HereditaryOrdering(K, rank, tie_break=tie_break)


def is_hereditary(ord: HereditaryOrdering) -> bool:
    """Check both defining conditions over all pairs of nonempty simplices."""
    ss = [s for s in ord.complex.simplex_set if s]
    by_rank = sorted(ss, key=ord.rank.__getitem__)
    # condition 1: ranks must be sorted by dimension
    for a, b in zip(by_rank, by_rank[1:]):
        if len(a) > len(b):
            return False
    # condition 2: within one dimension, larger mu implies larger simplex
    by_dim: dict = {}
    for s in ss:
        by_dim.setdefault(len(s), []).append(s)
    for group in by_dim.values():
        group.sort(key=ord.rank.__getitem__)
        for a, b in itertools.combinations(group, 2):
            # here b > a, so mu(a) > mu(b) is forbidden
            if ord.rank[ord.mu(a)] > ord.rank[ord.mu(b)]:
                return False
    return True


def _is_free(alive: set, sigma: Simplex, tau: Simplex, m: int) -> bool:
    if sigma not in alive or tau not in alive or not tau:
        return False
    if len(tau) != len(sigma) - 1 or not set(tau) <= set(sigma):
        return False
    for v in range(1, m + 1):
        if v not in sigma and tuple(sorted(sigma + (v,))) in alive:
            return False
        if v not in tau and v not in sigma and tuple(sorted(tau + (v,))) in alive:
            return False
    return True


def free_pairs(K: Complex) -> list:
    """All free pairs ``(sigma, tau)`` of ``K`` with ``tau`` nonempty."""
    alive = set(K.simplex_set)
    out = []
    for sigma in K.maximal():
        if len(sigma) < 2:
            continue
        for tau in facets(sigma):
            if _is_free(alive, sigma, tau, K.m):
                out.append((sigma, tau))
    return out


@dataclass(frozen=True)
class CollapseSequence:
    steps: tuple
    residual: Complex

    def to_json(self) -> dict:
        return {
            "steps": [[list(s), list(t)] for s, t in self.steps],
            "residual": self.residual.to_json(),
        }

    @classmethod
    def from_json(cls, data: dict, m: int | None = None) -> "CollapseSequence":
        steps = tuple((simplex(s), simplex(t)) for s, t in data["steps"])
        return cls(steps, Complex.from_json(data["residual"], m))


def check_union_hypothesis(K: Complex, ord: HereditaryOrdering, r: int) -> None:
    """Raise :class:`HypothesisViolated` unless equal-``mu`` simplices of dim >= r have unions in K.

    For a flag complex only dimension ``r`` has to be inspected; otherwise every
    dimension from ``r`` up is checked.
    """
    dims = [r] if K.is_flag() else range(max(r, 0), K.dim + 1)
    members = K.simplex_set
    for d in dims:
        groups: dict = {}
        for s in K.simplices(d):
            if s:
                groups.setdefault(ord.mu(s), []).append(s)
        for group in groups.values():
            group.sort(key=ord.rank.__getitem__, reverse=True)
            for a, b in itertools.combinations(group, 2):
                if tuple(sorted(set(a) | set(b))) not in members:
                    raise HypothesisViolated(a, b)


def collapse_below(K: Complex, ord: HereditaryOrdering, r: int, check: bool = True) -> CollapseSequence:
    """Collapse ``K`` onto a subcomplex of dimension < ``r`` following ``ord``."""
    if ord.complex is not K and ord.complex != K:
        raise ValueError("ordering belongs to a different complex")
    if check:
        check_union_hypothesis(K, ord, r)
    M = m_set(K, ord)
    schedule = [s for s in ord.descending() if len(s) - 1 >= r and s not in M]
    alive = set(K.simplex_set)
    steps = []
    for sigma in schedule:
        tau = ord.mu(sigma)
        if not _is_free(alive, sigma, tau, K.m):
            raise IllegalStep(f"({list(sigma)}, {list(tau)}) is not a free pair at step {len(steps)}")
        alive.discard(sigma)
        alive.discard(tau)
        steps.append((sigma, tau))
    residual = Complex(alive, K.m, check=False)
    if residual.dim >= r:
        raise InternalError(f"residual has dimension {residual.dim} >= {r}")
    return CollapseSequence(tuple(steps), residual)


@dataclass(frozen=True)
class CollapseCheck:
    """Outcome of :func:`verify_collapse`; truthy iff the replay succeeded."""

    ok: bool
    failed_step: int | None = None
    reason: str = ""
    euler: list = field(default_factory=list)

    def __bool__(self):
        return self.ok


def verify_collapse(K: Complex, seq: CollapseSequence) -> CollapseCheck:
    """Replay ``seq`` on ``K`` and independently re-check every step."""
    alive = set(K.simplex_set)
    chi = K.euler_characteristic()
    current = chi
    trail = [chi]
    for i, (sigma, tau) in enumerate(seq.steps):
        sigma, tau = tuple(sigma), tuple(tau)
        if not _is_free(alive, sigma, tau, K.m):
            return CollapseCheck(False, i, f"({list(sigma)}, {list(tau)}) is not free", trail)
        alive.discard(sigma)
        alive.discard(tau)
        # closure can only break at a superset of a removed simplex
        for gone in (sigma, tau):
            if any(set(gone) < set(s) for s in alive if len(s) == len(gone) + 1):
                return CollapseCheck(False, i, f"{list(gone)} still has a coface", trail)
        current += (-1) ** (len(sigma) - 1) * -1 + (-1) ** (len(tau) - 1) * -1
        trail.append(current)
        if current != chi:
            return CollapseCheck(False, i, f"Euler characteristic changed {chi} -> {current}", trail)
    try:
        final = Complex(alive, K.m, check=True)
    except ValueError as exc:
        return CollapseCheck(False, len(seq.steps), f"residual is not a complex: {exc}", trail)
    if final != seq.residual:
        return CollapseCheck(False, len(seq.steps), "recorded residual does not match replay", trail)
    h0, h1 = homology_ranks(final), homology_ranks(K)
    width = max(len(h0), len(h1))
    if h0 + [0] * (width - len(h0)) != h1 + [0] * (width - len(h1)):
        return CollapseCheck(False, len(seq.steps), "homology of residual differs", trail)
    return CollapseCheck(True, None, "", trail)
