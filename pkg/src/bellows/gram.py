"""Gram matrices, their clique complexes, and dyadic choice of the threshold kappa.

Everything that compares ``|g_uv - 1|`` against ``kappa`` works with
``log2|g_uv - 1|`` ("logmag") so that thresholds far below the smallest
double (``2**-1074``) remain representable.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .collapse import CollapseSequence, build_hereditary_ordering, collapse_below
from .errors import HypothesisViolated, InternalError, PolicyUnsatisfied, TooLarge
from .simplicial import Complex

NEG_INF = float("-inf")


def gap_width(r: int) -> int:
    """Width in log2 units of the empty band required below kappa."""
    return 4 * (r + 1)


def kappa_floor(m: int, r: int) -> int:
    """log2 of the lower bound ``2**(-2 m^2 (r+1))`` that kappa must exceed."""
    return -2 * m * m * (r + 1)



class GramMatrix:
    """Symmetric ``m x m`` matrix with unit diagonal and a log-magnitude view.

    ``entries`` may be ``None`` ("log-only mode").  ``logmag`` is an ``m x m``
    float array holding ``log2|g_uv - 1|`` (``-inf`` for exact coincidence);
    its diagonal is ``-inf``.
    """

    __slots__ = ("m", "entries", "logmag")

    def __init__(self, m: int, entries=None, logmag=None):
        self.m = int(m)
        if entries is not None:
            entries = np.asarray(entries, dtype=complex)
            if entries.shape != (m, m):
                raise ValueError(f"entries must be {m}x{m}")
            if not np.allclose(entries, entries.T, rtol=0, atol=1e-12):
                raise ValueError("Gram matrix must be symmetric")
            if not np.allclose(np.diag(entries), 1, rtol=0, atol=1e-9):
                raise ValueError("Gram matrix must have unit diagonal")
        if logmag is None:
            if entries is None:
                raise ValueError("need entries or logmag")
            with np.errstate(divide="ignore"):
                logmag = np.log2(np.abs(entries - 1))
        logmag = np.array(logmag, dtype=float)
        if logmag.shape != (m, m):
            raise ValueError(f"logmag must be {m}x{m}")
        logmag = np.minimum(logmag, logmag.T) if np.any(logmag != logmag.T) else logmag
        np.fill_diagonal(logmag, NEG_INF)
        self.entries = entries
        self.logmag = logmag

    @classmethod
    def from_entries(cls, G, q=None) -> "GramMatrix":
        """Build from entries; ``q`` (if given) is an accurate ``G - 1`` used for logmag."""
        G = np.asarray(G, dtype=complex)
        src = G - 1 if q is None else np.asarray(q, dtype=complex)
        with np.errstate(divide="ignore"):
            lm = np.log2(np.abs(src))
        return cls(G.shape[0], G, lm)

    @classmethod
    def from_logmag(cls, m: int, values) -> "GramMatrix":
        """Log-only matrix from ``{(u, v): log2|g-1|}`` (1-based, missing pairs = -inf)."""
        lm = np.full((m, m), NEG_INF)
        items = values.items() if hasattr(values, "items") else values
        for (u, v), x in items:
            lm[u - 1, v - 1] = lm[v - 1, u - 1] = float(x)
        return cls(m, None, lm)

    def log2_distance(self, u: int, v: int) -> float:
        """``log2|g_uv - 1|`` for 1-based labels."""
        return float(self.logmag[u - 1, v - 1])

    def pairs(self):
        """Yield ``(u, v, logmag)`` for ``u < v`` (1-based)."""
        for u in range(1, self.m + 1):
            for v in range(u + 1, self.m + 1):
                yield u, v, float(self.logmag[u - 1, v - 1])

    def finite_logmags(self) -> np.ndarray:
        iu = np.triu_indices(self.m, 1)
        vals = self.logmag[iu]
        return np.sort(vals[np.isfinite(vals)])

    def numerical_rank(self, rtol: float = 1e-8) -> int:
        if self.entries is None:
            raise ValueError("numerical rank needs entries")
        s = np.linalg.svd(self.entries, compute_uv=False)
        return int(np.sum(s > rtol * s[0])) if s.size and s[0] > 0 else 0

    def to_json(self) -> dict:
        out: dict = {"m": self.m}
        if self.entries is not None:
            out["entries"] = [
                [u, v, float(self.entries[u - 1, v - 1].real), float(self.entries[u - 1, v - 1].imag)]
                for u in range(1, self.m + 1)
                for v in range(u, self.m + 1)
            ]
        out["logmag"] = [[u, v, x if math.isfinite(x) else "-inf"] for u, v, x in self.pairs()]
        return out

    @classmethod
    def from_json(cls, data: dict) -> "GramMatrix":
        m = int(data["m"])
        entries = None
        if "entries" in data:
            entries = np.eye(m, dtype=complex)
            for u, v, re, im in data["entries"]:
                entries[u - 1, v - 1] = entries[v - 1, u - 1] = complex(re, im)
        lm = None
        if "logmag" in data:
            lm = np.full((m, m), NEG_INF)
            for u, v, x in data["logmag"]:
                lm[u - 1, v - 1] = lm[v - 1, u - 1] = float(x)
        return cls(m, entries, lm)


def graph_gamma(G: GramMatrix, log2_kappa: float) -> list:
    """Edges ``(u, v)``, ``u < v``, with ``|g_uv - 1| < kappa`` (strict)."""
    return [(u, v) for u, v, x in G.pairs() if x < log2_kappa]


def clique_complex(edges, m: int, budget: int = 2_000_000) -> Complex:
    """Flag complex of the graph on ``1..m`` with the given edges."""
    nbr = {v: set() for v in range(1, m + 1)}
    for u, v in edges:
        if u == v:
            continue
        nbr[u].add(v)
        nbr[v].add(u)
    out = [()]
    # grow each clique only by labels above its last vertex
    frontier = [((v,), {w for w in nbr[v] if w > v}) for v in range(1, m + 1)]
    while frontier:
        nxt = []
        for s, cand in frontier:
            out.append(s)
            if len(out) > budget:
                raise TooLarge(f"clique complex exceeds {budget} simplices")
            for w in sorted(cand):
                nxt.append((s + (w,), {x for x in cand & nbr[w] if x > w}))
        frontier = nxt
    return Complex(out, m, check=False)


def gamma_complex(G: GramMatrix, log2_kappa: float) -> Complex:
    """``K(G, kappa)``."""
    return clique_complex(graph_gamma(G, log2_kappa), G.m)


@dataclass(frozen=True)
class KappaResult:
    log2_kappa: float
    r: int
    gap_ok: bool
    method: str = "integer-scan"

    def to_json(self) -> dict:
        return {"log2_kappa": self.log2_kappa, "r": self.r, "gap_ok": self.gap_ok, "method": self.method}


def verify_gap(G: GramMatrix, log2_kappa: float, r: int) -> bool:
    """Every ``logmag`` is above ``log2_kappa`` or below ``log2_kappa - 4(r+1)``."""
    lo = log2_kappa - gap_width(r)
    return all(x > log2_kappa or x < lo for _, _, x in G.pairs())


def _gap_free(vals: np.ndarray, beta: float, width: float) -> bool:
    # vals sorted; is there any value in [beta - width, beta]?
    i = np.searchsorted(vals, beta - width, side="left")
    return not (i < vals.size and vals[i] <= beta)


def select_kappa(G: GramMatrix, r: int) -> KappaResult:
    """Largest dyadic kappa with an empty band ``[kappa 2^{-4(r+1)}, kappa]``.

    Integers ``beta = -1, -2, ...`` are tried in turn while ``beta`` stays above
    ``-2 m^2 (r+1)``.  If every integer is blocked (possible only for
    adversarial inputs with many points), the highest real gap wide enough is
    used instead, with ``beta`` centred in its slack.
    """
    if r < 1:
        raise ValueError("r must be >= 1")
    W = gap_width(r)
    floor = kappa_floor(G.m, r)
    vals = G.finite_logmags()
    beta = -1
    while beta > floor:
        if _gap_free(vals, beta, W):
            res = KappaResult(float(beta), r, True, "integer-scan")
            assert verify_gap(G, res.log2_kappa, r)
            return res
        beta -= 1
    # real-valued fallback over the gaps between consecutive values
    lo_end = floor - W
    inside = vals[(vals > lo_end) & (vals < 0)]
    bounds = [0.0] + sorted(inside.tolist(), reverse=True) + [lo_end]
    for hi, lo in zip(bounds, bounds[1:]):
        slack = (hi - lo) - W
        if slack > 0:
            b = hi - slack / 2
            if b > floor and b < 0 and verify_gap(G, b, r):
                return KappaResult(b, r, True, "real-gap")
    raise InternalError("no admissible kappa found; the counting argument guarantees one")


def _ordering_digest(order) -> str:
    payload = json.dumps(order.to_json(), separators=(",", ":")).encode()
    return hashlib.sha256(payload).hexdigest()


@dataclass
class Theorem51Report:
    ok: bool
    kappa: KappaResult
    complex: Complex
    residual_dim: int | None
    sequence: CollapseSequence | None
    ordering_sha256: str
    tie_break: str
    counterexample: tuple | None = None
    rank: int | None = None
    extra: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "ok": self.ok,
            "kappa": self.kappa.to_json(),
            "complex": self.complex.to_json(),
            "f_vector": self.complex.f_vector(),
            "residual_dim": self.residual_dim,
            "ordering_sha256": self.ordering_sha256,
            "tie_break": self.tie_break,
            "rank": self.rank,
            "sequence": None if self.sequence is None else self.sequence.to_json(),
            "counterexample": None
            if self.counterexample is None
            else [list(s) for s in self.counterexample],
        }


def theorem_5_1_check(G: GramMatrix, r: int, tie_break: str = "lex-min", rank_rtol: float = 1e-8) -> Theorem51Report:
    """Select kappa, build ``K(G, kappa)`` and collapse it below dimension ``r``.

    A :class:`HypothesisViolated` during the collapse is reported (``ok=False``
    with the offending pair) rather than raised.
    """
    rank = None
    if G.entries is not None:
        rank = G.numerical_rank(rank_rtol)
        if rank > 2 * r:
            raise ValueError(f"Gram matrix has numerical rank {rank} > 2r = {2 * r}")
    kap = select_kappa(G, r)
    K = gamma_complex(G, kap.log2_kappa)
    order = build_hereditary_ordering(K, G, tie_break=tie_break)
    digest = _ordering_digest(order)
    try:
        seq = collapse_below(K, order, r)
    except HypothesisViolated as exc:
        return Theorem51Report(False, kap, K, None, None, digest, tie_break, (exc.sigma, exc.tau), rank)
    return Theorem51Report(True, kap, K, seq.residual.dim, seq, digest, tie_break, None, rank)


# ---------------------------------------------------------------- generators


def _bilinear(z, w):
    return np.sum(z * w, axis=0)


def _normalize_columns(Z):
    return Z / np.sqrt(_bilinear(Z, Z).astype(complex))


def _gram_from_columns(Z) -> GramMatrix:
    G = Z.T @ Z
    m = Z.shape[1]
    q = np.zeros((m, m), dtype=complex)
    for u in range(m):
        d = Z - Z[:, [u]]
        q[u] = -_bilinear(d, d) / 2
    G = (G + G.T) / 2
    np.fill_diagonal(G, 1)
    return GramMatrix.from_entries(G, q)


def random_low_rank_gram(m: int, rank_bound: int, seed: int, mode: str = "generic") -> GramMatrix:
    """Random ``A^t A`` with ``A`` a ``rank_bound x m`` complex matrix on the quadric.

    ``mode="generic"`` draws Gaussian columns.  ``mode="clustered"`` places
    columns near a few centres ``c`` along two isotropic directions ``v, w``
    (``<v,v> = <w,w> = 0``, ``<v,w> = 1``); then ``g_uv - 1`` is roughly
    ``-(a_u - a_v)(b_u - b_v)``, which yields multi-scale magnitudes and
    non-transitive "close" relations.  Needs ``rank_bound >= 3``.
    """
    if rank_bound > m or rank_bound < 1:
        raise ValueError("need 1 <= rank_bound <= m")
    rng = np.random.default_rng(seed)
    k = rank_bound
    if mode == "generic":
        cols = []
        while len(cols) < m:
            z = rng.standard_normal(k) + 1j * rng.standard_normal(k)
            if abs(np.sum(z * z)) < 1e-6:
                continue
            cols.append(z)
        if k == 1:
            # the quadric in C^1 is exactly {+1, -1}
            Z = np.where(_normalize_columns(np.array(cols).T).real >= 0, 1.0, -1.0).astype(complex)
        else:
            Z = _normalize_columns(np.array(cols).T)
        return _gram_from_columns(Z)
    if mode != "clustered":
        raise ValueError(f"unknown mode {mode!r}")
    if k < 3:
        raise ValueError("clustered mode needs rank_bound >= 3")
    v = np.zeros(k, dtype=complex)
    w = np.zeros(k, dtype=complex)
    v[1], v[2] = 1 / math.sqrt(2), 1j / math.sqrt(2)
    w[1], w[2] = 1 / math.sqrt(2), -1j / math.sqrt(2)
    n_centres = 1 if k == 3 else int(rng.integers(1, 3))
    centres = []
    for _ in range(n_centres):
        c = np.zeros(k, dtype=complex)
        c[0] = 1.0
        if k > 3:
            theta = rng.uniform(-1, 1)
            c[0], c[3] = math.cos(theta), math.sin(theta)
        centres.append(c)
    # coordinates along v and w come from a few well-separated "rows"/"columns"
    rows = rng.uniform(-1, 1, size=int(rng.integers(2, 5)))
    colv = rng.uniform(-1, 1, size=int(rng.integers(2, 5)))
    cols = []
    while len(cols) < m:
        c = centres[int(rng.integers(n_centres))]
        a = rows[int(rng.integers(rows.size))] + 2.0 ** -int(rng.integers(8, 40)) * rng.standard_normal()
        b = colv[int(rng.integers(colv.size))] + 2.0 ** -int(rng.integers(8, 40)) * rng.standard_normal()
        z = c + a * v + b * w
        noise = rng.standard_normal(k) + 1j * rng.standard_normal(k)
        z = z + 2.0 ** -40 * noise
        if abs(np.sum(z * z)) < 1e-6:
            continue
        cols.append(z)
    Z = _normalize_columns(np.array(cols).T)
    return _gram_from_columns(Z)


def random_near_triangular(n: int, rng: np.random.Generator, extreme: bool = False) -> np.ndarray:
    """Random complex ``n x n`` matrix with unit diagonal, entries of modulus
    ``< 3/2`` above the diagonal and ``< 4**-n`` below it.

    Such matrices are always nonsingular.  With ``extreme=True`` every
    off-diagonal modulus sits just inside its bound, the hardest case.
    """
    B = np.eye(n, dtype=complex)
    iu = np.triu_indices(n, 1)
    il = np.tril_indices(n, -1)
    for idx, bound in ((iu, 1.5), (il, 4.0 ** -n)):
        k = idx[0].size
        if extreme:
            radius = bound * (1 - 2.0 ** -30 * rng.random(k))
        else:
            radius = bound * np.sqrt(rng.random(k))
        B[idx] = radius * np.exp(2j * np.pi * rng.random(k))
    return B


def near_triangular_min_det(n: int, samples: int, seed: int) -> float:
    """Smallest ``|det B|`` over ``samples`` draws (half of them extreme)."""
    rng = np.random.default_rng(seed)
    worst = math.inf
    for i in range(samples):
        B = random_near_triangular(n, rng, extreme=bool(i % 2))
        worst = min(worst, abs(np.linalg.det(B)))
    return worst


# ------------------------------------------------------- metric Gram matrices

_POLICY_FACTOR = {"sphere": 4.0, "hyperbolic": 6.0}


def disjoint_union_kappa(G: GramMatrix, space: str) -> float:
    """log2 of a kappa meeting the metric separation policy for ``space``.

    The policy asks that every ``|g - 1|`` be ``> kappa`` or ``< kappa/f`` with
    ``f = 4`` on the sphere and ``f = 6`` (plus ``kappa < 1``) in hyperbolic
    space.  The widest gap between consecutive magnitudes is used; with fewer
    than two distinct finite magnitudes the band just above the largest one
    is used.
    """
    if space not in _POLICY_FACTOR:
        raise PolicyUnsatisfied(f"no separation policy for space {space!r}")
    w = math.log2(_POLICY_FACTOR[space])
    cap = 0.0 if space == "hyperbolic" else math.inf
    vals = sorted(set(G.finite_logmags().tolist()))
    best = None
    for lo, hi in zip(vals, vals[1:]):
        top = min(hi, cap)
        if top - lo > w and (best is None or hi - lo > best[1] - best[0]):
            best = (lo, top)
    if best is not None:
        lo, hi = best
        return (lo + w + hi) / 2
    if not vals:
        return -1.0
    beta = vals[-1] + w + 1.0
    if beta < cap:
        return beta
    raise PolicyUnsatisfied("no kappa separates the pairwise magnitudes")


def metric_disjoint_union_check(points, log2_kappa: float | None = None) -> bool:
    """True iff ``K(G, kappa)`` is a disjoint union of full simplices.

    ``points`` is a real :class:`~bellows.geometry.Configuration`.  If
    ``log2_kappa`` is supplied it must satisfy the separation policy.
    """
    from .geometry import gram

    G = gram(points)
    space = points.space
    if log2_kappa is None:
        log2_kappa = disjoint_union_kappa(G, space)
    else:
        if space not in _POLICY_FACTOR:
            raise PolicyUnsatisfied(f"no separation policy for space {space!r}")
        if space == "hyperbolic" and not log2_kappa < 0:
            raise PolicyUnsatisfied("hyperbolic policy needs kappa < 1")
        w = math.log2(_POLICY_FACTOR[space])
        if any(log2_kappa - w <= x <= log2_kappa for _, _, x in G.pairs()):
            raise PolicyUnsatisfied("some |g - 1| lies inside the separation band")
    edges = set(graph_gamma(G, log2_kappa))
    K = clique_complex(edges, G.m)
    return _is_disjoint_simplices(K)


def _is_disjoint_simplices(K: Complex) -> bool:
    # every connected component must itself be a simplex of K
    seen = set()
    adj = {v: set() for v in range(1, K.m + 1)}
    for u, v in K.simplices(1):
        adj[u].add(v)
        adj[v].add(u)
    for v in range(1, K.m + 1):
        if v in seen:
            continue
        comp = {v}
        stack = [v]
        while stack:
            for x in adj[stack.pop()]:
                if x not in comp:
                    comp.add(x)
                    stack.append(x)
        seen |= comp
        if tuple(sorted(comp)) not in K:
            return False
    return True
