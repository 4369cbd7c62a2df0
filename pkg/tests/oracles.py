"""Independent reference computations for the test suite.

Nothing here calls into ``bellows`` numerics: each oracle recomputes its
quantity from first principles (classical trigonometry, exact rational
arithmetic, closed-form integrals or brute force).
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np


# ---------------------------------------------------------------- triangles


def _minkowski(x, y):
    return x[0] * y[0] - sum(a * b for a, b in zip(x[1:], y[1:]))


def _euclid(x, y):
    return sum(a * b for a, b in zip(x, y))


def _sign(form) -> int:
    return -1 if form is _minkowski else 1


def _vertex_angle(form, p, q, r):
    """Angle at ``p`` between the geodesics towards ``q`` and ``r``.

    Tangent directions are the projections ``q - <p,q> p``.  The Minkowski
    form is negative definite on hyperbolic tangent spaces, so there the
    cosine is ``-<u,v>/sqrt(<u,u><v,v>)``.
    """
    u = [b - form(p, q) * a for a, b in zip(p, q)]
    v = [b - form(p, r) * a for a, b in zip(p, r)]
    c = _sign(form) * form(u, v) / math.sqrt(form(u, u) * form(v, v))
    return math.acos(max(-1.0, min(1.0, c)))


def girard_area(a, b, c) -> float:
    """Signed area of the spherical triangle ``abc`` from its angle excess."""
    angles = [_vertex_angle(_euclid, a, b, c), _vertex_angle(_euclid, b, c, a), _vertex_angle(_euclid, c, a, b)]
    area = sum(angles) - math.pi
    return math.copysign(area, np.linalg.det(np.array([a, b, c]).T))


def defect_area(a, b, c) -> float:
    """Signed area of the hyperbolic triangle ``abc`` (real Minkowski vectors)."""
    angles = [_vertex_angle(_minkowski, a, b, c), _vertex_angle(_minkowski, b, c, a), _vertex_angle(_minkowski, c, a, b)]
    area = math.pi - sum(angles)
    return math.copysign(area, np.linalg.det(np.array([a, b, c]).T))


def arc_length(p, q, space: str) -> float:
    """Geodesic distance via arccos / arccosh of the form (textbook formula)."""
    if space == "sphere":
        return math.acos(max(-1.0, min(1.0, _euclid(p, q))))
    return math.acosh(max(1.0, _minkowski(p, q)))


def dihedral_from_gram(X, space: str, e, w1, w2) -> float:
    """Dihedral angle along edge ``e`` between faces ``e+w1`` and ``e+w2``.

    Uses the tangent vectors at ``e[0]`` orthogonal to the edge direction,
    computed with Gram-Schmidt in plain Python floats.
    """
    form = _minkowski if space == "hyperbolic" else _euclid
    cols = [list(map(float, X[:, k - 1])) for k in range(1, X.shape[1] + 1)]
    p, q = cols[e[0] - 1], cols[e[1] - 1]

    def tangent(x):
        return [b - form(p, x) * a for a, b in zip(p, x)]

    t = tangent(q)
    tt = form(t, t)

    def perp(x):
        y = tangent(x)
        k = form(y, t) / tt
        return [b - k * a for a, b in zip(t, y)]

    u, v = perp(cols[w1 - 1]), perp(cols[w2 - 1])
    c = _sign(form) * form(u, v) / math.sqrt(form(u, u) * form(v, v))
    return math.acos(max(-1.0, min(1.0, c)))


# ----------------------------------------------------------------- integrals


def orthant_1d(g: complex) -> complex:
    """``int_0^inf exp(-g t^2) dt = sqrt(pi) / (2 sqrt g)``."""
    return math.sqrt(math.pi) / (2 * np.sqrt(complex(g)))


def orthant_2d(G) -> complex:
    """Closed form of ``int_{R_+^2} exp(-t^T G t) dt``.

    For positive definite ``G`` this is ``arccos(g12 / sqrt(g11 g22)) /
    (2 sqrt(det G))`` (polar coordinates); near the identity the same
    expression continues analytically to complex ``G`` with principal branches.
    """
    G = np.asarray(G, dtype=complex)
    a, b, c = G[0, 0], G[0, 1], G[1, 1]
    det = a * c - b * b
    return np.arccos(b / np.sqrt(a * c)) / (2 * np.sqrt(det))


def arc_volume(p, q, space: str) -> float:
    """Oriented length of a geodesic segment in dimension one.

    ``p, q`` are points of the unit circle (sphere) or of the hyperbola
    ``x0^2 - x1^2 = 1``; the sign is that of ``det[p, q]``.
    """
    d = arc_length(p, q, space)
    return math.copysign(d, p[0] * q[1] - p[1] * q[0])


# ------------------------------------------------------------ exact Gram data


def exact_q(X, space: str, u: int, v: int) -> Fraction:
    """``g_uv - 1`` as ``-<a - b, a - b>/2``, evaluated exactly on the stored floats.

    On the quadric the two expressions agree; the difference form is the one
    that stays meaningful when ``a`` and ``b`` are closer than rounding.
    """
    a = [Fraction(float(x)) for x in X[:, u - 1]]
    b = [Fraction(float(x)) for x in X[:, v - 1]]
    d = [x - y for x, y in zip(a, b)]
    if space == "hyperbolic":
        sq = d[0] * d[0] - sum(x * x for x in d[1:])
    else:
        sq = sum(x * x for x in d)
    return -sq / 2


def exact_log2(q: Fraction) -> float:
    """``log2|q|`` for a rational ``q`` (``-inf`` for zero), without underflow."""
    if q == 0:
        return float("-inf")
    q = abs(q)
    return math.log2(q.numerator) - math.log2(q.denominator)


# ------------------------------------------------------------ combinatorics


def brute_force_free_pairs(simplices) -> set:
    """All ``(sigma, tau)`` with ``tau`` a nonempty facet of exactly one simplex ``sigma``."""
    simplices = {tuple(sorted(s)) for s in simplices}
    out = set()
    for tau in simplices:
        if not tau:
            continue
        cofaces = [s for s in simplices if len(s) > len(tau) and set(tau) <= set(s)]
        if len(cofaces) == 1 and len(cofaces[0]) == len(tau) + 1:
            out.add((cofaces[0], tau))
    return out


def brute_force_cliques(edges, m: int) -> set:
    """Every vertex set that is pairwise joined by ``edges`` (plus the empty set)."""
    edges = {tuple(sorted(e)) for e in edges}
    out = {()}
    for k in range(1, m + 1):
        for s in itertools.combinations(range(1, m + 1), k):
            if all(p in edges for p in itertools.combinations(s, 2)):
                out.add(s)
    return out


def rational_rank(M) -> int:
    """Rank over Q by Fraction Gaussian elimination."""
    A = [[Fraction(int(x)) for x in row] for row in np.asarray(M)]
    if not A:
        return 0
    rows, cols = len(A), len(A[0])
    rank = 0
    for c in range(cols):
        piv = next((r for r in range(rank, rows) if A[r][c] != 0), None)
        if piv is None:
            continue
        A[rank], A[piv] = A[piv], A[rank]
        for r in range(rows):
            if r != rank and A[r][c] != 0:
                f = A[r][c] / A[rank][c]
                A[r] = [x - f * y for x, y in zip(A[r], A[rank])]
        rank += 1
    return rank


def betti_numbers(simplices) -> list:
    """Unreduced Betti numbers over Q from independently built boundary matrices."""
    by_dim = {}
    for s in simplices:
        if s:
            by_dim.setdefault(len(s) - 1, []).append(tuple(sorted(s)))
    top = max(by_dim) if by_dim else -1
    index = {k: {s: i for i, s in enumerate(sorted(v))} for k, v in by_dim.items()}
    ranks = {}
    for k in range(1, top + 1):
        M = np.zeros((len(index[k - 1]), len(index[k])), dtype=int)
        for s, j in index[k].items():
            for i in range(len(s)):
                M[index[k - 1][s[:i] + s[i + 1:]], j] = (-1) ** i
        ranks[k] = rational_rank(M)
    return [len(index[k]) - ranks.get(k, 0) - ranks.get(k + 1, 0) for k in range(top + 1)]


# ---------------------------------------------------------------- rigidity


def euclidean_flex_dimension(P, edges) -> int:
    """Dimension of infinitesimal flexes of a bar framework in R^3 modulo rigid motions."""
    P = np.asarray(P, dtype=float)
    m = P.shape[0]
    R = np.zeros((len(edges), 3 * m))
    for i, (u, v) in enumerate(edges):
        d = P[u - 1] - P[v - 1]
        R[i, 3 * (u - 1):3 * u] = d
        R[i, 3 * (v - 1):3 * v] = -d
    s = np.linalg.svd(R, compute_uv=False)
    rank = int(np.sum(s > 1e-9 * s[0]))
    return 3 * m - rank - 6
