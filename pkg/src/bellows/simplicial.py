"""Exact simplicial machinery: simplices, integer chains, complexes, cochains.

Simplices are plain tuples of strictly increasing vertex labels from
``1..m``.  A tuple in ascending order is the positively oriented
representative; any other vertex order is handled through its
permutation parity when chains are built.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Iterator, Mapping

import numpy as np

from .errors import NoBoundingChain, NotACycle

Simplex = tuple  # tuple[int, ...], strictly increasing

EMPTY: Simplex = ()

# two primes below 2**31 so that products stay inside int64
_RANK_PRIMES = (2147483647, 2147483629)


def simplex(vertices: Iterable[int]) -> Simplex:
    """Return the canonical simplex on ``vertices``; repeats are an error."""
    s = tuple(sorted(int(v) for v in vertices))
    if any(a == b for a, b in zip(s, s[1:])):
        raise ValueError(f"repeated vertex in {list(vertices)}")
    return s


def orient(vertices: Iterable[int]) -> tuple[Simplex, int]:
    """Sort ``vertices`` and return ``(simplex, sign)``.

    ``sign`` is the parity of the sorting permutation, or 0 when a vertex is
    repeated (a degenerate oriented simplex is the zero chain).
    """
    v = [int(x) for x in vertices]
    if len(set(v)) != len(v):
        return tuple(sorted(v)), 0
    sign = 1
    # count inversions; simplices are tiny so O(k^2) is fine
    for i in range(len(v)):
        for j in range(i + 1, len(v)):
            if v[i] > v[j]:
                sign = -sign
    return tuple(sorted(v)), sign


def dim(s: Simplex) -> int:
    return len(s) - 1


def facets(s: Simplex) -> list[Simplex]:
    return [s[:j] + s[j + 1:] for j in range(len(s))]


def faces(s: Simplex, k: int | None = None) -> Iterator[Simplex]:
    """All faces of ``s`` (including the empty one), or only the ``k``-faces."""
    sizes = range(len(s) + 1) if k is None else [k + 1]
    for size in sizes:
        if 0 <= size <= len(s):
            yield from itertools.combinations(s, size)


def _normalize_coeff(c):
    if isinstance(c, Fraction):
        return c.numerator if c.denominator == 1 else c
    if isinstance(c, (int, np.integer)):
        return int(c)
    if isinstance(c, Rational):
        return _normalize_coeff(Fraction(c))
    raise TypeError(f"chain coefficients must be exact rationals, got {type(c).__name__}")


class Chain:
    """A finite formal sum of oriented simplices with rational coefficients.

    ``terms`` may be a mapping or an iterable of ``(vertices, coeff)`` pairs;
    vertex tuples in any order are accepted and re-signed by parity.
    """

    __slots__ = ("_terms", "degree")

    def __init__(self, terms=(), degree: int | None = None):
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: dict[Simplex, object] = {}
        for vertices, coeff in items:
            s, sign = orient(vertices)
            if sign == 0:
                continue
            if degree is None:
                degree = len(s) - 1
            elif len(s) - 1 != degree:
                raise ValueError(f"simplex {list(s)} does not have degree {degree}")
            acc[s] = acc.get(s, 0) + sign * _normalize_coeff(coeff)
        self._terms = {s: _normalize_coeff(c) for s, c in acc.items() if c != 0}
        self.degree = degree

    @classmethod
    def _raw(cls, terms: dict, degree):
        obj = cls.__new__(cls)
        obj._terms = {s: _normalize_coeff(c) for s, c in terms.items() if c != 0}
        obj.degree = degree
        return obj

    @classmethod
    def simplex(cls, vertices: Iterable[int], coeff=1) -> "Chain":
        return cls([(tuple(vertices), coeff)])

    @classmethod
    def zero(cls, degree: int | None = None) -> "Chain":
        return cls._raw({}, degree)

    def items(self):
        return self._terms.items()

    def simplices(self) -> list[Simplex]:
        return sorted(self._terms)

    def __getitem__(self, s) -> object:
        key, sign = orient(s)
        return sign * self._terms.get(key, 0)

    def __iter__(self):
        return iter(sorted(self._terms))

    def __len__(self):
        return len(self._terms)

    def __bool__(self):
        return bool(self._terms)

    def _combine(self, other: "Chain", sign: int) -> "Chain":
        if not isinstance(other, Chain):
            return NotImplemented
        if self._terms and other._terms and self.degree != other.degree:
            raise ValueError("cannot add chains of different degrees")
        out = dict(self._terms)
        for s, c in other._terms.items():
            out[s] = out.get(s, 0) + sign * c
        deg = self.degree if self.degree is not None else other.degree
        return Chain._raw(out, deg)

    def __add__(self, other):
        return self._combine(other, 1)

    def __sub__(self, other):
        return self._combine(other, -1)

    def __neg__(self):
        return Chain._raw({s: -c for s, c in self._terms.items()}, self.degree)

    def __mul__(self, scalar):
        scalar = _normalize_coeff(scalar)
        return Chain._raw({s: scalar * c for s, c in self._terms.items()}, self.degree)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, Chain):
            return NotImplemented
        return self._terms == other._terms and (
            not self._terms or self.degree == other.degree
        )

    def __hash__(self):
        return hash(frozenset(self._terms.items()))

    def is_integral(self) -> bool:
        return all(isinstance(c, int) for c in self._terms.values())

    def __repr__(self):
        if not self._terms:
            return "Chain(0)"
        parts = []
        for s in sorted(self._terms):
            parts.append(f"{self._terms[s]}*{list(s)}")
        return "Chain(" + " + ".join(parts) + ")"

    def to_json(self) -> list:
        return [{"simplex": list(s), "coeff": str(self._terms[s])} for s in sorted(self._terms)]

    @classmethod
    def from_json(cls, data: list) -> "Chain":
        return cls([(tuple(t["simplex"]), Fraction(str(t["coeff"]))) for t in data])


def boundary(c: Chain) -> Chain:
    r"""Simplicial boundary, :math:`\partial[u_0..u_k] = \sum_j (-1)^j [..\hat u_j..]`."""
    if c.degree is None or c.degree <= 0:
        # the augmentation to the empty simplex is deliberately not used
        return Chain.zero(None if c.degree is None else c.degree - 1)
    out: dict[Simplex, object] = {}
    for s, coeff in c.items():
        for j in range(len(s)):
            f = s[:j] + s[j + 1:]
            out[f] = out.get(f, 0) + (coeff if j % 2 == 0 else -coeff)
    return Chain._raw(out, c.degree - 1)


def is_cycle(c: Chain) -> bool:
    return not boundary(c)


def cone(apex: int, c: Chain) -> Chain:
    """Cone ``[apex, u_0, ..., u_k]`` over every term; terms through ``apex`` drop out."""
    return Chain([((apex,) + s, coeff) for s, coeff in c.items()], None if not c else c.degree + 1)


class Complex:
    """A finite downward-closed family of simplices on the vertex set ``1..m``."""

    __slots__ = ("_simplices", "m", "_by_dim")

    def __init__(self, simplices: Iterable[Iterable[int]], m: int | None = None, check: bool = True):
        ss = {simplex(s) for s in simplices}
        ss.add(EMPTY)
        verts = {v for s in ss for v in s}
        if m is None:
            m = max(verts, default=0)
        if verts and (min(verts) < 1 or max(verts) > m):
            raise ValueError(f"vertices must lie in 1..{m}")
        if check:
            for s in ss:
                for f in facets(s):
                    if f not in ss:
                        raise ValueError(f"not downward closed: {list(f)} missing under {list(s)}")
        self._simplices = frozenset(ss)
        self.m = int(m)
        self._by_dim = None

    @classmethod
    def from_maximal(cls, maximal: Iterable[Iterable[int]], m: int | None = None) -> "Complex":
        ss: set[Simplex] = set()
        for top in maximal:
            ss.update(faces(simplex(top)))
        return cls(ss, m, check=False)

    @classmethod
    def full_simplex(cls, m: int) -> "Complex":
        """Delta_[m]: every subset of ``1..m``."""
        return cls.from_maximal([range(1, m + 1)], m)

    @classmethod
    def simplex_boundary(cls, m: int) -> "Complex":
        return cls.from_maximal(itertools.combinations(range(1, m + 1), m - 1), m)

    def __contains__(self, s) -> bool:
        return tuple(s) in self._simplices

    def __iter__(self):
        return iter(sorted(self._simplices, key=lambda s: (len(s), s)))

    def __len__(self):
        return len(self._simplices)

    def __eq__(self, other):
        if not isinstance(other, Complex):
            return NotImplemented
        return self._simplices == other._simplices

    def __hash__(self):
        return hash(self._simplices)

    def __le__(self, other: "Complex") -> bool:
        return self._simplices <= other._simplices

    def __repr__(self):
        return f"Complex(m={self.m}, maximal={[list(s) for s in self.maximal()]})"

    @property
    def simplex_set(self) -> frozenset:
        return self._simplices

    @property
    def dim(self) -> int:
        return max(len(s) for s in self._simplices) - 1

    def simplices(self, k: int) -> list[Simplex]:
        """Sorted list of the ``k``-simplices."""
        if self._by_dim is None:
            by: dict[int, list] = {}
            for s in self._simplices:
                by.setdefault(len(s) - 1, []).append(s)
            self._by_dim = {d: sorted(v) for d, v in by.items()}
        return list(self._by_dim.get(k, []))

    def vertices(self) -> list[int]:
        return [s[0] for s in self.simplices(0)]

    def edges(self) -> list[Simplex]:
        return self.simplices(1)

    def f_vector(self) -> list[int]:
        return [len(self.simplices(k)) for k in range(self.dim + 1)]

    def euler_characteristic(self) -> int:
        return sum((-1) ** k * n for k, n in enumerate(self.f_vector()))

    def cofaces(self, s: Simplex) -> list[Simplex]:
        """Simplices of one dimension higher containing ``s``."""
        out = []
        for v in range(1, self.m + 1):
            if v not in s:
                t = tuple(sorted(s + (v,)))
                if t in self._simplices:
                    out.append(t)
        return out

    def is_maximal(self, s: Simplex) -> bool:
        return not self.cofaces(s)

    def maximal(self) -> list[Simplex]:
        return sorted(
            (s for s in self._simplices if s and self.is_maximal(s)),
            key=lambda s: (len(s), s),
        )

    def has_no_fictive_vertices(self) -> bool:
        return all((u,) in self._simplices for u in range(1, self.m + 1))

    def is_flag(self) -> bool:
        """True iff every clique of the 1-skeleton spans a simplex."""
        adj = {v: set() for v in range(1, self.m + 1)}
        for u, v in self.simplices(1):
            adj[u].add(v)
            adj[v].add(u)
        for s in self._simplices:
            if not s:
                continue
            common = set.intersection(*(adj[v] for v in s))
            for v in common:
                if tuple(sorted(s + (v,))) not in self._simplices:
                    return False
        return True

    def is_connected(self) -> bool:
        verts = self.vertices()
        if not verts:
            return True
        adj = {v: [] for v in verts}
        for u, v in self.simplices(1):
            adj[u].append(v)
            adj[v].append(u)
        seen = {verts[0]}
        stack = [verts[0]]
        while stack:
            for w in adj[stack.pop()]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == len(verts)

    def remove(self, removed: Iterable[Simplex], check: bool = True) -> "Complex":
        return Complex(self._simplices - {tuple(s) for s in removed}, self.m, check=check)

    def to_json(self) -> list:
        return [list(s) for s in self.maximal()]

    @classmethod
    def from_json(cls, data, m: int | None = None) -> "Complex":
        if isinstance(data, Mapping):
            return cls.from_maximal(data["maximal"], data.get("m", m))
        return cls.from_maximal(data, m)


def support(c: Chain) -> Complex:
    """Complex spanned by the simplices carrying nonzero coefficients."""
    return Complex.from_maximal(c.simplices())


class Cochain:
    """A complex-valued function on the ``degree``-simplices, extended linearly."""

    __slots__ = ("values", "degree")

    def __init__(self, values: Mapping, degree: int):
        vals = {}
        for vertices, x in values.items():
            s, sign = orient(vertices)
            if sign == 0:
                continue
            if len(s) - 1 != degree:
                raise ValueError(f"simplex {list(s)} does not have degree {degree}")
            vals[s] = sign * x
        self.values = vals
        self.degree = degree

    def __call__(self, c: Chain):
        if not c:
            return 0
        if c.degree != self.degree:
            raise ValueError(f"cochain of degree {self.degree} applied to a {c.degree}-chain")
        return sum(coeff * self.values.get(s, 0) for s, coeff in c.items())

    def __getitem__(self, s):
        key, sign = orient(s)
        return sign * self.values.get(key, 0)


def coboundary(f: Cochain, K: Complex) -> Cochain:
    """``(delta f)(sigma) = f(boundary sigma)`` on every (degree+1)-simplex of ``K``."""
    return Cochain(
        {s: f(boundary(Chain.simplex(s))) for s in K.simplices(f.degree + 1)},
        f.degree + 1,
    )


def boundary_matrix(K: Complex, k: int) -> np.ndarray:
    """Integer matrix of the boundary map C_k -> C_{k-1} (rows: (k-1)-simplices)."""
    rows = K.simplices(k - 1)
    cols = K.simplices(k)
    index = {s: i for i, s in enumerate(rows)}
    M = np.zeros((len(rows), len(cols)), dtype=np.int64)
    for j, s in enumerate(cols):
        for i in range(len(s)):
            M[index[s[:i] + s[i + 1:]], j] = 1 if i % 2 == 0 else -1
    return M


def _rank_mod_p(M: np.ndarray, p: int) -> int:
    A = np.array(M, dtype=np.int64) % p
    nrows, ncols = A.shape
    rank = 0
    for c in range(ncols):
        if rank == nrows:
            break
        nz = np.nonzero(A[rank:, c])[0]
        if nz.size == 0:
            continue
        piv = rank + nz[0]
        if piv != rank:
            A[[rank, piv]] = A[[piv, rank]]
        inv = pow(int(A[rank, c]), p - 2, p)
        A[rank] = (A[rank] * inv) % p
        below = rank + 1 + np.nonzero(A[rank + 1:, c])[0]
        if below.size:
            A[below] = (A[below] - np.outer(A[below, c], A[rank]) % p) % p
        rank += 1
    return rank


def matrix_rank_exact(M: np.ndarray) -> int:
    """Rank over the rationals of an integer matrix.

    Computed modulo two large primes; the rational rank equals the modular
    rank unless both primes divide every maximal nonzero minor.
    """
    if M.size == 0:
        return 0
    return max(_rank_mod_p(M, p) for p in _RANK_PRIMES)


def homology_ranks(K: Complex) -> list[int]:
    """Rational Betti numbers ``[b_0, ..., b_dim K]`` (unreduced)."""
    top = K.dim
    if top < 0:
        return []
    ranks = {k: matrix_rank_exact(boundary_matrix(K, k)) for k in range(1, top + 1)}
    ranks[0] = 0
    ranks[top + 1] = 0
    return [len(K.simplices(k)) - ranks[k] - ranks[k + 1] for k in range(top + 1)]


def _solve_sparse_rational(columns: list[dict], rhs: dict) -> dict | None:
    """Solve ``sum_j x_j * columns[j] = rhs`` exactly; return ``{j: x_j}`` or None.

    Sparse Gaussian elimination over Q, free variables set to zero.
    """
    rows: dict = {}
    for j, col in enumerate(columns):
        for r, a in col.items():
            rows.setdefault(r, {})[j] = Fraction(a)
    for r in rhs:
        rows.setdefault(r, {})
    pivots: list[tuple[int, dict, Fraction]] = []
    for r in sorted(rows):
        row = dict(rows[r])
        b = Fraction(rhs.get(r, 0))
        for pc, prow, pb in pivots:
            a = row.get(pc)
            if a:
                for j, v in prow.items():
                    nv = row.get(j, 0) - a * v
                    if nv:
                        row[j] = nv
                    else:
                        row.pop(j, None)
                b -= a * pb
        if row:
            pc = min(row)
            a = row[pc]
            pivots.append((pc, {j: v / a for j, v in row.items()}, b / a))
        elif b != 0:
            return None
    x: dict[int, Fraction] = {}
    for pc, prow, pb in reversed(pivots):
        val = pb - sum(v * x.get(j, 0) for j, v in prow.items() if j != pc)
        if val:
            x[pc] = val
    return x


def solve_bounding_chain(K: Complex, xi: Chain, n: int) -> Chain:
    """Find an ``n``-chain ``eta`` of ``K`` with ``boundary(eta) == xi`` exactly.

    Coefficients come back as integers whenever the elimination produces
    integers, otherwise as :class:`fractions.Fraction`.
    """
    if xi and xi.degree != n - 1:
        raise ValueError(f"xi has degree {xi.degree}, expected {n - 1}")
    if not is_cycle(xi):
        raise NotACycle("boundary of xi is nonzero")
    if not xi:
        return Chain.zero(n)
    missing = [s for s in xi.simplices() if s not in K]
    if missing:
        raise NoBoundingChain(f"xi is not supported in K (e.g. {list(missing[0])})")
    cols = K.simplices(n)
    columns = []
    for s in cols:
        columns.append({s[:i] + s[i + 1:]: (1 if i % 2 == 0 else -1) for i in range(len(s))})
    sol = _solve_sparse_rational(columns, dict(xi.items()))
    if sol is None:
        raise NoBoundingChain("xi is not a boundary in K")
    eta = Chain._raw({cols[j]: v for j, v in sol.items()}, n)
    assert boundary(eta) == xi
    return eta
