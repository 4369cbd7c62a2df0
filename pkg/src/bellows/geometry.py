"""Points on the quadric ``<z, z> = 1``, simplex volumes and related identities.

The bilinear form is ``<z, w> = z^T w`` (no conjugation).  The sphere is the
real part of the quadric.  Hyperbolic points are stored as real Minkowski
vectors ``(x_0, ..., x_n)`` with ``x_0 >= 1`` and ``x_0^2 - |x'|^2 = 1``; they
enter the complex model as ``(x_0, i x_1, ..., i x_n)`` only when a Gram
matrix or a determinant is formed.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import (
    AntipodalPair,
    IsotropicVector,
    MixedSpaces,
    NonRealResult,
    OmegaViolation,
    PathSingularity,
    ToleranceNotMet,
)
from .gram import GramMatrix
from .quadrature import Estimate, QuadratureSpec, orthant_combination

SPACES = ("sphere", "hyperbolic", "complex")

DEFAULT_QUAD = QuadratureSpec()

QUADRIC_TOL = 1e-12
DEGENERATE_DET = 1e-14


def bilinear(z, w):
    """``z^T w`` column-wise (works on vectors and on matrices of columns)."""
    return np.sum(np.asarray(z) * np.asarray(w), axis=0)


def minkowski(x, y):
    """``x_0 y_0 - x_1 y_1 - ... - x_n y_n`` column-wise."""
    x = np.asarray(x)
    y = np.asarray(y)
    return x[0] * y[0] - np.sum(x[1:] * y[1:], axis=0)


def to_complex_model(x, space: str) -> np.ndarray:
    """Coordinates in the complex quadric for a stored point (or matrix of columns)."""
    x = np.asarray(x)
    if space == "hyperbolic":
        z = x.astype(complex)
        z[1:] *= 1j
        return z
    return x.astype(complex)


def nu(space: str) -> complex:
    return 1j if space == "hyperbolic" else 1.0


def gamma_half(n_plus_1: int) -> float:
    """``Gamma(k/2)`` for a positive integer ``k`` by the half-integer recursion."""
    k = int(n_plus_1)
    if k < 1:
        raise ValueError("argument must be a positive integer")
    if k % 2 == 0:
        g, x = 1.0, 1  # Gamma(1)
    else:
        g, x = math.sqrt(math.pi), Fraction(1, 2)
    target = Fraction(k, 2)
    while x < target:
        g *= float(x)
        x += 1
    return g


def f_bound(n: int) -> float:
    """Uniform bound ``(pi^2 (n+1)/4)^((n+1)/4)`` on ``|F|`` over Omega."""
    return (math.pi ** 2 * (n + 1) / 4) ** ((n + 1) / 4)


@dataclass(frozen=True)
class QuadricPoint:
    coords: np.ndarray
    space: str

    def __post_init__(self):
        if self.space not in SPACES:
            raise ValueError(f"space must be one of {SPACES}")

    @property
    def n(self) -> int:
        return len(self.coords) - 1

    def complex_coords(self) -> np.ndarray:
        return to_complex_model(self.coords, self.space)


def normalize_to_quadric(z, space: str = "complex") -> QuadricPoint:
    """Scale ``z`` onto the quadric (principal square root for complex input)."""
    z = np.asarray(z)
    if space == "sphere":
        z = np.asarray(z, dtype=float)
        s = float(np.dot(z, z))
        if s < QUADRIC_TOL:
            raise IsotropicVector("zero vector cannot be normalized")
        return QuadricPoint(z / math.sqrt(s), space)
    if space == "hyperbolic":
        z = np.asarray(z, dtype=float)
        s = float(minkowski(z, z))
        if s < QUADRIC_TOL or z[0] <= 0:
            raise IsotropicVector("vector is not timelike future-pointing")
        return QuadricPoint(z / math.sqrt(s), space)
    z = np.asarray(z, dtype=complex)
    s = complex(np.sum(z * z))
    if abs(s) < QUADRIC_TOL:
        raise IsotropicVector(f"<z,z> = {s} is (nearly) zero")
    return QuadricPoint(z / np.sqrt(s), space)


class Configuration:
    """``m`` points of one space, stored column-wise in an ``(n+1) x m`` array.

    ``real_form`` records, for complex configurations, which real form the
    configuration deforms (it fixes the factor ``nu`` in volume formulas).
    """

    __slots__ = ("points", "space", "real_form")

    def __init__(self, points, space: str, real_form: str | None = None, check: bool = True):
        if space not in SPACES:
            raise ValueError(f"space must be one of {SPACES}")
        dtype = complex if space == "complex" else float
        pts = np.array(points, dtype=dtype)
        if pts.ndim != 2:
            raise ValueError("points must be an (n+1) x m array")
        self.points = pts
        self.space = space
        self.real_form = real_form if space == "complex" else space
        if check:
            r = self.quadric_residuals()
            if r.size and np.max(np.abs(r)) > 1e-9:
                raise ValueError(f"points are not on the quadric (max residual {np.max(np.abs(r)):.2e})")
            if space == "hyperbolic" and np.any(pts[0] <= 0):
                raise ValueError("hyperbolic points must have x_0 > 0")

    @classmethod
    def from_points(cls, pts, space=None) -> "Configuration":
        pts = list(pts)
        spaces = {p.space for p in pts}
        if len(spaces) > 1:
            raise MixedSpaces(f"points from several spaces: {sorted(spaces)}")
        sp = space or spaces.pop()
        return cls(np.array([p.coords for p in pts]).T, sp)

    @property
    def n(self) -> int:
        return self.points.shape[0] - 1

    @property
    def m(self) -> int:
        return self.points.shape[1]

    def point(self, u: int) -> QuadricPoint:
        """1-based access to a vertex."""
        return QuadricPoint(self.points[:, u - 1].copy(), self.space)

    def complex_matrix(self) -> np.ndarray:
        return to_complex_model(self.points, self.space)

    def select(self, labels) -> "Configuration":
        idx = [u - 1 for u in labels]
        return Configuration(self.points[:, idx], self.space, self.real_form, check=False)

    def quadric_residuals(self) -> np.ndarray:
        Z = self.complex_matrix()
        r = bilinear(Z, Z) - 1
        return r.real if self.space != "complex" else r

    def with_points(self, points) -> "Configuration":
        return Configuration(points, self.space, self.real_form, check=False)

    def to_json(self) -> dict:
        out = {"space": self.space, "n": self.n}
        if self.space == "complex":
            out["points"] = [[[float(c.real), float(c.imag)] for c in col] for col in self.points.T]
            if self.real_form:
                out["real_form"] = self.real_form
        else:
            out["points"] = [[float(c) for c in col] for col in self.points.T]
        return out

    @classmethod
    def from_json(cls, data: dict) -> "Configuration":
        space = data["space"]
        cols = []
        for p in data["points"]:
            if p and isinstance(p[0], (list, tuple)):
                z = np.array([complex(a, b) for a, b in p])
                if space == "hyperbolic":
                    z = np.concatenate([[z[0].real], z[1:].imag])
                elif space == "sphere":
                    z = z.real
                cols.append(z)
            else:
                cols.append(np.array(p, dtype=float))
        A = cls(np.array(cols).T, space, data.get("real_form"))
        if "n" in data and int(data["n"]) != A.n:
            raise ValueError("declared n does not match point dimension")
        return A


def _as_matrix(A):
    """``(complex matrix of columns, space, real_form)`` from any accepted input."""
    if isinstance(A, Configuration):
        return A.complex_matrix(), A.space, A.real_form
    if isinstance(A, np.ndarray):
        return np.asarray(A, dtype=complex), "complex", None
    pts = list(A)
    if all(isinstance(p, QuadricPoint) for p in pts):
        spaces = {p.space for p in pts}
        if len(spaces) > 1:
            raise MixedSpaces(f"points from several spaces: {sorted(spaces)}")
        space = spaces.pop()
        Z = np.array([p.complex_coords() for p in pts]).T
        return Z, space, (space if space != "complex" else None)
    return np.array(pts, dtype=complex).T, "complex", None


def distance(p: QuadricPoint, q: QuadricPoint, forbid_antipodal: bool = False) -> float:
    """Geodesic distance, computed from the chord to stay accurate for close points."""
    if p.space != q.space:
        raise MixedSpaces(f"{p.space} vs {q.space}")
    if p.space == "sphere":
        chord = float(np.linalg.norm(p.coords - q.coords))
        if forbid_antipodal and np.linalg.norm(p.coords + q.coords) < 1e-12:
            raise AntipodalPair("antipodal points")
        return 2 * math.asin(min(chord / 2, 1.0))
    if p.space == "hyperbolic":
        d = p.coords - q.coords
        s = max(-float(minkowski(d, d)), 0.0)
        return 2 * math.asinh(math.sqrt(s) / 2)
    raise MixedSpaces("distance is defined only on real spaces")


def pseudo_linear_eval(vertices, weights) -> QuadricPoint:
    """``norm(sum_j beta_j x_j)`` for nonnegative weights summing to one."""
    vertices = list(vertices)
    beta = np.asarray(weights, dtype=float)
    if len(beta) != len(vertices):
        raise ValueError("one weight per vertex")
    if np.any(beta < 0) or not math.isclose(beta.sum(), 1.0, abs_tol=1e-12):
        raise ValueError("weights must be nonnegative and sum to 1")
    spaces = {v.space for v in vertices}
    if len(spaces) != 1:
        raise MixedSpaces("vertices from several spaces")
    space = spaces.pop()
    if space == "complex":
        raise MixedSpaces("pseudo-linear maps are defined on real spaces")
    X = np.array([v.coords for v in vertices]).T
    if space == "sphere":
        for i in range(len(vertices)):
            for j in range(i + 1, len(vertices)):
                if np.linalg.norm(X[:, i] + X[:, j]) < 1e-12:
                    raise AntipodalPair(f"vertices {i} and {j} are antipodal")
    return normalize_to_quadric(X @ beta, space)


def _accurate_q(Z: np.ndarray) -> np.ndarray:
    """``g_uv - 1`` as ``-<a_u - a_v, a_u - a_v>/2`` (no cancellation for close points)."""
    m = Z.shape[1]
    q = np.empty((m, m), dtype=complex)
    for u in range(m):
        D = Z - Z[:, [u]]
        q[u] = -bilinear(D, D) / 2
    return q


def gram(A) -> GramMatrix:
    """``G = A^T A`` with ``log2|g - 1|`` taken from the accurate differences."""
    Z, _, _ = _as_matrix(A)
    G = Z.T @ Z
    G = (G + G.T) / 2
    np.fill_diagonal(G, 1)
    return GramMatrix.from_entries(G, _accurate_q(Z))


def in_omega(A) -> bool:
    """True iff ``|<a_j, a_k> - 1| < 1`` for every pair."""
    Z, _, _ = _as_matrix(A)
    return bool(np.all(np.abs(_accurate_q(Z)) < 1))


def _check_square(Z):
    if Z.shape[0] != Z.shape[1]:
        raise ValueError(f"need n+1 points in dimension n, got a {Z.shape[0]}x{Z.shape[1]} matrix")


def F(A, quad: QuadratureSpec = DEFAULT_QUAD) -> Estimate:
    """``det A * int_{t >= 0} exp(-t^T G t) dt``."""
    Z, _, _ = _as_matrix(A)
    _check_square(Z)
    if not in_omega(Z):
        raise OmegaViolation("some |<a_j, a_k> - 1| >= 1")
    det = complex(np.linalg.det(Z))
    if abs(det) < DEGENERATE_DET:
        return Estimate(0j, 0.0, quad.method, True)
    est = orthant_combination([det], [Z.T @ Z], quad)
    if not est.converged:
        warnings.warn(
            f"F: error estimate {est.error:.2e} misses relative tolerance {quad.target_rel_tol:g}",
            ToleranceNotMet,
            stacklevel=2,
        )
    return est


def volume_factor(n: int, space: str) -> complex:
    """``2 / (nu^n Gamma((n+1)/2))``: converts ``F`` to an oriented volume."""
    return 2 / (nu(space) ** n * gamma_half(n + 1))


def oriented_simplex_volume(A, quad: QuadratureSpec = DEFAULT_QUAD, with_error: bool = False):
    """Oriented volume of the pseudo-linear simplex spanned by ``n+1`` points."""
    Z, space, real_form = _as_matrix(A)
    form = space if space != "complex" else real_form
    if form not in ("sphere", "hyperbolic"):
        raise MixedSpaces("oriented volume needs a real space (or a complex point with a real_form)")
    n = Z.shape[0] - 1
    est = F(Z, quad)
    k = volume_factor(n, form)
    v = k * est.value
    err = abs(k) * est.error
    if space != "complex":
        tol = max(err, quad.target_rel_tol * abs(v), 1e-300)
        if abs(v.imag) > 10 * tol and abs(v.imag) > 1e-15:
            raise NonRealResult(f"imaginary part {v.imag:.3e} exceeds tolerance {tol:.3e}")
        v = v.real
    return (v, err) if with_error else v


def zero_sum_residual(points, quad: QuadratureSpec = DEFAULT_QUAD) -> Estimate:
    """``sum_j (-1)^j F(a_0, ..., omit a_j, ..., a_{n+1})`` with a joint error estimate."""
    Z, _, _ = _as_matrix(points)
    d, k = Z.shape
    if k != d + 1:
        raise ValueError("need n+2 points in dimension n")
    if not in_omega(Z):
        raise OmegaViolation("some |<a_j, a_k> - 1| >= 1")
    coeffs, grams, mags = [], [], []
    for j in range(k):
        M = np.delete(Z, j, axis=1)
        det = complex(np.linalg.det(M))
        if abs(det) < DEGENERATE_DET:
            continue
        coeffs.append((-1) ** j * det)
        grams.append(M.T @ M)
    if not coeffs:
        return Estimate(0j, 0.0, quad.method, True)
    # tolerance is relative to the size of the individual terms
    est = orthant_combination(coeffs, grams, quad)
    return est


def omega_tilde_path(A0, t: float, check: bool = True) -> np.ndarray:
    """Point ``t`` of the path contracting ``(a_0, ..., a_{n+1})`` to ``(a_0, ..., a_0)``.

    Returns the complex matrix of columns.
    """
    Z, _, _ = _as_matrix(A0)
    q0 = _accurate_q(Z)[0]
    a0 = Z[:, 0]
    out = np.empty_like(Z)
    out[:, 0] = a0
    for j in range(1, Z.shape[1]):
        den = 1 + q0[j] * (t - t * t / 2)
        if abs(den) < 1e-9:
            raise PathSingularity(f"denominator {abs(den):.2e} at t={t}")
        out[:, j] = (t * (1 + q0[j] * t / 2) * a0 + (1 - t) * Z[:, j]) / den
    if check:
        qs = np.abs(_accurate_q(Z))
        qt = np.abs(_accurate_q(out))
        on_quadric = np.max(np.abs(bilinear(out, out) - 1)) < 1e-10
        if not on_quadric or np.any(qt > qs + 1e-12):
            raise PathSingularity("path left the quadric or the region |g - 1| <= |q|")
    return out


# ------------------------------------------------------------------- helpers


def tangent_exp(space: str, base: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Exponential map at ``base`` applied to a tangent vector ``v``."""
    base = np.asarray(base, dtype=float)
    v = np.asarray(v, dtype=float)
    if space == "sphere":
        r = float(np.linalg.norm(v))
        if r == 0:
            return base.copy()
        return math.cos(r) * base + math.sin(r) * v / r
    if space == "hyperbolic":
        r = math.sqrt(max(-float(minkowski(v, v)), 0.0))
        if r == 0:
            return base.copy()
        return math.cosh(r) * base + math.sinh(r) * v / r
    raise MixedSpaces("exponential map is defined on real spaces")


def random_isometry(space: str, n: int, rng: np.random.Generator, size: float = 1.0) -> np.ndarray:
    """A random orientation-preserving isometry as an ``(n+1) x (n+1)`` real matrix."""
    if space == "sphere":
        Q, R = np.linalg.qr(rng.standard_normal((n + 1, n + 1)))
        Q = Q * np.sign(np.diag(R))
        if np.linalg.det(Q) < 0:
            Q[:, 0] = -Q[:, 0]
        return Q
    if space == "hyperbolic":
        # boost along a random unit direction, then a rotation of the spatial part
        u = rng.standard_normal(n)
        u /= np.linalg.norm(u)
        s = size * rng.uniform(0, 1)
        B = np.eye(n + 1)
        B[0, 0] = math.cosh(s)
        B[0, 1:] = B[1:, 0] = math.sinh(s) * u
        B[1:, 1:] += (math.cosh(s) - 1) * np.outer(u, u)
        R = np.eye(n + 1)
        R[1:, 1:] = random_isometry("sphere", n - 1, rng)
        return R @ B
    raise MixedSpaces("isometries are defined on real spaces")
