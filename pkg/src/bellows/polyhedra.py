"""Cycle polyhedra, their volumes, and numerical flexing.

A cycle polyhedron is an ``(n-1)``-cycle ``xi`` on the vertex set ``1..m``
together with a placement of the vertices.  Its generalized oriented volume
is the sum of oriented simplex volumes over any ``n``-chain ``eta`` with
boundary ``xi``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .collapse import CollapseSequence, build_hereditary_ordering, collapse_below
from .errors import (
    ConstructionFailed,
    CorrectorDiverged,
    DiameterTooLarge,
    KappaEdgeConflict,
    NoFlexDirection,
    HypothesisViolated,
    NotBounding,
    OmegaViolation,
)
from .geometry import (
    DEFAULT_QUAD,
    DEGENERATE_DET,
    Configuration,
    distance,
    gram,
    in_omega,
    minkowski,
    oriented_simplex_volume,
    tangent_exp,
    volume_factor,
)
from .gram import gamma_complex, select_kappa
from .quadrature import QuadratureSpec, orthant_combination
from .simplicial import Chain, Complex, boundary, cone, is_cycle, solve_bounding_chain, support

SCHEMA_VERSION = 1

RESIDUAL_TOL = 1e-12


@dataclass(frozen=True)
class CyclePolyhedron:
    xi: Chain
    m: int

    def __post_init__(self):
        if not is_cycle(self.xi):
            raise ValueError("xi is not a cycle")

    @property
    def n(self) -> int:
        return self.xi.degree + 1

    @property
    def K(self) -> Complex:
        return Complex(support(self.xi).simplex_set, self.m, check=False)

    @property
    def connected(self) -> bool:
        return self.K.is_connected()

    def edges(self) -> list:
        return self.K.simplices(1)

    def reversed(self) -> "CyclePolyhedron":
        return CyclePolyhedron(-self.xi, self.m)

    def to_json(self) -> dict:
        return {"m": self.m, "xi": self.xi.to_json()}

    @classmethod
    def from_json(cls, data: dict) -> "CyclePolyhedron":
        xi = Chain.from_json(data["xi"])
        m = data.get("m") or max(v for s in xi for v in s)
        return cls(xi, int(m))


def tetrahedron() -> CyclePolyhedron:
    """Boundary of the 3-simplex on vertices 1..4."""
    return CyclePolyhedron(boundary(Chain.simplex((1, 2, 3, 4))), 4)


def octahedron() -> CyclePolyhedron:
    """Boundary of the cross-polytope; opposite vertex pairs are (1,2), (3,4), (5,6)."""
    terms = []
    for sx, x in ((1, 1), (-1, 2)):
        for sy, y in ((1, 3), (-1, 4)):
            for sz, z in ((1, 5), (-1, 6)):
                terms.append(((x, y, z), sx * sy * sz))
    return CyclePolyhedron(Chain(terms), 6)


def cone_chain(poly: CyclePolyhedron, apex: int) -> Chain:
    """Bounding chain ``apex * xi``; valid whenever every term through ``apex`` cancels in the boundary."""
    eta = cone(apex, poly.xi)
    return eta


def edge_lengths(poly: CyclePolyhedron, A: Configuration) -> dict:
    """Lengths of the edges of ``K`` in configuration ``A``."""
    return {e: distance(A.point(e[0]), A.point(e[1])) for e in poly.edges()}


def _form(space: str):
    return minkowski if space == "hyperbolic" else (lambda x, y: np.sum(x * y, axis=0))


def constraint_residuals(poly: CyclePolyhedron, ell: dict, A: Configuration) -> np.ndarray:
    """Edge residuals ``<a_u, a_v> - cos/cosh l_uv`` followed by quadric residuals."""
    form = _form(A.space)
    trig = math.cosh if A.space == "hyperbolic" else math.cos
    X = A.points
    out = []
    for u, v in poly.edges():
        out.append(float(form(X[:, u - 1], X[:, v - 1])) - trig(ell[(u, v)]))
    out.extend((form(X, X) - 1).tolist())
    return np.array(out, dtype=float)


def diameter_check(poly: CyclePolyhedron, A: Configuration) -> float:
    """Largest distance between two vertices of ``K``."""
    verts = poly.K.vertices()
    best = 0.0
    for i, u in enumerate(verts):
        for v in verts[i + 1:]:
            best = max(best, distance(A.point(u), A.point(v)))
    return best


def generalized_volume(
    poly: CyclePolyhedron,
    eta: Chain,
    A: Configuration,
    quad: QuadratureSpec = DEFAULT_QUAD,
    with_error: bool = False,
):
    """``sum_q c_q V(a_{u_q0}, ..., a_{u_qn})`` over the terms of a bounding chain ``eta``."""
    if boundary(eta) != poly.xi:
        raise NotBounding("boundary of eta differs from xi")
    if A.space == "sphere" and poly.xi:
        diam = diameter_check(poly, A)
        if diam >= math.pi / 2:
            raise DiameterTooLarge(f"vertex diameter {diam:.4f} >= pi/2")
    terms = volume_terms(eta, A, quad)
    total = sum(c * v for _, c, v, _ in terms)
    err = sum(abs(c) * e for _, c, _, e in terms)
    return (total, err) if with_error else total


def volume_terms(eta: Chain, A: Configuration, quad: QuadratureSpec = DEFAULT_QUAD) -> list:
    """``(simplex, coeff, volume, error)`` for every term of ``eta``."""
    out = []
    for s, c in eta.items():
        v, e = oriented_simplex_volume(A.select(s), quad, with_error=True)
        out.append((s, float(c), float(v), float(e)))
    return out


# ------------------------------------------------------------ volume via collapse


@dataclass
class PhiResult:
    value: complex
    error: float
    log2_kappa: float
    kappa_method: str
    complex_l: Complex
    eta: Chain
    r: int
    sequence: CollapseSequence | None = None

    @property
    def collapse_certified(self) -> bool:
        return self.sequence is not None

    def to_json(self) -> dict:
        v = complex(self.value)
        return {
            "value": {"re": v.real, "im": v.imag},
            "error": self.error,
            "log2_kappa": self.log2_kappa,
            "kappa_method": self.kappa_method,
            "complex": self.complex_l.to_json(),
            "eta": self.eta.to_json(),
            "r": self.r,
            "collapse_certified": self.collapse_certified,
            "collapse": None if self.sequence is None else self.sequence.to_json(),
        }


def phi_via_collapse(
    poly: CyclePolyhedron,
    A: Configuration,
    quad: QuadratureSpec = DEFAULT_QUAD,
    log2_kappa: float | None = None,
    complex_l: Complex | None = None,
) -> PhiResult:
    """Volume of ``xi`` through the collapsible complex ``K_l = K(G, kappa)``.

    The threshold is chosen by :func:`bellows.gram.select_kappa` unless
    ``log2_kappa`` is given.  ``complex_l`` evaluates at ``A`` a complex that
    was built elsewhere (for instance at a nearby configuration).
    """
    n = A.n
    if n < 3:
        raise ValueError("the collapse route needs n >= 3")
    r = n // 2 + 1
    G = gram(A)
    method = "given"
    if complex_l is None:
        if log2_kappa is None:
            kres = select_kappa(G, r)
            log2_kappa, method = kres.log2_kappa, kres.method
        K_l = gamma_complex(G, log2_kappa)
    else:
        K_l = complex_l
        method = "external"
    for e in poly.edges():
        if e not in K_l:
            raise KappaEdgeConflict(e)
    # A selected kappa makes K_l collapse below r <= n - 1, which forces xi
    # to bound in K_l.  A supplied kappa carries no such guarantee: the
    # collapse is attempted, and otherwise only the existence of a bounding
    # chain (what the collapse is needed for) is required.
    order = build_hereditary_ordering(K_l, G)
    selected = method in ("integer-scan", "real-gap")
    try:
        seq = collapse_below(K_l, order, r if selected else n - 1)
    except HypothesisViolated:
        if selected:
            raise
        seq = None
    eta = solve_bounding_chain(K_l, poly.xi, n)
    form = A.space if A.space != "complex" else A.real_form
    Z = A.complex_matrix()
    coeffs, grams = [], []
    for s, c in eta.items():
        M = Z[:, [u - 1 for u in s]]
        if not in_omega(M):
            raise OmegaViolation(f"simplex {list(s)} is outside Omega")
        det = complex(np.linalg.det(M))
        if abs(det) < DEGENERATE_DET:
            continue
        coeffs.append(float(c) * det)
        grams.append(M.T @ M)
    k = volume_factor(n, form)
    if coeffs:
        est = orthant_combination(coeffs, grams, quad)
        value, err = k * est.value, abs(k) * est.error
    else:
        value, err = 0j, 0.0
    if A.space != "complex":
        value = value.real
    lk = float(log2_kappa) if log2_kappa is not None else float("nan")
    return PhiResult(value, err, lk, method, K_l, eta, r, seq)


# ------------------------------------------------------------------ flexing


def _frame_to_gauge(A: Configuration, gauge) -> np.ndarray:
    """Isometry moving gauge vertices onto ``e_0``, ``span(e_0, e_1)``, ``span(e_0, e_1, e_2)``."""
    form = _form(A.space)
    eps = -1.0 if A.space == "hyperbolic" else 1.0
    d = A.n + 1
    frame = [A.points[:, gauge[0] - 1].copy()]
    candidates = [A.points[:, g - 1] for g in gauge[1:]] + list(np.eye(d))
    for c in candidates:
        if len(frame) == d:
            break
        v = np.array(c, dtype=float)
        for k, f in enumerate(frame):
            sign = 1.0 if k == 0 else eps
            v = v - sign * float(form(v, f)) * f
        nrm = eps * float(form(v, v))
        if nrm > 1e-20:
            frame.append(v / math.sqrt(nrm))
    F = np.array(frame).T
    if np.linalg.det(F) < 0:
        F[:, -1] = -F[:, -1]
    return np.linalg.inv(F)


def _free_mask(n: int, m: int, gauge) -> np.ndarray:
    mask = np.ones((n + 1, m), dtype=bool)
    mask[:, gauge[0] - 1] = False
    mask[2:, gauge[1] - 1] = False
    mask[3:, gauge[2] - 1] = False
    return mask


class _System:
    """Gauged constraint equations ``R(x) = 0`` in the free coordinates ``x``."""

    def __init__(self, poly, ell, A0: Configuration, gauge):
        self.poly = poly
        self.ell = ell
        self.space = A0.space
        self.n, self.m = A0.n, A0.m
        self.gauge = gauge
        self.mask = _free_mask(self.n, self.m, gauge)
        self.template = A0.points.copy()
        self.eta = np.diag([1.0] + [-1.0 if self.space == "hyperbolic" else 1.0] * self.n)
        self.edges = poly.edges()
        trig = math.cosh if self.space == "hyperbolic" else math.cos
        self.target = np.array([trig(ell[e]) for e in self.edges])
        self.rows_quadric = [u for u in range(self.m) if u != gauge[0] - 1]

    def points(self, x):
        X = self.template.copy()
        X[self.mask] = x
        return X

    def x_of(self, X):
        return X[self.mask].copy()

    def residual(self, x):
        X = self.points(x)
        HX = self.eta @ X
        edge = np.array([X[:, u - 1] @ HX[:, v - 1] for u, v in self.edges]) - self.target
        quad = np.array([X[:, u] @ HX[:, u] - 1 for u in self.rows_quadric])
        return np.concatenate([edge, quad])

    def jacobian(self, x):
        X = self.points(x)
        HX = self.eta @ X
        d = self.n + 1
        J = np.zeros((len(self.edges) + len(self.rows_quadric), d * self.m))
        # column layout matches X.ravel() (row-major over coordinates, then vertices)
        def col(c, u):
            return c * self.m + u
        for i, (u, v) in enumerate(self.edges):
            for c in range(d):
                J[i, col(c, u - 1)] = HX[c, v - 1]
                J[i, col(c, v - 1)] = HX[c, u - 1]
        base = len(self.edges)
        for k, u in enumerate(self.rows_quadric):
            for c in range(d):
                J[base + k, col(c, u)] = 2 * HX[c, u]
        return J[:, self.mask.ravel()]


def _dihedral(space: str, X: np.ndarray, probe) -> float:
    """Dihedral angle along edge ``(u, v)`` between the faces through ``w1`` and ``w2``."""
    u, v, w1, w2 = probe
    form = _form(space)
    eps = -1.0 if space == "hyperbolic" else 1.0
    a = X[:, u - 1]

    def tangent(p):
        return p - float(form(a, p)) * a

    e = tangent(X[:, v - 1])
    e = e / math.sqrt(eps * float(form(e, e)))
    ps = []
    for w in (w1, w2):
        t = tangent(X[:, w - 1])
        t = t - eps * float(form(t, e)) * e
        ps.append(t / math.sqrt(eps * float(form(t, t))))
    c = eps * float(form(ps[0], ps[1]))
    return math.acos(max(-1.0, min(1.0, c)))


def default_probe(poly: CyclePolyhedron):
    """First edge of ``K`` lying in exactly two facets, with the two opposite vertices."""
    facets = poly.K.simplices(poly.n - 1)
    for e in poly.edges():
        around = [f for f in facets if set(e) <= set(f)]
        if len(around) == 2:
            w = [next(x for x in f if x not in e) for f in around]
            return (e[0], e[1], w[0], w[1])
    raise ValueError("no edge lies in exactly two facets")


@dataclass
class FlexSample:
    t: float
    points: np.ndarray
    residual: float
    volume: float
    dihedral: float
    #: sum of |coeff * term volume|, the size the volume is assembled from
    scale: float = 0.0


@dataclass
class FlexTrace:
    poly: CyclePolyhedron
    ell: dict
    eta: Chain
    space: str
    samples: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def configuration(self, i: int) -> Configuration:
        return Configuration(self.samples[i].points, self.space, check=False)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([f"# schema_version={SCHEMA_VERSION}"])
        w.writerow(["t", "residual", "volume", "dihedral"])
        for s in self.samples:
            w.writerow([repr(s.t), repr(s.residual), repr(s.volume), repr(s.dihedral)])
        return buf.getvalue()

    def to_json(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "space": self.space,
            "poly": self.poly.to_json(),
            "lengths": [[u, v, x] for (u, v), x in sorted(self.ell.items())],
            "eta": self.eta.to_json(),
            "metadata": self.metadata,
            "samples": [
                {
                    "t": s.t,
                    "residual": s.residual,
                    "volume": s.volume,
                    "dihedral": s.dihedral,
                    "scale": s.scale,
                    "points": [[float(c) for c in col] for col in s.points.T],
                }
                for s in self.samples
            ],
        }

    @classmethod
    def from_json(cls, data: dict) -> "FlexTrace":
        samples = [
            FlexSample(
                s["t"],
                np.array(s["points"], dtype=float).T,
                s["residual"],
                s["volume"],
                s["dihedral"],
                s.get("scale", 0.0),
            )
            for s in data["samples"]
        ]
        return cls(
            CyclePolyhedron.from_json(data["poly"]),
            {(int(u), int(v)): float(x) for u, v, x in data["lengths"]},
            Chain.from_json(data["eta"]),
            data["space"],
            samples,
            dict(data.get("metadata", {})),
        )


def lengths_to_json(ell: dict) -> list:
    return [[u, v, x] for (u, v), x in sorted(ell.items())]


def lengths_from_json(data) -> dict:
    if isinstance(data, dict) and "lengths" in data:
        data = data["lengths"]
    return {tuple(sorted((int(u), int(v)))): float(x) for u, v, x in data}


def _null_direction(J: np.ndarray, rel: float = 1e-8) -> np.ndarray:
    _, s, Vt = np.linalg.svd(J)
    if J.shape[0] >= J.shape[1] and s[-1] > rel * s[0]:
        raise NoFlexDirection(f"constraint Jacobian is nonsingular (sigma_min/sigma_max = {s[-1] / s[0]:.2e})")
    return Vt[-1]


def _correct(system: _System, x_pred: np.ndarray, tangent: np.ndarray, tol: float, max_iter: int = 25):
    x = x_pred.copy()
    for it in range(max_iter):
        R = system.residual(x)
        arc = float(tangent @ (x - x_pred))
        if np.max(np.abs(R)) < tol and abs(arc) < tol:
            return x, it
        J = system.jacobian(x)
        M = np.vstack([J, tangent[None, :]])
        rhs = -np.concatenate([R, [arc]])
        dx = np.linalg.lstsq(M, rhs, rcond=None)[0]
        x = x + dx
        if not np.all(np.isfinite(x)) or np.max(np.abs(dx)) > 1.0:
            return None, it
    R = system.residual(x)
    if np.max(np.abs(R)) < tol:
        return x, max_iter
    return None, max_iter


def flex_trace(
    poly: CyclePolyhedron,
    ell: dict,
    A0: Configuration,
    steps: int,
    step_size: float,
    quad: QuadratureSpec = DEFAULT_QUAD,
    gauge=(1, 2, 3),
    probe=None,
    tol: float = RESIDUAL_TOL,
    min_step_fraction: float = 1 / 64,
) -> FlexTrace:
    """Follow the one-parameter family of configurations with edge lengths ``ell``.

    The isometry group is removed by pinning the gauge vertices; the predictor
    steps along the kernel of the gauged Jacobian and a Gauss-Newton corrector
    with a pseudo-arclength row projects back to the constraint set.
    """
    if A0.space not in ("sphere", "hyperbolic"):
        raise ValueError("flex tracing needs a real space")
    probe = tuple(probe) if probe is not None else default_probe(poly)
    eta = cone_chain(poly, 1)
    L = _frame_to_gauge(A0, gauge)
    start = Configuration(L @ A0.points, A0.space, check=False)
    system = _System(poly, ell, start, gauge)
    x = system.x_of(start.points)
    x, _ = _correct(system, x, np.zeros_like(x), tol)
    if x is None:
        raise CorrectorDiverged("starting configuration could not be projected onto the constraint set")

    def sample(t, x):
        X = system.points(x)
        cfg = Configuration(X, A0.space, check=False)
        generalized_volume(poly, eta, cfg, quad)  # validates eta and the diameter
        terms = volume_terms(eta, cfg, quad)
        vol = sum(c * v for _, c, v, _ in terms)
        scale = sum(abs(c * v) for _, c, v, _ in terms)
        res = float(np.max(np.abs(constraint_residuals(poly, ell, cfg))))
        return FlexSample(float(t), X, res, float(vol), _dihedral(A0.space, X, probe), float(scale))

    trace = FlexTrace(
        poly,
        dict(ell),
        eta,
        A0.space,
        [sample(0.0, x)],
        {
            "step_size": step_size,
            "steps": steps,
            "gauge": list(gauge),
            "probe": list(probe),
            "tol": tol,
            "quadrature": quad.to_json(),
            "corrector_iterations": [],
            "halvings": 0,
        },
    )
    if steps <= 0:
        return trace
    tangent = _null_direction(system.jacobian(x))
    t = 0.0
    h = step_size
    for _ in range(steps):
        J = system.jacobian(x)
        new_tangent = _null_direction(J)
        if new_tangent @ tangent < 0:
            new_tangent = -new_tangent
        tangent = new_tangent
        while True:
            x_pred = x + h * tangent
            x_new, iters = _correct(system, x_pred, tangent, tol)
            if x_new is not None:
                break
            h /= 2
            trace.metadata["halvings"] += 1
            if h < step_size * min_step_fraction:
                raise CorrectorDiverged(f"corrector failed with step {h:.3e}", trace)
        t += float(np.linalg.norm(x_new - x))
        x = x_new
        trace.metadata["corrector_iterations"].append(iters)
        trace.samples.append(sample(t, x))
        h = min(step_size, 2 * h)
    return trace


# ------------------------------------------------------------- constructions


_HALF_TURN = np.diag([1.0, 1.0, -1.0, -1.0])


def _euclidean_bricard(shape: float, seed: int) -> np.ndarray:
    """Tangent-space positions of vertices 1, 3, 5 (columns), before scaling."""
    rng = np.random.default_rng(seed)
    P = rng.standard_normal((3, 3))
    # keep the points away from the axis so that opposite vertices stay apart
    P[1:, :] += np.sign(P[1:, :]) * 0.5
    P[0, 1] += shape
    return P


def bricard_octahedron(space: str, scale: float = 0.05, shape: float = 0.3, seed: int = 0):
    """Line-symmetric octahedron whose opposite vertices are swapped by a half-turn.

    Returns ``(poly, lengths, configuration)``.  The half-turn is
    ``diag(1, 1, -1, -1)``, fixing the geodesic through ``e_0`` in direction
    ``e_1``.  Vertices 1, 3, 5 are placed by the exponential map at ``e_0``
    and rescaled so the longest edge is ``scale``.
    """
    if space not in ("sphere", "hyperbolic"):
        raise ValueError("space must be sphere or hyperbolic")
    if not 0 < scale <= 0.1:
        raise ValueError("scale must lie in (0, 0.1]")
    poly = octahedron()
    P = _euclidean_bricard(shape, seed)
    # tangent vectors at e0 live in the coordinates 1..3
    Rt = _HALF_TURN[1:, 1:]
    tang = {1: P[:, 0], 3: P[:, 1], 5: P[:, 2]}
    for k in (1, 3, 5):
        tang[k + 1] = Rt @ tang[k]
    longest = max(np.linalg.norm(tang[u] - tang[v]) for u, v in poly.edges())
    e0 = np.zeros(4)
    e0[0] = 1.0
    cols = []
    for u in range(1, 7):
        v = np.concatenate([[0.0], tang[u] * scale / longest])
        cols.append(tangent_exp(space, e0, v))
    X = np.array(cols).T
    # enforce the symmetry exactly
    for k in (1, 3, 5):
        X[:, k] = _HALF_TURN @ X[:, k - 1]
    A = Configuration(X, space)
    ell = edge_lengths(poly, A)
    # the residuals vanish to rounding because the lengths come from A itself
    if np.max(np.abs(constraint_residuals(poly, ell, A))) > RESIDUAL_TOL:
        raise ConstructionFailed("construction does not satisfy its own constraints")
    L = _frame_to_gauge(A, (1, 2, 3))
    system = _System(poly, ell, Configuration(L @ A.points, space, check=False), (1, 2, 3))
    J = system.jacobian(system.x_of(L @ A.points))
    s = np.linalg.svd(J, compute_uv=False)
    kernel = int(np.sum(s < 1e-8 * s[0])) + max(J.shape[1] - J.shape[0], 0)
    if kernel != 1:
        raise ConstructionFailed(f"gauged Jacobian has a {kernel}-dimensional kernel, expected 1")
    return poly, ell, A


def random_octahedron(space: str, scale: float, seed: int) -> Configuration:
    """Generic (rigid) octahedral configuration near ``e_0`` with edges about ``scale``."""
    rng = np.random.default_rng(seed)
    base = np.array([[1, -1, 0, 0, 0, 0], [0, 0, 1, -1, 0, 0], [0, 0, 0, 0, 1, -1]], dtype=float)
    T = base + 0.25 * rng.standard_normal(base.shape)
    e0 = np.array([1.0, 0, 0, 0])
    cols = [tangent_exp(space, e0, np.concatenate([[0.0], scale * T[:, u]])) for u in range(6)]
    return Configuration(np.array(cols).T, space)


# ----------------------------------------------------------------- verification


THEOREM_CAVEAT = (
    "The proven edge-length bound 2^(-m^2 (n+4)) is far below double precision; "
    "this run tests volume constancy at a feasible edge scale instead."
)


@dataclass
class BellowsReport:
    samples: int
    volume_variation: float
    volume_scale: float
    relative_variation: float
    dihedral_variation: float
    max_residual: float
    max_edge: float
    log2_edge_bound: int
    within_theorem_bound: bool
    is_flexion: bool
    passed: bool
    tol: float
    min_flex: float
    residual_tol: float
    caveat: str = THEOREM_CAVEAT

    def to_json(self) -> dict:
        return dict(self.__dict__)


def bellows_verify(trace: FlexTrace, tol: float = 1e-6, min_flex: float = 0.1, residual_tol: float = 1e-10) -> BellowsReport:
    """Check residuals and volume constancy along a trace."""
    poly = trace.poly
    n, m = poly.n, poly.m
    bound = -m * m * (n + 4)
    if not trace.samples:
        return BellowsReport(0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, bound, False, False, False, tol, min_flex, residual_tol)
    residuals = []
    for i in range(len(trace.samples)):
        cfg = trace.configuration(i)
        residuals.append(float(np.max(np.abs(constraint_residuals(poly, trace.ell, cfg)))))
    vols = np.array([s.volume for s in trace.samples])
    dih = np.array([s.dihedral for s in trace.samples])
    var = float(np.max(np.abs(vols - vols[0])))
    # relative to the magnitude of the terms the volume is summed from; the
    # volume itself may vanish identically (e.g. for symmetric flexors)
    scale = max(max(s.scale for s in trace.samples), float(np.max(np.abs(vols))))
    rel = var / scale if scale > 0 else (0.0 if var == 0 else math.inf)
    dvar = float(dih.max() - dih.min())
    max_res = float(max(residuals))
    max_edge = max(trace.ell.values()) if trace.ell else 0.0
    within = max_edge > 0 and math.log2(max_edge) < bound
    flexion = len(trace.samples) > 1 and dvar > min_flex
    passed = flexion and var < tol and max_res < residual_tol
    return BellowsReport(
        len(trace.samples), var, scale, rel, dvar, max_res, max_edge, bound, within, flexion, passed, tol, min_flex, residual_tol
    )


def complex_perturbation(poly: CyclePolyhedron, ell: dict, A: Configuration, size: float, seed: int) -> Configuration:
    """Complex configuration near ``A`` satisfying the same edge equations.

    A random complex displacement of relative size ``size`` is projected back
    onto the complex constraint set by Gauss-Newton in complex arithmetic.
    """
    rng = np.random.default_rng(seed)
    Z = A.complex_matrix().copy()
    Z = Z + size * (rng.standard_normal(Z.shape) + 1j * rng.standard_normal(Z.shape)) * np.max(np.abs(Z[1:]))
    trig = math.cosh if A.space == "hyperbolic" else math.cos
    edges = poly.edges()
    target = np.array([trig(ell[e]) for e in edges])
    m, d = A.m, A.n + 1
    for _ in range(30):
        R = np.concatenate([np.array([Z[:, u - 1] @ Z[:, v - 1] for u, v in edges]) - target, np.sum(Z * Z, axis=0) - 1])
        if np.max(np.abs(R)) < 1e-13:
            break
        J = np.zeros((len(R), d * m), dtype=complex)
        for i, (u, v) in enumerate(edges):
            J[i, (u - 1) * d:(u - 1) * d + d] = Z[:, v - 1]
            J[i, (v - 1) * d:(v - 1) * d + d] = Z[:, u - 1]
        for u in range(m):
            J[len(edges) + u, u * d:u * d + d] = 2 * Z[:, u]
        dz = np.linalg.lstsq(J, -R, rcond=None)[0]
        Z = Z + dz.reshape(m, d).T
    else:
        raise ConstructionFailed("complex projection did not converge")
    return Configuration(Z, "complex", real_form=A.space, check=False)
