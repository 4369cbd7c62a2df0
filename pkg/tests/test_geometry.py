import math
import warnings

import numpy as np
import pytest

from bellows.errors import (
    AntipodalPair,
    IsotropicVector,
    MixedSpaces,
    OmegaViolation,
    ToleranceNotMet,
)
from bellows.geometry import (
    F,
    Configuration,
    QuadricPoint,
    bilinear,
    distance,
    f_bound,
    gamma_half,
    gram,
    in_omega,
    normalize_to_quadric,
    omega_tilde_path,
    oriented_simplex_volume,
    pseudo_linear_eval,
    zero_sum_residual,
)
from bellows.quadrature import QuadratureSpec
from bellows.simplicial import Cochain, Complex, coboundary

from instances import place, random_omega_sample, random_omega_tuple, random_triangle
from oracles import arc_volume, defect_area, girard_area

E0 = np.array([1.0, 0.0, 0.0, 0.0])


def sp(*x):
    return QuadricPoint(np.array(x, dtype=float), "sphere")


def hp(*x):
    return QuadricPoint(np.array(x, dtype=float), "hyperbolic")


# ----------------------------------------------------------------- the quadric


def test_normalize_examples():
    assert np.allclose(normalize_to_quadric(E0).coords, E0)
    assert np.allclose(normalize_to_quadric(2 * E0).coords, E0)
    z = np.array([1, 0.5j, 0, 0])
    p = normalize_to_quadric(z)
    assert np.allclose(p.coords, z / (math.sqrt(3) / 2))
    assert abs(bilinear(p.coords, p.coords) - 1) < 1e-15


def test_isotropic_vector_rejected():
    with pytest.raises(IsotropicVector):
        normalize_to_quadric(np.array([1, 1j, 0]))


def test_gamma_half():
    for k in range(1, 12):
        assert math.isclose(gamma_half(k), math.gamma(k / 2), rel_tol=1e-14)


def test_distance_examples():
    assert distance(sp(1, 0, 0), sp(1, 0, 0)) == 0
    assert math.isclose(distance(sp(1, 0, 0), sp(0, 1, 0)), math.pi / 2)
    q = hp(math.cosh(1), math.sinh(1), 0)
    assert math.isclose(distance(hp(1, 0, 0), q), 1.0, rel_tol=1e-14)
    with pytest.raises(MixedSpaces):
        distance(sp(1, 0, 0), hp(1, 0, 0))
    with pytest.raises(AntipodalPair):
        distance(sp(1, 0, 0), sp(-1, 0, 0), forbid_antipodal=True)


def test_pseudo_linear_eval():
    a, b = sp(1, 0, 0), sp(0, 1, 0)
    assert np.allclose(pseudo_linear_eval([a, b], [1, 0]).coords, a.coords)
    assert np.allclose(pseudo_linear_eval([a, a], [0.5, 0.5]).coords, a.coords)
    mid = pseudo_linear_eval([a, b], [0.5, 0.5])
    assert math.isclose(distance(mid, a), math.pi / 4)
    with pytest.raises(AntipodalPair):
        pseudo_linear_eval([a, sp(-1, 0, 0)], [0.5, 0.5])
    with pytest.raises(ValueError):
        pseudo_linear_eval([a, b], [0.7, 0.7])


def test_mixed_spaces_rejected():
    with pytest.raises(MixedSpaces):
        Configuration.from_points([sp(1, 0, 0), hp(1, 0, 0)])


def test_configuration_json_roundtrip():
    for space in ("sphere", "hyperbolic"):
        A = place(space, np.eye(3), 0.1, 2)
        B = Configuration.from_json(A.to_json())
        assert np.array_equal(A.points, B.points) and B.space == space


def test_in_omega_examples():
    assert in_omega(Configuration(np.tile(E0[:, None], (1, 3)), "sphere"))
    assert not in_omega(Configuration(np.eye(4)[:, :2], "sphere"))
    rng = np.random.default_rng(0)
    A = place("hyperbolic", rng.uniform(-1, 1, (5, 3)), 0.5 / (2 * math.sqrt(3)), 0)
    assert in_omega(A)


def test_gram_logmag_is_accurate_for_close_points():
    A = place("sphere", np.array([[0, 0, 0], [1e-9, 0, 0]]), 1.0, 0)
    G = gram(A)
    # |g - 1| = d^2/2 with d = 1e-9
    assert math.isclose(G.log2_distance(1, 2), math.log2(0.5e-18), abs_tol=1e-6)


# ------------------------------------------------------------------ volumes


def test_F_degenerate():
    X = np.tile(np.array([[1.0], [0.0]]), (1, 2))
    assert F(Configuration(X, "sphere")).value == 0


@pytest.mark.parametrize("d", [0.3, 0.01, 1.2])
def test_F_one_dimensional_sphere(d):
    A = Configuration(np.array([[1.0, math.cos(d)], [0.0, math.sin(d)]]), "sphere")
    assert abs(F(A).value - d / 2) < 1e-9
    assert abs(oriented_simplex_volume(A) - arc_volume(A.points[:, 0], A.points[:, 1], "sphere")) < 1e-9


@pytest.mark.parametrize("d", [0.3, 0.7])
def test_one_dimensional_hyperbolic_length(d):
    A = Configuration(np.array([[1.0, math.cosh(d)], [0.0, math.sinh(d)]]), "hyperbolic")
    assert abs(oriented_simplex_volume(A) - arc_volume(A.points[:, 0], A.points[:, 1], "hyperbolic")) < 1e-9


@pytest.mark.parametrize("space", ["sphere", "hyperbolic"])
def test_triangle_area_oracles(space):
    rng = np.random.default_rng(42)
    oracle = girard_area if space == "sphere" else defect_area
    for _ in range(20):
        A = random_triangle(space, rng)
        X = A.points
        ref = oracle(X[:, 0], X[:, 1], X[:, 2])
        assert abs(oriented_simplex_volume(A) - ref) < 1e-6 * abs(ref)


def test_large_spherical_triangle():
    # octant triangle: area pi/2, boundary of Omega excluded so shrink slightly
    s = 0.999
    X = np.array([[1, 0, 0], [0, 1, 0], [0, 0, 1]], dtype=float) * s + (1 - s) / 3
    X /= np.linalg.norm(X, axis=0)
    A = Configuration(X, "sphere")
    ref = girard_area(X[:, 0], X[:, 1], X[:, 2])
    assert abs(oriented_simplex_volume(A) - ref) < 1e-6 * abs(ref)


@pytest.mark.parametrize("space", ["sphere", "hyperbolic"])
def test_volume_alternates(space):
    A = place(space, np.random.default_rng(1).standard_normal((4, 3)), 0.1, 1)
    v = oriented_simplex_volume(A)
    w = oriented_simplex_volume(A.select([2, 1, 3, 4]))
    assert abs(v + w) < 1e-12 * abs(v) + 1e-18
    assert v != 0


def test_degenerate_simplex_volume_zero():
    A = place("sphere", np.random.default_rng(1).standard_normal((3, 3)), 0.1, 1)
    X = np.hstack([A.points, A.points[:, :1]])
    assert oriented_simplex_volume(Configuration(X, "sphere")) == 0


def test_isometry_invariance():
    rng = np.random.default_rng(8)
    T = rng.standard_normal((4, 3))
    v1 = oriented_simplex_volume(place("hyperbolic", T, 0.2, 1))
    v2 = oriented_simplex_volume(place("hyperbolic", T, 0.2, 2))
    assert abs(v1 - v2) < 1e-10 * abs(v1)


def test_omega_violation():
    with pytest.raises(OmegaViolation):
        F(Configuration(np.eye(3), "sphere"))


def test_tolerance_warning():
    Z = random_omega_tuple(2, 3, np.random.default_rng(0))
    with pytest.warns(ToleranceNotMet):
        F(Z, QuadratureSpec(method="monte_carlo", samples=2000))


@pytest.mark.parametrize("n", [1, 2, 3])
def test_F_bound_on_random_samples(n):
    rng = np.random.default_rng(n)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ToleranceNotMet)
        for _ in range(60):
            assert abs(F(random_omega_sample(n, rng)).value) < f_bound(n)


# ---------------------------------------------------------------- zero sum


def test_zero_sum_all_equal_points():
    X = np.tile(E0[:, None], (1, 5))
    assert zero_sum_residual(Configuration(X, "sphere")).value == 0


@pytest.mark.parametrize("n", [2, 3])
def test_zero_sum_complex_tuples(n):
    rng = np.random.default_rng(10 + n)
    for _ in range(5):
        Z = random_omega_tuple(n, n + 2, rng)
        assert abs(zero_sum_residual(Z).value) < 1e-6


def test_zero_sum_hyperbolic_monte_carlo():
    rng = np.random.default_rng(0)
    A = place("hyperbolic", rng.uniform(-1, 1, (5, 3)), 0.4 / 3.5, 0)
    est = zero_sum_residual(A, QuadratureSpec(method="monte_carlo", samples=1_000_000))
    assert abs(est.value) < 1e-6


def test_volume_cochain_is_closed():
    # delta of the volume cochain vanishes on every 3-simplex of Delta_4 in S^2
    A = place("sphere", np.random.default_rng(3).standard_normal((4, 2)), 0.3, 0, n=2)
    K = Complex.full_simplex(4)
    f = Cochain({s: oriented_simplex_volume(A.select(s)) for s in K.simplices(2)}, degree=2)
    df = coboundary(f, K)
    assert abs(df[(1, 2, 3, 4)]) < 1e-12


# --------------------------------------------------------------------- path


def test_path_endpoints():
    Z = random_omega_tuple(3, 5, np.random.default_rng(1))
    assert np.allclose(omega_tilde_path(Z, 0.0), Z)
    end = omega_tilde_path(Z, 1.0)
    assert np.allclose(end, np.tile(Z[:, :1], (1, 5)))


def test_path_invariants():
    rng = np.random.default_rng(5)
    for _ in range(100):
        n = int(rng.integers(1, 5))
        Z = random_omega_tuple(n, n + 2, rng)
        for t in np.linspace(0, 1, 50):
            W = omega_tilde_path(Z, t)  # checks quadric and |g - 1| <= |q| itself
            assert in_omega(W)
