"""Seeded random instances shared by the module and acceptance tests."""

from __future__ import annotations

import numpy as np

from bellows.geometry import Configuration, in_omega, random_isometry, tangent_exp

TETRAHEDRON = np.array([(1, 1, 1), (1, -1, -1), (-1, 1, -1), (-1, -1, 1)], dtype=float)
OCTAHEDRON = np.array([(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1)], dtype=float)
# octahedron with the 3-4 diagonal much shorter than every edge
FLAT_OCTAHEDRON = np.array([(1, 0, 0), (-1, 0, 0), (0, 0, 0.05), (0, 0, -0.05), (0, 1, 0), (0, -1, 0)])


def place(space: str, template, scale: float, seed: int, noise: float = 0.0, n: int = 3) -> Configuration:
    """Map tangent-space points ``scale * template`` to ``space`` and apply a random isometry."""
    rng = np.random.default_rng(seed)
    T = np.asarray(template, dtype=float)
    T = T + noise * rng.standard_normal(T.shape)
    e0 = np.zeros(n + 1)
    e0[0] = 1.0
    X = np.array([tangent_exp(space, e0, np.concatenate([[0.0], scale * t])) for t in T]).T
    R = random_isometry(space, n, rng, size=0.5)
    return Configuration(R @ X, space)


def random_triangle(space: str, rng, max_edge: float = 0.5):
    """Three points in dimension two with every side shorter than ``max_edge``."""
    from bellows.geometry import distance

    while True:
        T = rng.uniform(-1, 1, size=(3, 2)) * max_edge / 2
        e0 = np.array([1.0, 0.0, 0.0])
        X = np.array([tangent_exp(space, e0, np.concatenate([[0.0], t])) for t in T]).T
        R = random_isometry(space, 2, rng, size=0.5)
        A = Configuration(R @ X, space)
        sides = [distance(A.point(u), A.point(v)) for u, v in ((1, 2), (1, 3), (2, 3))]
        if max(sides) < max_edge and min(sides) > 1e-3:
            return A


def random_omega_tuple(n: int, k: int, rng, spread: float = 0.35) -> np.ndarray:
    """``k`` complex points of the quadric in dimension ``n``, pairwise in Omega."""
    while True:
        base = rng.standard_normal(n + 1) + 0.3j * rng.standard_normal(n + 1)
        Z = base[:, None] + spread * (rng.standard_normal((n + 1, k)) + 1j * rng.standard_normal((n + 1, k)))
        Z = Z / np.sqrt(np.sum(Z * Z, axis=0))
        if in_omega(Z):
            return Z


def random_omega_sample(n: int, rng) -> np.ndarray:
    """A simplex in Omega of varied size, including near-boundary ones."""
    spread = rng.choice([0.05, 0.3, 0.8, 1.5])
    return random_omega_tuple(n, n + 1, rng, spread=float(spread))
