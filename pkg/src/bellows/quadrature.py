"""Integrals of ``exp(-t^T G t)`` over the positive orthant.

Two independent backends:

* tensor-product Gauss-Laguerre after the rescaling ``t = c s``;
* Monte Carlo with the half-normal importance density ``p(t) ~ exp(-|t|^2)``,
  whose weight ``exp(-t^T (G - I) t)`` is bounded by 1 whenever
  ``Re g_jk > 0``.

The Monte Carlo stream is split into fixed-size blocks, each drawn from its
own Philox generator keyed by ``(seed, block index)``, so the result does not
depend on how blocks are scheduled.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial.laguerre import laggauss

METHODS = ("tensor_laguerre", "monte_carlo")

#: default rescaling t = c * s of the Laguerre nodes
LAGUERRE_SCALE = 0.3

# per-axis nodes whose weight bound falls below this fraction are dropped
_PRUNE = 1e-18


@dataclass(frozen=True)
class QuadratureSpec:
    method: str = "tensor_laguerre"
    order: int = 24
    samples: int = 1_000_000
    seed: int = 0
    target_rel_tol: float = 1e-6
    scale: float = LAGUERRE_SCALE
    block: int = 1 << 16

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}")
        if self.method == "tensor_laguerre" and self.order < 2:
            raise ValueError("Laguerre order must be >= 2")
        if self.method == "monte_carlo" and self.samples < 1000:
            raise ValueError("Monte Carlo needs at least 1000 samples")
        if self.scale <= 0:
            raise ValueError("scale must be positive")

    def to_json(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class Estimate:
    """A quadrature value with an error estimate.

    For Laguerre the error is the difference to a lower-order rule; for Monte
    Carlo it is one standard error.
    """

    value: complex
    error: float
    method: str
    converged: bool = True

    def to_json(self) -> dict:
        v = complex(self.value)
        return {"re": v.real, "im": v.imag, "error": self.error, "method": self.method, "converged": self.converged}


@lru_cache(maxsize=None)
def _axis_rule(order: int, scale: float):
    x, w = laggauss(order)
    # fold the Laguerre weight back in: int f(cs) ds = sum w e^x f(cx)
    W = w * np.exp(x)
    bound = W * np.exp(-(scale * x) ** 2)
    keep = bound > _PRUNE * bound.max()
    return scale * x[keep], scale * W[keep]


def _laguerre(G: np.ndarray, order: int, scale: float) -> complex:
    d = G.shape[0]
    t, W = _axis_rule(order, scale)
    k = t.size
    # iterate over the first axis to keep memory bounded
    rest = d - 1
    if rest == 0:
        return complex(np.sum(W * np.exp(-G[0, 0] * t * t)))
    grids = np.meshgrid(*([t] * rest), indexing="ij")
    T = np.stack([g.ravel() for g in grids])  # (rest, k^rest)
    Wr = np.ones(T.shape[1])
    for g in np.meshgrid(*([W] * rest), indexing="ij"):
        Wr *= g.ravel()
    Gr = G[1:, 1:]
    quad_rest = np.einsum("ip,ij,jp->p", T, Gr, T)
    lin = 2 * (G[0, 1:] @ T)
    total = 0j
    for i in range(k):
        t0 = t[i]
        total += W[i] * np.sum(Wr * np.exp(-(G[0, 0] * t0 * t0 + lin * t0 + quad_rest)))
    return complex(total)


def _lower_order(order: int) -> int:
    return max(2, order - 4)


def orthant_integral(G: np.ndarray, spec: QuadratureSpec) -> Estimate:
    """``int_{t >= 0} exp(-t^T G t) dt`` for a symmetric complex ``G``."""
    return orthant_combination([1.0], [G], spec)


def orthant_combination(coeffs, grams, spec: QuadratureSpec, scale_ref: float | None = None) -> Estimate:
    """``sum_j coeffs[j] * int exp(-t^T G_j t) dt`` with a joint error estimate.

    All Gram matrices must have the same size.  For Monte Carlo the same
    samples are used for every term, so the standard error is that of the
    combined per-sample value.  ``converged`` compares the error with
    ``target_rel_tol`` times ``scale_ref`` (default: sum of term magnitudes).
    """
    coeffs = [complex(c) for c in coeffs]
    grams = [np.asarray(G, dtype=complex) for G in grams]
    if spec.method == "tensor_laguerre":
        hi = [_laguerre(G, spec.order, spec.scale) for G in grams]
        lo = [_laguerre(G, _lower_order(spec.order), spec.scale) for G in grams]
        value = sum(c * h for c, h in zip(coeffs, hi))
        error = abs(sum(c * (h - l) for c, h, l in zip(coeffs, hi, lo)))
        size = sum(abs(c * h) for c, h in zip(coeffs, hi))
    else:
        value, error, size = _monte_carlo(coeffs, grams, spec)
    ref = size if scale_ref is None else scale_ref
    converged = error <= spec.target_rel_tol * max(ref, 1e-300)
    return Estimate(complex(value), float(error), spec.method, bool(converged))


def block_generator(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=np.array([seed, block], dtype=np.uint64)))


def _monte_carlo(coeffs, grams, spec: QuadratureSpec):
    d = grams[0].shape[0]
    norm = (math.sqrt(math.pi) / 2) ** d
    offs = [G - np.eye(d) for G in grams]
    n_blocks = -(-spec.samples // spec.block)
    total = 0j
    total_sq = 0.0
    mags = np.zeros(len(grams))
    count = 0
    for b in range(n_blocks):
        size = min(spec.block, spec.samples - b * spec.block)
        rng = block_generator(spec.seed, b)
        # half-normal with density proportional to exp(-t^2)
        T = np.abs(rng.standard_normal((d, size))) / math.sqrt(2.0)
        combined = np.zeros(size, dtype=complex)
        for j, (c, H) in enumerate(zip(coeffs, offs)):
            # real and imaginary parts separately: T is real, H complex
            expo = np.einsum("ip,ip->p", T, H.real @ T) + 1j * np.einsum("ip,ip->p", T, H.imag @ T)
            vals = norm * np.exp(-expo)
            combined += c * vals
            mags[j] += abs(np.sum(vals))
        total += combined.sum()
        total_sq += float(np.sum(np.abs(combined) ** 2))
        count += size
    mean = total / count
    var = max(total_sq / count - abs(mean) ** 2, 0.0) * count / max(count - 1, 1)
    stderr = math.sqrt(var / count)
    size = float(sum(abs(c) * m / count for c, m in zip(coeffs, mags)))
    return mean, stderr, size
