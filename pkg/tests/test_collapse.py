import itertools

import numpy as np
import pytest

from bellows.collapse import (
    CollapseSequence,
    HereditaryOrdering,
    build_hereditary_ordering,
    collapse_below,
    free_pairs,
    is_hereditary,
    lam,
    m_set,
    mu,
    mu_j,
    verify_collapse,
)
from bellows.errors import HypothesisViolated, IllegalStep, MaximalSimplex
from bellows.gram import GramMatrix, clique_complex, gamma_complex, random_low_rank_gram, select_kappa
from bellows.simplicial import Complex, homology_ranks

from oracles import brute_force_free_pairs


def lex_order(K):
    return build_hereditary_ordering(K)


def test_mu_examples():
    K = Complex.full_simplex(3)
    o = lex_order(K)
    assert mu((1,), o) == ()
    # vertex 1 is the largest vertex in the base order
    assert mu((1, 2), o) == (1,)
    assert mu_j((1, 2, 3), 2, o) == (1, 2, 3)
    assert mu_j((1, 2, 3), -1, o) == ()
    assert mu_j((1, 2, 3), 0, o) == (1,)


def test_base_vertex_order_matches_spec_example():
    # "vertex order 2 > 1" is expressed by an explicit ordering
    K = Complex.full_simplex(2)
    o = HereditaryOrdering.from_sequence(K, [(1,), (2,), (1, 2)])
    assert mu((1, 2), o) == (2,)


def test_lambda():
    K = Complex.full_simplex(3)
    o = lex_order(K)
    edges = [e for e in K.simplices(1) if 1 in e]
    assert lam((1,), o) == min(edges, key=o.key)
    with pytest.raises(MaximalSimplex):
        lam((1, 2, 3), o)


def test_m_set_single_vertex():
    K = Complex.full_simplex(1)
    assert m_set(K, lex_order(K)) == {()}


def test_ordering_of_isolated_vertices_is_base_order():
    K = Complex.from_maximal([(1,), (2,), (3,), (4,)])
    o = build_hereditary_ordering(K)
    assert o.descending() == [(1,), (2,), (3,), (4,)]


def test_all_ties_give_lexicographic_extension():
    K = Complex.full_simplex(4)
    G = GramMatrix.from_logmag(4, {(u, v): -5.0 for u, v in itertools.combinations(range(1, 5), 2)})
    assert build_hereditary_ordering(K, G).rank == build_hereditary_ordering(K).rank
    assert build_hereditary_ordering(K, G).rank == build_hereditary_ordering(K, G).rank


def test_tie_break_variants_differ_but_are_hereditary():
    K = Complex.full_simplex(4)
    a = build_hereditary_ordering(K, tie_break="lex-min")
    b = build_hereditary_ordering(K, tie_break="lex-max")
    assert is_hereditary(a) and is_hereditary(b)
    assert a.rank != b.rank
    with pytest.raises(ValueError):
        build_hereditary_ordering(K, tie_break="random")


def test_is_hereditary_detects_violations():
    K = Complex.full_simplex(3)
    V = [(3,), (2,), (1,)]
    E = [(2, 3), (1, 3), (1, 2)]
    good = HereditaryOrdering.from_sequence(K, V + E + [(1, 2, 3)])
    assert is_hereditary(good)
    # condition (1): an edge below a vertex
    bad1 = HereditaryOrdering.from_sequence(K, [(3,), (2, 3), (2,), (1,), (1, 3), (1, 2), (1, 2, 3)])
    assert not is_hereditary(bad1)
    # condition (2): mu(1,2) = (1) is the largest vertex, yet (1,2) is not the largest edge
    bad2 = HereditaryOrdering.from_sequence(K, V + [(1, 3), (1, 2), (2, 3)] + [(1, 2, 3)])
    assert not is_hereditary(bad2)


@pytest.mark.parametrize("seed", range(10))
def test_built_ordering_is_hereditary(seed):
    G = random_low_rank_gram(8, 4, seed, mode="clustered")
    K = gamma_complex(G, select_kappa(G, 2).log2_kappa)
    assert is_hereditary(build_hereditary_ordering(K, G))


def test_free_pairs_examples():
    assert set(free_pairs(Complex.full_simplex(2))) == {((1, 2), (1,)), ((1, 2), (2,))}
    assert free_pairs(Complex.simplex_boundary(3)) == []


@pytest.mark.parametrize("seed", range(8))
def test_free_pairs_against_brute_force(seed):
    rng = np.random.default_rng(seed)
    maximal = [tuple(sorted(rng.choice(np.arange(1, 7), size=int(rng.integers(1, 4)), replace=False).tolist())) for _ in range(5)]
    K = Complex.from_maximal(maximal, m=6)
    assert set(free_pairs(K)) == brute_force_free_pairs(K.simplex_set)


@pytest.mark.parametrize("m", [2, 3, 4, 5, 6])
def test_full_simplex_collapses_to_point(m):
    K = Complex.full_simplex(m)
    seq = collapse_below(K, lex_order(K), 1)
    assert seq.residual.f_vector() == [1]
    assert verify_collapse(K, seq)


def test_disjoint_simplices_collapse_to_vertices():
    K = Complex.from_maximal([(1, 2, 3), (4, 5), (6,)])
    seq = collapse_below(K, lex_order(K), 1)
    assert seq.residual.dim == 0
    assert len(seq.residual.vertices()) == 3


def test_triangle_boundary_violates_hypothesis():
    K = Complex.simplex_boundary(3)
    with pytest.raises(HypothesisViolated) as info:
        collapse_below(K, lex_order(K), 1)
    a, b = info.value.sigma, info.value.tau
    assert tuple(sorted(set(a) | set(b))) not in K


def test_empty_sequence_verifies():
    K = Complex.from_maximal([(1,), (2,)])
    assert verify_collapse(K, CollapseSequence((), K))


def test_verify_rejects_illegal_step():
    K = Complex.full_simplex(3)
    bogus = CollapseSequence((((1, 2), (1,)),), K)
    check = verify_collapse(K, bogus)
    assert not check and check.failed_step == 0


def test_verify_rejects_wrong_residual():
    K = Complex.full_simplex(3)
    seq = collapse_below(K, lex_order(K), 1)
    tampered = CollapseSequence(seq.steps, K)
    assert not verify_collapse(K, tampered)


def test_illegal_step_when_check_disabled():
    # skipping the hypothesis check lets the algorithm run into a non-free pair
    K = Complex.simplex_boundary(3)
    with pytest.raises(IllegalStep, match="not a free pair"):
        collapse_below(K, lex_order(K), 1, check=False)


def _flag_instances(count):
    """Flag complexes with orderings that satisfy the collapse hypothesis."""
    out, seed = [], 0
    while len(out) < count:
        G = random_low_rank_gram(9, 4, seed, mode="clustered")
        seed += 1
        K = gamma_complex(G, select_kappa(G, 2).log2_kappa)
        o = build_hereditary_ordering(K, G)
        out.append((K, o, 2))
        # random flag complexes that happen to satisfy the hypothesis at r = 1
        rng = np.random.default_rng(seed)
        edges = {e for e in itertools.combinations(range(1, 8), 2) if rng.random() < 0.5}
        K2 = clique_complex(edges, 7)
        o2 = lex_order(K2)
        try:
            collapse_below(K2, o2, 1)
        except HypothesisViolated:
            continue
        out.append((K2, o2, 1))
    return out[:count]


def test_replay_on_random_flag_complexes():
    for K, o, r in _flag_instances(100):
        seq = collapse_below(K, o, r)
        assert seq.residual.dim < r
        check = verify_collapse(K, seq)
        assert check, check.reason
        h0, h1 = homology_ranks(seq.residual), homology_ranks(K)
        assert h0 + [0] * (len(h1) - len(h0)) == h1


def test_sequence_json_roundtrip():
    K = Complex.full_simplex(4)
    seq = collapse_below(K, lex_order(K), 1)
    back = CollapseSequence.from_json(seq.to_json(), m=4)
    assert back == seq
