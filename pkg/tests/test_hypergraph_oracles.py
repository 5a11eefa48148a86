"""Exact cut/strength oracles, cross-checked against the reference enumerator."""

import numpy as np
import pytest

from onstream import SizeLimitError
from onstream.hypergraph import (
    Hypergraph,
    IncrementalCutOracle,
    Partition,
    cut_value,
    exists_strong_component,
    min_normalized_cut,
    min_normalized_cut_reference,
    strength,
    strength_reference,
)
from onstream.hypergraph.enumeration import bell_number, partition_table


def triangle():
    return Hypergraph.build(3, [(0, 1), (0, 2), (1, 2)])


def random_hypergraph(rng, n=None, m=None, max_size=4):
    n = n if n is not None else int(rng.integers(3, 8))
    m = m if m is not None else int(rng.integers(1, 9))
    edges = []
    for _ in range(m):
        size = int(rng.integers(2, min(max_size, n) + 1))
        edges.append(tuple(sorted(rng.choice(n, size=size, replace=False).tolist())))
    return Hypergraph.build(n, edges)


# ---------------------------------------------------------------------------
# cut_value
# ---------------------------------------------------------------------------


def test_cut_value_triangle_two_cut():
    assert cut_value(triangle(), Partition.from_blocks([[0], [1, 2]])) == 2.0


def test_cut_value_no_crossing():
    h = Hypergraph.build(4, [(1, 2, 3)])
    assert cut_value(h, Partition.from_blocks([[0], [1, 2, 3]])) == 0.0


def test_cut_value_singletons_on_one_edge():
    h = Hypergraph.build(3, [(0, 1, 2)])
    assert cut_value(h, Partition.from_blocks([[0], [1], [2]])) == 1.0


def test_cut_value_validates_partition():
    with pytest.raises(ValueError):
        cut_value(triangle(), Partition.from_blocks([[0], [1]]))  # misses vertex 2
    with pytest.raises(ValueError):
        Partition.from_blocks([[0, 1, 2]])  # single block is not a cut


# ---------------------------------------------------------------------------
# min_normalized_cut
# ---------------------------------------------------------------------------


def test_min_normalized_cut_triangle():
    # 2-cuts give 2/1 = 2; the singleton 3-cut gives 3/2.
    lam, witness = min_normalized_cut(triangle())
    assert lam == 1.5
    assert witness.k == 3


def test_min_normalized_cut_single_edge():
    lam, witness = min_normalized_cut(Hypergraph.build(3, [(0, 1, 2)]))
    assert lam == 0.5
    assert witness.k == 3


def test_min_normalized_cut_empty_edges():
    lam, _ = min_normalized_cut(Hypergraph.build(4, []))
    assert lam == 0.0


def test_min_normalized_cut_size_limit():
    h = Hypergraph.build(13, [(0, 1)])
    with pytest.raises(SizeLimitError):
        min_normalized_cut(h)
    with pytest.raises(SizeLimitError):
        strength((0, 1), h)


# ---------------------------------------------------------------------------
# strength
# ---------------------------------------------------------------------------


def test_strength_triangle_edges():
    h = triangle()
    for e in h.edges:
        assert strength(e, h) == 1.5


def test_strength_lone_edge():
    h = Hypergraph.build(5, [(0, 1, 2)])
    assert strength((0, 1, 2), h) == 0.5


def test_strength_unaffected_by_other_components():
    # Strength within a connected component matches strength in the full
    # hypergraph with a disjoint second component present.
    rng = np.random.default_rng(31)
    for _ in range(15):
        a = random_hypergraph(rng, n=4, m=int(rng.integers(1, 5)), max_size=3)
        b = random_hypergraph(rng, n=3, m=int(rng.integers(1, 4)), max_size=3)
        merged = Hypergraph.build(
            7, list(a.edges) + [tuple(v + 4 for v in e) for e in b.edges]
        )
        for e in a.edges:
            assert strength(e, merged) == strength(e, a)


def test_strength_lower_bounds_crossed_cuts():
    # For any partition crossed by an edge, the edge's strength is at most
    # the partition's (unnormalized) cut value.
    rng = np.random.default_rng(7)
    from onstream.hypergraph.enumeration import iter_partitions_recursive

    for _ in range(10):
        h = random_hypergraph(rng, n=5)
        for e in set(h.edges):
            kappa = strength(e, h)
            for blocks in iter_partitions_recursive(range(h.n)):
                if len(blocks) < 2:
                    continue
                part = Partition.from_blocks(blocks, n=h.n)
                owner = {v: part.assignment[v] for v in e}
                if len(set(owner.values())) > 1:  # edge crosses this cut
                    assert kappa <= cut_value(h, part) + 1e-12


def test_lambda_monotone_under_edge_insertion():
    # Cut values only grow when edges are added, hence so does the minimum.
    rng = np.random.default_rng(13)
    for _ in range(10):
        h = random_hypergraph(rng, n=5, m=6)
        prev = 0.0
        for i in range(1, h.m + 1):
            sub = Hypergraph.build(h.n, h.edges[:i])
            lam, _ = min_normalized_cut(sub)
            assert lam >= prev - 1e-12
            prev = lam


# ---------------------------------------------------------------------------
# agreement with the independently coded enumerator
# ---------------------------------------------------------------------------


def test_oracles_agree_with_reference_enumerator():
    rng = np.random.default_rng(1234)
    for _ in range(40):
        h = random_hypergraph(rng, n=int(rng.integers(3, 7)))
        lam, _ = min_normalized_cut(h)
        assert lam == min_normalized_cut_reference(h)
        for e in set(h.edges):
            assert strength(e, h) == strength_reference(e, h)


def test_incremental_oracle_matches_standalone():
    rng = np.random.default_rng(99)
    n = 6
    oracle = IncrementalCutOracle(n)
    edges, weights = [], []
    for _ in range(14):
        size = int(rng.integers(2, 5))
        e = tuple(sorted(rng.choice(n, size=size, replace=False).tolist()))
        kappa_inc = oracle.propose(e)
        with_e = Hypergraph.build(n, edges + [e], weights + [1.0])
        assert kappa_inc == strength(e, with_e)
        if rng.random() < 0.7:
            w = float(rng.integers(1, 4))
            oracle.commit(w)
            edges.append(e)
            weights.append(w)
        else:
            oracle.discard()


def test_incremental_oracle_pending_protocol():
    oracle = IncrementalCutOracle(4)
    with pytest.raises(RuntimeError):
        oracle.commit(1.0)
    oracle.propose((0, 1))
    with pytest.raises(RuntimeError):
        oracle.propose((1, 2))
    oracle.discard()
    with pytest.raises(RuntimeError):
        oracle.discard()


# ---------------------------------------------------------------------------
# structural facts used by the size analysis
# ---------------------------------------------------------------------------


def test_strong_component_exists_at_weight_threshold():
    # Total weight >= alpha * (n - 1) forces an alpha-strong vertex set.
    rng = np.random.default_rng(55)
    for _ in range(25):
        h = random_hypergraph(rng, n=int(rng.integers(3, 7)))
        alpha = h.total_weight() / (h.n - 1)
        assert exists_strong_component(h, alpha)


def test_bell_numbers_and_table_sizes():
    assert [bell_number(k) for k in range(1, 9)] == [1, 2, 5, 15, 52, 203, 877, 4140]
    for n in range(2, 9):
        labels, km1 = partition_table(n)
        assert labels.shape == (bell_number(n) - 1, n)
        assert km1.min() >= 1
        # restricted growth strings: first element always block 0
        assert (labels[:, 0] == 0).all()
