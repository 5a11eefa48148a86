"""Exact normalized-cut and edge-strength oracles.

The minimum normalized cut of a hypergraph is the minimum over all
partitions (into k >= 2 blocks) of crossing weight divided by k - 1.  The
strength of a hyperedge is the largest minimum normalized cut over all
induced sub-hypergraphs on vertex sets containing the edge.  Both are
computed by exhaustive enumeration, which is only feasible at small
vertex counts; callers hit ``SizeLimitError`` beyond ``n_max_exact``.

``IncrementalCutOracle`` supports the streaming sparsifier: it keeps the
cut vector of every touched vertex subset up to date as edges are
committed, so a strength query against "current state plus one tentative
edge" costs one vector update per superset instead of a full recount.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import SizeLimitError
from .enumeration import (
    crossing_matrix,
    cut_vector,
    iter_partitions_recursive,
    iter_supersets,
    mask_bits,
    partition_table,
)
from .model import Hypergraph, Partition, edge_mask, normalize_edge

DEFAULT_N_MAX_EXACT = 12


def _check_size(n: int, n_max_exact: int) -> None:
    if n > n_max_exact:
        raise SizeLimitError(
            f"exact enumeration limited to {n_max_exact} vertices, got {n}"
        )


def _lambda_of_subset(
    edge_masks: list[int], weights: list[float], u_mask: int
) -> tuple[float, np.ndarray | None]:
    """(min normalized cut, witness labels) of the induced sub-hypergraph."""
    bits = mask_bits(u_mask)
    if len(bits) < 2:
        return 0.0, None
    labels, km1 = partition_table(len(bits))
    cuts = cut_vector(edge_masks, weights, u_mask)
    vals = cuts / km1
    i = int(np.argmin(vals))
    return float(vals[i]), labels[i]


def min_normalized_cut(
    hypergraph: Hypergraph, n_max_exact: int = DEFAULT_N_MAX_EXACT
) -> tuple[float, Partition | None]:
    """Exact minimum of cut / (k - 1) over all k-cuts, with a witness."""
    _check_size(hypergraph.n, n_max_exact)
    if hypergraph.n < 2:
        return 0.0, None
    full = (1 << hypergraph.n) - 1
    lam, labels = _lambda_of_subset(
        hypergraph.edge_masks(), list(hypergraph.weights), full
    )
    witness = Partition(assignment=tuple(int(v) for v in labels))
    return lam, witness


def strength(
    edge: tuple[int, ...] | int,
    hypergraph: Hypergraph,
    n_max_exact: int = DEFAULT_N_MAX_EXACT,
) -> float:
    """Max over vertex sets W of the min normalized cut of H[W + edge]."""
    _check_size(hypergraph.n, n_max_exact)
    if isinstance(edge, int):
        e_mask = edge
    else:
        e_mask = edge_mask(normalize_edge(edge, hypergraph.n))
    full = (1 << hypergraph.n) - 1
    masks = hypergraph.edge_masks()
    weights = list(hypergraph.weights)
    best = 0.0
    for u in iter_supersets(e_mask, full):
        lam, _ = _lambda_of_subset(masks, weights, u)
        if lam > best:
            best = lam
    return best


def exists_strong_component(hypergraph: Hypergraph, alpha: float) -> bool:
    """Is there a vertex set (>= 2 vertices) whose induced min normalized cut
    is at least ``alpha``?  Brute force over all subsets."""
    masks = hypergraph.edge_masks()
    weights = list(hypergraph.weights)
    full = (1 << hypergraph.n) - 1
    for u in range(3, full + 1):
        if bin(u).count("1") < 2:
            continue
        lam, _ = _lambda_of_subset(masks, weights, u)
        if lam >= alpha:
            return True
    return False


@dataclass
class _PendingEdge:
    mask: int
    touched: list[tuple[int, np.ndarray]]  # (subset mask, crossing indicator)


class IncrementalCutOracle:
    """Strength oracle over a growing weighted hypergraph.

    ``propose(edge)`` returns the strength the edge would have against the
    current state plus the edge itself (at raw weight 1); ``commit(w)``
    then inserts it with stored weight ``w`` and ``discard()`` drops it.
    Cut vectors per vertex subset are materialized lazily on first touch
    and updated in place afterwards, so repeated strength queries stay
    cheap as the hypergraph grows.
    """

    def __init__(self, n: int, n_max_exact: int = DEFAULT_N_MAX_EXACT):
        _check_size(n, n_max_exact)
        if n < 2:
            raise ValueError(f"need at least two vertices, got n={n}")
        self.n = n
        self.full_mask = (1 << n) - 1
        self.edge_masks: list[int] = []
        self.weights: list[float] = []
        self._cuts: dict[int, np.ndarray] = {}
        self._pending: _PendingEdge | None = None

    def _cut_vec(self, u_mask: int) -> np.ndarray:
        vec = self._cuts.get(u_mask)
        if vec is None:
            vec = cut_vector(self.edge_masks, self.weights, u_mask)
            self._cuts[u_mask] = vec
        return vec

    def lambda_of(self, u_mask: int) -> float:
        """Min normalized cut of the current state induced on ``u_mask``."""
        bits = mask_bits(u_mask)
        if len(bits) < 2:
            return 0.0
        _, km1 = partition_table(len(bits))
        return float(np.min(self._cut_vec(u_mask) / km1))

    def propose(self, edge: tuple[int, ...], raw_weight: float = 1.0) -> float:
        """Strength of ``edge`` in (current state + edge at ``raw_weight``)."""
        if self._pending is not None:
            raise RuntimeError("previous proposal not committed or discarded")
        e_mask = edge_mask(normalize_edge(edge, self.n))
        best = 0.0
        touched: list[tuple[int, np.ndarray]] = []
        for u in iter_supersets(e_mask, self.full_mask):
            u_bits = mask_bits(u)
            labels, km1 = partition_table(len(u_bits))
            cross = crossing_matrix([e_mask], u, labels)[0]
            touched.append((u, cross))
            vals = (self._cut_vec(u) + raw_weight * cross) / km1
            lam = float(vals.min())
            if lam > best:
                best = lam
        self._pending = _PendingEdge(mask=e_mask, touched=touched)
        return best

    def commit(self, stored_weight: float) -> None:
        """Insert the proposed edge with its sparsifier weight."""
        if self._pending is None:
            raise RuntimeError("no pending proposal to commit")
        for u, cross in self._pending.touched:
            self._cuts[u] += stored_weight * cross
        self.edge_masks.append(self._pending.mask)
        self.weights.append(stored_weight)
        self._pending = None

    def discard(self) -> None:
        """Drop the proposed edge (it was not sampled)."""
        if self._pending is None:
            raise RuntimeError("no pending proposal to discard")
        self._pending = None


# ---------------------------------------------------------------------------
# Reference oracles: independently coded second enumeration path
# ---------------------------------------------------------------------------


def min_normalized_cut_reference(hypergraph: Hypergraph) -> float:
    """Min normalized cut via recursive partition generation and plain
    per-partition counting.  Shares no code with the vectorized oracle."""
    if hypergraph.n < 2:
        return 0.0
    best = None
    edges = hypergraph.edges
    weights = hypergraph.weights
    for blocks in iter_partitions_recursive(range(hypergraph.n)):
        if len(blocks) < 2:
            continue
        owner = {}
        for i, b in enumerate(blocks):
            for v in b:
                owner[v] = i
        cut = 0.0
        for e, w in zip(edges, weights):
            blk = owner[e[0]]
            for v in e[1:]:
                if owner[v] != blk:
                    cut += w
                    break
        val = cut / (len(blocks) - 1)
        if best is None or val < best:
            best = val
    return best if best is not None else 0.0


def strength_reference(edge: tuple[int, ...], hypergraph: Hypergraph) -> float:
    """Strength via the reference min-cut on every induced superset."""
    e = set(edge)
    others = [v for v in range(hypergraph.n) if v not in e]
    best = 0.0
    for pick in range(1 << len(others)):
        vs = set(e)
        for i, v in enumerate(others):
            if pick >> i & 1:
                vs.add(v)
        sub_vertices = sorted(vs)
        relabel = {v: i for i, v in enumerate(sub_vertices)}
        sub_edges = []
        sub_weights = []
        for ed, w in zip(hypergraph.edges, hypergraph.weights):
            if all(v in vs for v in ed):
                sub_edges.append(tuple(relabel[v] for v in ed))
                sub_weights.append(w)
        sub = Hypergraph.build(max(len(sub_vertices), 2), sub_edges, sub_weights)
        lam = min_normalized_cut_reference(sub)
        if lam > best:
            best = lam
    return best
