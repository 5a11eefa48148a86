"""Hypergraphs, vertex partitions, and cut values."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence


def normalize_edge(edge: Iterable[int], n: int) -> tuple[int, ...]:
    """Validate and canonicalize one hyperedge (sorted distinct vertices)."""
    vs = tuple(sorted(int(v) for v in edge))
    if len(vs) < 2:
        raise ValueError(f"hyperedge needs at least 2 vertices, got {vs}")
    if len(set(vs)) != len(vs):
        raise ValueError(f"hyperedge has repeated vertices: {vs}")
    if vs[0] < 0 or vs[-1] >= n:
        raise ValueError(f"hyperedge {vs} has vertices outside [0, {n})")
    return vs


def edge_mask(edge: Sequence[int]) -> int:
    mask = 0
    for v in edge:
        mask |= 1 << v
    return mask


@dataclass(frozen=True)
class Hypergraph:
    """Vertex set {0..n-1} with weighted hyperedges (parallel edges allowed)."""

    n: int
    edges: tuple[tuple[int, ...], ...]
    weights: tuple[float, ...]

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"need at least one vertex, got n={self.n}")
        if len(self.edges) != len(self.weights):
            raise ValueError("edges and weights must have equal length")
        for e in self.edges:
            normalize_edge(e, self.n)
        for w in self.weights:
            if not w >= 0.0:
                raise ValueError(f"edge weights must be non-negative, got {w}")

    @classmethod
    def build(
        cls,
        n: int,
        edges: Iterable[Iterable[int]],
        weights: Iterable[float] | None = None,
    ) -> "Hypergraph":
        es = tuple(normalize_edge(e, n) for e in edges)
        ws = tuple(1.0 for _ in es) if weights is None else tuple(float(w) for w in weights)
        return cls(n=n, edges=es, weights=ws)

    @property
    def m(self) -> int:
        return len(self.edges)

    def total_weight(self) -> float:
        return float(sum(self.weights))

    def edge_masks(self) -> list[int]:
        return [edge_mask(e) for e in self.edges]


@dataclass(frozen=True)
class Partition:
    """Assignment of every vertex to a block; at least two nonempty blocks."""

    assignment: tuple[int, ...]
    _blocks: tuple[tuple[int, ...], ...] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        groups: dict[int, list[int]] = {}
        for v, b in enumerate(self.assignment):
            groups.setdefault(int(b), []).append(v)
        blocks = tuple(tuple(vs) for _, vs in sorted(groups.items()))
        if len(blocks) < 2:
            raise ValueError("a cut partition needs at least two blocks")
        object.__setattr__(self, "_blocks", blocks)

    @classmethod
    def from_blocks(cls, blocks: Sequence[Sequence[int]], n: int | None = None) -> "Partition":
        size = max((max(b) for b in blocks if b), default=-1) + 1
        if n is None:
            n = size
        assignment = [-1] * n
        for i, b in enumerate(blocks):
            for v in b:
                if assignment[v] != -1:
                    raise ValueError(f"vertex {v} appears in two blocks")
                assignment[v] = i
        if any(a == -1 for a in assignment):
            raise ValueError("blocks must cover every vertex")
        return cls(assignment=tuple(assignment))

    @property
    def k(self) -> int:
        return len(self._blocks)

    @property
    def blocks(self) -> tuple[tuple[int, ...], ...]:
        return self._blocks


def cut_value(hypergraph: Hypergraph, partition: Partition) -> float:
    """Total weight of hyperedges not contained in a single block."""
    if len(partition.assignment) != hypergraph.n:
        raise ValueError(
            f"partition covers {len(partition.assignment)} vertices, "
            f"hypergraph has {hypergraph.n}"
        )
    assignment = partition.assignment
    total = 0.0
    for e, w in zip(hypergraph.edges, hypergraph.weights):
        first = assignment[e[0]]
        if any(assignment[v] != first for v in e[1:]):
            total += w
    return total
