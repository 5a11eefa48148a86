"""Streaming construction of reweighted cut-preserving sub-hypergraphs.

Edges arrive one at a time (unweighted); each is kept with probability
``min(rho / strength, 1)`` where the strength is computed against the
sparsifier built so far plus the arriving edge, and kept edges get weight
``1 / p``.  The coin for each edge is available before the next edge is
read, so adversaries may choose the stream adaptively from past coins.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator

from .model import Hypergraph, normalize_edge
from .oracles import DEFAULT_N_MAX_EXACT, IncrementalCutOracle


@dataclass(frozen=True)
class EdgeRecord:
    """Per-arrival transcript row (kept and dropped edges alike)."""

    index: int
    vertices: tuple[int, ...]
    strength: float
    probability: float
    coin: bool


@dataclass(frozen=True)
class KeptEdge:
    vertices: tuple[int, ...]
    weight: float
    probability: float
    strength: float


class HypergraphCutSparsifier(BaseEstimator):
    """Online cut sparsifier with an exact strength oracle.

    Parameters
    ----------
    n_vertices : int
        Size of the (fixed) vertex set; vertices are 0..n_vertices-1.
    epsilon : float, default=0.25
        Target relative cut accuracy.
    k1 : float, default=8.0
        Leading constant of the oversampling rate
        ``rho = k1 * epsilon^-2 * n * ln(n)``.
    n_max_exact : int, default=12
        Hard limit for the exact strength oracle.
    random_state : int, numpy Generator, or None
        Seed for the sampling coins.

    Attributes (after fitting)
    --------------------------
    rho_ : float
        The oversampling rate in effect.
    kept_ : list of KeptEdge
        Sampled edges with weights, probabilities, and insertion strengths.
    history_ : list of EdgeRecord
        One record per arrival, in order.
    n_seen_ : int
        Number of edges processed.
    """

    def __init__(
        self,
        n_vertices: int,
        epsilon: float = 0.25,
        k1: float = 8.0,
        n_max_exact: int = DEFAULT_N_MAX_EXACT,
        random_state=None,
    ):
        self.n_vertices = n_vertices
        self.epsilon = epsilon
        self.k1 = k1
        self.n_max_exact = n_max_exact
        self.random_state = random_state

    def _reset(self) -> None:
        if self.n_vertices < 2:
            raise ValueError(f"need at least two vertices, got {self.n_vertices}")
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError(f"epsilon must be in (0, 1), got {self.epsilon}")
        if not self.k1 > 0.0:
            raise ValueError(f"k1 must be positive, got {self.k1}")
        self.rho_ = self.k1 * self.epsilon**-2 * self.n_vertices * math.log(self.n_vertices)
        self._oracle = IncrementalCutOracle(self.n_vertices, self.n_max_exact)
        self._rng = (
            self.random_state
            if isinstance(self.random_state, np.random.Generator)
            else np.random.default_rng(self.random_state)
        )
        self.kept_: list[KeptEdge] = []
        self.history_: list[EdgeRecord] = []
        self.n_seen_ = 0

    def _ensure_stream(self) -> None:
        if not hasattr(self, "rho_"):
            self._reset()

    def add_edge(self, edge) -> bool:
        """Process one arriving edge; returns the coin (True if kept)."""
        self._ensure_stream()
        vertices = normalize_edge(edge, self.n_vertices)
        kappa = self._oracle.propose(vertices, raw_weight=1.0)
        p = min(self.rho_ / kappa, 1.0) if kappa > 0.0 else 1.0
        coin = bool(self._rng.random() < p)
        if coin:
            weight = 1.0 / p
            self._oracle.commit(weight)
            self.kept_.append(
                KeptEdge(vertices=vertices, weight=weight, probability=p, strength=kappa)
            )
        else:
            self._oracle.discard()
        self.history_.append(
            EdgeRecord(
                index=self.n_seen_,
                vertices=vertices,
                strength=kappa,
                probability=p,
                coin=coin,
            )
        )
        self.n_seen_ += 1
        return coin

    def partial_fit(self, edges) -> "HypergraphCutSparsifier":
        """Consume a batch of edges, continuing any existing stream."""
        self._ensure_stream()
        for e in edges:
            self.add_edge(e)
        return self

    def fit(self, edges, y=None) -> "HypergraphCutSparsifier":
        """Consume a fresh edge stream from the beginning."""
        self._reset()
        for e in edges:
            self.add_edge(e)
        return self

    def to_hypergraph(self) -> Hypergraph:
        """The current sparsifier as a weighted hypergraph."""
        self._ensure_stream()
        return Hypergraph.build(
            self.n_vertices,
            [k.vertices for k in self.kept_],
            [k.weight for k in self.kept_],
        )
