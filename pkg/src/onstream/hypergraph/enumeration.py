"""Set-partition enumeration and vectorized cut evaluation.

Partitions of {0..n-1} are enumerated as restricted growth strings and
materialized once per ``n`` as a dense label table, so cut values over
*all* partitions of a vertex subset reduce to a handful of numpy
operations.  Tables are small at the supported exact sizes (Bell(12)
strings of 12 bytes each at the default limit).
"""

from __future__ import annotations

from functools import lru_cache
from typing import Iterator, Sequence

import numpy as np

# Elements per chunk when batching edges x partitions x vertices; keeps the
# temporary boolean tensors around a hundred MB at worst.
_CHUNK_ELEMS = 1 << 24


def bell_number(n: int) -> int:
    """Number of set partitions of an n-element set (Bell triangle)."""
    row = [1]
    for _ in range(n):
        nxt = [row[-1]]
        for v in row:
            nxt.append(nxt[-1] + v)
        row = nxt
    return row[0]


def _ranges(counts: np.ndarray) -> np.ndarray:
    # Concatenation of arange(c) for each c in counts.
    offsets = np.repeat(np.cumsum(counts) - counts, counts)
    return np.arange(counts.sum(), dtype=np.int64) - offsets


@lru_cache(maxsize=None)
def partition_table(n: int) -> tuple[np.ndarray, np.ndarray]:
    """All partitions of {0..n-1} with at least two blocks.

    Returns ``(labels, k_minus_1)`` where ``labels`` has one restricted
    growth string per row (block id per element) and ``k_minus_1`` holds the
    block count minus one.  The single-block partition is excluded since
    normalized cut values divide by ``k - 1``.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    labels = np.zeros((1, 1), dtype=np.int8)
    maxlab = np.zeros(1, dtype=np.int8)
    for _ in range(n - 1):
        counts = maxlab.astype(np.int64) + 2
        parent = np.repeat(np.arange(labels.shape[0]), counts)
        newcol = _ranges(counts).astype(np.int8)
        labels = np.concatenate([labels[parent], newcol[:, None]], axis=1)
        maxlab = np.maximum(maxlab[parent], newcol)
    k = maxlab.astype(np.int64) + 1
    keep = k >= 2
    return labels[keep], (k[keep] - 1)


def mask_bits(mask: int) -> list[int]:
    """Set bit positions of ``mask`` in increasing order."""
    bits = []
    v = mask
    while v:
        low = v & -v
        bits.append(low.bit_length() - 1)
        v ^= low
    return bits


def iter_supersets(mask: int, universe: int) -> Iterator[int]:
    """All supersets of ``mask`` within ``universe`` (mask itself included)."""
    comp = universe & ~mask
    sub = comp
    while True:
        yield mask | sub
        if sub == 0:
            return
        sub = (sub - 1) & comp


def crossing_matrix(
    edge_masks: Sequence[int], u_mask: int, labels: np.ndarray
) -> np.ndarray:
    """Boolean (n_edges, n_partitions): does each edge cross each partition?

    Every edge mask must be contained in ``u_mask``; ``labels`` is the
    partition table of the |u_mask|-element set, with columns following the
    increasing vertex order of ``u_mask``.
    """
    bits = mask_bits(u_mask)
    col_of = {v: i for i, v in enumerate(bits)}
    n_edges = len(edge_masks)
    n_parts = labels.shape[0]
    out = np.empty((n_edges, n_parts), dtype=bool)
    for i, em in enumerate(edge_masks):
        cols = [col_of[v] for v in mask_bits(em)]
        sub = labels[:, cols]
        out[i] = (sub != sub[:, :1]).any(axis=1)
    return out


def cut_vector(
    edge_masks: Sequence[int],
    weights: Sequence[float],
    u_mask: int,
) -> np.ndarray:
    """Cut value of every (k>=2)-partition of ``u_mask``'s vertex set.

    Only edges fully contained in ``u_mask`` contribute (induced
    sub-hypergraph semantics).  Partitions follow ``partition_table`` order.
    """
    bits = mask_bits(u_mask)
    u = len(bits)
    if u < 2:
        raise ValueError("cut vectors require at least two vertices")
    labels, _ = partition_table(u)
    inside_idx = [i for i, m in enumerate(edge_masks) if m and (m & ~u_mask) == 0]
    cuts = np.zeros(labels.shape[0], dtype=np.float64)
    if not inside_idx:
        return cuts
    masks = [edge_masks[i] for i in inside_idx]
    w = np.asarray([weights[i] for i in inside_idx], dtype=np.float64)
    chunk = max(1, _CHUNK_ELEMS // max(1, len(masks) * u))
    for start in range(0, labels.shape[0], chunk):
        block = labels[start : start + chunk]
        cross = crossing_matrix(masks, u_mask, block)
        cuts[start : start + block.shape[0]] = w @ cross
    return cuts


# ---------------------------------------------------------------------------
# Independent recursive enumerator (second code path for oracle checks)
# ---------------------------------------------------------------------------


def iter_partitions_recursive(items: Sequence[int]) -> Iterator[list[list[int]]]:
    """Yield all set partitions by inserting the last element everywhere.

    Deliberately a different generation order and representation than
    ``partition_table``; used to cross-check the vectorized oracles.
    """
    items = list(items)
    if not items:
        yield []
        return
    rest, last = items[:-1], items[-1]
    for smaller in iter_partitions_recursive(rest):
        for i in range(len(smaller)):
            yield smaller[:i] + [smaller[i] + [last]] + smaller[i + 1 :]
        yield smaller + [[last]]
