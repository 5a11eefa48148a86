"""Exact span membership for integer rows.

Row streams here carry bounded integer entries, so span membership can be
decided exactly with fraction-free Gaussian elimination over Python
integers instead of a floating-point rank test.  A float residual test is
kept as an alternative for callers that want tolerance semantics.
"""

from __future__ import annotations

from math import gcd

import numpy as np


def _normalize(row: list[int]) -> list[int]:
    g = 0
    for v in row:
        g = gcd(g, abs(v))
    if g > 1:
        row = [v // g for v in row]
    for v in row:
        if v != 0:
            return row if v > 0 else [-u for u in row]
    return row


class IntegerRowBasis:
    """Incremental echelon basis of integer rows (exact arithmetic)."""

    def __init__(self, dim: int):
        if dim < 1:
            raise ValueError(f"dim must be >= 1, got {dim}")
        self.dim = dim
        self._rows: list[list[int]] = []
        self._pivots: list[int] = []

    @property
    def rank(self) -> int:
        return len(self._rows)

    def _reduce(self, row) -> list[int]:
        work = [int(v) for v in row]
        if len(work) != self.dim:
            raise ValueError(f"expected {self.dim} entries, got {len(work)}")
        for basis_row, pivot in zip(self._rows, self._pivots):
            if work[pivot] != 0:
                f_basis = basis_row[pivot]
                f_work = work[pivot]
                work = [w * f_basis - b * f_work for w, b in zip(work, basis_row)]
                work = _normalize(work)
        return work

    def contains(self, row) -> bool:
        """Exact: is the row in the span of the rows added so far?"""
        return all(v == 0 for v in self._reduce(row))

    def add(self, row) -> bool:
        """Add a row; returns True if it increased the rank."""
        reduced = self._reduce(row)
        pivot = next((i for i, v in enumerate(reduced) if v != 0), None)
        if pivot is None:
            return False
        insert_at = sum(1 for p in self._pivots if p < pivot)
        self._rows.insert(insert_at, reduced)
        self._pivots.insert(insert_at, pivot)
        return True


def float_span_residual(row: np.ndarray, basis_rows: np.ndarray) -> float:
    """Relative residual of ``row`` after projecting onto ``basis_rows``."""
    norm = float(np.linalg.norm(row))
    if norm == 0.0:
        return 0.0
    if basis_rows.size == 0:
        return 1.0
    q, _ = np.linalg.qr(basis_rows.T)
    residual = row - q @ (q.T @ row)
    return float(np.linalg.norm(residual)) / norm
