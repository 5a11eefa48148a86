"""Online row sampling for lp subspace embedding.

Rows with bounded integer entries arrive one at a time; each is kept with
probability ``min(rho * sensitivity, 1)`` where the sensitivity is taken
against the rows retained so far (exactly 1 on span escape).  Kept rows
are stored with their probabilities so the reweighted estimator
``sum (1/p_i) |a_i . x|^p`` is unbiased for ``|A x|_p^p`` round by round.
The coin for each row is available before the next row is read.
"""

from __future__ import annotations

import math

import numpy as np
from sklearn.base import BaseEstimator

from dataclasses import dataclass

from .sensitivity import (
    WeightedRowSet,
    ridge_leverage_closed_form,
    sensitivity_by_ascent,
)
from .span import IntegerRowBasis, float_span_residual

_RIDGE_FLOOR = 1e-300
_SPAN_TOL = 1e-9


@dataclass(frozen=True)
class RowRecord:
    """Per-arrival transcript row."""

    index: int
    sensitivity: float
    probability: float
    coin: bool


def ridge_parameter(p: float, dim: int, n_upper: int, entry_bound: int) -> float:
    """Vanishing ridge ``(n * B)^(-((p + 1) d + p))``, floored for float64."""
    exponent = ((p + 1.0) * dim + p) * math.log(float(n_upper) * float(entry_bound))
    return max(math.exp(-exponent) if exponent < 690.0 else 0.0, _RIDGE_FLOOR)


def sampling_rate(
    epsilon: float, dim: int, n_upper: int, kappa_ol_bound: float, k1: float
) -> float:
    """``k1 * eps^-2 * (d ln(kappa/eps) + ln ln n)`` (second term floored at 0)."""
    loglog = max(0.0, math.log(max(math.log(max(n_upper, 2)), 1e-9)))
    return k1 * epsilon**-2 * (dim * math.log(kappa_ol_bound / epsilon) + loglog)


class OnlineRowSampler(BaseEstimator):
    """Streaming lp row sampler with irrevocable decisions.

    Parameters
    ----------
    dim : int
        Row dimension d.
    p : float, default=2.0
        Norm exponent (> 0).  p = 2 uses the exact ridge-leverage closed
        form; other p use a projected-gradient maximizer with a safety
        factor (overestimated sensitivities are legal, only storage pays).
    epsilon : float, default=0.25
        Target relative accuracy of the embedding.
    kappa_ol_bound : float, default=10.0
        Caller-supplied upper bound on the online condition number
        (largest singular value of the final matrix over the smallest
        nonzero singular value across prefixes), assumed known in advance.
    k1 : float, default=1.0
        Leading constant of the sampling rate.
    n_upper : int or None
        Upper bound on the stream length (needed for the ridge term and
        the rate); ``fit`` defaults it to the batch length.
    entry_bound : int, default=100
        Entries must be integers in [-entry_bound, entry_bound].
    span_test : {"exact", "tolerance"}, default="exact"
        Exact integer rank test, or float residual below 1e-9 relative.
    random_state : int, numpy Generator, or None
        Seed for the sampling coins.

    Attributes (after fitting)
    --------------------------
    rho_ : float
        Sampling rate in effect.
    ridge_ : float
        Ridge regularizer in effect.
    kept_ : WeightedRowSet
        Retained rows with probabilities and sensitivities.
    history_ : list of RowRecord
        One record per arrival.
    n_seen_ : int
        Number of rows processed.
    """

    def __init__(
        self,
        dim: int,
        p: float = 2.0,
        epsilon: float = 0.25,
        kappa_ol_bound: float = 10.0,
        k1: float = 1.0,
        n_upper: int | None = None,
        entry_bound: int = 100,
        span_test: str = "exact",
        random_state=None,
        maximizer_restarts: int = 20,
        safety_factor: float = 1.25,
    ):
        self.dim = dim
        self.p = p
        self.epsilon = epsilon
        self.kappa_ol_bound = kappa_ol_bound
        self.k1 = k1
        self.n_upper = n_upper
        self.entry_bound = entry_bound
        self.span_test = span_test
        self.random_state = random_state
        self.maximizer_restarts = maximizer_restarts
        self.safety_factor = safety_factor

    def _reset(self, n_upper: int | None = None) -> None:
        if self.dim < 1:
            raise ValueError(f"dim must be >= 1, got {self.dim}")
        if not self.p > 0.0:
            raise ValueError(f"p must be positive, got {self.p}")
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError(f"epsilon must be in (0, 1), got {self.epsilon}")
        if not self.kappa_ol_bound >= 1.0:
            raise ValueError(f"kappa_ol_bound must be >= 1, got {self.kappa_ol_bound}")
        if self.span_test not in ("exact", "tolerance"):
            raise ValueError(f"span_test must be 'exact' or 'tolerance', got {self.span_test}")
        n_eff = n_upper if n_upper is not None else self.n_upper
        if n_eff is None:
            raise ValueError("n_upper must be set (or inferred by fit) before streaming")
        self._n_eff = int(n_eff)
        self.ridge_ = ridge_parameter(self.p, self.dim, self._n_eff, self.entry_bound)
        self.rho_ = sampling_rate(
            self.epsilon, self.dim, self._n_eff, self.kappa_ol_bound, self.k1
        )
        self.kept_ = WeightedRowSet(dim=self.dim, p=self.p, rho=self.rho_, ridge=self.ridge_)
        self._basis = IntegerRowBasis(self.dim)
        self._gram = np.zeros((self.dim, self.dim))
        self._rng = (
            self.random_state
            if isinstance(self.random_state, np.random.Generator)
            else np.random.default_rng(self.random_state)
        )
        self.history_: list[RowRecord] = []
        self.n_seen_ = 0

    def _ensure_stream(self) -> None:
        if not hasattr(self, "rho_"):
            self._reset()

    def _validate_row(self, row) -> np.ndarray:
        arr = np.asarray(row, dtype=np.float64)
        if arr.shape != (self.dim,):
            raise ValueError(f"expected a row of dimension {self.dim}, got shape {arr.shape}")
        rounded = np.rint(arr)
        if not np.array_equal(rounded, arr):
            raise ValueError(f"entries must be integers, got {arr}")
        if np.abs(rounded).max(initial=0.0) > self.entry_bound:
            raise ValueError(
                f"entries must lie in [-{self.entry_bound}, {self.entry_bound}], got {arr}"
            )
        return rounded

    def _in_span(self, row: np.ndarray) -> bool:
        if len(self.kept_) == 0:
            return False
        if self.span_test == "exact":
            return self._basis.contains([int(v) for v in row])
        return float_span_residual(row, self.kept_.matrix()) <= _SPAN_TOL

    def _sensitivity(self, row: np.ndarray, in_span: bool) -> float:
        if not in_span:
            return 1.0
        if self.p == 2.0:
            value = ridge_leverage_closed_form(row, self._gram, self.ridge_)
        else:
            # Restart seed tied to the arrival index, so maximizer draws never
            # perturb the coin stream.
            value = self.safety_factor * sensitivity_by_ascent(
                row,
                self.kept_.matrix(),
                self.kept_.inv_probabilities(),
                self.ridge_,
                self.p,
                restarts=self.maximizer_restarts,
                seed=self.n_seen_,
            )
        return float(min(1.0, max(value, 1e-300)))

    def add_row(self, row) -> bool:
        """Process one arriving row; returns the coin (True if kept)."""
        self._ensure_stream()
        arr = self._validate_row(row)
        sens = self._sensitivity(arr, self._in_span(arr))
        prob = min(self.rho_ * sens, 1.0)
        coin = bool(self._rng.random() < prob)
        if coin:
            self.kept_.append(arr, prob, sens)
            self._basis.add([int(v) for v in arr])
            self._gram += np.outer(arr, arr) / prob
        self.history_.append(
            RowRecord(index=self.n_seen_, sensitivity=sens, probability=prob, coin=coin)
        )
        self.n_seen_ += 1
        return coin

    def partial_fit(self, X, y=None) -> "OnlineRowSampler":
        """Consume a batch of rows, continuing any existing stream."""
        self._ensure_stream()
        for row in np.atleast_2d(np.asarray(X)):
            self.add_row(row)
        return self

    def fit(self, X, y=None) -> "OnlineRowSampler":
        """Consume a fresh row stream from the beginning.

        If ``n_upper`` was not given it defaults to the batch length.
        """
        X = np.atleast_2d(np.asarray(X))
        self._reset(n_upper=self.n_upper if self.n_upper is not None else X.shape[0])
        for row in X:
            self.add_row(row)
        return self

    def weighted_rows(self) -> np.ndarray:
        """Kept rows scaled so plain lp norms realize the estimator."""
        self._ensure_stream()
        return self.kept_.weighted_matrix()
