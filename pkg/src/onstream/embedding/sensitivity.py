"""Online sensitivities of rows against a kept, reweighted row set.

The sensitivity of a new row measures its largest possible share of the
ridge-regularized lp energy of the retained rows, maximized over
directions in their span.  A row outside the span gets sensitivity 1
exactly.  For p = 2 there is a closed form through the ridge-regularized
gram matrix; for other p a projected-gradient maximizer with random
restarts produces a certified overestimate (overestimates are safe for
the sampling rule, they only cost storage).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .span import IntegerRowBasis

_EIG_RCOND = 1e-12


@dataclass
class WeightedRowSet:
    """Rows kept by the online sampler, with probabilities and parameters.

    The realized estimator is ``sum_kept (1 / p_i) * |a_i . x|^p``; rows are
    stored raw together with their sampling probabilities so this holds for
    every p (a pre-scaled matrix with rows ``p_i^(-1/p) a_i`` realizes the
    same functional for callers that want a plain matrix).
    """

    dim: int
    p: float
    rho: float
    ridge: float
    rows: list[np.ndarray] = field(default_factory=list)
    probabilities: list[float] = field(default_factory=list)
    sensitivities: list[float] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.rows)

    def append(self, row: np.ndarray, probability: float, sensitivity: float) -> None:
        if not 0.0 < probability <= 1.0:
            raise ValueError(f"probability must be in (0, 1], got {probability}")
        if not 0.0 < sensitivity <= 1.0:
            raise ValueError(f"sensitivity must be in (0, 1], got {sensitivity}")
        self.rows.append(np.asarray(row, dtype=np.float64))
        self.probabilities.append(probability)
        self.sensitivities.append(sensitivity)

    def matrix(self) -> np.ndarray:
        if not self.rows:
            return np.zeros((0, self.dim))
        return np.vstack(self.rows)

    def inv_probabilities(self) -> np.ndarray:
        return 1.0 / np.asarray(self.probabilities, dtype=np.float64)

    def weighted_matrix(self) -> np.ndarray:
        """Rows scaled by ``p_i^(-1/p)`` so plain lp norms match the estimator."""
        m = self.matrix()
        if len(self.rows) == 0:
            return m
        return m * self.inv_probabilities()[:, None] ** (1.0 / self.p)

    def norm_p_power(self, x: np.ndarray) -> float:
        """``sum_kept (1 / p_i) * |a_i . x|^p`` for one direction."""
        if not self.rows:
            return 0.0
        proj = self.matrix() @ np.asarray(x, dtype=np.float64)
        return float(np.sum(self.inv_probabilities() * np.abs(proj) ** self.p))

    def gram(self) -> np.ndarray:
        """``sum_kept (1 / p_i) * a_i a_i^T`` (the p = 2 energy matrix)."""
        g = np.zeros((self.dim, self.dim))
        for row, prob in zip(self.rows, self.probabilities):
            g += np.outer(row, row) / prob
        return g


def ridge_leverage_closed_form(a: np.ndarray, gram: np.ndarray, ridge: float) -> float:
    """``a^T (G + ridge I)^-1 a`` restricted to the range of G.

    Components of ``a`` in G's (numerically) null space are discarded: the
    caller certifies span membership separately, so any such mass is float
    noise, and keeping it would divide by the vanishing ridge.
    """
    if ridge <= 0.0:
        raise ValueError(f"ridge must be positive, got {ridge}")
    w, v = np.linalg.eigh(gram)
    coeff = v.T @ np.asarray(a, dtype=np.float64)
    significant = w > max(w[-1], 0.0) * _EIG_RCOND
    if not significant.any():
        raise ValueError("gram matrix has no significant eigenvalues")
    return float(np.sum(coeff[significant] ** 2 / (w[significant] + ridge)))


def _objective(y, q, a_span, m_span, inv_probs, ridge, p):
    x = q.T @ y
    num = abs(float(a_span @ y)) ** p
    den = float(np.sum(inv_probs * np.abs(m_span @ y) ** p)) + ridge * float(
        np.sum(np.abs(x) ** p)
    )
    return num / den if den > 0.0 else 0.0


def _gradient(y, q, a_span, m_span, inv_probs, ridge, p):
    x = q.T @ y
    s = float(a_span @ y)
    num = abs(s) ** p
    proj = m_span @ y
    den = float(np.sum(inv_probs * np.abs(proj) ** p)) + ridge * float(
        np.sum(np.abs(x) ** p)
    )
    if den <= 0.0 or s == 0.0:
        return None, 0.0
    dnum = p * abs(s) ** (p - 1) * math.copysign(1.0, s) * a_span
    dden = p * (inv_probs * np.abs(proj) ** (p - 1) * np.sign(proj)) @ m_span
    dden = dden + ridge * p * (q @ (np.abs(x) ** (p - 1) * np.sign(x)))
    grad = (dnum * den - num * dden) / den**2
    return grad, num / den


def _line_search_quadratic(y, g, a_span, b_mat):
    """Exact maximizer of ``(a . (y + t g))^2 / ((y + t g)^T B (y + t g))``.

    The derivative factors into ``(a0 + a1 t)`` (the numerator's zero, a
    minimum) times a bracket that is linear in t, so the interior maximum
    is a single closed-form candidate.
    """
    a0 = float(a_span @ y)
    a1 = float(a_span @ g)
    bg = b_mat @ g
    b0 = float(y @ (b_mat @ y))
    b1 = float(y @ bg)
    b2 = float(g @ bg)
    slope = a1 * b1 - a0 * b2
    intercept = a1 * b0 - a0 * b1
    candidates = [0.0]
    if abs(slope) > 1e-300:
        candidates.append(-intercept / slope)
    best_t, best_val = 0.0, -math.inf
    for t in candidates:
        if not math.isfinite(t):
            continue
        yy = y + t * g
        den = float(yy @ (b_mat @ yy))
        if den <= 0.0:
            continue
        val = float(a_span @ yy) ** 2 / den
        if val > best_val:
            best_t, best_val = t, val
    return best_t


def _neg_log_objective(y, q, a_span, m_span, inv_probs, ridge, p):
    # Scale-invariant log of the ratio; used by the quasi-Newton polish.
    num = float(a_span @ y)
    if abs(num) < 1e-300:
        return 1e30, np.zeros_like(y)
    x = q.T @ y
    proj = m_span @ y
    den = float(np.sum(inv_probs * np.abs(proj) ** p)) + ridge * float(
        np.sum(np.abs(x) ** p)
    )
    if den <= 0.0:
        return 1e30, np.zeros_like(y)
    dnum = p * a_span / num
    dden = (
        p * (inv_probs * np.abs(proj) ** (p - 1) * np.sign(proj)) @ m_span
        + ridge * p * (q @ (np.abs(x) ** (p - 1) * np.sign(x)))
    ) / den
    return -(p * math.log(abs(num)) - math.log(den)), -(dnum - dden)


def sensitivity_by_ascent(
    a: np.ndarray,
    rows: np.ndarray,
    inv_probs: np.ndarray,
    ridge: float,
    p: float,
    restarts: int = 20,
    iters: int = 60,
    seed: int | None = None,
    warm_starts: list[np.ndarray] | None = None,
    tol: float = 1e-12,
) -> float:
    """Numerically maximize the sensitivity ratio over the span of ``rows``.

    Projected gradient ascent on the unit sphere of the span (exact line
    search for p = 2, backtracking otherwise) from random restarts and
    optional warm starts, followed by a quasi-Newton polish of the
    scale-invariant log ratio.  First-order ascent alone stalls on
    ill-conditioned instances; the polish is what certifies tight relative
    agreement with the p = 2 closed form.
    """
    from scipy.optimize import minimize

    rows = np.atleast_2d(np.asarray(rows, dtype=np.float64))
    a = np.asarray(a, dtype=np.float64)
    _, s, vt = np.linalg.svd(rows, full_matrices=False)
    rank = int(np.sum(s > (s[0] if s.size else 0.0) * _EIG_RCOND))
    if rank == 0:
        raise ValueError("kept row set is empty or all-zero; sensitivity is 1 by definition")
    q = vt[:rank]  # orthonormal basis of the row span, shape (r, d)
    a_span = q @ a
    m_span = rows @ q.T
    rng = np.random.default_rng(seed)

    b_mat = None
    if p == 2.0:
        b_mat = (m_span.T * inv_probs) @ m_span + ridge * np.eye(rank)

    starts: list[np.ndarray] = []
    if warm_starts:
        starts.extend(np.asarray(w, dtype=np.float64) for w in warm_starts)
    norm_a = np.linalg.norm(a_span)
    if norm_a > 0.0:
        starts.append(a_span / norm_a)
    for _ in range(restarts):
        y = rng.standard_normal(rank)
        starts.append(y / np.linalg.norm(y))

    best = 0.0
    for y in starts:
        nrm = np.linalg.norm(y)
        if nrm == 0.0:
            continue
        y = y / nrm
        val = _objective(y, q, a_span, m_span, inv_probs, ridge, p)
        eta = 1.0
        for _ in range(iters):
            grad, val = _gradient(y, q, a_span, m_span, inv_probs, ridge, p)
            if grad is None:
                break
            if p == 2.0:
                t = _line_search_quadratic(y, grad, a_span, b_mat)
                y_new = y + t * grad
                nrm = np.linalg.norm(y_new)
                if nrm == 0.0:
                    break
                y_new /= nrm
                new_val = _objective(y_new, q, a_span, m_span, inv_probs, ridge, p)
                if new_val <= val * (1.0 + tol):
                    y = y_new
                    val = max(val, new_val)
                    break
                y, val = y_new, new_val
            else:
                improved = False
                while eta > 1e-18:
                    y_new = y + eta * grad
                    nrm = np.linalg.norm(y_new)
                    if nrm > 0.0:
                        y_new = y_new / nrm
                        new_val = _objective(y_new, q, a_span, m_span, inv_probs, ridge, p)
                        if new_val > val:
                            y, val = y_new, new_val
                            improved = True
                            eta *= 1.5
                            break
                    eta *= 0.5
                if not improved:
                    break
        best = max(best, val)
        result = minimize(
            _neg_log_objective,
            y,
            args=(q, a_span, m_span, inv_probs, ridge, p),
            jac=True,
            method="L-BFGS-B",
            options={"maxiter": 300, "ftol": 1e-16, "gtol": 1e-14},
        )
        if math.isfinite(result.fun) and result.fun < 700.0:
            best = max(best, math.exp(-result.fun))
    return best


def online_sensitivity(
    a: np.ndarray,
    kept: WeightedRowSet,
    in_span: bool | None = None,
    seed: int | None = None,
    restarts: int = 20,
    safety_factor: float = 1.25,
) -> float:
    """Sensitivity of a new row against the kept set, in (0, 1].

    Returns exactly 1 when the row is outside the span of the kept rows
    (decided exactly over the integers unless ``in_span`` is supplied).
    Otherwise: the ridge-leverage closed form for p = 2, or the numerical
    maximizer scaled by ``safety_factor`` for other p, clipped to (0, 1].
    """
    a = np.asarray(a, dtype=np.float64)
    if a.shape != (kept.dim,):
        raise ValueError(f"expected a row of dimension {kept.dim}, got shape {a.shape}")
    if kept.ridge <= 0.0:
        raise ValueError(f"ridge must be positive, got {kept.ridge}")
    if len(kept) == 0:
        return 1.0
    if in_span is None:
        basis = IntegerRowBasis(kept.dim)
        for row in kept.rows:
            basis.add([int(round(v)) for v in row])
        in_span = basis.contains([int(round(v)) for v in a])
    if not in_span:
        return 1.0
    if kept.p == 2.0:
        value = ridge_leverage_closed_form(a, kept.gram(), kept.ridge)
    else:
        value = safety_factor * sensitivity_by_ascent(
            a,
            kept.matrix(),
            kept.inv_probabilities(),
            kept.ridge,
            kept.p,
            restarts=restarts,
            seed=seed,
        )
    return float(min(1.0, max(value, 1e-300)))
