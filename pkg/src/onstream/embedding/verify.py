"""Embedding verification and sensitivity-sum audits.

For p = 2 the distortion of the kept row set is checked exactly through
the generalized eigenvalues of the pair (kept energy matrix, full energy
matrix) restricted to the row span of the input: a valid embedding has
every eigenvalue inside [1 - eps, 1 + eps].  For general p a
deterministic direction net over the span is swept and net-level
distortion is reported (the extension from net points to all directions
is not re-derived numerically; treat net mode as a strong smoke check).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from ..errors import SizeLimitError
from .sampler import RowRecord
from .sensitivity import WeightedRowSet

_RCOND = 1e-12
_PASS_TOL = 1e-9


def online_condition_number(rows: np.ndarray) -> tuple[float, float, float]:
    """(kappa_ol, sigma_max, min prefix sigma_min) of a row stream.

    ``kappa_ol`` is the largest singular value of the final matrix over the
    smallest nonzero singular value across all prefixes, per arrival order.
    """
    rows = np.atleast_2d(np.asarray(rows, dtype=np.float64))
    n, d = rows.shape
    gram = np.zeros((d, d))
    min_nonzero = math.inf
    for i in range(n):
        gram += np.outer(rows[i], rows[i])
        eigs = np.linalg.eigvalsh(gram)
        top = eigs[-1]
        if top <= 0.0:
            continue
        nonzero = eigs[eigs > top * _RCOND]
        if nonzero.size:
            min_nonzero = min(min_nonzero, math.sqrt(float(nonzero[0])))
    sigma_max = math.sqrt(float(np.linalg.eigvalsh(gram)[-1])) if n else 0.0
    if not math.isfinite(min_nonzero) or min_nonzero <= 0.0:
        raise ValueError("stream has no nonzero singular values")
    return sigma_max / min_nonzero, sigma_max, min_nonzero


@dataclass
class EmbeddingReport:
    """Distortion summary of a kept row set against the full stream."""

    mode: str  # "pencil" or "net"
    epsilon: float
    n_directions: int
    worst_low: float
    worst_high: float
    passed: bool
    kappa_ol: float
    sigma_max: float
    sigma_min: float

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "epsilon": self.epsilon,
            "n_directions": self.n_directions,
            "worst_low": self.worst_low,
            "worst_high": self.worst_high,
            "passed": self.passed,
            "kappa_ol": self.kappa_ol,
            "sigma_max": self.sigma_max,
            "sigma_min": self.sigma_min,
        }


def _span_basis(rows: np.ndarray) -> np.ndarray:
    _, s, vt = np.linalg.svd(rows, full_matrices=False)
    rank = int(np.sum(s > (s[0] if s.size else 0.0) * _RCOND))
    if rank == 0:
        raise ValueError("input matrix is zero")
    return vt[:rank]


def _net_directions(rank: int, resolution: float, max_points: int) -> np.ndarray:
    """Deterministic direction net: grid points on the unit cube surface."""
    steps = int(math.ceil(2.0 / resolution)) + 1
    if rank == 1:
        return np.array([[1.0]])
    est = 2 * rank * steps ** (rank - 1)
    if est > max_points:
        raise SizeLimitError(
            f"net would need about {est} points (> {max_points}); "
            "reduce the rank or coarsen the resolution"
        )
    axes = [np.linspace(-1.0, 1.0, steps) for _ in range(rank - 1)]
    face = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, rank - 1)
    points = []
    for axis in range(rank):
        for sign in (-1.0, 1.0):
            block = np.empty((face.shape[0], rank))
            block[:, axis] = sign
            other = [j for j in range(rank) if j != axis]
            block[:, other] = face
            points.append(block)
    pts = np.vstack(points)
    return pts[np.linalg.norm(pts, axis=1) > 0.0]


def verify_embedding(
    rows: np.ndarray,
    kept: WeightedRowSet,
    epsilon: float,
    max_net_points: int = 2_000_000,
) -> EmbeddingReport:
    """Check that the kept set embeds the full stream within (1 +- eps).

    Uses the exact eigenvalue pencil for p = 2 (any dimension), and a
    deterministic net at resolution ``epsilon / kappa_ol`` over the span
    for other p (small ranks only; raises ``SizeLimitError`` beyond
    ``max_net_points`` directions).
    """
    rows = np.atleast_2d(np.asarray(rows, dtype=np.float64))
    kappa_ol, sigma_max, sigma_min = online_condition_number(rows)
    q = _span_basis(rows)
    rank = q.shape[0]

    if kept.p == 2.0:
        g_full = rows.T @ rows
        b_full = q @ g_full @ q.T
        b_kept = q @ kept.gram() @ q.T
        eigs = scipy.linalg.eigh(b_kept, b_full, eigvals_only=True)
        worst_low = float(eigs[0])
        worst_high = float(eigs[-1])
        mode = "pencil"
        n_directions = rank
    else:
        resolution = epsilon / kappa_ol
        directions = _net_directions(rank, resolution, max_net_points)
        x = directions @ q  # (N, d); the ratio is scale invariant
        full_proj = np.abs(x @ rows.T) ** kept.p
        full_vals = full_proj.sum(axis=1)
        kept_m = kept.matrix()
        inv_p = kept.inv_probabilities()
        kept_vals = (np.abs(x @ kept_m.T) ** kept.p) @ inv_p
        pos = full_vals > 0.0
        ratios = kept_vals[pos] / full_vals[pos]
        worst_low = float(ratios.min())
        worst_high = float(ratios.max())
        mode = "net"
        n_directions = int(pos.sum())

    passed = (worst_low >= 1.0 - epsilon - _PASS_TOL) and (
        worst_high <= 1.0 + epsilon + _PASS_TOL
    )
    return EmbeddingReport(
        mode=mode,
        epsilon=epsilon,
        n_directions=n_directions,
        worst_low=worst_low,
        worst_high=worst_high,
        passed=passed,
        kappa_ol=kappa_ol,
        sigma_max=sigma_max,
        sigma_min=sigma_min,
    )


@dataclass
class SensitivityAuditReport:
    """Shape checks on the sensitivity transcript of one run."""

    sensitivity_sum: float
    sum_bound: float
    sum_ok: bool
    n_kept: int
    kept_bound: float
    kept_ok: bool
    kappa_ol: float

    @property
    def passed(self) -> bool:
        return self.sum_ok and self.kept_ok

    def to_dict(self) -> dict:
        return {
            "sensitivity_sum": self.sensitivity_sum,
            "sum_bound": self.sum_bound,
            "sum_ok": self.sum_ok,
            "n_kept": self.n_kept,
            "kept_bound": self.kept_bound,
            "kept_ok": self.kept_ok,
            "kappa_ol": self.kappa_ol,
            "passed": self.passed,
        }


def sensitivity_sum_audit(
    rows: np.ndarray,
    history: list[RowRecord],
    rho: float,
    p: float,
    c_audit: float = 4.0,
) -> SensitivityAuditReport:
    """Audit ``S = sum of sensitivities`` and the kept count of one run.

    Checks ``S <= c_audit * (d ln(n kappa_ol))^max(1, p/2)`` with the exact
    online condition number recomputed from the stream, and
    ``kept <= 2 * rho * S``.
    """
    rows = np.atleast_2d(np.asarray(rows, dtype=np.float64))
    n, d = rows.shape
    kappa_ol, _, _ = online_condition_number(rows)
    s_sum = float(sum(r.sensitivity for r in history))
    n_kept = sum(1 for r in history if r.coin)
    sum_bound = c_audit * (d * math.log(n * kappa_ol)) ** max(1.0, p / 2.0)
    kept_bound = 2.0 * rho * s_sum
    return SensitivityAuditReport(
        sensitivity_sum=s_sum,
        sum_bound=sum_bound,
        sum_ok=s_sum <= sum_bound,
        n_kept=n_kept,
        kept_bound=kept_bound,
        kept_ok=n_kept <= kept_bound,
        kappa_ol=kappa_ol,
    )
