"""Exhaustive cut verification and sparsifier size audits."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import SizeLimitError
from .enumeration import cut_vector, partition_table
from .model import Hypergraph
from .sparsifier import KeptEdge

_RATIO_TOL = 1e-9


@dataclass
class CutVerificationReport:
    """Worst-case distortion of the sparsifier over an exhaustive cut family."""

    epsilon: float
    cuts: str  # "all" or "two"
    n_partitions: int
    worst_ratio_low: float
    worst_ratio_high: float
    violations: list[dict] = field(default_factory=list)
    passed: bool = True

    def to_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "cuts": self.cuts,
            "n_partitions": self.n_partitions,
            "worst_ratio_low": self.worst_ratio_low,
            "worst_ratio_high": self.worst_ratio_high,
            "violations": self.violations,
            "passed": self.passed,
        }


def verify_sparsifier(
    original: Hypergraph,
    sparse: Hypergraph,
    epsilon: float,
    cuts: str = "all",
    n_max_exact: int = 12,
    max_violations: int = 20,
) -> CutVerificationReport:
    """Check every cut of the requested family against the (1 +- eps) band.

    ``cuts="all"`` enumerates every k-cut (k in [2, n]); ``cuts="two"``
    restricts to 2-cuts.  Ratios are sparsifier cut over original cut;
    partitions where the original cut is zero must also be zero in the
    sparsifier (guaranteed when the sparsifier is a sub-hypergraph).
    """
    if original.n != sparse.n:
        raise ValueError("hypergraphs must share the vertex set")
    if original.n > n_max_exact:
        raise SizeLimitError(
            f"cut enumeration limited to {n_max_exact} vertices, got {original.n}"
        )
    if cuts not in ("all", "two"):
        raise ValueError(f"cuts must be 'all' or 'two', got {cuts!r}")

    full = (1 << original.n) - 1
    labels, km1 = partition_table(original.n)
    cut_orig = cut_vector(original.edge_masks(), list(original.weights), full)
    cut_sparse = cut_vector(sparse.edge_masks(), list(sparse.weights), full)
    if cuts == "two":
        sel = km1 == 1
        labels, cut_orig, cut_sparse = labels[sel], cut_orig[sel], cut_sparse[sel]

    report = CutVerificationReport(
        epsilon=epsilon,
        cuts=cuts,
        n_partitions=int(labels.shape[0]),
        worst_ratio_low=1.0,
        worst_ratio_high=1.0,
    )
    pos = cut_orig > 0.0
    bad_zero = (~pos) & (cut_sparse > 0.0)
    for i in np.flatnonzero(bad_zero)[:max_violations]:
        report.violations.append(
            {"partition": [int(v) for v in labels[i]], "ratio": math.inf}
        )
    if pos.any():
        ratios = cut_sparse[pos] / cut_orig[pos]
        report.worst_ratio_low = float(ratios.min())
        report.worst_ratio_high = float(ratios.max())
        bad = (ratios < 1.0 - epsilon - _RATIO_TOL) | (ratios > 1.0 + epsilon + _RATIO_TOL)
        pos_idx = np.flatnonzero(pos)
        for j in np.flatnonzero(bad)[:max_violations]:
            report.violations.append(
                {
                    "partition": [int(v) for v in labels[pos_idx[j]]],
                    "ratio": float(ratios[j]),
                }
            )
    report.passed = not report.violations
    return report


@dataclass
class SizeAuditReport:
    """Shape checks on the sparsifier's weight and edge count.

    Three audits: total kept weight against ``(1 + eps) * n * |E| / 2``;
    the cumulative weight of edges kept with insertion strength <= kappa
    against ``n * kappa * (1 + 1/rho)`` at every recorded strength value;
    and the kept count against ``c_size * rho * n * ln(kappa* + 1)``.
    Failures are reported, never raised.
    """

    n_kept: int
    total_weight: float
    weight_bound: float
    weight_ok: bool
    kappa_star: float
    layer_checks: list[dict]
    layers_ok: bool
    count_bound: float
    count_ok: bool

    @property
    def passed(self) -> bool:
        return self.weight_ok and self.layers_ok and self.count_ok

    def to_dict(self) -> dict:
        return {
            "n_kept": self.n_kept,
            "total_weight": self.total_weight,
            "weight_bound": self.weight_bound,
            "weight_ok": self.weight_ok,
            "kappa_star": self.kappa_star,
            "layer_checks": self.layer_checks,
            "layers_ok": self.layers_ok,
            "count_bound": self.count_bound,
            "count_ok": self.count_ok,
            "passed": self.passed,
        }


def size_audit(
    kept: list[KeptEdge],
    n: int,
    m_total: int,
    epsilon: float,
    rho: float,
    c_size: float = 4.0,
) -> SizeAuditReport:
    """Audit a finished sparsifier against its size-shape bounds.

    The strength-layer bound is monotone in kappa while the layer weight is
    a step function that only jumps at recorded insertion strengths, so
    checking at each distinct strength covers all kappa.
    """
    total_weight = sum(k.weight for k in kept)
    weight_bound = (1.0 + epsilon) * n * m_total / 2.0
    kappa_star = (1.0 + epsilon) * rho * n * m_total / 2.0

    strengths = sorted({k.strength for k in kept})
    layer_checks = []
    layers_ok = True
    for s in strengths:
        w = sum(k.weight for k in kept if k.strength <= s)
        bound = n * s * (1.0 + 1.0 / rho)
        ok = w <= bound * (1.0 + 1e-9)
        layers_ok &= ok
        layer_checks.append({"kappa": s, "weight": w, "bound": bound, "ok": ok})

    count_bound = c_size * rho * n * math.log(kappa_star + 1.0)
    return SizeAuditReport(
        n_kept=len(kept),
        total_weight=total_weight,
        weight_bound=weight_bound,
        weight_ok=total_weight <= weight_bound * (1.0 + 1e-9),
        kappa_star=kappa_star,
        layer_checks=layer_checks,
        layers_ok=layers_ok,
        count_bound=count_bound,
        count_ok=len(kept) <= count_bound * (1.0 + 1e-9),
    )
