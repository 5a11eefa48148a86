from .model import Hypergraph, Partition, cut_value
from .oracles import (
    IncrementalCutOracle,
    exists_strong_component,
    min_normalized_cut,
    min_normalized_cut_reference,
    strength,
    strength_reference,
)
from .sparsifier import EdgeRecord, HypergraphCutSparsifier, KeptEdge
from .verify import CutVerificationReport, SizeAuditReport, size_audit, verify_sparsifier
from .io import format_edge_stream, parse_edge_stream

__all__ = [
    "Hypergraph",
    "Partition",
    "cut_value",
    "min_normalized_cut",
    "min_normalized_cut_reference",
    "strength",
    "strength_reference",
    "exists_strong_component",
    "IncrementalCutOracle",
    "HypergraphCutSparsifier",
    "KeptEdge",
    "EdgeRecord",
    "verify_sparsifier",
    "CutVerificationReport",
    "size_audit",
    "SizeAuditReport",
    "parse_edge_stream",
    "format_edge_stream",
]
