"""Deterministic per-trial seed derivation.

Trial seeds are derived from a 64-bit master seed with a fixed, published
hash so that transcripts are reproducible across runs, processes, and
reimplementations in other languages:

    seed(master, index) = first 8 bytes (big endian) of
        SHA-256(master as 8-byte big endian || index as 8-byte big endian)
"""

from __future__ import annotations

import hashlib

_U64 = 2**64


def derive_seed(master_seed: int, index: int) -> int:
    """Derive the uint64 seed for trial ``index`` under ``master_seed``."""
    if not 0 <= master_seed < _U64:
        raise ValueError(f"master_seed must be a 64-bit unsigned integer, got {master_seed}")
    if not 0 <= index < _U64:
        raise ValueError(f"index must be a 64-bit unsigned integer, got {index}")
    digest = hashlib.sha256(
        master_seed.to_bytes(8, "big") + index.to_bytes(8, "big")
    ).digest()
    return int.from_bytes(digest[:8], "big")
