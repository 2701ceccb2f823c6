"""Chunked enumeration of F_p^n used by scans and censuses.

Vectors are ordered by their integer code: coordinate 0 is the fastest
base-p digit, so code order is the lexicographic order read from the last
coordinate down.  Chunking keeps memory flat for grids up to ~2e7 points.
"""

from __future__ import annotations

import numpy as np

CHUNK = 1 << 16


def vector_chunks(p: int, n: int, chunk: int = CHUNK):
    """Yield (start_code, block) covering all p**n vectors in code order."""
    total = p**n
    for start in range(0, total, chunk):
        codes = np.arange(start, min(start + chunk, total), dtype=np.int64)
        block = np.empty((codes.size, n), dtype=np.int64)
        for c in range(n):
            block[:, c] = codes % p
            codes = codes // p
        yield start, block


def quad_values(gram: np.ndarray, modulus: int, block: np.ndarray) -> np.ndarray:
    """Q(v) for every row v of the block."""
    return np.einsum("ij,jk,ik->i", block, gram, block) % modulus
