"""Pure-Python fallback kernels.

Semantics (including floating-point operation order) match the compiled
core in ``_core.pyx`` exactly: both accumulate with IEEE doubles via the
platform libm, so results are bit-identical across backends.
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "pure"


def bll_sums(local_idx: np.ndarray, bases: np.ndarray, n_out: int, d: float) -> np.ndarray:
    """Accumulate bases[j] ** (-d) into out[local_idx[j]] in event order."""
    out = [0.0] * n_out
    exponent = -d
    for i, base in zip(local_idx.tolist(), bases.tolist()):
        out[i] += base ** exponent
    return np.asarray(out, dtype=np.float64)


def overlap_counts(query: np.ndarray, indptr: np.ndarray, members: np.ndarray, n_out: int) -> np.ndarray:
    """Count, per candidate, how many ids in ``query`` list that candidate.

    ``indptr``/``members`` form a CSR inverted index (id -> candidate rows).
    """
    out = [0] * n_out
    ptr = indptr.tolist()
    mem = members.tolist()
    for a in query.tolist():
        for p in range(ptr[a], ptr[a + 1]):
            out[mem[p]] += 1
    return np.asarray(out, dtype=np.int64)
