"""Scoring kernel backend selection.

The compiled Cython core is preferred when its extension module built;
otherwise the pure-Python fallback is used. Both produce bit-identical
results. Set ``BLLREC_PURE_PYTHON=1`` to force the fallback.
"""

from __future__ import annotations

import os

from . import _pure


def _load_compiled():
    try:
        from . import _core
    except ImportError:
        return None
    return _core


_compiled = _load_compiled()

if _compiled is not None and os.environ.get("BLLREC_PURE_PYTHON", "") not in ("1", "true", "yes"):
    _active = _compiled
    BACKEND_NAME = "compiled"
else:
    _active = _pure
    BACKEND_NAME = "pure"

bll_sums = _active.bll_sums
overlap_counts = _active.overlap_counts


def available_backends() -> dict[str, object]:
    """Mapping of backend name to kernel module, for parity tests and benchmarks."""
    backends: dict[str, object] = {"pure": _pure}
    if _compiled is not None:
        backends["compiled"] = _compiled
    return backends
