"""Selects the consensus kernel implementation at import time.

The native extension is preferred when built; set ROCKLOC_KERNELS to
"python" or "native" to force a choice (forcing "native" on a build
without the extension raises ImportError rather than silently falling
back).
"""

from __future__ import annotations

import os


def _load():
    choice = os.environ.get("ROCKLOC_KERNELS", "").strip().lower()
    if choice in ("python", "fallback"):
        from . import _consensus_py

        return _consensus_py
    if choice in ("native", "compiled"):
        from . import _consensus

        return _consensus
    if choice:
        raise ValueError(
            f"ROCKLOC_KERNELS={choice!r}: expected 'python' or 'native'"
        )
    try:
        from . import _consensus

        return _consensus
    except ImportError:
        from . import _consensus_py

        return _consensus_py


kernels = _load()


def backend_name() -> str:
    return kernels.BACKEND
