"""Backend selection for the stepping kernels.

The compiled extension is preferred; set ``DTQW_LAB_PURE=1`` to force the
numpy implementation (used by the benchmark and the backend-parity tests).
"""

from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("DTQW_LAB_PURE", "") not in ("", "0"):
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]
    except ImportError:
        _impl = _kernels_py

BACKEND: str = _impl.BACKEND
walk_steps = _impl.walk_steps
dirac_steps = _impl.dirac_steps

python_backend = _kernels_py


def compiled_backend():
    """Return the compiled kernel module, or ``None`` if it was not built."""
    try:
        from . import _kernels  # type: ignore[attr-defined]
    except ImportError:
        return None
    return _kernels
