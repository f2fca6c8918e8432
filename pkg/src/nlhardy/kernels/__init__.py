"""Kernel backend selection.

The compiled Cython core is preferred; the pure-NumPy fallback is selected
automatically when the extension is unavailable, or explicitly by setting
the environment variable ``NLHARDY_PURE=1``.  Both backends implement the
same reduction in the same accumulation order.
"""

from __future__ import annotations

import os

from . import _shell_py

_force_pure = os.environ.get("NLHARDY_PURE", "").strip().lower() in ("1", "true", "yes")

if not _force_pure:
    try:
        from . import _shellcore as _impl

        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _shell_py
        BACKEND = "python"
else:
    _impl = _shell_py
    BACKEND = "python"

shell_reduce_indicator = _impl.shell_reduce_indicator
shell_reduce_magnetic = _impl.shell_reduce_magnetic
shell_reduce_gagliardo = _impl.shell_reduce_gagliardo


def available_backends() -> dict:
    """Map backend name -> module, for equivalence tests and benchmarks."""
    out = {"python": _shell_py}
    try:
        from . import _shellcore

        out["cython"] = _shellcore
    except ImportError:
        pass
    return out
