"""Hot-loop kernels with backend selection at import time.

The compiled Cython extension is preferred when it has been built; otherwise
the vectorised numpy implementation is used.  Set ``MULTIPHON_PURE_PYTHON=1``
to force the fallback (useful for the backend benchmark and for debugging).
"""

import os

if os.environ.get("MULTIPHON_PURE_PYTHON"):
    from multiphon.kernels import _numpy as _impl

    BACKEND = "python"
else:
    try:
        from multiphon.kernels import _native as _impl  # type: ignore[no-redef]

        BACKEND = "native"
    except ImportError:
        from multiphon.kernels import _numpy as _impl  # type: ignore[no-redef]

        BACKEND = "python"

harmonic_deviation_scan = _impl.harmonic_deviation_scan
gcd_deviation_scan = _impl.gcd_deviation_scan

__all__ = ["BACKEND", "harmonic_deviation_scan", "gcd_deviation_scan"]
