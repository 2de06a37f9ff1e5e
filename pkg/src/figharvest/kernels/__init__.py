"""Pixel-level kernels with a compiled fast path and a pure fallback.

The compiled extension is used when available. Set FIGHARVEST_PURE=1 to
force the pure implementation (useful for debugging and benchmarks).
"""

import os

if os.environ.get("FIGHARVEST_PURE") == "1":
    from figharvest.kernels._ccl_py import label_components

    BACKEND = "pure"
else:
    try:
        from figharvest.kernels._ccl import label_components

        BACKEND = "compiled"
    except ImportError:
        from figharvest.kernels._ccl_py import label_components

        BACKEND = "pure"

__all__ = ["label_components", "BACKEND"]
