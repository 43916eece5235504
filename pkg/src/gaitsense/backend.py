"""Select the compiled kernel core, falling back to pure numpy.

Set ``GAITSENSE_PURE=1`` to force the fallback (used by the backend
benchmark and the cross-backend tests).
"""

import os

if os.environ.get("GAITSENSE_PURE") == "1":
    from . import _kernels_py as kernels
else:
    try:
        from . import _kernels as kernels  # type: ignore[no-redef]
    except ImportError:
        from . import _kernels_py as kernels  # type: ignore[no-redef]

BACKEND_NAME = kernels.BACKEND_NAME
natural_cubic_eval = kernels.natural_cubic_eval
extrema_indices = kernels.extrema_indices
