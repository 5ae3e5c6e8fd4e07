"""Select the transition kernel backend at import time.

The compiled extension is used when it was built; set
``PDDLSIM_PURE_PYTHON=1`` to force the pure-Python fallback.
"""

from __future__ import annotations

import os

if os.environ.get("PDDLSIM_PURE_PYTHON", "").strip() not in ("", "0"):
    from ._kernels_py import ActionTable, count_unsatisfied

    BACKEND = "python"
else:
    try:
        from ._kernels import ActionTable, count_unsatisfied

        BACKEND = "cython"
    except ImportError:
        from ._kernels_py import ActionTable, count_unsatisfied

        BACKEND = "python"

__all__ = ["ActionTable", "count_unsatisfied", "BACKEND"]
