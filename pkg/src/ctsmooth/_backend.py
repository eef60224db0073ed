"""Kernel backend selection.

The compiled ``_ckernels`` module is used when it imports; otherwise the
numpy implementation in ``_kernels_py``.  Setting ``CTSMOOTH_PURE_PYTHON=1``
forces the fallback.
"""

import os

from . import _kernels_py

kernels = _kernels_py
name = "python"

if not os.environ.get("CTSMOOTH_PURE_PYTHON"):
    try:
        from . import _ckernels
    except ImportError:
        pass
    else:
        kernels = _ckernels
        name = "cython"

CRAMER_V = _kernels_py.CRAMER_V
SYMMETRY_PHI = _kernels_py.SYMMETRY_PHI
