"""Kernel selection: the compiled extension when it imports, else pure Python.

Setting TMDTOCHAIN_PURE_PYTHON=1 forces the fallback as the default.
"""
import os

from . import _pykernels as python

try:
    from . import _ckernels as compiled
except ImportError:  # extension not built
    compiled = None

if compiled is not None and not os.environ.get("TMDTOCHAIN_PURE_PYTHON"):
    kernels = compiled
else:
    kernels = python
BACKEND = kernels.NAME


def available():
    """Kernel modules usable in this process, compiled first."""
    return [k for k in (compiled, python) if k is not None]
