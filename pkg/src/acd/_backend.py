"""Pick the coordinate-descent kernels: compiled if importable, else pure Python.

Set ``ACD_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _cd_py

if os.environ.get("ACD_PURE_PYTHON", "").strip() not in ("", "0"):
    kernels = _cd_py
    BACKEND = "python"
else:
    try:
        from . import _cd_fast as kernels
        BACKEND = "cython"
    except ImportError:  # extension not built
        kernels = _cd_py
        BACKEND = "python"

python_kernels = _cd_py
