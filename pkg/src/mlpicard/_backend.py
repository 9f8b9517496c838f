"""Select the stream kernel implementation at import time.

The compiled extension is preferred.  Setting ``MLPICARD_PURE_PYTHON=1``
forces the numpy implementation; both produce bitwise identical streams.
"""
import os

from . import _stream_py

kernels = _stream_py
NAME = "numpy"

if os.environ.get("MLPICARD_PURE_PYTHON", "").strip() not in ("1", "true", "yes"):
    try:
        from . import _stream_ext
    except ImportError:
        pass
    else:
        kernels = _stream_ext
        NAME = "compiled"
