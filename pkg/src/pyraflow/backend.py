"""Kernel backend selection.

By default the compiled extension is used when importable, with the
pure-numpy module as fallback. ``PYRAFLOW_BACKEND=python`` or ``=cython``
forces one side (the latter raises if the extension is missing). Both
backends produce bit-identical results; see tests/test_backends.py.
"""

import os

from . import _kernels_py

_choice = os.environ.get("PYRAFLOW_BACKEND", "auto").lower()

if _choice == "python":
    kernels = _kernels_py
elif _choice == "cython":
    from . import _kernels_cy as kernels  # type: ignore[no-redef]
elif _choice == "auto":
    try:
        from . import _kernels_cy as kernels  # type: ignore[no-redef]
    except ImportError:
        kernels = _kernels_py
else:
    raise RuntimeError(f"unknown PYRAFLOW_BACKEND value: {_choice!r}")

BACKEND = kernels.NAME
