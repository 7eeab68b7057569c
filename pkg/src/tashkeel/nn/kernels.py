"""LSTM time-loop kernels: compiled extension when built, numpy otherwise.

Set ``TASHKEEL_PURE_PYTHON=1`` to force the numpy path.
"""

import os

from . import _lstm_py

try:
    if os.environ.get("TASHKEEL_PURE_PYTHON"):
        raise ImportError("pure-python kernels requested")
    from . import _lstm_ext
except ImportError:
    _lstm_ext = None

BACKENDS = {"numpy": _lstm_py}
if _lstm_ext is not None:
    BACKENDS["cython"] = _lstm_ext

BACKEND = "cython" if _lstm_ext is not None else "numpy"


def use_backend(name: str):
    """Switch the process-wide kernel implementation."""
    global BACKEND
    if name not in BACKENDS:
        raise ValueError(f"backend {name!r} unavailable; have {sorted(BACKENDS)}")
    BACKEND = name


def lstm_forward(xproj, Wh):
    return BACKENDS[BACKEND].lstm_forward(xproj, Wh)


def lstm_backward(dH, Wh, G, C, Hs):
    return BACKENDS[BACKEND].lstm_backward(dH, Wh, G, C, Hs)
