"""Hot-path kernels with a compiled core and a NumPy fallback.

The Cython extension is preferred when importable; set ``SPINCTRL_KERNELS``
to ``numpy`` or ``cython`` to force a backend (``cython`` raises if the
extension is missing).
"""

import os

_requested = os.environ.get("SPINCTRL_KERNELS", "").strip().lower()

if _requested in ("", "cython"):
    try:
        from . import _cykernels as _impl

        BACKEND = "cython"
    except ImportError:
        if _requested == "cython":
            raise
        from . import _pykernels as _impl

        BACKEND = "numpy"
elif _requested == "numpy":
    from . import _pykernels as _impl

    BACKEND = "numpy"
else:
    raise ImportError(
        f"unknown SPINCTRL_KERNELS value {_requested!r}; use 'cython' or 'numpy'"
    )

expm = _impl.expm
chain_product = _impl.chain_product
piecewise_steps = _impl.piecewise_steps
piecewise_total = _impl.piecewise_total

__all__ = [
    "BACKEND",
    "expm",
    "chain_product",
    "piecewise_steps",
    "piecewise_total",
]
