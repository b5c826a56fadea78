"""Backend selection for the sparse polynomial kernels.

The compiled ``_ckernels`` extension is used when it was built; otherwise
the pure-Python ``_pykernels`` module is used.  Set ``CONSLAW_PURE_PYTHON=1``
to force the fallback.
"""

import os

from . import _pykernels

if os.environ.get("CONSLAW_PURE_PYTHON", "") not in ("", "0"):
    _impl = _pykernels
else:
    try:
        from . import _ckernels as _impl
    except ImportError:
        _impl = _pykernels

BACKEND = _impl.BACKEND

mono_mul = _impl.mono_mul
poly_mul = _impl.poly_mul
poly_axpy = _impl.poly_axpy
poly_mul_mono = _impl.poly_mul_mono
poly_diff = _impl.poly_diff
poly_derive = _impl.poly_derive
poly_eval = _impl.poly_eval


def available_backends():
    """Return the kernel modules importable in this environment."""
    mods = [_pykernels]
    try:
        from . import _ckernels
    except ImportError:
        pass
    else:
        mods.append(_ckernels)
    return mods
