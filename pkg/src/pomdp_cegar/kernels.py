"""Kernel backend selection.

The compiled ``_ckernels`` extension is used when it was built; otherwise,
or when ``POMDP_CEGAR_PURE_PYTHON`` is set to a non-empty value, the
pure-Python ``_pykernels`` module is used. ``BACKEND`` names the choice.
"""

import os

from . import _pykernels

if os.environ.get("POMDP_CEGAR_PURE_PYTHON"):
    _impl = _pykernels
else:
    try:
        from . import _ckernels as _impl
    except ImportError:
        _impl = _pykernels

BACKEND = "python" if _impl is _pykernels else "cython"

propagate = _impl.propagate
children = _impl.children
masked_sum = _impl.masked_sum
max_flow = _impl.max_flow
