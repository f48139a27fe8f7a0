"""Hot sampling kernels with a compiled core and a pure-Python fallback.

The Cython extension is preferred when it was built; set COMPLIMITS_FORCE_PY=1
to force the NumPy fallback.  Both backends are contractually bit-identical
for the same seed (see tests/test_kernels.py), so backend choice never
changes results, only speed.
"""

import os

if os.environ.get("COMPLIMITS_FORCE_PY"):
    from . import _pymc as _impl
else:
    try:
        from . import _cymc as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _pymc as _impl

initial_step = _impl.initial_step
markov_step = _impl.markov_step


def backend_name() -> str:
    """Which kernel implementation is active: 'cython' or 'python'."""
    return _impl.BACKEND
