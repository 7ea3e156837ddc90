"""Backend selection for the convolution kernel.

The compiled extension is preferred when present; a vectorized numpy
implementation is the fallback.  Setting CAROSEGD_FORCE_NUMPY=1 forces the
fallback, which the benchmark uses to compare the two.
"""

import os

from . import _fallback

_force_numpy = os.environ.get("CAROSEGD_FORCE_NUMPY", "") not in ("", "0")

if _force_numpy:
    _impl = _fallback
    BACKEND = "numpy"
else:
    try:
        from . import _conv as _impl  # type: ignore[no-redef]

        BACKEND = "native"
    except ImportError:
        _impl = _fallback
        BACKEND = "numpy"


def conv2d_raw(x, w, dilation):
    """Same-padded dilated cross-correlation on (Cin,H,W) x (Cout,Cin,kh,kw)."""
    return _impl.conv2d(x, w, dilation)


def backend_name() -> str:
    return BACKEND
