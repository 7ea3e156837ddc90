"""Convolution primitives and receptive-field accounting."""

from __future__ import annotations

import numpy as np

from ..errors import InvalidArgument
from .. import kernels


def conv2d_dilated(x: np.ndarray, kernel: np.ndarray, dilation: int = 1) -> np.ndarray:
    """Dilated cross-correlation with zero padding sized to preserve shape.

    Input taps are spaced `dilation` pixels apart.  Accepts a single-channel
    pair (x: (H,W), kernel: (kh,kw)) or the multi-channel form
    (x: (Cin,H,W), kernel: (Cout,Cin,kh,kw)); output shape follows the input.
    """
    if dilation < 1:
        raise InvalidArgument(f"dilation must be >= 1, got {dilation}")
    x = np.asarray(x)
    kernel = np.asarray(kernel)
    single = x.ndim == 2
    if single:
        if kernel.ndim != 2:
            raise InvalidArgument("2-D input needs a 2-D kernel")
        x3 = x[None]
        k4 = kernel[None, None]
    else:
        if x.ndim != 3 or kernel.ndim != 4:
            raise InvalidArgument(
                f"expected (Cin,H,W) with (Cout,Cin,kh,kw), got {x.shape} and {kernel.shape}"
            )
        if kernel.shape[1] != x.shape[0]:
            raise InvalidArgument(
                f"kernel expects {kernel.shape[1]} input channels, input has {x.shape[0]}"
            )
        x3, k4 = x, kernel
    kh, kw = k4.shape[2], k4.shape[3]
    if kh % 2 == 0 or kw % 2 == 0:
        raise InvalidArgument(f"kernel must be odd-sized, got {kh}x{kw}")
    dtype = np.float32 if x3.dtype == np.float32 and k4.dtype == np.float32 else np.float64
    out = kernels.conv2d_raw(
        np.ascontiguousarray(x3, dtype=dtype),
        np.ascontiguousarray(k4, dtype=dtype),
        int(dilation),
    )
    return out[0] if single else out


def maxpool2(x: np.ndarray) -> np.ndarray:
    """2x2 max pooling with stride 2 on (C,H,W) or (H,W); dims must be even."""
    h, w = x.shape[-2], x.shape[-1]
    if h % 2 or w % 2:
        raise InvalidArgument(f"maxpool2 needs even spatial dims, got {h}x{w}")
    shaped = x.reshape(*x.shape[:-2], h // 2, 2, w // 2, 2)
    return shaped.max(axis=(-3, -1))


def upsample_bilinear2(x: np.ndarray) -> np.ndarray:
    """Bilinear 2x upsampling on (C,H,W) or (H,W).

    Output position i samples the input at (i + 0.5)/2 - 0.5, clamped to the
    grid (half-pixel-center convention).
    """

    def positions(n_out, n_in):
        pos = (np.arange(n_out) + 0.5) / 2.0 - 0.5
        pos = np.clip(pos, 0.0, n_in - 1)
        lo = np.minimum(np.floor(pos).astype(np.intp), max(n_in - 2, 0))
        frac = pos - lo
        return lo, frac

    h, w = x.shape[-2], x.shape[-1]
    ylo, yf = positions(2 * h, h)
    xlo, xf = positions(2 * w, w)
    if h == 1:
        rows = np.repeat(x, 2, axis=-2).astype(x.dtype)
    else:
        a = np.take(x, ylo, axis=-2)
        b = np.take(x, ylo + 1, axis=-2)
        shape = [1] * x.ndim
        shape[-2] = yf.size
        yf = yf.reshape(shape)
        rows = a * (1 - yf) + b * yf
    if w == 1:
        return np.repeat(rows, 2, axis=-1).astype(x.dtype)
    a = np.take(rows, xlo, axis=-1)
    b = np.take(rows, xlo + 1, axis=-1)
    shape = [1] * x.ndim
    shape[-1] = xf.size
    xf = xf.reshape(shape)
    return (a * (1 - xf) + b * xf).astype(x.dtype)


def stacked_conv_extent(kernel_size: int, dilations) -> int:
    """Spatial extent of a stack of same-stride convolutions:
    1 + sum((k - 1) * d) over the stack."""
    return 1 + sum((kernel_size - 1) * d for d in dilations)


def receptive_field(cfg) -> int:
    """Receptive field of one bottleneck pixel at input resolution.

    Composes the encoder conv/pool chain and the dilated bottleneck stack:
    each convolution with kernel k and dilation d widens the field by
    (k-1)*d times the current downsampling jump; each 2x pool adds one jump
    and doubles it.
    """
    k = cfg.kernel_size
    rf = 1
    jump = 1
    for _ in range(cfg.encoder_levels):
        rf += 2 * (k - 1) * jump  # two convs per level
        rf += jump  # 2x2 pool window
        jump *= 2
    for d in cfg.bottleneck_dilations:
        rf += (k - 1) * d * jump
    return rf
