"""Pure-numpy convolution backend.

Agrees with the compiled kernel up to floating-point reassociation error.
"""

import numpy as np


def conv2d(x: np.ndarray, w: np.ndarray, dilation: int) -> np.ndarray:
    """Dilated cross-correlation with zero 'same' padding.

    x: (Cin, H, W), w: (Cout, Cin, kh, kw), returns (Cout, H, W).
    """
    cin, h, wd = x.shape
    cout, cin_w, kh, kw = w.shape
    assert cin == cin_w
    py = dilation * (kh // 2)
    px = dilation * (kw // 2)
    xp = np.zeros((cin, h + 2 * py, wd + 2 * px), dtype=x.dtype)
    xp[:, py : py + h, px : px + wd] = x
    out = np.zeros((cout, h, wd), dtype=x.dtype)
    for ky in range(kh):
        for kx in range(kw):
            window = xp[:, ky * dilation : ky * dilation + h,
                        kx * dilation : kx * dilation + wd]
            out += np.einsum("oi,ihw->ohw", w[:, :, ky, kx], window)
    return out
