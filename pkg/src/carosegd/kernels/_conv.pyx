# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled convolution kernel: dilated cross-correlation with zero 'same'
padding, the hot inner loop of patch inference."""

import numpy as np

cimport cython


ctypedef fused floating:
    float
    double


def conv2d(const floating[:, :, ::1] x, const floating[:, :, :, ::1] w, int dilation):
    """x: (Cin, H, W), w: (Cout, Cin, kh, kw) -> (Cout, H, W)."""
    cdef Py_ssize_t cin = x.shape[0]
    cdef Py_ssize_t h = x.shape[1]
    cdef Py_ssize_t wd = x.shape[2]
    cdef Py_ssize_t cout = w.shape[0]
    cdef Py_ssize_t kh = w.shape[2]
    cdef Py_ssize_t kw = w.shape[3]
    cdef Py_ssize_t pad_y = dilation * (kh // 2)
    cdef Py_ssize_t pad_x = dilation * (kw // 2)

    if floating is float:
        out_arr = np.zeros((cout, h, wd), dtype=np.float32)
    else:
        out_arr = np.zeros((cout, h, wd), dtype=np.float64)
    cdef floating[:, :, ::1] out = out_arr

    cdef Py_ssize_t co, ci, ky, kx, y, xx
    cdef Py_ssize_t dy, dx, y_lo, y_hi, x_lo, x_hi
    cdef floating wv

    # Each kernel tap becomes one shifted row-contiguous accumulation; the
    # shift bounds replace per-element border checks.
    for co in range(cout):
        for ci in range(cin):
            for ky in range(kh):
                dy = ky * dilation - pad_y
                y_lo = -dy if dy < 0 else 0
                y_hi = h - dy if dy > 0 else h
                for kx in range(kw):
                    dx = kx * dilation - pad_x
                    x_lo = -dx if dx < 0 else 0
                    x_hi = wd - dx if dx > 0 else wd
                    wv = w[co, ci, ky, kx]
                    if wv == 0:
                        continue
                    for y in range(y_lo, y_hi):
                        for xx in range(x_lo, x_hi):
                            out[co, y, xx] += wv * x[ci, y + dy, xx + dx]
    return out_arr
