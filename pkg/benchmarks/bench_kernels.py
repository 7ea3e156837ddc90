"""Compare the compiled convolution backend against the numpy fallback.

Times the raw kernel on layer shapes the network actually runs, then a full
forward pass on one patch with each backend.  Run from a checkout:

    python3 benchmarks/bench_kernels.py [--repeats 5]
"""

import argparse
import time

import numpy as np

import carosegd.kernels as kernels
from carosegd.inference.network import DilatedUnetConfig, forward
from carosegd.inference.weights import init_weights
from carosegd.kernels import _fallback

# (label, input shape, weight shape, dilation); borrowed from the default
# network on a 512x128 patch
CASES = [
    ("entry conv      1->16  512x128 d1", (1, 512, 128), (16, 1, 3, 3), 1),
    ("encoder conv   16->32  256x64  d1", (16, 256, 64), (32, 16, 3, 3), 1),
    ("encoder conv   64->128 64x16   d1", (64, 64, 16), (128, 64, 3, 3), 1),
    ("bottleneck    256->256 32x8    d8", (256, 32, 8), (256, 256, 3, 3), 8),
]


def best_of(fn, repeats):
    fn()  # warmup
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def with_backend(impl, fn):
    saved = kernels._impl
    kernels._impl = impl
    try:
        return fn()
    finally:
        kernels._impl = saved


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()

    have_native = kernels.BACKEND == "native"
    if not have_native:
        print("compiled extension not available; timing the numpy fallback only")
    native = kernels._impl if have_native else None

    rng = np.random.default_rng(0)
    print(f"{'case':<38} {'numpy':>10} {'native':>10} {'speedup':>8}")
    for label, xshape, wshape, dil in CASES:
        x = rng.normal(size=xshape).astype(np.float32)
        w = rng.normal(size=wshape).astype(np.float32)
        t_np = best_of(lambda: _fallback.conv2d(x, w, dil), args.repeats)
        if have_native:
            t_nat = best_of(lambda: native.conv2d(x, w, dil), args.repeats)
            if not np.allclose(native.conv2d(x, w, dil), _fallback.conv2d(x, w, dil), atol=1e-4):
                raise SystemExit(f"backends disagree on {label}")
            print(f"{label:<38} {t_np * 1e3:>8.2f}ms {t_nat * 1e3:>8.2f}ms {t_np / t_nat:>7.1f}x")
        else:
            print(f"{label:<38} {t_np * 1e3:>8.2f}ms {'-':>10} {'-':>8}")

    cfg = DilatedUnetConfig()
    weights = init_weights(cfg, seed=0)
    patch = rng.random((512, 128)).astype(np.float32)
    t_np = with_backend(_fallback, lambda: best_of(lambda: forward(weights, cfg, patch), args.repeats))
    if have_native:
        t_nat = with_backend(native, lambda: best_of(lambda: forward(weights, cfg, patch), args.repeats))
        out_np = with_backend(_fallback, lambda: forward(weights, cfg, patch))
        out_nat = with_backend(native, lambda: forward(weights, cfg, patch))
        if not np.allclose(out_np, out_nat, atol=1e-5):
            raise SystemExit("backends disagree on the full forward pass")
        print(f"{'full forward on one 512x128 patch':<38} {t_np:>8.2f}s  {t_nat:>8.2f}s  {t_np / t_nat:>7.1f}x")
    else:
        print(f"{'full forward on one 512x128 patch':<38} {t_np:>8.2f}s  {'-':>10} {'-':>8}")


if __name__ == "__main__":
    main()
