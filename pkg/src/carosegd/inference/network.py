"""Dilated U-net forward pass (inference only) and the BCE+Dice loss.

The architecture follows the classic encoder/decoder with skip connections,
with a stack of dilated convolutions at the bottleneck to widen its receptive
field.  Depth, channel widths, and dilation rates are configuration, recorded
in result provenance; any normalization is assumed folded into the weights at
export time.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from ..errors import InvalidArgument, ShapeMismatch
from .convops import conv2d_dilated, maxpool2, upsample_bilinear2

BCE_EPS = 1e-7
DICE_SMOOTHING = 1.0


@dataclass(frozen=True)
class DilatedUnetConfig:
    encoder_levels: int = 4
    base_channels: int = 16
    bottleneck_dilations: tuple[int, ...] = (1, 2, 4, 8)
    kernel_size: int = 3

    def __post_init__(self):
        if self.encoder_levels < 1:
            raise InvalidArgument("encoder_levels must be >= 1")
        if self.base_channels < 1:
            raise InvalidArgument("base_channels must be >= 1")
        if not self.bottleneck_dilations or any(d < 1 for d in self.bottleneck_dilations):
            raise InvalidArgument("bottleneck dilations must all be >= 1")
        if self.kernel_size % 2 == 0 or self.kernel_size < 1:
            raise InvalidArgument("kernel_size must be odd and positive")
        object.__setattr__(self, "bottleneck_dilations", tuple(self.bottleneck_dilations))

    def digest(self) -> str:
        """Short stable hash of the configuration, used in provenance."""
        doc = json.dumps(
            {
                "encoder_levels": self.encoder_levels,
                "base_channels": self.base_channels,
                "bottleneck_dilations": list(self.bottleneck_dilations),
                "kernel_size": self.kernel_size,
            },
            sort_keys=True,
        )
        return hashlib.sha256(doc.encode()).hexdigest()[:12]


def expected_shapes(cfg: DilatedUnetConfig) -> dict[str, tuple[int, ...]]:
    """Layer-name to tensor-shape plan implied by a configuration."""
    k = cfg.kernel_size
    B = cfg.base_channels
    L = cfg.encoder_levels
    shapes: dict[str, tuple[int, ...]] = {}
    for level in range(1, L + 1):
        c_in = 1 if level == 1 else B * 2 ** (level - 2)
        c_out = B * 2 ** (level - 1)
        shapes[f"enc{level}.conv1.weight"] = (c_out, c_in, k, k)
        shapes[f"enc{level}.conv1.bias"] = (c_out,)
        shapes[f"enc{level}.conv2.weight"] = (c_out, c_out, k, k)
        shapes[f"enc{level}.conv2.bias"] = (c_out,)
    c_in = B * 2 ** (L - 1)
    c_bot = B * 2**L
    for j in range(1, len(cfg.bottleneck_dilations) + 1):
        shapes[f"bottleneck.conv{j}.weight"] = (c_bot, c_in if j == 1 else c_bot, k, k)
        shapes[f"bottleneck.conv{j}.bias"] = (c_bot,)
    for level in range(L, 0, -1):
        c_hi = B * 2**level
        c_lo = B * 2 ** (level - 1)
        shapes[f"dec{level}.up.weight"] = (c_lo, c_hi, k, k)
        shapes[f"dec{level}.up.bias"] = (c_lo,)
        shapes[f"dec{level}.conv1.weight"] = (c_lo, c_hi, k, k)
        shapes[f"dec{level}.conv1.bias"] = (c_lo,)
        shapes[f"dec{level}.conv2.weight"] = (c_lo, c_lo, k, k)
        shapes[f"dec{level}.conv2.bias"] = (c_lo,)
    shapes["head.weight"] = (1, B, 1, 1)
    shapes["head.bias"] = (1,)
    return shapes


def _relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0)


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


class _LayerLookup:
    """Fetches tensors by name, checking shapes against the plan."""

    def __init__(self, weights, cfg: DilatedUnetConfig):
        self.tensors = weights.tensors
        self.plan = expected_shapes(cfg)

    def __call__(self, name: str) -> np.ndarray:
        if name not in self.tensors:
            raise ShapeMismatch(name, self.plan[name], ("missing",))
        t = self.tensors[name]
        if t.shape != self.plan[name]:
            raise ShapeMismatch(name, self.plan[name], t.shape)
        return t


def _conv_block(x, lookup, name, dilation=1):
    w = lookup(f"{name}.weight")
    b = lookup(f"{name}.bias")
    return conv2d_dilated(x, w, dilation) + b[:, None, None]


def forward(weights, cfg: DilatedUnetConfig, patch: np.ndarray) -> np.ndarray:
    """Run one patch through the network; returns a probability map of the
    same spatial shape."""
    patch = np.asarray(patch)
    if patch.ndim != 2:
        raise InvalidArgument(f"patch must be 2-D, got shape {patch.shape}")
    factor = 2**cfg.encoder_levels
    h, w = patch.shape
    if h % factor or w % factor:
        raise InvalidArgument(
            f"patch {h}x{w} not divisible by the downsampling factor {factor}"
        )
    lookup = _LayerLookup(weights, cfg)
    dtype = next(iter(weights.tensors.values())).dtype
    x = patch.astype(dtype)[None]

    skips = []
    for level in range(1, cfg.encoder_levels + 1):
        x = _relu(_conv_block(x, lookup, f"enc{level}.conv1"))
        x = _relu(_conv_block(x, lookup, f"enc{level}.conv2"))
        skips.append(x)
        x = maxpool2(x)

    for j, d in enumerate(cfg.bottleneck_dilations, start=1):
        x = _relu(_conv_block(x, lookup, f"bottleneck.conv{j}", dilation=d))

    for level in range(cfg.encoder_levels, 0, -1):
        x = upsample_bilinear2(x)
        x = _relu(_conv_block(x, lookup, f"dec{level}.up"))
        x = np.concatenate([skips[level - 1], x], axis=0)
        x = _relu(_conv_block(x, lookup, f"dec{level}.conv1"))
        x = _relu(_conv_block(x, lookup, f"dec{level}.conv2"))

    logits = _conv_block(x, lookup, "head")
    return _sigmoid(logits[0])


def loss_bce_dice(prediction: np.ndarray, target: np.ndarray) -> float:
    """Sum of mean binary cross-entropy and the Dice loss.

    Predictions are clamped to [eps, 1-eps] before the logarithm; the Dice
    term uses smoothing constant 1.
    """
    p = np.asarray(prediction, dtype=np.float64)
    t = np.asarray(target, dtype=np.float64)
    if p.shape != t.shape:
        raise InvalidArgument(f"shape mismatch: prediction {p.shape} vs target {t.shape}")
    pc = np.clip(p, BCE_EPS, 1.0 - BCE_EPS)
    bce = -np.mean(t * np.log(pc) + (1.0 - t) * np.log(1.0 - pc))
    inter = float(np.sum(p * t))
    dice = 1.0 - (2.0 * inter + DICE_SMOOTHING) / (float(p.sum()) + float(t.sum()) + DICE_SMOOTHING)
    return float(bce + dice)
