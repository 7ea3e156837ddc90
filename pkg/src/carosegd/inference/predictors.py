"""Patch predictors: anything that maps a patch to a probability map.

The base class enforces the output contract on every call, so the fusion
stage downstream can take it for granted: same shape as the input patch,
values within [0, 1].
"""

from __future__ import annotations

from abc import ABC, abstractmethod

import numpy as np

from ..errors import InvalidArgument
from .network import DilatedUnetConfig, forward
from .weights import ModelWeights, validate_weights


class PatchPredictor(ABC):
    """Interface used by both pipeline stages.

    predict() receives the patch pixels and the patch spec describing where
    the patch sits in its source frame; spec lets mask-backed predictors look
    up their answer, network predictors ignore it.
    """

    id: str = "predictor"

    def predict(self, pixels: np.ndarray, spec=None) -> np.ndarray:
        pixels = np.asarray(pixels)
        out = np.asarray(self._predict(pixels, spec), dtype=np.float64)
        if out.shape != pixels.shape:
            raise InvalidArgument(
                f"predictor {self.id!r} returned shape {out.shape} for patch {pixels.shape}"
            )
        if out.size and (float(out.min()) < 0.0 or float(out.max()) > 1.0):
            raise InvalidArgument(f"predictor {self.id!r} returned values outside [0, 1]")
        return out

    @abstractmethod
    def _predict(self, pixels: np.ndarray, spec) -> np.ndarray: ...


class UnetPredictor(PatchPredictor):
    def __init__(self, weights: ModelWeights, cfg: DilatedUnetConfig | None = None):
        self.cfg = cfg or DilatedUnetConfig()
        validate_weights(weights, self.cfg)
        self.weights = weights
        self.id = f"dilated-unet:{self.cfg.digest()}:{weights.digest()}"

    def _predict(self, pixels, spec):
        return forward(self.weights, self.cfg, pixels)


class OraclePredictor(PatchPredictor):
    """Reads the answer off a known truth mask; for phantoms and testing.

    The mask lives in the same frame the patch specs are expressed in, so
    prediction is a plain crop.
    """

    def __init__(self, mask: np.ndarray, id: str = "oracle"):
        mask = np.asarray(mask)
        if mask.ndim != 2:
            raise InvalidArgument("oracle mask must be 2-D")
        if mask.size and (float(mask.min()) < 0.0 or float(mask.max()) > 1.0):
            raise InvalidArgument("oracle mask values must lie in [0, 1]")
        self.mask = mask.astype(np.float64)
        self.id = id

    def _predict(self, pixels, spec):
        if spec is None:
            raise InvalidArgument("oracle predictor needs the patch spec")
        h, w = self.mask.shape
        if spec.origin_y < 0 or spec.origin_x < 0 or spec.y_end >= h or spec.x_end >= w:
            raise InvalidArgument(
                f"patch at ({spec.origin_x}, {spec.origin_y}) falls outside the oracle mask {h}x{w}"
            )
        return self.mask[spec.origin_y : spec.origin_y + spec.height,
                         spec.origin_x : spec.origin_x + spec.width]


class ConstantPredictor(PatchPredictor):
    """Uniform probability everywhere; degenerate case tests."""

    def __init__(self, value: float = 0.5):
        if not 0.0 <= value <= 1.0:
            raise InvalidArgument("constant probability must lie in [0, 1]")
        self.value = float(value)
        self.id = f"constant:{self.value:g}"

    def _predict(self, pixels, spec):
        return np.full(pixels.shape, self.value)
