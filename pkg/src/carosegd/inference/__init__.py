from .convops import (
    conv2d_dilated,
    maxpool2,
    receptive_field,
    stacked_conv_extent,
    upsample_bilinear2,
)
from .network import DilatedUnetConfig, expected_shapes, forward, loss_bce_dice
from .predictors import ConstantPredictor, OraclePredictor, PatchPredictor, UnetPredictor
from .weights import ModelWeights, init_weights, load_weights, save_weights, validate_weights

__all__ = [
    "conv2d_dilated",
    "maxpool2",
    "upsample_bilinear2",
    "stacked_conv_extent",
    "receptive_field",
    "DilatedUnetConfig",
    "expected_shapes",
    "forward",
    "loss_bce_dice",
    "PatchPredictor",
    "UnetPredictor",
    "OraclePredictor",
    "ConstantPredictor",
    "ModelWeights",
    "init_weights",
    "load_weights",
    "save_weights",
    "validate_weights",
]
