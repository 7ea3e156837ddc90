import numpy as np
import pytest

from carosegd.errors import InvalidArgument
from carosegd.inference import (
    ConstantPredictor,
    DilatedUnetConfig,
    OraclePredictor,
    PatchPredictor,
    UnetPredictor,
    init_weights,
)
from carosegd.tiling import PatchSpec

TINY = DilatedUnetConfig(encoder_levels=1, base_channels=2, bottleneck_dilations=(1,))


def test_constant_predictor():
    p = ConstantPredictor(0.25)
    out = p.predict(np.zeros((6, 4)))
    np.testing.assert_array_equal(out, 0.25)
    assert p.id == "constant:0.25"
    with pytest.raises(InvalidArgument):
        ConstantPredictor(1.5)


def test_oracle_reads_mask_at_spec():
    rng = np.random.default_rng(0)
    mask = rng.random((16, 20))
    p = OraclePredictor(mask)
    spec = PatchSpec(4, 2, 8, 10)
    out = p.predict(np.zeros((10, 8)), spec)
    np.testing.assert_array_equal(out, mask[2:12, 4:12])


def test_oracle_requires_spec_and_bounds():
    p = OraclePredictor(np.zeros((8, 8)))
    with pytest.raises(InvalidArgument):
        p.predict(np.zeros((4, 4)))
    with pytest.raises(InvalidArgument):
        p.predict(np.zeros((4, 4)), PatchSpec(6, 0, 4, 4))


def test_oracle_rejects_bad_mask():
    with pytest.raises(InvalidArgument):
        OraclePredictor(np.full((4, 4), 2.0))
    with pytest.raises(InvalidArgument):
        OraclePredictor(np.zeros((2, 2, 2)))


def test_output_contract_enforced():
    class Broken(PatchPredictor):
        id = "broken"

        def _predict(self, pixels, spec):
            return np.zeros((1, 1))

    with pytest.raises(InvalidArgument) as err:
        Broken().predict(np.zeros((4, 4)))
    assert "broken" in str(err.value)

    class OutOfUnit(PatchPredictor):
        id = "hot"

        def _predict(self, pixels, spec):
            return np.full(pixels.shape, 1.25)

    with pytest.raises(InvalidArgument):
        OutOfUnit().predict(np.zeros((4, 4)))


def test_unet_predictor_id_and_output():
    w = init_weights(TINY, seed=1)
    p = UnetPredictor(w, TINY)
    assert p.id == f"dilated-unet:{TINY.digest()}:{w.digest()}"
    out = p.predict(np.random.default_rng(2).random((16, 16)).astype(np.float32))
    assert out.shape == (16, 16)
    assert out.min() >= 0.0 and out.max() <= 1.0


def test_unet_predictor_validates_weights_up_front():
    w = init_weights(TINY, seed=1)
    from carosegd.errors import ShapeMismatch

    with pytest.raises(ShapeMismatch):
        UnetPredictor(w, DilatedUnetConfig())
