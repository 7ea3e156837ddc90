import struct
import zlib

import numpy as np
import pytest

from carosegd.errors import (
    BadMagic,
    ChecksumMismatch,
    EmptyWeights,
    ShapeMismatch,
    TruncatedWeights,
    WeightFormatError,
)
from carosegd.inference import (
    DilatedUnetConfig,
    ModelWeights,
    init_weights,
    load_weights,
    save_weights,
    validate_weights,
)

TINY = DilatedUnetConfig(encoder_levels=1, base_channels=2, bottleneck_dilations=(1,))


def small_weights(seed=0):
    return init_weights(TINY, seed=seed)


# ----------------------------------------------------------------- container


def test_empty_tensor_dict_rejected():
    with pytest.raises(EmptyWeights) as err:
        ModelWeights({})
    assert "no layers" in str(err.value)


def test_nonfinite_values_rejected():
    with pytest.raises(WeightFormatError):
        ModelWeights({"a": np.array([1.0, np.nan], dtype=np.float32)})


def test_tensors_are_read_only():
    w = small_weights()
    with pytest.raises(ValueError):
        w["head.bias"][0] = 1.0


def test_digest_depends_on_values_and_names():
    a = ModelWeights({"x": np.ones(3, dtype=np.float32)})
    b = ModelWeights({"x": np.ones(3, dtype=np.float32)})
    c = ModelWeights({"x": np.full(3, 2.0, dtype=np.float32)})
    d = ModelWeights({"y": np.ones(3, dtype=np.float32)})
    assert a.digest() == b.digest()
    assert a.digest() != c.digest()
    assert a.digest() != d.digest()


# ---------------------------------------------------------------- validation


def test_validate_accepts_matching_plan():
    validate_weights(small_weights(), TINY)


def test_validate_missing_layer():
    tensors = dict(small_weights().tensors)
    del tensors["dec1.up.weight"]
    with pytest.raises(ShapeMismatch) as err:
        validate_weights(ModelWeights(tensors), TINY)
    assert err.value.layer == "dec1.up.weight"


def test_validate_unexpected_layer():
    tensors = dict(small_weights().tensors)
    tensors["stray"] = np.zeros(4, dtype=np.float32)
    with pytest.raises(ShapeMismatch) as err:
        validate_weights(ModelWeights(tensors), TINY)
    assert err.value.layer == "stray"


def test_validate_wrong_shape():
    tensors = dict(small_weights().tensors)
    tensors["head.weight"] = np.zeros((2, 2, 1, 1), dtype=np.float32)
    with pytest.raises(ShapeMismatch) as err:
        validate_weights(ModelWeights(tensors), TINY)
    assert err.value.layer == "head.weight"
    assert err.value.expected == (1, 2, 1, 1)


# -------------------------------------------------------------- file format


def test_round_trip_bit_exact(tmp_path):
    w = small_weights(seed=7)
    p = tmp_path / "w.csdw"
    save_weights(p, w)
    back = load_weights(p)
    assert back.names() == w.names()
    for name in w.names():
        assert back[name].dtype == np.float32
        np.testing.assert_array_equal(back[name], w[name])
    assert back.digest() == w.digest()


def test_file_layout_parses_by_hand(tmp_path):
    # structural oracle: walk the documented layout with struct alone
    w = ModelWeights(
        {
            "alpha": np.arange(6, dtype=np.float32).reshape(2, 3),
            "beta": np.array([1.5], dtype=np.float32),
        }
    )
    p = tmp_path / "w.csdw"
    save_weights(p, w)
    blob = p.read_bytes()

    assert blob[:4] == b"CSDW"
    version, count = struct.unpack_from("<II", blob, 4)
    assert version == 1
    assert count == 2
    off = 12
    seen = {}
    for _ in range(count):
        (nlen,) = struct.unpack_from("<H", blob, off)
        off += 2
        name = blob[off : off + nlen].decode()
        off += nlen
        rank = blob[off]
        off += 1
        shape = struct.unpack_from(f"<{rank}I", blob, off)
        off += 4 * rank
        n = int(np.prod(shape))
        seen[name] = np.frombuffer(blob, "<f4", n, off).reshape(shape)
        off += 4 * n
    (stored_crc,) = struct.unpack_from("<I", blob, off)
    assert off + 4 == len(blob)
    assert stored_crc == zlib.crc32(blob[:-4]) & 0xFFFFFFFF
    np.testing.assert_array_equal(seen["alpha"], w["alpha"])
    np.testing.assert_array_equal(seen["beta"], w["beta"])


def test_bad_magic(tmp_path):
    p = tmp_path / "w.csdw"
    p.write_bytes(b"NOPE" + b"\x00" * 20)
    with pytest.raises(BadMagic):
        load_weights(p)


def test_truncated_file(tmp_path):
    w = small_weights()
    p = tmp_path / "w.csdw"
    save_weights(p, w)
    whole = p.read_bytes()
    # drop the tail but keep a consistent checksum over what remains
    cut = whole[: len(whole) // 2]
    p.write_bytes(cut[:-4] + struct.pack("<I", zlib.crc32(cut[:-4]) & 0xFFFFFFFF))
    with pytest.raises(TruncatedWeights):
        load_weights(p)


def test_checksum_mismatch(tmp_path):
    w = small_weights()
    p = tmp_path / "w.csdw"
    save_weights(p, w)
    blob = bytearray(p.read_bytes())
    blob[20] ^= 0xFF
    p.write_bytes(bytes(blob))
    with pytest.raises(ChecksumMismatch):
        load_weights(p)


def test_corruption_errors_are_distinct(tmp_path):
    # the three failure classes never shadow one another
    assert not issubclass(BadMagic, ChecksumMismatch)
    assert not issubclass(TruncatedWeights, ChecksumMismatch)
    assert not issubclass(ChecksumMismatch, TruncatedWeights)


def test_zero_layer_file(tmp_path):
    body = b"CSDW" + struct.pack("<II", 1, 0)
    body += struct.pack("<I", zlib.crc32(body) & 0xFFFFFFFF)
    p = tmp_path / "w.csdw"
    p.write_bytes(body)
    with pytest.raises(EmptyWeights) as err:
        load_weights(p)
    assert "no layers" in str(err.value)


def test_unsupported_version(tmp_path):
    body = b"CSDW" + struct.pack("<II", 9, 0)
    body += struct.pack("<I", zlib.crc32(body) & 0xFFFFFFFF)
    p = tmp_path / "w.csdw"
    p.write_bytes(body)
    with pytest.raises(WeightFormatError):
        load_weights(p)


def test_duplicate_layer_name(tmp_path):
    body = bytearray(b"CSDW" + struct.pack("<II", 1, 2))
    for _ in range(2):
        body += struct.pack("<H", 1) + b"x"
        body += struct.pack("<B", 1) + struct.pack("<I", 1)
        body += np.float32(1.0).tobytes()
    body += struct.pack("<I", zlib.crc32(bytes(body)) & 0xFFFFFFFF)
    p = tmp_path / "w.csdw"
    p.write_bytes(bytes(body))
    with pytest.raises(WeightFormatError) as err:
        load_weights(p)
    assert "duplicate" in str(err.value)


def test_trailing_bytes_rejected(tmp_path):
    w = ModelWeights({"x": np.ones(2, dtype=np.float32)})
    p = tmp_path / "w.csdw"
    save_weights(p, w)
    blob = p.read_bytes()
    padded = blob[:-4] + b"\x00\x00"
    padded += struct.pack("<I", zlib.crc32(padded) & 0xFFFFFFFF)
    p.write_bytes(padded)
    with pytest.raises(WeightFormatError) as err:
        load_weights(p)
    assert "trailing" in str(err.value)


def test_init_weights_deterministic_and_valid():
    a = init_weights(TINY, seed=11)
    b = init_weights(TINY, seed=11)
    c = init_weights(TINY, seed=12)
    assert a.digest() == b.digest()
    assert a.digest() != c.digest()
    validate_weights(a, TINY)
    for name in a.names():
        if name.endswith(".bias"):
            assert not a[name].any()
