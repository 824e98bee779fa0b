import numpy as np
import pytest

from comixify import manifest as mf
from comixify.errors import ModelLoadError


def test_round_trip(tmp_path):
    tensors = {"a.weight": np.arange(12, dtype=np.float32).reshape(3, 4),
               "b": np.array([1.5], dtype=np.float32)}
    mf.save_manifest(tmp_path / "m", "model", tensors, meta={"kind": "test"})
    name, loaded, meta = mf.load_manifest(tmp_path / "m")
    assert name == "model"
    assert meta["kind"] == "test"
    np.testing.assert_array_equal(loaded["a.weight"], tensors["a.weight"])
    np.testing.assert_array_equal(loaded["b"], tensors["b"])


def test_checksum_mismatch(tmp_path):
    mf.save_manifest(tmp_path / "m", "model", {"w": np.ones(4, np.float32)})
    corrupt = tmp_path / "m" / "w.f32"
    data = bytearray(corrupt.read_bytes())
    data[0] ^= 0xFF
    corrupt.write_bytes(bytes(data))
    with pytest.raises(ModelLoadError, match="checksum"):
        mf.load_manifest(tmp_path / "m")


def test_missing_tensor_file(tmp_path):
    mf.save_manifest(tmp_path / "m", "model", {"w": np.ones(4, np.float32)})
    (tmp_path / "m" / "w.f32").unlink()
    with pytest.raises(ModelLoadError, match="missing"):
        mf.load_manifest(tmp_path / "m")


def test_missing_manifest(tmp_path):
    with pytest.raises(ModelLoadError):
        mf.load_manifest(tmp_path / "nope")


def test_deterministic_bytes(tmp_path):
    tensors = {"w": np.linspace(0, 1, 10, dtype=np.float32)}
    mf.save_manifest(tmp_path / "a", "m", tensors)
    mf.save_manifest(tmp_path / "b", "m", tensors)
    assert ((tmp_path / "a" / "manifest.json").read_bytes()
            == (tmp_path / "b" / "manifest.json").read_bytes())
    assert ((tmp_path / "a" / "w.f32").read_bytes()
            == (tmp_path / "b" / "w.f32").read_bytes())
