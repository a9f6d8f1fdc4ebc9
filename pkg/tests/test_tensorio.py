import numpy as np
import pytest

from faceparts.tensorio import TensorFileError, read_tensors, write_tensors


def test_round_trip_is_bit_exact(tmp_path):
    rng = np.random.default_rng(0)
    tensors = {
        "conv5": rng.standard_normal((6, 6, 512)).astype(np.float32),
        "vector": rng.standard_normal(2048).astype(np.float32),
        "scalar-ish": np.asarray([3.25], dtype=np.float32),
    }
    path = tmp_path / "t.fpt"
    write_tensors(path, tensors)
    loaded = read_tensors(path)
    assert list(loaded) == list(tensors)  # order preserved
    for name in tensors:
        assert loaded[name].dtype == np.float32
        assert np.array_equal(loaded[name], tensors[name])


def test_rewrite_same_content_is_byte_identical(tmp_path):
    data = {"a": np.arange(12, dtype=np.float32).reshape(3, 4)}
    p1, p2 = tmp_path / "a.fpt", tmp_path / "b.fpt"
    write_tensors(p1, data)
    write_tensors(p2, data)
    assert p1.read_bytes() == p2.read_bytes()


def test_float64_input_stored_as_float32(tmp_path):
    path = tmp_path / "f.fpt"
    write_tensors(path, {"x": np.asarray([0.1, 0.2])})
    out = read_tensors(path)["x"]
    assert out.dtype == np.float32
    assert np.allclose(out, [0.1, 0.2], atol=1e-7)


def test_unicode_names(tmp_path):
    path = tmp_path / "u.fpt"
    write_tensors(path, {"fc7/texture": np.zeros(3, dtype=np.float32)})
    assert "fc7/texture" in read_tensors(path)


def test_bad_magic_rejected(tmp_path):
    path = tmp_path / "bad.fpt"
    path.write_bytes(b"NOPE" + b"\x00" * 16)
    with pytest.raises(TensorFileError, match="magic"):
        read_tensors(path)


def test_truncation_reports_position(tmp_path):
    path = tmp_path / "t.fpt"
    write_tensors(path, {"x": np.ones((4, 4), dtype=np.float32)})
    blob = path.read_bytes()
    (tmp_path / "cut.fpt").write_bytes(blob[:len(blob) - 10])
    with pytest.raises(TensorFileError, match=r"byte \d+"):
        read_tensors(tmp_path / "cut.fpt")


def test_trailing_garbage_rejected(tmp_path):
    path = tmp_path / "t.fpt"
    write_tensors(path, {"x": np.ones(2, dtype=np.float32)})
    path.write_bytes(path.read_bytes() + b"xx")
    with pytest.raises(TensorFileError, match="trailing"):
        read_tensors(path)
