import numpy as np
import pytest
from PIL import Image

from scenetext.errors import IngestionError
from scenetext.rasters import read_raster, read_raw, write_raw


def test_raw_roundtrip(tmp_path):
    a = np.random.default_rng(0).random((7, 5)).astype(np.float32)
    write_raw(tmp_path / "a.raw", a)
    assert (tmp_path / "a.raw").read_bytes().startswith(b"7 5 f32\n")
    np.testing.assert_array_equal(read_raw(tmp_path / "a.raw"), a)
    np.testing.assert_array_equal(read_raster(tmp_path / "a.raw"), a)


def test_sixteen_bit_png_scaled(tmp_path):
    a = np.array([[0, 65535], [32768, 1000]], dtype=np.uint16)
    Image.fromarray(a).save(tmp_path / "u.png")
    np.testing.assert_allclose(read_raster(tmp_path / "u.png"), a / 65535.0)


def test_bad_header(tmp_path):
    (tmp_path / "b.raw").write_bytes(b"3 3 f64\n" + bytes(72))
    with pytest.raises(IngestionError):
        read_raw(tmp_path / "b.raw")


def test_truncated_payload(tmp_path):
    (tmp_path / "t.raw").write_bytes(b"3 3 f32\n" + bytes(8))
    with pytest.raises(IngestionError):
        read_raw(tmp_path / "t.raw")
