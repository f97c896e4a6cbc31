import numpy as np
import pytest

from lyricmuse.tensorfile import MAGIC, TensorFileError, read_tensor, write_tensor


def test_round_trip(tmp_path):
    arr = np.arange(12, dtype=np.float32).reshape(3, 4)
    path = tmp_path / "t.mspc"
    write_tensor(path, arr)
    back = read_tensor(path)
    assert back.dtype == np.float32
    assert np.array_equal(back, arr)


def test_header_layout(tmp_path):
    path = tmp_path / "t.mspc"
    write_tensor(path, np.zeros((2, 5), dtype=np.float32))
    raw = path.read_bytes()
    assert raw[:4] == MAGIC
    assert int.from_bytes(raw[4:8], "little") == 2
    assert int.from_bytes(raw[8:12], "little") == 5
    assert len(raw) == 16 + 2 * 5 * 4


def test_rejects_non_2d(tmp_path):
    with pytest.raises(TensorFileError):
        write_tensor(tmp_path / "t.mspc", np.zeros(3))


def test_rejects_bad_magic(tmp_path):
    path = tmp_path / "t.mspc"
    write_tensor(path, np.zeros((1, 1), dtype=np.float32))
    data = bytearray(path.read_bytes())
    data[:4] = b"NOPE"
    path.write_bytes(bytes(data))
    with pytest.raises(TensorFileError):
        read_tensor(path)


def test_rejects_truncated(tmp_path):
    path = tmp_path / "t.mspc"
    write_tensor(path, np.ones((4, 4), dtype=np.float32))
    path.write_bytes(path.read_bytes()[:-8])
    with pytest.raises(TensorFileError):
        read_tensor(path)
