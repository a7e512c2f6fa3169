import numpy as np
import pytest

from baryrom import DataIntegrityError
from baryrom.io import (
    check_file,
    read_archive,
    read_matrix,
    sha256_file,
    write_archive,
    write_matrix,
)


def test_matrix_roundtrip(tmp_path, rng):
    arr = rng.standard_normal((7, 3))
    path = tmp_path / "m.mat"
    write_matrix(path, arr)
    back = read_matrix(path)
    assert back.tobytes() == arr.tobytes()


def test_matrix_vector_promoted_to_column(tmp_path):
    path = tmp_path / "v.mat"
    write_matrix(path, np.array([1.0, 2.0, 3.0]))
    assert read_matrix(path).shape == (3, 1)


def test_matrix_header_layout(tmp_path):
    path = tmp_path / "m.mat"
    write_matrix(path, np.zeros((2, 5)))
    raw = path.read_bytes()
    assert raw[:8] == b"ROMBMAT1"
    assert int.from_bytes(raw[8:16], "little") == 2
    assert int.from_bytes(raw[16:24], "little") == 5
    assert len(raw) == 24 + 2 * 5 * 8


def test_matrix_rejects_bad_magic(tmp_path):
    path = tmp_path / "bad.mat"
    path.write_bytes(b"NOTMAGIC" + b"\x00" * 32)
    with pytest.raises(DataIntegrityError):
        read_matrix(path)


def test_matrix_rejects_truncated_payload(tmp_path):
    path = tmp_path / "trunc.mat"
    write_matrix(path, np.zeros((4, 4)))
    raw = path.read_bytes()
    path.write_bytes(raw[:-8])
    with pytest.raises(DataIntegrityError):
        read_matrix(path)


def test_archive_roundtrip_and_determinism(tmp_path, rng):
    arrays = {
        "M": rng.standard_normal((2, 2, 3, 3)),
        "F": rng.standard_normal((2, 3)),
        "params": np.array([0.05, 0.07]),
    }
    meta = {"q": 3, "nx": 64, "dx": 0.1}
    p1 = tmp_path / "a.arc"
    p2 = tmp_path / "b.arc"
    write_archive(p1, arrays, meta)
    write_archive(p2, arrays, meta)
    assert p1.read_bytes() == p2.read_bytes()
    back, meta_back = read_archive(p1)
    assert meta_back == meta
    for name, arr in arrays.items():
        assert back[name].tobytes() == arr.tobytes()
        assert back[name].shape == arr.shape


def test_archive_rejects_bad_magic(tmp_path):
    path = tmp_path / "bad.arc"
    path.write_bytes(b"WRONGMAG" + b"\x00" * 16)
    with pytest.raises(DataIntegrityError):
        read_archive(path)


def test_check_file_hash_mismatch(tmp_path):
    path = tmp_path / "f.mat"
    write_matrix(path, np.ones((2, 2)))
    entry = {"path": "f.mat", "sha256": sha256_file(path)}
    assert check_file(tmp_path, entry) == path
    path.write_bytes(path.read_bytes() + b"x")
    with pytest.raises(DataIntegrityError):
        check_file(tmp_path, entry)
    with pytest.raises(DataIntegrityError):
        check_file(tmp_path, {"path": "missing.mat", "sha256": "00"})
