import json
import struct

import numpy as np
import pytest

from lnop.container import (
    MAGIC,
    file_digest,
    read_bundle,
    read_pairs,
    read_sidecar,
    sidecar_path,
    write_bundle,
    write_pairs,
)
from lnop.errors import FormatError


@pytest.fixture
def pairs(rng):
    return rng.standard_normal((3, 2, 4, 5)), rng.standard_normal((3, 1, 4, 5))


def test_pairs_round_trip_bit_identical(tmp_path, pairs):
    write_pairs(tmp_path / "d.lnop", *pairs, {"seed": 1})
    x, y, meta = read_pairs(tmp_path / "d.lnop")
    assert x.tobytes() == pairs[0].tobytes() and y.tobytes() == pairs[1].tobytes()
    assert meta == {"seed": 1}


def test_header_layout(tmp_path, pairs):
    path = tmp_path / "d.lnop"
    write_pairs(path, *pairs, {})
    raw = path.read_bytes()
    assert raw[:4] == MAGIC
    assert struct.unpack_from("<7I", raw, 4) == (1, 3, 2, 4, 5, 2, 1)
    assert len(raw) == 4 + 7 * 4 + 3 * (2 + 1) * 20 * 8
    # payload: sample 0 input then sample 0 target, little-endian f64
    first = np.frombuffer(raw, "<f8", count=1, offset=32)[0]
    assert first == pairs[0][0, 0, 0, 0]
    tgt0 = np.frombuffer(raw, "<f8", count=1, offset=32 + 40 * 8)[0]
    assert tgt0 == pairs[1][0, 0, 0, 0]


def test_sidecar_is_json(tmp_path, pairs):
    write_pairs(tmp_path / "d.lnop", *pairs, {"family": "burgers"})
    assert sidecar_path(tmp_path / "d.lnop").name == "d.lnop.json"
    assert json.loads((tmp_path / "d.lnop.json").read_text()) == {"family": "burgers"}


def test_missing_sidecar_reads_empty(tmp_path, pairs):
    write_pairs(tmp_path / "d.lnop", *pairs, {})
    (tmp_path / "d.lnop.json").unlink()
    assert read_sidecar(tmp_path / "d.lnop") == {}


def test_bad_sidecar(tmp_path, pairs):
    write_pairs(tmp_path / "d.lnop", *pairs, {})
    (tmp_path / "d.lnop.json").write_text("{nope")
    with pytest.raises(FormatError, match="sidecar"):
        read_pairs(tmp_path / "d.lnop")


@pytest.mark.parametrize("cut", [2, 10, 31, 100])
def test_truncation_reports_offset(tmp_path, pairs, cut):
    path = tmp_path / "d.lnop"
    write_pairs(path, *pairs, {})
    path.write_bytes(path.read_bytes()[:cut])
    with pytest.raises(FormatError, match="byte offset"):
        read_pairs(path)


def test_bad_magic_version_and_trailing_bytes(tmp_path, pairs):
    path = tmp_path / "d.lnop"
    write_pairs(path, *pairs, {})
    raw = path.read_bytes()
    path.write_bytes(b"XXXX" + raw[4:])
    with pytest.raises(FormatError, match="magic"):
        read_pairs(path)
    path.write_bytes(raw[:4] + struct.pack("<I", 9) + raw[8:])
    with pytest.raises(FormatError, match="version 9"):
        read_pairs(path)
    path.write_bytes(raw + b"\0")
    with pytest.raises(FormatError, match="trailing"):
        read_pairs(path)


def test_missing_file(tmp_path):
    with pytest.raises(FormatError, match="cannot read"):
        read_pairs(tmp_path / "none.lnop")


def test_unpaired_write(tmp_path):
    with pytest.raises(FormatError):
        write_pairs(tmp_path / "d.lnop", np.zeros((2, 1, 4)), np.zeros((3, 1, 4)), {})


def test_bundle_round_trip(tmp_path, rng):
    tensors = [rng.standard_normal((3, 2)), rng.standard_normal(4), rng.standard_normal((2, 2, 2, 1))]
    write_bundle(tmp_path / "b.lnop", tensors, {"kind": "checkpoint"})
    back, meta = read_bundle(tmp_path / "b.lnop")
    assert meta == {"kind": "checkpoint"}
    for a, b in zip(tensors, back):
        assert a.shape == b.shape and a.tobytes() == b.tobytes()
    with pytest.raises(FormatError, match="version 2"):
        read_pairs(tmp_path / "b.lnop")


def test_digest_is_content_hash(tmp_path, pairs):
    write_pairs(tmp_path / "a.lnop", *pairs, {"x": 1})
    write_pairs(tmp_path / "b.lnop", *pairs, {"x": 2})
    assert file_digest(tmp_path / "a.lnop") == file_digest(tmp_path / "b.lnop")
    assert len(file_digest(tmp_path / "a.lnop")) == 64
