"""Wire format: exact frame bytes, payload section layouts, and
malformed-input rejection."""

import struct

import numpy as np
import pytest

from splitcomp.errors import (
    CorruptionError,
    FormatError,
    ParameterError,
    TaskError,
)
from splitcomp.net import wire


def test_frame_layout_is_byte_exact():
    raw = wire.pack_frame(wire.Frame(wire.MSG_REQUEST, 0x07, b"abc"))
    assert raw == b"LDN1" + bytes([0, 0x07]) + b"\x00\x00\x00\x03" + b"abc"
    assert len(raw) == 13


def test_pack_frame_validation():
    with pytest.raises(ParameterError):
        wire.pack_frame(wire.Frame(9, 0, b""))
    with pytest.raises(ParameterError):
        wire.pack_frame(wire.Frame(wire.MSG_REQUEST, 300, b""))


def test_task_mask_round_trip():
    mask = wire.mask_for_tasks({"classify", "segment"})
    assert mask == 0x05
    assert wire.tasks_for_mask(mask) == ("classify", "segment")
    assert wire.mask_for_tasks({"detect"}, echo=True) == 0x82
    with pytest.raises(TaskError):
        wire.mask_for_tasks({"translate"})
    with pytest.raises(TaskError):
        wire.mask_for_tasks(set())


def test_error_payload_round_trip():
    payload = wire.pack_error(wire.ERR_BAD_MODEL, "no model 9")
    assert payload[:2] == b"\x00\x05"
    assert wire.parse_error(payload) == (wire.ERR_BAD_MODEL, "no model 9")
    with pytest.raises(CorruptionError):
        wire.parse_error(b"\x01")


def test_classify_section_bytes():
    logits = np.array([0.0, 2.0, 1.0])
    payload = wire.serialize_predictions({"classify": logits})
    cls, score = struct.unpack(">Hf", payload)
    assert cls == 1
    e = np.exp([0.0 - 2.0, 0.0, 1.0 - 2.0])
    assert score == pytest.approx(e[1] / e.sum(), rel=1e-6)
    parsed = wire.parse_predictions(payload, 0x01)
    assert parsed["classify"] == (cls, score)


def test_detect_section_bytes():
    records = [((1.0, 2.0, 3.0, 4.0), 0.5), ((0.0, 0.0, 8.0, 8.0), 1.0)]
    payload = wire.serialize_predictions({"detect": records})
    assert len(payload) == 2 + 2 * 18
    assert payload[:2] == b"\x00\x02"
    parsed = wire.parse_predictions(payload, 0x02)
    for (box, score), (pbox, pscore) in zip(records, parsed["detect"]):
        assert pbox == box
        assert abs(pscore - score) <= 0.5 / 0xFFFF


def test_segment_rle_round_trip():
    classes = np.array([[0, 0, 1], [1, 1, 2]])
    payload = wire.serialize_predictions({"segment": classes})
    h, w, nruns = struct.unpack_from(">HHI", payload)
    assert (h, w, nruns) == (2, 3, 3)
    runs = [struct.unpack_from(">HH", payload, 8 + 4 * i) for i in range(3)]
    assert runs == [(0, 2), (1, 3), (2, 1)]
    parsed = wire.parse_predictions(payload, 0x04)
    np.testing.assert_array_equal(parsed["segment"], classes)


def test_segment_run_longer_than_u16_splits():
    classes = np.zeros((300, 300), dtype=np.int64)
    payload = wire.serialize_predictions({"segment": classes})
    parsed = wire.parse_predictions(payload, 0x04)
    np.testing.assert_array_equal(parsed["segment"], classes)


def test_sections_concatenate_in_canonical_order():
    preds = {"segment": np.array([[1]]), "classify": np.array([3.0, 1.0]),
             "detect": [((0.0, 0.0, 1.0, 1.0), 0.25)]}
    payload = wire.serialize_predictions(preds)
    parsed = wire.parse_predictions(payload, 0x07)
    assert list(parsed) == ["classify", "detect", "segment"]


def test_parse_rejects_trailing_and_truncated():
    payload = wire.serialize_predictions({"classify": np.array([1.0, 0.0])})
    with pytest.raises(CorruptionError):
        wire.parse_predictions(payload + b"x", 0x01)
    with pytest.raises(CorruptionError):
        wire.parse_predictions(payload[:-1], 0x01)


def test_parse_rejects_bad_segment_runs():
    # runs that overflow the declared 1x1 map
    payload = struct.pack(">HHI", 1, 1, 1) + struct.pack(">HH", 0, 2)
    with pytest.raises(CorruptionError):
        wire.parse_predictions(payload, 0x04)
    # runs that underfill it
    payload = struct.pack(">HHI", 1, 2, 1) + struct.pack(">HH", 0, 1)
    with pytest.raises(CorruptionError):
        wire.parse_predictions(payload, 0x04)


def test_symbols_round_trip():
    z = np.arange(24).reshape(2, 3, 4) - 12
    payload = wire.serialize_symbols(z)
    assert len(payload) == 6 + 4 * 24
    assert payload[:6] == b"\x00\x02\x00\x03\x00\x04"
    back = wire.parse_symbols(payload)
    np.testing.assert_array_equal(back, z)
    assert back.dtype == np.int64


def test_symbols_validation():
    with pytest.raises(ParameterError):
        wire.serialize_symbols(np.zeros((2, 2)))
    with pytest.raises(CorruptionError):
        wire.parse_symbols(b"\x00\x01")
    with pytest.raises(CorruptionError):
        wire.parse_symbols(b"\x00\x01\x00\x01\x00\x01" + b"\x00" * 3)


def test_read_frame_strictness():
    import io

    good = wire.pack_frame(wire.Frame(wire.MSG_RESPONSE, 0x01, b"hi"))
    frame = wire.read_frame(io.BytesIO(good))
    assert frame == wire.Frame(wire.MSG_RESPONSE, 0x01, b"hi")
    with pytest.raises(FormatError):
        wire.read_frame(io.BytesIO(b"XXXX" + good[4:]))
    with pytest.raises(CorruptionError):
        wire.read_frame(io.BytesIO(good[:-1]))
    bad_type = bytearray(good)
    bad_type[4] = 9
    with pytest.raises(FormatError):
        wire.read_frame(io.BytesIO(bytes(bad_type)))
