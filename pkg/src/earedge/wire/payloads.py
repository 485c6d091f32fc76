"""Payload encodings for the frame types that carry structured data."""

from __future__ import annotations

import json
import struct

from earedge.audio.adpcm import HEADER_BYTES, AdpcmBlock
from earedge.wire.frame import MAX_PAYLOAD, Frame, FrameType

AUDIO_PREFIX = struct.Struct("<H")
JSON_TYPES = frozenset({FrameType.CONTROL, FrameType.PHOTO_META, FrameType.ERROR,
                        FrameType.HELLO, FrameType.PROVISION_ACK, FrameType.END_OF_RESPONSE})


def audio_payload(block: AdpcmBlock) -> bytes:
    """``sample_count u16`` followed by the ADPCM block bytes."""
    return AUDIO_PREFIX.pack(block.sample_count) + block.to_bytes()


def parse_audio_payload(payload: bytes) -> AdpcmBlock:
    if len(payload) < AUDIO_PREFIX.size + HEADER_BYTES:
        raise ValueError("audio payload too short")
    (count,) = AUDIO_PREFIX.unpack_from(payload)
    return AdpcmBlock.from_bytes(payload[AUDIO_PREFIX.size:], count)


def json_payload(obj) -> bytes:
    raw = json.dumps(obj, sort_keys=True, separators=(",", ":")).encode()
    if len(raw) > MAX_PAYLOAD:
        raise ValueError("JSON payload too large for one frame")
    return raw


def parse_json_payload(payload: bytes):
    return json.loads(payload.decode()) if payload else {}


def audio_frame(kind: FrameType, seq: int, block: AdpcmBlock) -> Frame:
    return Frame(kind, seq, audio_payload(block))


def json_frame(kind: FrameType, seq: int, obj) -> Frame:
    return Frame(kind, seq, json_payload(obj))


def error_frame(reason: str, seq: int = 0) -> Frame:
    return json_frame(FrameType.ERROR, seq, {"reason": reason})
