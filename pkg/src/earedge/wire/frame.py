"""Binary frame codec.

Layout, little-endian::

    0xED 0x01 | type u8 | seq u32 | payload_len u16 | payload | crc32 u32

The CRC (IEEE 802.3, as in zlib) covers every byte before it.
"""

from __future__ import annotations

import enum
import struct
import zlib
from dataclasses import dataclass

from earedge.errors import EarEdgeError

MAGIC = b"\xed\x01"
HEADER = struct.Struct("<2sBIH")
CRC = struct.Struct("<I")
OVERHEAD = HEADER.size + CRC.size  # 13
MAX_PAYLOAD = 0xFFFF
MAX_SEQ = 0xFFFFFFFF


class FrameType(enum.IntEnum):
    HELLO = 1
    PROVISION = 2
    PROVISION_ACK = 3
    AUDIO_CHUNK = 4
    PHOTO_META = 5
    PHOTO_DATA = 6
    CONTROL = 7
    RESPONSE_AUDIO = 8
    END_OF_UTTERANCE = 9
    END_OF_RESPONSE = 10
    PING = 11
    ERROR = 12


class FrameError(EarEdgeError, ValueError):
    """Base class for undecodable frames."""


class BadMagicError(FrameError):
    pass


class CrcError(FrameError):
    pass


class TruncatedFrameError(FrameError):
    pass


class UnknownTypeError(FrameError):
    pass


class TrailingBytesError(FrameError):
    pass


@dataclass(frozen=True)
class Frame:
    type: FrameType
    seq: int = 0
    payload: bytes = b""

    def __post_init__(self):
        if not 0 <= self.seq <= MAX_SEQ:
            raise ValueError(f"seq {self.seq} outside u32")
        if len(self.payload) > MAX_PAYLOAD:
            raise ValueError(f"payload of {len(self.payload)} bytes exceeds {MAX_PAYLOAD}")
        object.__setattr__(self, "type", FrameType(self.type))
        object.__setattr__(self, "payload", bytes(self.payload))

    @property
    def wire_size(self) -> int:
        return OVERHEAD + len(self.payload)


def encode_frame(frame: Frame) -> bytes:
    body = HEADER.pack(MAGIC, int(frame.type), frame.seq, len(frame.payload)) + frame.payload
    return body + CRC.pack(zlib.crc32(body))


def frame_length(data: bytes) -> int:
    """Total size of the frame at the start of ``data``, from its header."""
    if len(data) < HEADER.size:
        raise TruncatedFrameError(f"{len(data)} bytes, header needs {HEADER.size}")
    if data[:2] != MAGIC:
        raise BadMagicError(f"bad magic {bytes(data[:2]).hex()}")
    (length,) = struct.unpack_from("<H", data, 7)
    return HEADER.size + length + CRC.size


def decode_frame(data: bytes) -> Frame:
    """Decode exactly one frame; any surplus bytes are an error."""
    data = bytes(data)
    if len(data) >= 2 and data[:2] != MAGIC:
        raise BadMagicError(f"bad magic {data[:2].hex()}")
    total = frame_length(data)
    if len(data) < total:
        raise TruncatedFrameError(f"{len(data)} of {total} bytes")
    if len(data) > total:
        raise TrailingBytesError(f"{len(data) - total} bytes after the frame")
    body = data[:-CRC.size]
    (crc,) = CRC.unpack_from(data, total - CRC.size)
    if zlib.crc32(body) != crc:
        raise CrcError("checksum mismatch")
    _, ftype, seq, _ = HEADER.unpack_from(data)
    try:
        ftype = FrameType(ftype)
    except ValueError:
        raise UnknownTypeError(f"unknown frame type {ftype}") from None
    return Frame(ftype, seq, body[HEADER.size:])


class FrameReader:
    """Incremental decoder for a byte stream.

    Corrupt frames are recorded in ``errors`` and skipped by scanning
    forward to the next magic, so one bad frame does not poison the stream.
    """

    def __init__(self):
        self.buf = bytearray()
        self.errors: list[FrameError] = []

    def feed(self, data: bytes) -> list[Frame]:
        self.buf += data
        frames = []
        while True:
            start = self.buf.find(MAGIC)
            if start < 0:
                # keep a trailing 0xED that may begin the next magic
                del self.buf[: max(0, len(self.buf) - 1)]
                return frames
            if start:
                self.errors.append(BadMagicError(f"skipped {start} bytes"))
                del self.buf[:start]
            if len(self.buf) < HEADER.size:
                return frames
            total = frame_length(self.buf)
            if len(self.buf) < total:
                return frames
            chunk = bytes(self.buf[:total])
            try:
                frames.append(decode_frame(chunk))
                del self.buf[:total]
            except FrameError as exc:
                self.errors.append(exc)
                del self.buf[:1]
