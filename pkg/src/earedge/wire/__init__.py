"""Device-edge wire protocol: framing, session, jitter buffer."""

from earedge.wire.frame import (
    OVERHEAD,
    BadMagicError,
    CrcError,
    Frame,
    FrameError,
    FrameReader,
    FrameType,
    TruncatedFrameError,
    UnknownTypeError,
    decode_frame,
    encode_frame,
)
from earedge.wire.jitter import JitterBuffer, JitterStatus
from earedge.wire.session import (
    PROVISIONING,
    RUNTIME,
    FrameEvent,
    LinkDown,
    ResponseTimeout,
    Session,
    SessionState,
    session_step,
)

__all__ = [
    "OVERHEAD",
    "PROVISIONING",
    "RUNTIME",
    "BadMagicError",
    "CrcError",
    "Frame",
    "FrameError",
    "FrameEvent",
    "FrameReader",
    "FrameType",
    "JitterBuffer",
    "JitterStatus",
    "LinkDown",
    "ResponseTimeout",
    "Session",
    "SessionState",
    "TruncatedFrameError",
    "UnknownTypeError",
    "decode_frame",
    "encode_frame",
    "session_step",
]
