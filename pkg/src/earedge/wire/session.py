"""Link-level session state machine.

Both ends of a link feed every frame they send or receive through
:func:`session_step`, so device and edge agree on the session state. The
function is pure: it returns the next session and the frames to emit,
which are ERROR frames for rejected events.

Two logical channels exist. ``provisioning`` stands in for the short-range
pairing radio and carries only PROVISION / PROVISION_ACK. ``runtime``
carries everything else. PROVISION on the runtime channel is always refused.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace

from earedge.wire.frame import Frame, FrameType
from earedge.wire.payloads import error_frame

PROVISIONING = "provisioning"
RUNTIME = "runtime"
CHANNELS = (PROVISIONING, RUNTIME)


class SessionState(enum.Enum):
    DISCOVERED = "Discovered"
    PROVISIONING = "Provisioning"
    PROVISIONED = "Provisioned"
    CONNECTED = "Connected"
    STREAMING_QUERY = "StreamingQuery"
    AWAITING_RESPONSE = "AwaitingResponse"
    PLAYING_RESPONSE = "PlayingResponse"
    IDLE = "Idle"


S = SessionState
T = FrameType
RUNTIME_STATES = frozenset({S.CONNECTED, S.STREAMING_QUERY, S.AWAITING_RESPONSE,
                            S.PLAYING_RESPONSE, S.IDLE})
# accepted in every runtime state without a transition: liveness traffic,
# and ERROR, which is never answered with another ERROR
_ALWAYS_OK = frozenset({T.PING, T.HELLO, T.ERROR})

# (state, frame type) -> next state, for frames on the runtime channel
RUNTIME_TABLE: dict[tuple[SessionState, FrameType], SessionState] = {
    (S.PROVISIONED, T.HELLO): S.CONNECTED,
    (S.CONNECTED, T.HELLO): S.CONNECTED,
    (S.CONNECTED, T.AUDIO_CHUNK): S.STREAMING_QUERY,
    (S.CONNECTED, T.CONTROL): S.CONNECTED,
    (S.STREAMING_QUERY, T.AUDIO_CHUNK): S.STREAMING_QUERY,
    (S.STREAMING_QUERY, T.CONTROL): S.STREAMING_QUERY,
    (S.STREAMING_QUERY, T.END_OF_UTTERANCE): S.AWAITING_RESPONSE,
    (S.AWAITING_RESPONSE, T.CONTROL): S.AWAITING_RESPONSE,
    (S.AWAITING_RESPONSE, T.PHOTO_META): S.AWAITING_RESPONSE,
    (S.AWAITING_RESPONSE, T.PHOTO_DATA): S.AWAITING_RESPONSE,
    (S.AWAITING_RESPONSE, T.RESPONSE_AUDIO): S.PLAYING_RESPONSE,
    (S.AWAITING_RESPONSE, T.END_OF_RESPONSE): S.IDLE,
    (S.AWAITING_RESPONSE, T.ERROR): S.IDLE,
    (S.PLAYING_RESPONSE, T.RESPONSE_AUDIO): S.PLAYING_RESPONSE,
    (S.PLAYING_RESPONSE, T.CONTROL): S.PLAYING_RESPONSE,
    (S.PLAYING_RESPONSE, T.END_OF_RESPONSE): S.IDLE,
    (S.IDLE, T.HELLO): S.CONNECTED,
    (S.IDLE, T.CONTROL): S.IDLE,
}

PROVISION_TABLE: dict[tuple[SessionState, FrameType], SessionState] = {
    (S.DISCOVERED, T.PROVISION): S.PROVISIONING,
    (S.PROVISIONING, T.PROVISION): S.PROVISIONING,
    (S.PROVISIONING, T.PROVISION_ACK): S.PROVISIONED,
}


@dataclass(frozen=True)
class FrameEvent:
    frame: Frame
    channel: str = RUNTIME


@dataclass(frozen=True)
class LinkDown:
    """The runtime link dropped (sleep, out of range)."""


@dataclass(frozen=True)
class ResponseTimeout:
    """No response arrived while awaiting one."""


@dataclass(frozen=True)
class Session:
    state: SessionState = S.DISCOVERED
    credentials: bytes | None = None
    rejected: int = 0


def _reject(session: Session, reason: str):
    return replace(session, rejected=session.rejected + 1), [error_frame(reason)]


def session_step(session: Session, event) -> tuple[Session, list[Frame]]:
    """Apply one event; illegal events leave the state untouched."""
    if isinstance(event, LinkDown):
        if session.state in RUNTIME_STATES:
            return replace(session, state=S.PROVISIONED), []
        return session, []
    if isinstance(event, ResponseTimeout):
        if session.state == S.AWAITING_RESPONSE:
            return replace(session, state=S.IDLE), [error_frame("response timeout")]
        return session, []
    if not isinstance(event, FrameEvent):
        raise TypeError(f"unsupported event {event!r}")
    ftype = event.frame.type
    if event.channel == PROVISIONING:
        nxt = PROVISION_TABLE.get((session.state, ftype))
        if nxt is None:
            return _reject(session, f"{ftype.name} not accepted on the provisioning channel "
                                    f"in {session.state.value}")
        creds = event.frame.payload if ftype == T.PROVISION else session.credentials
        return replace(session, state=nxt, credentials=creds), []
    if event.channel != RUNTIME:
        raise ValueError(f"unknown channel {event.channel!r}")
    if ftype in (T.PROVISION, T.PROVISION_ACK):
        return _reject(session, f"{ftype.name} refused on the runtime channel")
    nxt = RUNTIME_TABLE.get((session.state, ftype))
    if nxt is None and ftype in _ALWAYS_OK and session.state in RUNTIME_STATES:
        return session, []
    if nxt is None:
        if ftype == T.ERROR:
            return session, []
        return _reject(session, f"{ftype.name} not valid in {session.state.value}")
    return replace(session, state=nxt), []


def transition_table() -> list[tuple[str, str, str, str]]:
    """(state, channel, frame type, next state) rows, for documentation."""
    rows = [(s.value, PROVISIONING, t.name, n.value) for (s, t), n in PROVISION_TABLE.items()]
    rows += [(s.value, RUNTIME, t.name, n.value) for (s, t), n in RUNTIME_TABLE.items()]
    return rows
