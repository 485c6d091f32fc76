"""The edge companion as a sans-IO actor.

Per query it reassembles the uplink audio, watches for the end of speech,
and on END_OF_UTTERANCE runs the staged pipeline::

    decode -> endpoint -> asr -> route -> inference -> tts -> encode_back

Every stage is a contiguous span on the virtual clock, so the stage
durations add up to the time from EOU arrival to the first response chunk
leaving the edge. Waiting for a requested photo counts towards inference.
Stages that do not apply to a query are recorded with zero duration.
"""

from __future__ import annotations

import json
import re
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from earedge.audio.adpcm import BLOCK_SAMPLES, adpcm_encode, decode_block
from earedge.audio.pcm import SAMPLE_RATE, PcmBuffer, resample
from earedge.edge.endpoint import EndpointDetector, endpoint_detect
from earedge.edge.stubs import StubSet, audio_key, render_vlm, synthesize
from earedge.errors import ConfigError
from earedge.intent.router import RouteDecision, Router
from earedge.sim import Send, Timer
from earedge.wire.frame import Frame, FrameType
from earedge.wire.payloads import (
    audio_frame,
    json_frame,
    parse_audio_payload,
    parse_json_payload,
)
from earedge.wire.session import (
    PROVISIONING,
    RUNTIME,
    FrameEvent,
    LinkDown,
    Session,
    session_step,
)

STAGES = ("decode", "endpoint", "asr", "route", "inference", "tts", "encode_back")
NOT_CAUGHT = "Sorry, I didn't catch that."
PHOTO_FAILED = "Sorry, I couldn't get a photo from the camera."


@dataclass(frozen=True)
class StageCosts:
    """Fixed compute costs (ms) of the non-model stages."""

    decode: float = 2.0
    endpoint: float = 1.0
    route: float = 5.0
    command: float = 1.0
    encode: float = 3.0

    @classmethod
    def from_dict(cls, d: dict) -> StageCosts:
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown stage cost(s): {sorted(unknown)}")
        vals = {k: float(v) for k, v in d.items()}
        if any(v < 0 for v in vals.values()):
            raise ConfigError("stage costs must be non-negative")
        return cls(**vals)


@dataclass(frozen=True)
class EdgeConfig:
    hangover_ms: float = 700.0
    endpoint_threshold_dbfs: float = -45.0
    photo_timeout_ms: float = 3000.0
    chunk_interval_ms: float = 1000 * BLOCK_SAMPLES / SAMPLE_RATE
    credentials: bytes = b"ssid=earedge;key=demo"
    costs: StageCosts = StageCosts()


@dataclass
class QueryRecord:
    id: int
    episode: int | None = None
    transcript: str = ""
    intent: str | None = None
    pathway: str | None = None
    confidence: float | None = None
    response_text: str = ""
    photo_ref: str | None = None
    stages: list[dict] = field(default_factory=list)
    eou_arrival_ms: float | None = None
    first_chunk_sent_ms: float | None = None
    photo_wait_ms: float = 0.0
    response_chunks: int = 0
    end_to_end_ms: float | None = None
    transport_ms: float | None = None
    aborted: bool = False

    @property
    def stage_total_ms(self) -> float:
        return sum(s["duration_ms"] for s in self.stages)

    def stage_ms(self, name: str) -> float:
        return sum(s["duration_ms"] for s in self.stages if s["name"] == name)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["stage_total_ms"] = self.stage_total_ms
        return d


def device_command(text: str) -> tuple[dict, str]:
    """Map a device-control utterance to a CONTROL message and a confirmation."""
    t = text.lower()
    if re.search(r"\b(photo|picture|pic|snap|capture)\b", t):
        return {"cmd": "capture"}, "Photo taken."
    if "volume" in t or "louder" in t or "quieter" in t:
        up = "up" in t or "louder" in t
        return {"cmd": "volume", "delta": 1 if up else -1}, f"Volume {'up' if up else 'down'}."
    if re.search(r"\b(stop|pause|mute)\b", t):
        return {"cmd": "stop"}, "Stopped."
    return {"cmd": "noop", "text": text}, "Okay."


@dataclass
class _Query:
    record: QueryRecord
    chunks: dict[int, np.ndarray] = field(default_factory=dict)
    fed: int = 0
    detector: EndpointDetector | None = None
    boundary_sent: bool = False
    eou: bool = False
    cursor: float = 0.0
    waiting_photo: str | None = None   # "visual" or "command" while a capture is pending
    photo_requested_t: float | None = None
    photo_meta: dict | None = None
    response: list = field(default_factory=list)
    sent: int = 0


class EdgeService:
    def __init__(self, stubs: StubSet, router: Router, cfg: EdgeConfig = EdgeConfig(),
                 log_path=None):
        self.stubs = stubs
        self.router = router
        self.cfg = cfg
        self.log_path = Path(log_path) if log_path else None
        self.session = Session()
        self.records: list[QueryRecord] = []
        self.photos: dict[str, bytes] = {}
        self.log: list[dict] = []
        self.sent_counts: dict[str, int] = {}
        self._q: _Query | None = None
        self._seq = 0

    # ---- helpers ---------------------------------------------------------

    def _event(self, t: float, name: str, **extra) -> None:
        self.log.append({"t_ms": round(t, 3), "actor": "edge", "event": name, **extra})

    def _next_seq(self) -> int:
        self._seq += 1
        return self._seq

    def _send(self, t: float, frame: Frame, channel: str = RUNTIME) -> list[Send]:
        self.session, errors = session_step(self.session, FrameEvent(frame, channel))
        if errors:
            self._event(t, "send_refused", frame=frame.type.name, state=self.session.state.value)
            return []
        self.sent_counts[frame.type.name] = self.sent_counts.get(frame.type.name, 0) + 1
        return [Send(t, frame, channel)]

    def _stage(self, q: _Query, name: str, duration: float) -> None:
        start = q.cursor
        q.cursor = start + duration
        q.record.stages.append({"name": name, "start_ms": round(start, 6),
                                "end_ms": round(q.cursor, 6), "duration_ms": round(duration, 6)})

    def _new_query(self) -> _Query:
        rec = QueryRecord(len(self.records))
        self.records.append(rec)
        det = EndpointDetector(self.cfg.hangover_ms, self.cfg.endpoint_threshold_dbfs)
        return _Query(rec, detector=det)

    # ---- actor interface -------------------------------------------------

    def start(self, now: float):
        self._event(now, "boot")
        return self._send(now, Frame(FrameType.PROVISION, self._next_seq(), self.cfg.credentials),
                          PROVISIONING)

    def on_link(self, up: bool, now: float):
        if up:
            return []
        self.session, _ = session_step(self.session, LinkDown())
        if self._q is not None:
            self._q.record.aborted = True
            self._event(now, "query_aborted", query=self._q.record.id)
            self._q = None
        return []

    def on_frame(self, frame: Frame, channel: str, now: float):
        self.session, errors = session_step(self.session, FrameEvent(frame, channel))
        if errors:
            self._event(now, "session_reject", frame=frame.type.name, state=self.session.state.value)
            return [Send(now, e, channel) for e in errors if channel == RUNTIME]
        t = frame.type
        if t == FrameType.PROVISION_ACK:
            self._event(now, "provisioned")
            return []
        if t == FrameType.HELLO:
            self._event(now, "hello")
            return self._send(now, json_frame(FrameType.HELLO, self._next_seq(), {"role": "edge"}))
        if t == FrameType.AUDIO_CHUNK:
            return self._on_audio(frame, now)
        if t == FrameType.END_OF_UTTERANCE:
            return self._on_eou(frame, now)
        if t == FrameType.PHOTO_META:
            if self._q is not None:
                self._q.photo_meta = parse_json_payload(frame.payload)
            return []
        if t == FrameType.PHOTO_DATA:
            return self._on_photo(frame, now)
        return []

    def on_timer(self, name: str, data, now: float):
        q = self._q
        if q is None or q.record.id != data:
            return []  # belongs to an aborted query
        if name == "routed":
            return self._after_route(q, now)
        if name == "photo_timeout":
            if q.waiting_photo is None:
                return []
            self._event(now, "photo_timeout", query=q.record.id)
            q.waiting_photo = None
            q.record.photo_wait_ms = now - q.cursor
            q.record.response_text = PHOTO_FAILED
            self._stage(q, "inference", now - q.cursor)
            return [Timer(now, "inferred", q.record.id)]
        if name == "inferred":
            return self._speak(q, now)
        if name == "tx":
            return self._tx(q, now)
        raise ValueError(f"unknown edge timer {name}")

    # ---- uplink ----------------------------------------------------------

    def _on_audio(self, frame: Frame, now: float):
        q = self._q
        if q is None or q.eou:
            q = self._q = self._new_query()
            self._event(now, "query_start", query=q.record.id)
        q.chunks[frame.seq] = decode_block(parse_audio_payload(frame.payload))
        out = []
        while q.fed in q.chunks:
            b = q.detector.feed(PcmBuffer(q.chunks[q.fed]))
            q.fed += 1
            if b is not None and not q.boundary_sent:
                q.boundary_sent = True
                self._event(now, "endpoint", query=q.record.id, t_s=b.t_s, speech_end_s=b.speech_end_s)
                out += self._send(now, json_frame(FrameType.CONTROL, self._next_seq(),
                                                  {"cmd": "endpoint"}))
        return out

    def _audio(self, q: _Query) -> PcmBuffer:
        if not q.chunks:
            return PcmBuffer(np.zeros(0, np.int16))
        last = max(q.chunks)
        parts = []
        for i in range(last + 1):
            # lost chunks are concealed with silence
            parts.append(q.chunks.get(i, np.zeros(BLOCK_SAMPLES, np.int16)))
        return PcmBuffer(np.concatenate(parts))

    def _on_eou(self, frame: Frame, now: float):
        q = self._q
        if q is None or q.eou:
            q = self._q = self._new_query()
        q.eou = True
        info = parse_json_payload(frame.payload)
        rec = q.record
        rec.episode = info.get("episode")
        rec.eou_arrival_ms = now
        q.cursor = now
        c = self.cfg.costs
        audio = self._audio(q)
        self._stage(q, "decode", c.decode)
        b = q.detector.boundary or endpoint_detect(
            [audio], hangover_ms=self.cfg.hangover_ms, threshold_dbfs=self.cfg.endpoint_threshold_dbfs)
        empty = b.empty if b is not None else not np.any(audio.samples)
        if b is not None and not b.empty:
            audio = audio.slice(0, b.speech_end_s)
        self._stage(q, "endpoint", c.endpoint)
        transcript, asr_ms = ("", 0.0) if empty else self.stubs.asr.lookup(audio_key(audio))
        rec.transcript = str(transcript).strip()
        self._stage(q, "asr", asr_ms)
        self._event(now, "eou", query=rec.id, chunks=len(q.chunks), transcript=rec.transcript)
        if not rec.transcript:
            rec.response_text = NOT_CAUGHT
            self._stage(q, "route", 0.0)
            self._stage(q, "inference", 0.0)
            return [Timer(q.cursor, "inferred", rec.id)]
        decision: RouteDecision = self.router.decide(rec.transcript)
        rec.intent, rec.pathway, rec.confidence = decision.intent, decision.pathway, decision.confidence
        self._stage(q, "route", c.route)
        return [Timer(q.cursor, "routed", rec.id)]

    def _after_route(self, q: _Query, now: float):
        rec = q.record
        if rec.pathway == "device_command":
            msg, confirmation = device_command(rec.transcript)
            out = self._send(now, json_frame(FrameType.CONTROL, self._next_seq(), msg))
            if msg["cmd"] == "capture":
                rec.response_text = confirmation
                return out + self._await_photo(q, now, "command")
            rec.response_text = confirmation
            self._stage(q, "inference", self.cfg.costs.command)
            return out + [Timer(q.cursor, "inferred", rec.id)]
        if rec.pathway == "visual_pipeline":
            out = self._send(now, json_frame(FrameType.CONTROL, self._next_seq(), {"cmd": "capture"}))
            return out + self._await_photo(q, now, "visual")
        text, ms = self.stubs.llm.lookup(rec.transcript)
        rec.response_text = str(text)
        self._stage(q, "inference", ms)
        return [Timer(q.cursor, "inferred", rec.id)]

    def _await_photo(self, q: _Query, now: float, why: str):
        q.waiting_photo = why
        q.photo_requested_t = now
        return [Timer(now + self.cfg.photo_timeout_ms, "photo_timeout", q.record.id)]

    def _on_photo(self, frame: Frame, now: float):
        q = self._q
        meta = (q.photo_meta if q is not None else None) or {}
        photo_id = str(meta.get("photo_id", f"photo-{len(self.photos)}"))
        self.photos[photo_id] = frame.payload
        self._event(now, "photo", photo=photo_id, bytes=len(frame.payload))
        if q is None or q.waiting_photo is None:
            return []
        why, q.waiting_photo = q.waiting_photo, None
        q.record.photo_ref = photo_id
        wait = now - q.cursor
        q.record.photo_wait_ms = wait
        if why == "command":
            self._stage(q, "inference", wait + self.cfg.costs.command)
        else:
            out, ms = self.stubs.vlm.lookup(q.record.transcript)
            q.record.response_text = render_vlm(out)
            self._stage(q, "inference", wait + ms)
        return [Timer(q.cursor, "inferred", q.record.id)]

    # ---- downlink --------------------------------------------------------

    def _speak(self, q: _Query, now: float):
        text = q.record.response_text
        _, tts_ms = self.stubs.tts.lookup(text)
        self._stage(q, "tts", tts_ms)
        pcm = resample(synthesize(text), SAMPLE_RATE)
        q.response = adpcm_encode(pcm)
        self._stage(q, "encode_back", self.cfg.costs.encode)
        return [Timer(q.cursor, "tx", q.record.id)]

    def _tx(self, q: _Query, now: float):
        rec = q.record
        if q.sent < len(q.response):
            if q.sent == 0:
                rec.first_chunk_sent_ms = now
            out = self._send(now, audio_frame(FrameType.RESPONSE_AUDIO, q.sent, q.response[q.sent]))
            q.sent += 1
            rec.response_chunks = q.sent
            return out + [Timer(now + self.cfg.chunk_interval_ms, "tx", rec.id)]
        out = self._send(now, json_frame(FrameType.END_OF_RESPONSE, self._next_seq(),
                                         {"chunks": q.sent, "query": rec.id}))
        self._event(now, "response_done", query=rec.id, chunks=q.sent)
        self._q = None
        self._write_log(rec)
        return out

    def _write_log(self, rec: QueryRecord) -> None:
        if self.log_path is None:
            return
        self.log_path.parent.mkdir(parents=True, exist_ok=True)
        with self.log_path.open("a") as fh:
            fh.write(json.dumps(rec.to_dict(), sort_keys=True) + "\n")


__all__ = [
    "STAGES",
    "EdgeConfig",
    "EdgeService",
    "QueryRecord",
    "StageCosts",
    "device_command",
]
