"""The emulated earpiece as a sans-IO actor.

It listens with the wake-word detector, streams the query as 320-sample
ADPCM chunks, answers capture requests with one photo, and plays response
audio through a jitter buffer. Times are milliseconds of simulated time;
the microphone clock and the simulation clock coincide.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from earedge.audio.adpcm import BLOCK_SAMPLES, AdpcmEncoder, decode_block
from earedge.audio.pcm import SAMPLE_RATE, PcmBuffer
from earedge.device.power import DeviceState, EnergyLedger, PowerProfile, simulate_power
from earedge.kws.detector import DetectorConfig, StreamingDetector
from earedge.sim import Send, Timer
from earedge.wire.frame import Frame, FrameType
from earedge.wire.jitter import JitterBuffer, JitterStatus
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
    SessionState,
    session_step,
)

CHUNK_MS = 1000 * BLOCK_SAMPLES / SAMPLE_RATE


@dataclass(frozen=True)
class DeviceConfig:
    detector: DetectorConfig = DetectorConfig()
    max_query_s: float = 10.0         # safety cap on one query
    prebuffer_ms: float = 300.0
    backoff_ms: tuple[float, ...] = (100.0, 200.0, 400.0, 800.0, 1600.0)
    photo_mime: str = "image/png"


@dataclass
class Photo:
    name: str
    data: bytes


@dataclass
class Episode:
    """One wake-word-triggered query as seen by the device."""

    index: int
    wake_t: float
    stream_start_sample: int
    chunks_sent: int = 0
    eou_sent_t: float | None = None
    stop_reason: str | None = None
    photos_sent: int = 0
    first_audio_t: float | None = None
    response_done_t: float | None = None
    response_samples: int = 0
    underruns: int = 0
    aborted: bool = False


class Device:
    def __init__(self, mic: PcmBuffer, model, photos=(), cfg: DeviceConfig = DeviceConfig(),
                 profile: PowerProfile = PowerProfile()):
        if mic.sample_rate_hz != SAMPLE_RATE or mic.channels != 1:
            raise ValueError("device microphone must be 16 kHz mono")
        self.mic = mic
        self.cfg = cfg
        self.profile = profile
        self.detector = StreamingDetector(model, cfg.detector)
        self.photos = [p if isinstance(p, Photo) else Photo(*p) for p in photos]
        self.session = Session()
        self.log: list[dict] = []
        self.episodes: list[Episode] = []
        self.power_timeline: list[tuple[float, DeviceState]] = []
        self.sent_counts: dict[str, int] = {}
        self.speaker: list[np.ndarray] = []
        self._seq = 0
        self._photo_cursor = 0
        self._episode: Episode | None = None
        self._streaming = False
        self._stop_requested = False
        self._encoder = AdpcmEncoder()
        self._jb: JitterBuffer | None = None
        self._speaker_running = False
        self._rearm_sample = 0
        self._link_confirmed = False
        self._backoff_i = 0
        self._hello_pending = False
        self.now = 0.0

    # ---- helpers ---------------------------------------------------------

    def _event(self, t: float, name: str, **extra) -> None:
        self.log.append({"t_ms": round(t, 3), "actor": "device", "event": name, **extra})

    def _set_power(self, t: float, state: DeviceState) -> None:
        if not self.power_timeline or self.power_timeline[-1][1] != state:
            self.power_timeline.append((t, state))
            self._event(t, "power", state=state.value)

    @property
    def state(self) -> DeviceState:
        return self.power_timeline[-1][1] if self.power_timeline else DeviceState.BASELINE_LISTENING

    def _feed(self, frame: Frame, channel: str, t: float) -> list[Send]:
        self.session, errors = session_step(self.session, FrameEvent(frame, channel))
        if errors:
            self._event(t, "session_reject", frame=frame.type.name, state=self.session.state.value)
        return [Send(t, e, RUNTIME) for e in errors if channel == RUNTIME]

    def _send(self, t: float, frame: Frame, channel: str = RUNTIME) -> list[Send]:
        self.session, errors = session_step(self.session, FrameEvent(frame, channel))
        if errors:
            # refusing our own frame: do not put it on the air
            self._event(t, "send_refused", frame=frame.type.name, state=self.session.state.value)
            return []
        name = frame.type.name
        self.sent_counts[name] = self.sent_counts.get(name, 0) + 1
        return [Send(t, frame, channel)]

    def _next_seq(self) -> int:
        self._seq += 1
        return self._seq

    def _window_samples(self) -> tuple[int, int]:
        rate = SAMPLE_RATE
        return int(round(self.cfg.detector.window_s * rate)), int(round(self.cfg.detector.stride_s * rate))

    def _schedule_detect(self, from_sample: int) -> list[Timer]:
        win, hop = self._window_samples()
        start = -(-from_sample // hop) * hop  # next grid point at or after from_sample
        if start + win > len(self.mic):
            return []
        return [Timer((start + win) * 1000 / SAMPLE_RATE, "detect", start)]

    # ---- actor interface -------------------------------------------------

    def start(self, now: float):
        self._set_power(now, DeviceState.BASELINE_LISTENING)
        self._event(now, "boot")
        return self._schedule_detect(0)

    def on_link(self, up: bool, now: float):
        if not up:
            self.session, _ = session_step(self.session, LinkDown())
            self._link_confirmed = False
            self._event(now, "link_down")
            out = []
            if self._episode is not None:
                out += self._abort_episode(now, "link_down")
            return out
        self._event(now, "link_up")
        self._backoff_i = 0
        return self._hello(now)

    def _hello(self, now: float):
        if self.session.state not in (SessionState.PROVISIONED, SessionState.IDLE,
                                      SessionState.CONNECTED):
            return []
        out = self._send(now, Frame(FrameType.HELLO, self._next_seq(), b""))
        self._hello_pending = True
        delay = self.cfg.backoff_ms[min(self._backoff_i, len(self.cfg.backoff_ms) - 1)]
        self._backoff_i += 1
        return out + [Timer(now + delay, "hello_retry")]

    def on_timer(self, name: str, data, now: float):
        self.now = now
        if name == "detect":
            return self._on_detect(data, now)
        if name == "chunk":
            return self._on_chunk(now)
        if name == "speaker":
            return self._on_speaker(now)
        if name == "hello_retry":
            if self._link_confirmed or not self._hello_pending:
                return []
            self._event(now, "hello_retry", attempt=self._backoff_i)
            return self._hello(now)
        raise ValueError(f"unknown device timer {name}")

    def on_frame(self, frame: Frame, channel: str, now: float):
        self.now = now
        out = self._feed(frame, channel, now)
        t = frame.type
        if channel == PROVISIONING:
            if t == FrameType.PROVISION and not out:
                self._event(now, "provisioned")
                out += self._send(now, json_frame(FrameType.PROVISION_ACK, frame.seq, {"ok": True}),
                                  PROVISIONING)
                out += self._hello(now)
            return out
        if t == FrameType.HELLO:
            self._link_confirmed = True
            self._hello_pending = False
            self._event(now, "connected")
        elif t == FrameType.CONTROL:
            out += self._on_control(parse_json_payload(frame.payload), now)
        elif t == FrameType.RESPONSE_AUDIO:
            out += self._on_response_audio(frame, now)
        elif t == FrameType.END_OF_RESPONSE:
            info = parse_json_payload(frame.payload)
            if self._jb is None:
                self._jb = JitterBuffer(self.cfg.prebuffer_ms)
            self._jb.close(int(info.get("chunks", 0)) - 1)
            if not self._speaker_running:
                out += self._start_speaker(now)
        elif t == FrameType.ERROR:
            self._event(now, "peer_error", reason=parse_json_payload(frame.payload).get("reason"))
        return out

    # ---- listening -------------------------------------------------------

    def _on_detect(self, start: int, now: float):
        win, hop = self._window_samples()
        out = self._schedule_detect(start + hop)
        if self._episode is not None or start < self._rearm_sample:
            return out
        window = self.mic.samples[start:start + win]
        ev = self.detector.push(window, start / SAMPLE_RATE)
        if ev is None:
            return out
        self._event(now, "wake", score=round(ev.score, 4), window_start_s=ev.t_start)
        if not self._link_confirmed:
            self._event(now, "wake_ignored_offline")
            return out
        return out + self._begin_episode(start + win, now)

    def _begin_episode(self, stream_start: int, now: float):
        ep = Episode(len(self.episodes), now, stream_start)
        self.episodes.append(ep)
        self._episode = ep
        self._streaming = True
        self._stop_requested = False
        self._encoder = AdpcmEncoder()
        self._set_power(now, DeviceState.ACTIVE_QUERY)
        out = []
        if self.session.state != SessionState.CONNECTED:
            out += self._send(now, Frame(FrameType.HELLO, self._next_seq(), b""))
        return out + [Timer(now + CHUNK_MS, "chunk")]

    def _on_chunk(self, now: float):
        ep = self._episode
        if ep is None or not self._streaming:
            return []
        if self._stop_requested:
            return self._end_stream(now, "endpoint")
        a = ep.stream_start_sample + ep.chunks_sent * BLOCK_SAMPLES
        b = min(a + BLOCK_SAMPLES, len(self.mic))
        out = []
        if b > a:
            block = self._encoder.encode(PcmBuffer(self.mic.samples[a:b]))
            out += self._send(now, audio_frame(FrameType.AUDIO_CHUNK, ep.chunks_sent, block))
            ep.chunks_sent += 1
        if b < a + BLOCK_SAMPLES:
            return out + self._end_stream(now, "mic_exhausted")
        if ep.chunks_sent * CHUNK_MS >= self.cfg.max_query_s * 1000:
            return out + self._end_stream(now, "max_duration")
        return out + [Timer(now + CHUNK_MS, "chunk")]

    def _end_stream(self, now: float, reason: str):
        ep = self._episode
        self._streaming = False
        ep.stop_reason = reason
        ep.eou_sent_t = now
        self._event(now, "end_of_utterance", episode=ep.index, chunks=ep.chunks_sent,
                    reason=reason)
        self._jb = JitterBuffer(self.cfg.prebuffer_ms)
        return self._send(now, json_frame(FrameType.END_OF_UTTERANCE, self._next_seq(),
                                          {"chunks": ep.chunks_sent, "episode": ep.index}))

    def _abort_episode(self, now: float, reason: str):
        ep = self._episode
        ep.aborted = True
        ep.stop_reason = reason
        self._streaming = False
        self._episode = None
        self._jb = None
        self._speaker_running = False
        self._event(now, "episode_aborted", episode=ep.index, reason=reason)
        return self._back_to_listening(now)

    def _back_to_listening(self, now: float):
        self._set_power(now, DeviceState.BASELINE_LISTENING)
        self.detector.reset()
        self._rearm_sample = int(np.ceil(now * SAMPLE_RATE / 1000))
        return self._schedule_detect(self._rearm_sample)

    # ---- commands and photos --------------------------------------------

    def _on_control(self, msg: dict, now: float):
        cmd = msg.get("cmd")
        self._event(now, "control", cmd=cmd)
        if cmd == "endpoint":
            if self._streaming:
                self._stop_requested = True
            return []
        if cmd == "capture":
            return self._send_photo(now)
        return []

    def _send_photo(self, now: float):
        if not self.photos:
            self._event(now, "capture_failed", reason="no photo fixtures")
            return []
        photo = self.photos[self._photo_cursor % len(self.photos)]
        self._photo_cursor += 1
        meta = {"photo_id": photo.name, "bytes": len(photo.data), "mime": self.cfg.photo_mime}
        out = self._send(now, json_frame(FrameType.PHOTO_META, self._next_seq(), meta))
        out += self._send(now, Frame(FrameType.PHOTO_DATA, self._next_seq(), photo.data))
        if self._episode is not None:
            self._episode.photos_sent += 1
        self._event(now, "photo_sent", photo=photo.name)
        return out

    # ---- playback --------------------------------------------------------

    def _on_response_audio(self, frame: Frame, now: float):
        ep = self._episode
        if ep is not None and ep.first_audio_t is None:
            ep.first_audio_t = now
            self._event(now, "first_response_audio", episode=ep.index)
        if self._jb is None:
            self._jb = JitterBuffer(self.cfg.prebuffer_ms)
        self._jb.push(frame.seq, decode_block(parse_audio_payload(frame.payload)))
        if not self._speaker_running:
            return self._start_speaker(now)
        return []

    def _start_speaker(self, now: float):
        self._speaker_running = True
        return [Timer(now, "speaker")]

    def _on_speaker(self, now: float):
        if self._jb is None:
            self._speaker_running = False
            return []
        r = self._jb.pop(BLOCK_SAMPLES)
        ep = self._episode
        if isinstance(r, PcmBuffer):
            if len(r):
                self.speaker.append(r.samples)
                self._set_power(now, DeviceState.PLAYING_RESPONSE)
                if ep is not None:
                    ep.response_samples += len(r)
        elif r is JitterStatus.UNDERRUN:
            self._event(now, "underrun")
            if ep is not None:
                ep.underruns += 1
        elif r is JitterStatus.DRAINED:
            self._speaker_running = False
            self._jb = None
            if ep is not None:
                ep.response_done_t = now
                self._event(now, "response_done", episode=ep.index,
                            samples=ep.response_samples)
            self._episode = None
            return self._back_to_listening(now)
        return [Timer(now + CHUNK_MS, "speaker")]

    # ---- accounting ------------------------------------------------------

    def power_schedule(self, end_t: float) -> list[tuple[DeviceState, float]]:
        """(state, hours) spans from the power timeline up to ``end_t``."""
        spans = []
        for (t0, s), nxt in zip(self.power_timeline, self.power_timeline[1:] + [(end_t, None)]):
            if nxt[0] > t0:
                spans.append((s, (nxt[0] - t0) / 3.6e6))
        return spans

    def energy(self, end_t: float) -> EnergyLedger:
        return simulate_power(self.profile, self.power_schedule(end_t))

    @property
    def underruns(self) -> int:
        return sum(1 for e in self.log if e["event"] == "underrun")
