"""Canned streaming scenarios over the simulated channel."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from earedge.audio.adpcm import BLOCK_SAMPLES, adpcm_encode, decode_block
from earedge.audio.pcm import SAMPLE_RATE, PcmBuffer
from earedge.netsim.channel import Channel, ChannelConfig, DeliveryTrace, Medium
from earedge.wire.frame import Frame, FrameType, encode_frame
from earedge.wire.jitter import JitterBuffer, JitterStatus
from earedge.wire.payloads import audio_frame, parse_audio_payload

CHUNK_MS = 1000 * BLOCK_SAMPLES / SAMPLE_RATE  # 20 ms


@dataclass
class PlayoutResult:
    underruns: int
    gaps: int
    concealed_samples: int
    pushed_samples: int
    played_samples: int
    late: int
    duplicates: int


def tone(duration_s: float, freq_hz: float = 440.0, level: float = 0.3) -> PcmBuffer:
    t = np.arange(int(round(duration_s * SAMPLE_RATE))) / SAMPLE_RATE
    return PcmBuffer.from_float(level * np.sin(2 * np.pi * freq_hz * t))


def audio_frames(pcm: PcmBuffer, kind: FrameType = FrameType.RESPONSE_AUDIO) -> list[bytes]:
    return [encode_frame(audio_frame(kind, i, b)) for i, b in enumerate(adpcm_encode(pcm))]


def playout(arrivals, end_t: float | None, prebuffer_ms: float, tick_ms: float = CHUNK_MS,
            start_t: float = 0.0, horizon_t: float | None = None) -> PlayoutResult:
    """Replay ``arrivals`` ((deliver_t, seq, samples), any order) through a
    jitter buffer drained by a speaker clock ticking every ``tick_ms``.

    ``end_t`` is when the end-of-stream marker arrives (None: never).
    """
    arrivals = sorted(arrivals, key=lambda a: (a[0], a[1]))
    jb = JitterBuffer(prebuffer_ms)
    per_tick = int(round(tick_ms * SAMPLE_RATE / 1000))
    last = max([a[0] for a in arrivals] + [end_t or 0.0, start_t])
    horizon = horizon_t if horizon_t is not None else last + 10 * prebuffer_ms + 1000
    i, t, played = 0, start_t, 0
    while t <= horizon:
        while i < len(arrivals) and arrivals[i][0] <= t:
            jb.push(arrivals[i][1], arrivals[i][2])
            i += 1
        if end_t is not None and end_t <= t and not jb.closed:
            jb.close()
        r = jb.pop(per_tick)
        if r is JitterStatus.DRAINED:
            break
        if isinstance(r, PcmBuffer):
            played += len(r)
        t += tick_ms
    return PlayoutResult(jb.underruns, jb.gaps, jb.concealed_samples, jb.pushed_samples,
                         played, jb.late, jb.duplicates)


def _stream(channel: Channel, frames: list[bytes], t0: float, period_ms: float = CHUNK_MS):
    """Send ``frames`` at a fixed cadence; returns arrivals and the end-marker time."""
    arrivals = []
    for k, raw in enumerate(frames):
        d = channel.send(len(raw), t0 + k * period_ms)
        if not d.dropped:
            block = parse_audio_payload(raw[9:-4])
            arrivals.append((d.deliver_t, k, decode_block(block)))
    end = encode_frame(Frame(FrameType.END_OF_RESPONSE, len(frames)))
    d_end = channel.send(len(end), t0 + len(frames) * period_ms)
    return arrivals, d_end.deliver_t


def jitter_scenario(prebuffer_ms: float, seed: int, jitter_ms: float = 250.0,
                    duration_s: float = 5.0, base_latency_ms: float = 260.0,
                    loss_prob: float = 0.0) -> PlayoutResult:
    """Stream ``duration_s`` of audio one way and count play-out underruns.

    ``jitter_ms`` is the half-width of the uniform delay variation. The
    default base latency exceeds it so no frame arrives before it is sent.
    Frames travel independently (no in-order hold), which is how real-time
    audio is usually carried.
    """
    cfg = ChannelConfig(base_latency_ms=base_latency_ms, jitter_ms=jitter_ms,
                        loss_prob=loss_prob, fifo=False, seed=seed)
    ch = Channel(cfg, "runtime")
    arrivals, end_t = _stream(ch, audio_frames(tone(duration_s)), 0.0)
    return playout(arrivals, end_t, prebuffer_ms)


@dataclass
class CoexistenceResult:
    uplink: PlayoutResult
    downlink: PlayoutResult
    trace: DeliveryTrace

    @property
    def underruns(self) -> int:
        return self.uplink.underruns + self.downlink.underruns


COEXISTENCE_CHANNEL = ChannelConfig(base_latency_ms=15.0, jitter_ms=5.0, bandwidth_kbps=160.0,
                                    stall_period_ms=1000.0, stall_ms=200.0)


def coexistence_scenario(mode: str, seed: int = 0, duration_s: float = 10.0,
                         prebuffer_ms: float = 300.0,
                         cfg: ChannelConfig = COEXISTENCE_CHANNEL) -> CoexistenceResult:
    """Full-duplex audio over one shared medium after a pairing phase.

    Pairing happens in the second before t=0. ``naive`` leaves the pairing
    radio on afterwards; ``prioritized`` turns it off once pairing ends.
    """
    cfg = replace(cfg, coexistence_mode=mode, seed=seed)
    medium = Medium(cfg, pairing_active=[(-1000.0, 0.0)])
    trace = DeliveryTrace()
    up = Channel(cfg, "uplink", medium, trace, stream=1)
    down = Channel(cfg, "downlink", medium, trace, stream=2)
    up_frames = audio_frames(tone(duration_s, 300.0), FrameType.AUDIO_CHUNK)
    down_frames = audio_frames(tone(duration_s, 660.0))
    # interleave sends in time order so the shared medium sees them as they happen
    up_arr, down_arr = [], []
    n = max(len(up_frames), len(down_frames))
    for k in range(n + 1):
        t = k * CHUNK_MS
        for ch, frames, arr in ((up, up_frames, up_arr), (down, down_frames, down_arr)):
            if k < len(frames):
                raw = frames[k]
                d = ch.send(len(raw), t)
                if not d.dropped:
                    arr.append((d.deliver_t, k, decode_block(parse_audio_payload(raw[9:-4]))))
            elif k == len(frames):
                end = encode_frame(Frame(FrameType.END_OF_RESPONSE, k))
                d = ch.send(len(end), t)
                arr.append(("end", d.deliver_t))
    up_end = [a[1] for a in up_arr if a[0] == "end"][0]
    down_end = [a[1] for a in down_arr if a[0] == "end"][0]
    up_arr = [a for a in up_arr if a[0] != "end"]
    down_arr = [a for a in down_arr if a[0] != "end"]
    return CoexistenceResult(playout(up_arr, up_end, prebuffer_ms),
                             playout(down_arr, down_end, prebuffer_ms), trace)
