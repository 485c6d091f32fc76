"""Receive-side jitter buffer with play-out delay."""

from __future__ import annotations

import enum
import threading

import numpy as np

from earedge.audio.pcm import SAMPLE_RATE, PcmBuffer


class JitterStatus(enum.Enum):
    NOT_READY = "not_ready"   # still pre-buffering
    UNDERRUN = "underrun"     # playing, but the next audio has not arrived
    DRAINED = "drained"       # closed and fully played out


class JitterBuffer:
    """Reorders chunks by sequence number and releases audio after a delay.

    Playback (re)starts once at least ``prebuffer_ms`` of contiguous audio is
    queued ahead of the play cursor and one chunk has arrived. A missing
    sequence number is concealed with zeros once a later chunk is queued
    and the cursor reaches the hole; if nothing later is queued the pop
    reports an underrun and the buffer goes back to pre-buffering.

    One producer thread may push while one consumer thread pops.
    """

    def __init__(self, prebuffer_ms: float = 300.0, capacity_ms: float = 5000.0,
                 sample_rate_hz: int = SAMPLE_RATE, chunk_samples: int = 320):
        if prebuffer_ms < 0 or capacity_ms <= 0:
            raise ValueError("prebuffer must be >= 0 and capacity > 0")
        self.sample_rate_hz = sample_rate_hz
        self.prebuffer_samples = int(round(prebuffer_ms * sample_rate_hz / 1000))
        self.capacity_samples = int(round(capacity_ms * sample_rate_hz / 1000))
        self.chunk_samples = chunk_samples
        self._lock = threading.Lock()
        self._chunks: dict[int, np.ndarray] = {}
        self._next_seq = 0
        self._offset = 0          # samples already consumed from chunk _next_seq
        self._final_seq: int | None = None
        self.playing = False
        self.underruns = 0
        self.gaps = 0
        self.concealed_samples = 0
        self.duplicates = 0
        self.late = 0
        self.overflows = 0
        self.pushed_samples = 0
        self.popped_samples = 0

    def _queued(self) -> int:
        return sum(len(c) for s, c in self._chunks.items()) - self._offset

    def _contiguous(self) -> int:
        total, seq = -self._offset, self._next_seq
        while seq in self._chunks:
            total += len(self._chunks[seq])
            seq += 1
        return max(total, 0)

    def push(self, seq: int, samples) -> bool:
        """Queue one decoded chunk; returns False if it was discarded."""
        samples = np.asarray(samples.samples if isinstance(samples, PcmBuffer) else samples,
                             dtype=np.int16)
        with self._lock:
            if seq in self._chunks:
                self.duplicates += 1
                return False
            if seq < self._next_seq:
                self.late += 1
                return False
            if self._queued() + len(samples) > self.capacity_samples:
                self.overflows += 1
                return False
            self._chunks[seq] = samples.copy()
            self.pushed_samples += len(samples)
            return True

    def close(self, final_seq: int | None = None) -> None:
        """Mark the end of the stream; ``final_seq`` is the last sequence sent."""
        with self._lock:
            if final_seq is None:
                final_seq = max(self._chunks, default=self._next_seq - 1)
            self._final_seq = final_seq

    @property
    def closed(self) -> bool:
        return self._final_seq is not None

    def _available(self, limit: int) -> int:
        """Samples poppable right now (real or concealed), capped at ``limit``."""
        total, seq, offset = 0, self._next_seq, self._offset
        ended = self._final_seq is not None
        last = max(self._chunks, default=-1)
        while total < limit:
            if ended and seq > self._final_seq:
                break
            chunk = self._chunks.get(seq)
            if chunk is not None:
                total += len(chunk) - offset
            elif seq < last or ended:
                total += self.chunk_samples - offset
            else:
                break
            seq, offset = seq + 1, 0
        return min(total, limit)

    def pop(self, n: int) -> PcmBuffer | JitterStatus:
        """Exactly ``n`` samples of in-order audio, or a status.

        Once the stream is closed, a short final read returns what is left.
        """
        with self._lock:
            ended = self._final_seq is not None
            if ended and self._next_seq > self._final_seq:
                return JitterStatus.DRAINED
            if not self.playing:
                ready = self._chunks and self._contiguous() >= self.prebuffer_samples
                if not (ready or (ended and self._chunks)):
                    return JitterStatus.NOT_READY
                self.playing = True
            avail = self._available(n)
            if avail < n and not ended:
                self.underruns += 1
                self.playing = False
                return JitterStatus.UNDERRUN
            out, need = [], avail
            while need > 0:
                chunk = self._chunks.get(self._next_seq)
                if chunk is None:
                    # a hole: conceal one nominal chunk with zeros
                    take = min(need, self.chunk_samples - self._offset)
                    out.append(np.zeros(take, np.int16))
                    self.concealed_samples += take
                    if self._offset == 0:
                        self.gaps += 1
                    size = self.chunk_samples
                else:
                    take = min(need, len(chunk) - self._offset)
                    out.append(chunk[self._offset:self._offset + take])
                    size = len(chunk)
                self._offset += take
                need -= take
                if self._offset >= size:
                    self._chunks.pop(self._next_seq, None)
                    self._next_seq += 1
                    self._offset = 0
            got = np.concatenate(out) if out else np.zeros(0, np.int16)
            self.popped_samples += len(got)
            return PcmBuffer(got, self.sample_rate_hz)

    def drain(self) -> PcmBuffer:
        """Everything still queued (concealing holes), regardless of delay."""
        if not self.closed:
            self.close()
        parts = []
        while True:
            r = self.pop(self.capacity_samples)
            if not isinstance(r, PcmBuffer) or len(r) == 0:
                break
            parts.append(r.samples)
        return PcmBuffer(np.concatenate(parts) if parts else np.zeros(0, np.int16),
                         self.sample_rate_hz)
