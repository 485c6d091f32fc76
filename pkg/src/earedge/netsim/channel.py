"""Simulated transport with latency, jitter, loss, reordering and
radio-coexistence stalls.

Delivery time of a frame sent at ``t``::

    tx_start   = max(t, medium free, end of any stall covering it)
    tx_end     = tx_start + size * 8 / bandwidth
    deliver_t  = tx_end + base_latency + U(-jitter, +jitter)

then, on an ordered (``fifo``) channel, raised if needed so the direction
stays in order unless the frame is picked for reordering. With
``fifo=False`` frames travel independently, like datagrams. Loss, jitter
and reordering draw from independent random streams seeded from ``seed``,
one draw per frame whatever the outcome, so for a fixed seed a larger
``loss_prob`` drops a superset of frames and leaves every other delivery
time unchanged.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from earedge.errors import ConfigError

COEXISTENCE_MODES = ("off", "naive", "prioritized")


@dataclass(frozen=True)
class ChannelConfig:
    base_latency_ms: float = 20.0
    jitter_ms: float = 0.0
    loss_prob: float = 0.0
    reorder_prob: float = 0.0
    bandwidth_kbps: float = 0.0          # 0 means unlimited
    coexistence_mode: str = "off"
    stall_period_ms: float = 1000.0
    stall_ms: float = 200.0
    reorder_delay_ms: float = 40.0
    fifo: bool = True
    seed: int = 0

    def __post_init__(self):
        for name in ("loss_prob", "reorder_prob"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ConfigError(f"{name}={v} must lie in [0, 1]")
        for name in ("base_latency_ms", "jitter_ms", "bandwidth_kbps", "stall_ms",
                     "reorder_delay_ms"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be non-negative")
        if self.stall_period_ms <= 0:
            raise ConfigError("stall_period_ms must be positive")
        if self.stall_ms > self.stall_period_ms:
            raise ConfigError("stall_ms cannot exceed stall_period_ms")
        if self.coexistence_mode not in COEXISTENCE_MODES:
            raise ConfigError(f"coexistence_mode must be one of {COEXISTENCE_MODES}")

    @classmethod
    def from_dict(cls, d: dict) -> ChannelConfig:
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown channel fields: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def load(cls, path) -> ChannelConfig:
        return cls.from_dict(json.loads(Path(path).read_text()))

    def to_dict(self) -> dict:
        return asdict(self)


class Medium:
    """The shared 2.4 GHz air: one transmission at a time, both directions.

    ``pairing_active`` holds the intervals (ms) during which the pairing
    radio is on. Under ``naive`` coexistence the pairing radio is never
    switched off, so the runtime link stalls periodically for the whole run;
    under ``prioritized`` it only stalls inside the listed intervals.
    """

    def __init__(self, cfg: ChannelConfig, pairing_active=((0.0, 0.0),)):
        self.cfg = cfg
        self.busy_until = 0.0
        self.pairing_active = [tuple(map(float, iv)) for iv in pairing_active]

    def _pairing_on(self, t: float) -> bool:
        mode = self.cfg.coexistence_mode
        if mode == "off":
            return False
        if mode == "naive":
            return True
        return any(a <= t < b for a, b in self.pairing_active)

    def stall_end(self, t: float) -> float:
        """If ``t`` falls in a stall, the time it ends; otherwise ``t``."""
        cfg = self.cfg
        if cfg.stall_ms <= 0 or not self._pairing_on(t):
            return t
        phase = t % cfg.stall_period_ms
        if phase < cfg.stall_ms:
            return t - phase + cfg.stall_ms
        return t

    def transmit(self, t: float, size_bytes: int) -> float:
        """Occupy the medium; returns the end of transmission."""
        start = self.stall_end(max(t, self.busy_until))
        bw = self.cfg.bandwidth_kbps
        duration = size_bytes * 8 / bw if bw > 0 else 0.0   # kbit/s == bit/ms
        end = start + duration
        if self.cfg.stall_ms > 0 and self._pairing_on(start):
            # a transmission cannot straddle the next stall; restart after it
            next_stall = start - start % self.cfg.stall_period_ms + self.cfg.stall_period_ms
            if end > next_stall and duration < self.cfg.stall_period_ms - self.cfg.stall_ms:
                start = next_stall + self.cfg.stall_ms
                end = start + duration
        self.busy_until = end
        return end


@dataclass
class Delivery:
    frame_id: int
    channel: str
    size_bytes: int
    send_t: float
    deliver_t: float | None
    tag: str = ""

    @property
    def dropped(self) -> bool:
        return self.deliver_t is None


@dataclass
class DeliveryTrace:
    records: list[Delivery] = field(default_factory=list)

    def add(self, d: Delivery) -> None:
        self.records.append(d)

    @property
    def delivered(self) -> list[Delivery]:
        return [r for r in self.records if not r.dropped]

    def stats(self) -> dict:
        lat = np.array([r.deliver_t - r.send_t for r in self.delivered])
        n = len(self.records)
        return {
            "frames": n,
            "delivered": int(lat.size),
            "dropped": n - int(lat.size),
            "loss_rate": (n - lat.size) / n if n else 0.0,
            "latency_mean_ms": float(lat.mean()) if lat.size else math.nan,
            "latency_max_ms": float(lat.max()) if lat.size else math.nan,
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["frame_id", "channel", "tag", "size_bytes", "send_t", "deliver_t", "dropped"])
        for r in self.records:
            deliver = "" if r.dropped else f"{r.deliver_t:.3f}"
            w.writerow([r.frame_id, r.channel, r.tag, r.size_bytes, f"{r.send_t:.3f}", deliver,
                        int(r.dropped)])
        return buf.getvalue()


class Channel:
    """One direction of a link. Times are milliseconds of simulated time."""

    def __init__(self, cfg: ChannelConfig, name: str = "runtime", medium: Medium | None = None,
                 trace: DeliveryTrace | None = None, stream: int = 0):
        self.cfg = cfg
        self.name = name
        self.medium = medium or Medium(cfg)
        self.trace = trace if trace is not None else DeliveryTrace()
        seeds = np.random.SeedSequence([cfg.seed, stream]).spawn(3)
        self._loss_rng, self._jitter_rng, self._reorder_rng = (
            np.random.default_rng(s) for s in seeds)
        self._fifo_floor = -math.inf
        self._next_id = 0

    def send(self, size_bytes: int, t_now: float, tag: str = "") -> Delivery:
        """Schedule one frame; ``deliver_t`` is None when it is lost."""
        cfg = self.cfg
        u_loss = self._loss_rng.random()
        u_jit = self._jitter_rng.uniform(-1.0, 1.0)
        u_reorder = self._reorder_rng.random()
        tx_end = self.medium.transmit(t_now, size_bytes)
        deliver = tx_end + cfg.base_latency_ms + u_jit * cfg.jitter_ms
        if u_reorder < cfg.reorder_prob:
            # held back and allowed to be overtaken
            deliver += cfg.reorder_delay_ms
        elif cfg.fifo:
            deliver = max(deliver, self._fifo_floor)
            self._fifo_floor = deliver
        dropped = u_loss < cfg.loss_prob
        d = Delivery(self._next_id, self.name, size_bytes, t_now, None if dropped else deliver, tag)
        self._next_id += 1
        self.trace.add(d)
        return d
