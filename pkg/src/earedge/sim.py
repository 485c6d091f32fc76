"""Discrete-event simulation on a virtual millisecond clock.

Actors (the device and the edge) are sans-IO: they receive frames, timer
expiries and link changes, and return :class:`Send` and :class:`Timer`
requests. The simulation owns the only transports, two logical channels of
one device-edge link, and records every one it opens in ``transports``.
"""

from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass, field
from typing import Any

from earedge.netsim.channel import Channel, ChannelConfig, DeliveryTrace, Medium
from earedge.wire.frame import Frame, FrameType, decode_frame, encode_frame
from earedge.wire.session import PROVISIONING, RUNTIME

DEVICE, EDGE = "device", "edge"
PAIRING_CHANNEL = ChannelConfig(base_latency_ms=8.0, bandwidth_kbps=1000.0)


@dataclass(frozen=True)
class Send:
    t: float
    frame: Frame
    channel: str = RUNTIME


@dataclass(frozen=True)
class Timer:
    t: float
    name: str
    data: Any = None


@dataclass(frozen=True)
class TransportRecord:
    name: str
    kind: str
    endpoints: tuple[str, str]


class Link:
    """Both logical channels between the device and the edge.

    The runtime channel shares one medium for both directions; the pairing
    radio gets its own. Coexistence stalls follow the medium's record of
    when the pairing radio was on.
    """

    def __init__(self, runtime_cfg: ChannelConfig, pairing_cfg: ChannelConfig = PAIRING_CHANNEL):
        self.trace = DeliveryTrace()
        self.medium = Medium(runtime_cfg, pairing_active=[])
        pairing_medium = Medium(pairing_cfg)
        self.channels = {
            (RUNTIME, DEVICE): Channel(runtime_cfg, "uplink", self.medium, self.trace, 1),
            (RUNTIME, EDGE): Channel(runtime_cfg, "downlink", self.medium, self.trace, 2),
            (PROVISIONING, DEVICE): Channel(pairing_cfg, "pairing-up", pairing_medium, self.trace, 3),
            (PROVISIONING, EDGE): Channel(pairing_cfg, "pairing-down", pairing_medium, self.trace, 4),
        }
        self.up = True
        self._pairing_since: float | None = None

    def pairing(self, active: bool, t: float) -> None:
        """Pairing radio switched on or off at ``t``.

        The naive stack never switches it off, so its stalls persist.
        """
        intervals = self.medium.pairing_active
        is_open = bool(intervals) and intervals[-1][1] == math.inf
        if active and not is_open:
            intervals.append((t, math.inf))
        elif not active and is_open and self.medium.cfg.coexistence_mode != "naive":
            intervals[-1] = (intervals[-1][0], t)


@dataclass
class SimResult:
    device: Any
    edge: Any
    link: Link
    transports: list[TransportRecord]
    end_t: float
    events: int
    log: list[dict] = field(default_factory=list)


class Simulation:
    def __init__(self, device, edge, runtime_cfg: ChannelConfig = ChannelConfig(),
                 link_drops=(), pairing_cfg: ChannelConfig = PAIRING_CHANNEL):
        self.actors = {DEVICE: device, EDGE: edge}
        self.link = Link(runtime_cfg, pairing_cfg)
        self.transports = [
            TransportRecord("session:runtime", "simulated", (DEVICE, EDGE)),
            TransportRecord("session:provisioning", "simulated", (DEVICE, EDGE)),
        ]
        self.now = 0.0
        self._queue: list = []
        self._order = itertools.count()
        self.events = 0
        for drop in link_drops:
            at, dur = float(drop["at_ms"]), float(drop["duration_ms"])
            self._push(at, "link", False)
            self._push(at + dur, "link", True)

    def _push(self, t, kind, *payload):
        heapq.heappush(self._queue, (t, next(self._order), kind, payload))

    def _handle(self, who: str, outputs) -> None:
        for out in outputs or ():
            if isinstance(out, Timer):
                self._push(max(out.t, self.now), "timer", who, out.name, out.data)
            elif isinstance(out, Send):
                t = max(out.t, self.now)
                if t > self.now:
                    # sends in the future leave at their own time
                    self._push(t, "send", who, out)
                else:
                    self._transmit(who, out)
            else:
                raise TypeError(f"unexpected actor output {out!r}")

    def _transmit(self, who: str, out: Send) -> None:
        raw = encode_frame(out.frame)
        if out.channel == PROVISIONING:
            self.link.pairing(True, self.now)
        ch = self.link.channels[(out.channel, who)]
        d = ch.send(len(raw), self.now, f"{out.frame.type.name}:{out.frame.seq}")
        if out.channel == RUNTIME and not self.link.up:
            d.deliver_t = None
        if d.deliver_t is not None:
            peer = EDGE if who == DEVICE else DEVICE
            self._push(d.deliver_t, "deliver", peer, raw, out.channel)

    def run(self, until_ms: float = math.inf, max_events: int = 5_000_000) -> SimResult:
        for who, actor in self.actors.items():
            self._handle(who, actor.start(self.now))
        while self._queue and self.events < max_events:
            t, _, kind, payload = heapq.heappop(self._queue)
            if t > until_ms:
                break
            self.now = t
            self.events += 1
            if kind == "timer":
                who, name, data = payload
                self._handle(who, self.actors[who].on_timer(name, data, t))
            elif kind == "send":
                self._transmit(*payload)
            elif kind == "deliver":
                who, raw, channel = payload
                if channel == RUNTIME and not self.link.up:
                    continue  # lost in flight
                frame = decode_frame(raw)
                self._handle(who, self.actors[who].on_frame(frame, channel, t))
                if frame.type == FrameType.PROVISION_ACK:
                    self.link.pairing(False, t)
            elif kind == "link":
                (up,) = payload
                self.link.up = up
                for who, actor in self.actors.items():
                    self._handle(who, actor.on_link(up, t))
        return SimResult(self.actors[DEVICE], self.actors[EDGE], self.link,
                         list(self.transports), self.now, self.events)
