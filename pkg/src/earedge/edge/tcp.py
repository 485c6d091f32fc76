"""Loopback TCP bridge for the edge actor (demo only).

One connection carries both logical channels; provisioning frames are
told apart by type. Timers run on the event loop's wall clock. Binding is
restricted to loopback addresses: the service has no business listening
anywhere else.
"""

from __future__ import annotations

import asyncio
import logging

from earedge.errors import ConfigError
from earedge.sim import Send, Timer
from earedge.wire.frame import FrameReader, FrameType, encode_frame
from earedge.wire.session import PROVISIONING, RUNTIME

log = logging.getLogger(__name__)
LOOPBACK = ("127.0.0.1", "::1", "localhost")
_PROVISION_TYPES = (FrameType.PROVISION, FrameType.PROVISION_ACK)


class StreamBridge:
    """Feeds bytes from a stream into a sans-IO actor and writes its frames back."""

    def __init__(self, actor, writer, loop: asyncio.AbstractEventLoop | None = None):
        self.actor = actor
        self.writer = writer
        self.loop = loop or asyncio.get_event_loop()
        self.reader = FrameReader()
        self.t0 = self.loop.time()
        self._handles: list[asyncio.TimerHandle] = []

    def now(self) -> float:
        return 1000.0 * (self.loop.time() - self.t0)

    def start(self) -> None:
        self.dispatch(self.actor.start(self.now()))

    def dispatch(self, outputs) -> None:
        for out in outputs or ():
            if isinstance(out, Send):
                delay = max(0.0, out.t - self.now()) / 1000.0
                if delay:
                    self._handles.append(self.loop.call_later(delay, self._write, out))
                else:
                    self._write(out)
            elif isinstance(out, Timer):
                delay = max(0.0, out.t - self.now()) / 1000.0
                self._handles.append(self.loop.call_later(delay, self._fire, out))

    def _write(self, out: Send) -> None:
        self.writer.write(encode_frame(out.frame))

    def _fire(self, timer: Timer) -> None:
        self.dispatch(self.actor.on_timer(timer.name, timer.data, self.now()))

    def feed(self, data: bytes) -> None:
        for frame in self.reader.feed(data):
            channel = PROVISIONING if frame.type in _PROVISION_TYPES else RUNTIME
            self.dispatch(self.actor.on_frame(frame, channel, self.now()))
        for err in self.reader.errors:
            log.warning("dropped bytes: %s", err)
        self.reader.errors.clear()

    def close(self) -> None:
        for h in self._handles:
            h.cancel()


async def handle_stream(reader: asyncio.StreamReader, writer, actor,
                        read_size: int = 4096) -> StreamBridge:
    """Serve one connection until EOF."""
    bridge = StreamBridge(actor, writer, asyncio.get_running_loop())
    bridge.start()
    try:
        while True:
            data = await reader.read(read_size)
            if not data:
                break
            bridge.feed(data)
            await writer.drain()
    finally:
        bridge.close()
    return bridge


async def serve_tcp(actor_factory, port: int, host: str = "127.0.0.1") -> None:
    if host not in LOOPBACK:
        raise ConfigError(f"the demo server binds to loopback only, not {host!r}")

    async def on_connect(reader, writer):
        try:
            await handle_stream(reader, writer, actor_factory())
        finally:
            writer.close()

    server = await asyncio.start_server(on_connect, host, port)
    log.info("edge listening on %s:%d", host, port)
    async with server:
        await server.serve_forever()
