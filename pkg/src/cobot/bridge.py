"""TCP and WebSocket front ends for the broker.

Both endpoints speak the same newline-free JSON frame grammar, one frame
per line (TCP) or per message (WebSocket):

    client -> broker  {"op": "sub", "topic": "haptics/*"}
                      {"op": "pub", "topic": "a/b", "data": {...}}
    broker -> client  {"op": "ack", "topic": ..., "seq": ..., "stamp_us": ...}
                      {"op": "pub", "topic": ..., "seq": ..., "stamp_us": ..., "data": {...}}
                      {"op": "err", "code": ..., "detail": ...}

A malformed frame earns an err reply and the connection stays open.  The
WebSocket listener doubles as a static file server for the operator UI:
plain GET requests (no upgrade header) receive files from the configured
directory.
"""

from __future__ import annotations

import asyncio
import json
import mimetypes
from pathlib import Path

from websockets.asyncio.server import serve as ws_serve
from websockets.datastructures import Headers
from websockets.http11 import Response

from .bus import Broker, canonical_json, validate_pattern
from .errors import CobotError, TopicError


class RemoteSession:
    """Protocol logic shared by the TCP and WebSocket transports."""

    def __init__(self, broker: Broker, name: str, send):
        # ``send`` enqueues an outbound frame string; must never block
        self._send = send
        self.client = broker.client(name=name, on_message=self._deliver)

    def _deliver(self, msg):
        self._send(canonical_json({
            "op": "pub", "topic": msg.topic, "seq": msg.seq,
            "stamp_us": msg.stamp_us, "data": msg.data,
        }))

    def handle(self, text: str):
        try:
            frame = json.loads(text)
            if not isinstance(frame, dict):
                raise ValueError("frame must be a JSON object")
        except ValueError as exc:
            self._send(canonical_json(
                {"op": "err", "code": "malformed_frame", "detail": str(exc)}))
            return
        op = frame.get("op")
        try:
            if op == "sub":
                pattern = validate_pattern(frame.get("topic"))
                self.client.subscribe(pattern)
                self._send(canonical_json({"op": "ack", "ok": "sub", "topic": pattern}))
            elif op == "pub":
                msg = self.client.publish(frame.get("topic"), frame.get("data", {}))
                self._send(canonical_json({
                    "op": "ack", "topic": msg.topic, "seq": msg.seq,
                    "stamp_us": msg.stamp_us,
                }))
            else:
                self._send(canonical_json(
                    {"op": "err", "code": "unknown_op", "detail": f"op {op!r} not in pub/sub"}))
        except TopicError as exc:
            self._send(canonical_json(
                {"op": "err", "code": exc.code, "detail": str(exc)}))

    def close(self):
        self.client.close()


class BrokerServer:
    """Holds the live TCP + WebSocket listeners for one broker."""

    def __init__(self, broker: Broker, host="127.0.0.1", tcp_port=7450, ws_port=7451,
                 ui_dir=None):
        self.broker = broker
        self.host = host
        self.tcp_port = tcp_port
        self.ws_port = ws_port
        self.ui_dir = Path(ui_dir) if ui_dir else None
        self._tcp_server = None
        self._ws_server = None

    async def start(self):
        loop = asyncio.get_running_loop()
        try:
            self._tcp_server = await asyncio.start_server(
                self._tcp_connection, self.host, self.tcp_port)
            self._ws_server = await ws_serve(
                self._ws_connection, self.host, self.ws_port,
                process_request=self._maybe_serve_static)
        except OSError as exc:
            await self.stop()
            raise CobotError(f"endpoint in use or unavailable: {exc}") from exc
        return self

    async def stop(self):
        if self._tcp_server is not None:
            self._tcp_server.close()
            await self._tcp_server.wait_closed()
        if self._ws_server is not None:
            self._ws_server.close()
            await self._ws_server.wait_closed()

    @property
    def bound_tcp_port(self):
        return self._tcp_server.sockets[0].getsockname()[1]

    @property
    def bound_ws_port(self):
        return self._ws_server.sockets[0].getsockname()[1]

    # -- TCP ----------------------------------------------------------------
    async def _tcp_connection(self, reader, writer):
        loop = asyncio.get_running_loop()
        queue: asyncio.Queue = asyncio.Queue()
        session = RemoteSession(
            self.broker, name="tcp",
            send=lambda text: loop.call_soon_threadsafe(queue.put_nowait, text))

        async def pump():
            while True:
                text = await queue.get()
                writer.write(text.encode() + b"\n")
                await writer.drain()

        pump_task = asyncio.ensure_future(pump())
        try:
            while True:
                line = await reader.readline()
                if not line:
                    break
                text = line.decode(errors="replace").strip()
                if text:
                    session.handle(text)
        finally:
            pump_task.cancel()
            session.close()
            writer.close()

    # -- WebSocket ----------------------------------------------------------
    async def _ws_connection(self, connection):
        loop = asyncio.get_running_loop()
        queue: asyncio.Queue = asyncio.Queue()
        session = RemoteSession(
            self.broker, name="ws",
            send=lambda text: loop.call_soon_threadsafe(queue.put_nowait, text))

        async def pump():
            while True:
                await connection.send(await queue.get())

        pump_task = asyncio.ensure_future(pump())
        try:
            async for message in connection:
                session.handle(message)
        finally:
            pump_task.cancel()
            session.close()

    def _maybe_serve_static(self, connection, request):
        if "upgrade" in request.headers.get("Connection", "").lower() \
                or request.headers.get("Upgrade"):
            return None  # continue with the websocket handshake
        if self.ui_dir is None:
            return Response(404, "Not Found", Headers(), b"no UI bundle configured\n")
        path = request.path.split("?")[0]
        rel = path.lstrip("/") or "index.html"
        target = (self.ui_dir / rel).resolve()
        if not str(target).startswith(str(self.ui_dir.resolve())) or not target.is_file():
            return Response(404, "Not Found", Headers(), b"not found\n")
        ctype = mimetypes.guess_type(str(target))[0] or "application/octet-stream"
        body = target.read_bytes()
        headers = Headers([("Content-Type", ctype), ("Content-Length", str(len(body)))])
        return Response(200, "OK", headers, body)


async def wall_clock_ticker(broker: Broker, tick_us: int):
    """Publish ticks at the configured rate in live (wall clock) mode."""
    interval = tick_us / 1e6
    while True:
        broker.tick(tick_us)
        await asyncio.sleep(interval)
