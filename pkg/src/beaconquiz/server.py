"""HTTP + WebSocket front door around the deterministic engine.

One background task owns the engine and ticks it at the configured rate;
client messages funnel into an ordered queue that the next tick drains,
and finished snapshots fan out to connected sockets. A slow client only
ever skips ahead to the latest snapshot, never observes reordering.
"""

from __future__ import annotations

import asyncio
import json
import logging
import sys
from pathlib import Path

from aiohttp import WSMsgType, web

from . import game as quiz
from .config import AppConfig, sanitized_config
from .engine import (
    ClientEvent,
    CoreEngine,
    LiveFeedSource,
    ReplaySource,
    build_engine,
    snapshot_json,
)
from .pipeline import ScanLogError

log = logging.getLogger("beaconquiz.server")

_FALLBACK_PAGE = """<!doctype html>
<html><head><meta charset="utf-8"><title>beaconquiz</title></head>
<body style="font-family: sans-serif">
<h1>beaconquiz server</h1>
<p>The web UI bundle was not found. Build it with <code>npm run build</code>
inside <code>frontend/</code>, or point <code>ui_dir</code> at a built bundle.</p>
<p>The WebSocket endpoint at <code>/ws</code> is live either way.</p>
</body></html>
"""


class ClientSlot:
    """Per-socket conflation slot: holds only the newest unsent snapshot."""

    def __init__(self):
        self.latest: str | None = None
        self.wakeup = asyncio.Event()

    def offer(self, payload: str) -> None:
        self.latest = payload
        self.wakeup.set()

    async def take(self) -> str:
        while True:
            await self.wakeup.wait()
            self.wakeup.clear()
            if self.latest is not None:
                payload, self.latest = self.latest, None
                return payload


class GameServer:
    def __init__(self, config: AppConfig, engine: CoreEngine, bank: quiz.QuestionBank):
        self.config = config
        self.engine = engine
        self.bank = bank
        self.events: asyncio.Queue[ClientEvent] = asyncio.Queue()
        self.clients: set[ClientSlot] = set()
        self.latest_payload: str | None = None
        self.frozen = False  # replay exhausted: final state keeps being served
        self._tick_task: asyncio.Task | None = None
        self._feed_task: asyncio.Task | None = None

    # -- wiring -----------------------------------------------------------

    def build_app(self) -> web.Application:
        app = web.Application()
        app.router.add_get("/healthz", self.handle_healthz)
        app.router.add_get("/config", self.handle_config)
        app.router.add_get("/ws", self.handle_ws)
        app.router.add_get("/", self.handle_index)
        app.router.add_get("/{tail:.+}", self.handle_asset)
        app.on_startup.append(self._on_startup)
        app.on_cleanup.append(self._on_cleanup)
        return app

    async def _on_startup(self, app: web.Application) -> None:
        loop = asyncio.get_running_loop()
        self._tick_task = loop.create_task(self._tick_loop())
        if self.config.mode == "live":
            self._feed_task = loop.create_task(self._live_feed_loop())

    async def _on_cleanup(self, app: web.Application) -> None:
        for task in (self._tick_task, self._feed_task):
            if task:
                task.cancel()
                try:
                    await task
                except (asyncio.CancelledError, Exception):
                    pass

    # -- the loop ---------------------------------------------------------

    async def _tick_loop(self) -> None:
        loop = asyncio.get_running_loop()
        period = self.config.tick_ms / 1000.0
        deadline = loop.time() + period
        while True:
            await asyncio.sleep(max(0.0, deadline - loop.time()))
            deadline += period
            if self.frozen:
                continue
            events = []
            while not self.events.empty():
                events.append(self.events.get_nowait())
            snapshot = self.engine.tick(events)
            self.latest_payload = snapshot_json(snapshot)
            for client in self.clients:
                client.offer(self.latest_payload)
            source = self.engine.source
            if isinstance(source, ReplaySource) and source.exhausted:
                log.info("replay exhausted at t=%d ms; serving final state", self.engine.clock_ms)
                self.frozen = True

    async def _live_feed_loop(self) -> None:
        try:
            await self._run_live_feed()
        except asyncio.CancelledError:
            raise
        except Exception as e:
            log.error("live feed failed: %s", e)

    async def _run_live_feed(self) -> None:
        source = self.engine.source
        assert isinstance(source, LiveFeedSource)
        if self.config.live_feed == "stdin":
            reader = asyncio.StreamReader()
            await asyncio.get_running_loop().connect_read_pipe(
                lambda: asyncio.StreamReaderProtocol(reader), sys.stdin
            )
            await self._consume_feed(reader, source)
        else:
            port = int(self.config.live_feed.split(":", 1)[1])

            async def on_conn(reader: asyncio.StreamReader, writer: asyncio.StreamWriter):
                await self._consume_feed(reader, source)
                writer.close()

            feed_server = await asyncio.start_server(on_conn, "127.0.0.1", port)
            log.info("live feed listening on tcp 127.0.0.1:%d", port)
            async with feed_server:
                await feed_server.serve_forever()

    async def _consume_feed(self, reader: asyncio.StreamReader, source: LiveFeedSource) -> None:
        line_no = 0
        while True:
            line = await reader.readline()
            if not line:
                return
            line_no += 1
            text = line.decode("utf-8", errors="replace")
            if not text.strip():
                continue
            try:
                source.feed_line(text, line_no)
            except ScanLogError as e:
                log.warning("live feed: %s", e)

    # -- handlers ---------------------------------------------------------

    async def handle_healthz(self, request: web.Request) -> web.Response:
        return web.json_response({"status": "ok"})

    async def handle_config(self, request: web.Request) -> web.Response:
        return web.json_response(
            sanitized_config(self.config, len(self.bank), self.bank.ladder)
        )

    async def handle_index(self, request: web.Request) -> web.Response:
        index = Path(self.config.ui_dir) / "index.html"
        if index.is_file():
            return web.FileResponse(index)
        return web.Response(text=_FALLBACK_PAGE, content_type="text/html")

    async def handle_asset(self, request: web.Request) -> web.Response:
        ui_dir = Path(self.config.ui_dir).resolve()
        candidate = (ui_dir / request.match_info["tail"]).resolve()
        if ui_dir.is_dir() and candidate.is_file() and ui_dir in candidate.parents:
            return web.FileResponse(candidate)
        raise web.HTTPNotFound()

    async def handle_ws(self, request: web.Request) -> web.WebSocketResponse:
        ws = web.WebSocketResponse(heartbeat=30)
        await ws.prepare(request)
        slot = ClientSlot()
        self.clients.add(slot)
        if self.latest_payload is not None:
            slot.offer(self.latest_payload)  # late joiner sees current state at once

        async def sender():
            while True:
                payload = await slot.take()
                await ws.send_str(payload)

        sender_task = asyncio.get_running_loop().create_task(sender())
        try:
            async for msg in ws:
                if msg.type != WSMsgType.TEXT:
                    continue
                await self._handle_client_message(ws, msg.data)
        finally:
            sender_task.cancel()
            self.clients.discard(slot)
        return ws

    async def _handle_client_message(self, ws: web.WebSocketResponse, data: str) -> None:
        try:
            obj = json.loads(data)
            if not isinstance(obj, dict):
                raise ValueError("expected a JSON object")
        except ValueError:
            await self._send_error(ws, "malformed JSON")
            return
        kind = obj.get("type")
        if kind == "move":
            if self.config.mode != "sim":
                await self._send_error(ws, f"move is not available in {self.config.mode} mode")
                return
            x, y = obj.get("x"), obj.get("y")
            if not isinstance(x, (int, float)) or not isinstance(y, (int, float)):
                await self._send_error(ws, "move requires numeric x and y")
                return
            await self.events.put(ClientEvent(kind="move", x=float(x), y=float(y)))
        elif kind in ("confirm", "advance", "reset"):
            await self.events.put(ClientEvent(kind=kind))
        else:
            await self._send_error(ws, f"unknown message type {kind!r}")

    @staticmethod
    async def _send_error(ws: web.WebSocketResponse, reason: str) -> None:
        await ws.send_str(json.dumps({"type": "error", "reason": reason}, separators=(",", ":")))


def serve(config: AppConfig) -> int:
    """Run the server until interrupted; returns the process exit status."""
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(name)s %(message)s")
    if config.questions_path:
        bank = quiz.load_question_bank(config.questions_path)
    else:
        bank = quiz.default_question_bank()
    engine = build_engine(config, bank)
    server = GameServer(config, engine, bank)
    app = server.build_app()
    log.info(
        "serving %s mode on http://%s:%d (ws at /ws)",
        config.mode, config.listen_host, config.listen_port,
    )
    try:
        web.run_app(
            app, host=config.listen_host, port=config.listen_port, print=None,
            handle_signals=True,
        )
    except OSError as e:
        log.error("startup failed: %s", e)
        return 1
    finally:
        if engine.recorder:
            engine.recorder.close()
    return 0
