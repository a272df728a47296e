"""Host-side control stack: serial session, command layer, HTTP service.

The device link is one-directional — the board only receives — so the
host keeps the authoritative copy of the board state: ``cached_byte``
is the last byte successfully written. Commands transform the cache
with the pure mask ops and put exactly one byte on the wire.

Opening a session walks the classic three-step serial setup and fails
with a distinct error at each site: OpenFailed (cannot create the port
handle), QueryFailed (cannot read current line state), ConfigFailed
(requested line parameters rejected).

The service layer exposes the session over HTTP:

  GET  /state            current record
  POST /led/{n}          {"action": "on"|"off"|"toggle"}
  POST /byte             {"value": 0-255}
  GET  /events           server-sent events, one record per state change

Records are {"seq": int, "byte": 0-255, "leds": [bool x 8]} plus
frames_received/framing_errors when an in-process device is attached.
All state mutations are serialized under one lock, and every subscriber
sees the same gap-free event order.
"""

from __future__ import annotations

import json
import mimetypes
import os
import queue
import threading
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Callable, Optional

from . import protocol
from .device import LedBoard
from .transport import (
    BindFailed,
    ChannelClosed,
    ChannelSpec,
    Endpoint,
    TransportError,
    UnsupportedLineParams,
    open_channel,
)


class SessionError(Exception):
    """Base for host session failures."""


class OpenFailed(SessionError):
    pass


class QueryFailed(SessionError):
    pass


class ConfigFailed(SessionError):
    pass


class NotConnected(SessionError):
    pass


@dataclass(frozen=True)
class SessionConfig:
    """Port identity plus line parameters; defaults are the 2400-8-N-1
    setup the board firmware expects."""

    endpoint: ChannelSpec = field(default_factory=lambda: ChannelSpec("loopback"))
    baud: int = 2400
    data_bits: int = 8
    parity: str = "none"
    stop_bits: int = 1


class HostSession:
    """An open link to the board. Use :func:`open_session` to create one."""

    def __init__(self, endpoint: Endpoint, config: SessionConfig):
        self._endpoint = endpoint
        self.config = config
        self.cached_byte = 0
        self.connected = True

    @property
    def endpoint(self) -> Endpoint:
        return self._endpoint

    def send_state(self, b: int) -> None:
        """Write exactly one byte — the full board state — to the channel."""
        protocol._check_byte(b)
        if not self.connected:
            raise NotConnected("session is not connected")
        try:
            self._endpoint.send(bytes([b]))
        except ChannelClosed:
            self.connected = False
            raise
        self.cached_byte = b

    def set_led(self, n: int) -> None:
        self.send_state(protocol.set_led(self.cached_byte, n))

    def clear_led(self, n: int) -> None:
        self.send_state(protocol.clear_led(self.cached_byte, n))

    def toggle_led(self, n: int) -> None:
        self.send_state(protocol.toggle_led(self.cached_byte, n))

    def leds(self) -> protocol.LedState:
        return protocol.byte_to_state(self.cached_byte)

    def close(self) -> None:
        self.connected = False
        self._endpoint.close()


def open_session(cfg: SessionConfig | None = None) -> HostSession:
    """Open the channel, query it, then apply the line parameters."""
    cfg = cfg or SessionConfig()
    try:
        endpoint = open_channel(cfg.endpoint)
    except TransportError as e:
        raise OpenFailed(f"cannot open channel: {e}") from e
    try:
        endpoint.line_params()
    except TransportError as e:
        endpoint.close()
        raise QueryFailed(f"cannot query channel state: {e}") from e
    try:
        endpoint.configure(cfg.baud, cfg.data_bits, cfg.parity, cfg.stop_bits)
    except UnsupportedLineParams as e:
        endpoint.close()
        raise ConfigFailed(f"channel rejected line parameters: {e}") from e
    return HostSession(endpoint, cfg)


class DevicePump:
    """Drains a loopback device end into a LedBoard. Synchronous: call
    ``drain()`` after each host send so the board is up to date."""

    def __init__(self, endpoint: Endpoint, device: LedBoard):
        self.endpoint = endpoint
        self.device = device

    def drain(self, max_wait: float = 0.0) -> int:
        fed = 0
        timeout = max_wait
        while True:
            try:
                data = self.endpoint.recv(4096, timeout=timeout)
            except TimeoutError:
                return fed
            except ChannelClosed:
                return fed
            if not data:
                return fed
            for b in data:
                self.device.feed_byte(b)
                fed += 1
            timeout = 0.0


_CORS_HEADERS = {
    "Access-Control-Allow-Origin": "*",
    "Access-Control-Allow-Methods": "GET, POST, OPTIONS",
    "Access-Control-Allow-Headers": "Content-Type",
}


class ApiServer:
    """HTTP facade over one host session; see the module docstring for
    the endpoint table."""

    def __init__(
        self,
        session: HostSession,
        bind: tuple[str, int] = ("127.0.0.1", 8777),
        device: Optional[LedBoard] = None,
        pump: Optional[DevicePump] = None,
        ui_dir: Optional[str] = None,
    ):
        self.session = session
        self.device = device
        self.pump = pump
        self.ui_dir = ui_dir
        self._lock = threading.Lock()
        self._seq = 0
        self._subscribers: list[queue.SimpleQueue] = []
        self._thread: Optional[threading.Thread] = None

        api = self

        class Handler(BaseHTTPRequestHandler):
            protocol_version = "HTTP/1.1"

            def log_message(self, fmt, *args):  # keep stdout for state lines
                pass

            def _send_json(self, status: int, payload: dict) -> None:
                body = json.dumps(payload).encode()
                self.send_response(status)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(body)))
                for k, v in _CORS_HEADERS.items():
                    self.send_header(k, v)
                self.end_headers()
                self.wfile.write(body)

            def _read_json(self) -> dict:
                length = int(self.headers.get("Content-Length") or 0)
                raw = self.rfile.read(length) if length else b""
                try:
                    payload = json.loads(raw or b"{}")
                except json.JSONDecodeError as e:
                    raise ValueError(f"invalid JSON body: {e}") from e
                if not isinstance(payload, dict):
                    raise ValueError("JSON body must be an object")
                return payload

            def do_OPTIONS(self):
                self.send_response(204)
                for k, v in _CORS_HEADERS.items():
                    self.send_header(k, v)
                self.send_header("Content-Length", "0")
                self.end_headers()

            def do_GET(self):
                path = self.path.split("?", 1)[0]
                if path == "/state":
                    self._send_json(200, api.state_record())
                elif path == "/events":
                    self._serve_events()
                elif api.ui_dir is not None:
                    self._serve_static(path)
                else:
                    self._send_json(404, {"error": f"no such path: {path}"})

            def do_POST(self):
                path = self.path.split("?", 1)[0]
                try:
                    if path == "/byte":
                        payload = self._read_json()
                        value = payload.get("value")
                        record = api.write_byte(value)
                    elif path.startswith("/led/"):
                        tail = path[len("/led/"):]
                        try:
                            n = int(tail)
                        except ValueError:
                            self._send_json(404, {"error": f"no such path: {path}"})
                            return
                        payload = self._read_json()
                        record = api.led_action(n, payload.get("action"))
                    else:
                        self._send_json(404, {"error": f"no such path: {path}"})
                        return
                except ValueError as e:
                    self._send_json(400, {"error": str(e)})
                    return
                except (NotConnected, ChannelClosed) as e:
                    self._send_json(503, {"error": str(e)})
                    return
                self._send_json(200, record)

            def _serve_events(self):
                q: queue.SimpleQueue = queue.SimpleQueue()
                snapshot = api.subscribe(q)
                self.send_response(200)
                self.send_header("Content-Type", "text/event-stream")
                self.send_header("Cache-Control", "no-cache")
                self.send_header("Connection", "close")
                for k, v in _CORS_HEADERS.items():
                    self.send_header(k, v)
                self.end_headers()
                try:
                    self._write_event(snapshot)
                    while True:
                        try:
                            record = q.get(timeout=15.0)
                        except queue.Empty:
                            self.wfile.write(b": keepalive\n\n")
                            self.wfile.flush()
                            continue
                        if record is None:  # server shutdown
                            return
                        self._write_event(record)
                except (BrokenPipeError, ConnectionResetError, OSError):
                    return
                finally:
                    api.unsubscribe(q)

            def _write_event(self, record: dict) -> None:
                data = json.dumps(record)
                self.wfile.write(f"id: {record.get('seq', 0)}\ndata: {data}\n\n".encode())
                self.wfile.flush()

            def _serve_static(self, path: str) -> None:
                if path == "/":
                    path = "/index.html"
                full = os.path.realpath(os.path.join(api.ui_dir, path.lstrip("/")))
                root = os.path.realpath(api.ui_dir)
                if not full.startswith(root + os.sep) and full != root:
                    self._send_json(404, {"error": "not found"})
                    return
                if not os.path.isfile(full):
                    self._send_json(404, {"error": f"no such path: {path}"})
                    return
                ctype = mimetypes.guess_type(full)[0] or "application/octet-stream"
                with open(full, "rb") as f:
                    body = f.read()
                self.send_response(200)
                self.send_header("Content-Type", ctype)
                self.send_header("Content-Length", str(len(body)))
                for k, v in _CORS_HEADERS.items():
                    self.send_header(k, v)
                self.end_headers()
                self.wfile.write(body)

        try:
            self._httpd = ThreadingHTTPServer(bind, Handler)
        except OSError as e:
            raise BindFailed(f"cannot bind {bind[0]}:{bind[1]}: {e}") from e
        self._httpd.daemon_threads = True

    @property
    def address(self) -> tuple[str, int]:
        host, port = self._httpd.server_address[:2]
        return str(host), int(port)

    @property
    def url(self) -> str:
        host, port = self.address
        return f"http://{host}:{port}"

    def state_record(self) -> dict:
        with self._lock:
            return self._record_locked()

    def _record_locked(self) -> dict:
        record = {
            "seq": self._seq,
            "byte": self.session.cached_byte,
            "leds": list(self.session.leds().leds),
        }
        if self.device is not None:
            record["frames_received"] = self.device.frames_received
            record["framing_errors"] = self.device.framing_errors
        return record

    def _apply(self, mutate: Callable[[HostSession], None]) -> dict:
        with self._lock:
            mutate(self.session)
            if self.pump is not None:
                self.pump.drain(max_wait=self.session.config.endpoint.latency_ms / 1000.0 + 0.05)
            self._seq += 1
            record = self._record_locked()
            for q in self._subscribers:
                q.put(record)
        return record

    def write_byte(self, value) -> dict:
        if not isinstance(value, int) or isinstance(value, bool) or not 0 <= value <= 255:
            raise ValueError(f"value must be an integer in 0..255, got {value!r}")
        return self._apply(lambda s: s.send_state(value))

    def led_action(self, n, action) -> dict:
        if not isinstance(n, int) or not 1 <= n <= protocol.LED_COUNT:
            raise ValueError(f"LED index must be in 1..{protocol.LED_COUNT}, got {n!r}")
        ops = {"on": HostSession.set_led, "off": HostSession.clear_led, "toggle": HostSession.toggle_led}
        if action not in ops:
            raise ValueError(f"action must be one of {sorted(ops)}, got {action!r}")
        return self._apply(lambda s: ops[action](s, n))

    def subscribe(self, q: queue.SimpleQueue) -> dict:
        """Register an event queue; returns the snapshot to send first."""
        with self._lock:
            self._subscribers.append(q)
            return self._record_locked()

    def unsubscribe(self, q: queue.SimpleQueue) -> None:
        with self._lock:
            if q in self._subscribers:
                self._subscribers.remove(q)

    def start(self) -> None:
        self._thread = threading.Thread(
            target=lambda: self._httpd.serve_forever(poll_interval=0.05),
            name="ledboard-api",
            daemon=True,
        )
        self._thread.start()

    def serve_forever(self) -> None:
        self._httpd.serve_forever()

    def stop(self) -> None:
        with self._lock:
            for q in self._subscribers:
                q.put(None)
        self._httpd.shutdown()
        self._httpd.server_close()
        if self._thread is not None:
            self._thread.join(timeout=2.0)


def serve_api(
    session: HostSession,
    bind: tuple[str, int] = ("127.0.0.1", 8777),
    device: Optional[LedBoard] = None,
    pump: Optional[DevicePump] = None,
    ui_dir: Optional[str] = None,
) -> ApiServer:
    """Start the HTTP service on a background thread and return it."""
    server = ApiServer(session, bind=bind, device=device, pump=pump, ui_dir=ui_dir)
    server.start()
    return server
