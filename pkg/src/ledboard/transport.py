"""Byte-stream channels between host and device.

Three kinds: an in-memory loopback pair, a TCP virtual-serial link, and
a best-effort passthrough to a real serial node. The wire carries raw
octets — no framing, no handshake — so anything that moves bytes in
order qualifies. Bit-level (waveform) behaviour stays in-process in the
uart module; channels operate post-decode.

Fault injection models a bad cable: per-byte drop and per-bit flip
probabilities driven by a seeded RNG, so every corruption sequence is
replayable.
"""

from __future__ import annotations

import os
import random
import select
import socket
import threading
import time
from collections import deque
from dataclasses import dataclass
from typing import Optional


class TransportError(Exception):
    """Base for channel failures."""


class ConnectFailed(TransportError):
    pass


class PortUnavailable(TransportError):
    pass


class ChannelClosed(TransportError):
    pass


class BindFailed(TransportError):
    pass


class UnsupportedLineParams(TransportError):
    pass


@dataclass(frozen=True)
class FaultProfile:
    bit_flip_probability: float = 0.0
    drop_probability: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        for name in ("bit_flip_probability", "drop_probability"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {p}")


def _inject(bs: bytes, profile: FaultProfile, rng: random.Random) -> bytes:
    out = bytearray()
    for byte in bs:
        if rng.random() < profile.drop_probability:
            continue
        if profile.bit_flip_probability > 0.0:
            for i in range(8):
                if rng.random() < profile.bit_flip_probability:
                    byte ^= 1 << i
        out.append(byte)
    return bytes(out)


def inject_faults(bs: bytes, profile: FaultProfile) -> bytes:
    """Corrupt a byte sequence. Pure: the same (input, profile) always
    yields the same output."""
    return _inject(bytes(bs), profile, random.Random(profile.seed))


@dataclass(frozen=True)
class ChannelSpec:
    """Where a channel goes and how the cable misbehaves."""

    kind: str  # "loopback" | "tcp" | "serial"
    host: str = "127.0.0.1"
    port: int = 7788
    device: str = ""  # serial node path
    latency_ms: float = 0.0
    fault_profile: Optional[FaultProfile] = None

    def __post_init__(self) -> None:
        if self.kind not in ("loopback", "tcp", "serial"):
            raise ValueError(f"unknown channel kind {self.kind!r}")
        if self.latency_ms < 0:
            raise ValueError(f"latency_ms must be >= 0, got {self.latency_ms}")


def parse_spec(text: str, fault_profile: Optional[FaultProfile] = None) -> ChannelSpec:
    """Parse a connect string: 'loopback', 'tcp:HOST:PORT' (or bare
    'HOST:PORT'), 'serial:/dev/ttyUSB0'."""
    text = text.strip()
    if text == "loopback":
        return ChannelSpec("loopback", fault_profile=fault_profile)
    if text.startswith("serial:"):
        node = text[len("serial:"):]
        if not node:
            raise ValueError("serial spec needs a device path, e.g. serial:/dev/ttyUSB0")
        return ChannelSpec("serial", device=node, fault_profile=fault_profile)
    if text.startswith("tcp:"):
        text = text[len("tcp:"):]
    host, sep, port = text.rpartition(":")
    if not sep or not host or not port.isdigit():
        raise ValueError(f"cannot parse channel spec {text!r}; expected HOST:PORT")
    return ChannelSpec("tcp", host=host, port=int(port), fault_profile=fault_profile)


class Endpoint:
    """One end of a byte channel. One concurrent reader plus one
    concurrent writer per endpoint is supported."""

    kind = "endpoint"

    def send(self, data: bytes) -> int:
        raise NotImplementedError

    def recv(self, max_bytes: int = 4096, timeout: Optional[float] = None) -> bytes:
        """Blocking read. Returns b'' on clean remote close; raises
        TimeoutError when ``timeout`` elapses with nothing to read."""
        raise NotImplementedError

    def close(self) -> None:
        raise NotImplementedError

    @property
    def closed(self) -> bool:
        raise NotImplementedError

    # DCB-style line parameter handling. The simulated links carry any
    # positive baud rate but only the 8-N-1 format.
    def configure(self, baud: int, data_bits: int = 8, parity: str = "none", stop_bits: int = 1) -> None:
        if self.closed:
            raise ChannelClosed("cannot configure a closed channel")
        if baud <= 0:
            raise UnsupportedLineParams(f"baud must be positive, got {baud}")
        if (data_bits, parity, stop_bits) != (8, "none", 1):
            raise UnsupportedLineParams(
                f"only 8-N-1 is supported, got {data_bits}-{parity}-{stop_bits}"
            )
        self._line = {"baud": baud, "data_bits": data_bits, "parity": parity, "stop_bits": stop_bits}

    def line_params(self) -> dict:
        if self.closed:
            raise ChannelClosed("cannot query a closed channel")
        return dict(getattr(self, "_line", {"baud": 2400, "data_bits": 8, "parity": "none", "stop_bits": 1}))


class LoopbackEndpoint(Endpoint):
    """In-memory half of a lossless (unless faulted) byte pipe."""

    kind = "loopback"

    def __init__(self, spec: ChannelSpec):
        self._spec = spec
        self._cond = threading.Condition()
        self._queue: deque[tuple[float, bytes]] = deque()  # (deliver_at, data)
        self._closed = False
        self.peer: "LoopbackEndpoint" = None  # type: ignore[assignment]
        self._rng = random.Random(spec.fault_profile.seed) if spec.fault_profile else None

    def send(self, data: bytes) -> int:
        data = bytes(data)
        if self._closed:
            raise ChannelClosed("send on closed channel")
        if self.peer._closed:
            raise ChannelClosed("peer end closed")
        if not data:
            return 0
        delivered = data
        if self._spec.fault_profile is not None:
            with self._cond:  # the RNG is shared by both directions
                delivered = _inject(data, self._spec.fault_profile, self._rng)
        deliver_at = time.monotonic() + self._spec.latency_ms / 1000.0
        with self.peer._cond:
            if delivered:
                self.peer._queue.append((deliver_at, delivered))
            self.peer._cond.notify_all()
        return len(data)

    def recv(self, max_bytes: int = 4096, timeout: Optional[float] = None) -> bytes:
        deadline = None if timeout is None else time.monotonic() + timeout
        with self._cond:
            while True:
                if self._closed:
                    raise ChannelClosed("recv on closed channel")
                if self._queue:
                    deliver_at, data = self._queue[0]
                    now = time.monotonic()
                    if deliver_at <= now:
                        if len(data) <= max_bytes:
                            self._queue.popleft()
                            return data
                        self._queue[0] = (deliver_at, data[max_bytes:])
                        return data[:max_bytes]
                    wait = deliver_at - now
                    if deadline is not None:
                        if deadline <= now:
                            raise TimeoutError("recv timed out")
                        wait = min(wait, deadline - now)
                    self._cond.wait(wait)
                    continue
                if self.peer._closed:
                    return b""
                if deadline is not None:
                    remaining = deadline - time.monotonic()
                    if remaining <= 0:
                        raise TimeoutError("recv timed out")
                    self._cond.wait(remaining)
                else:
                    self._cond.wait()

    def close(self) -> None:
        with self._cond:
            self._closed = True
            self._cond.notify_all()
        if self.peer is not None:
            with self.peer._cond:
                self.peer._cond.notify_all()

    @property
    def closed(self) -> bool:
        return self._closed


def open_loopback(
    latency_ms: float = 0.0, fault_profile: Optional[FaultProfile] = None
) -> tuple[LoopbackEndpoint, LoopbackEndpoint]:
    """Paired endpoints: what one sends, the other receives."""
    spec = ChannelSpec("loopback", latency_ms=latency_ms, fault_profile=fault_profile)
    a, b = LoopbackEndpoint(spec), LoopbackEndpoint(spec)
    a.peer, b.peer = b, a
    b._rng = a._rng  # one corruption stream per cable
    return a, b


class TcpEndpoint(Endpoint):
    kind = "tcp"

    def __init__(self, spec: ChannelSpec, connect_timeout: float = 5.0):
        self._spec = spec
        self._closed = False
        self._rng = random.Random(spec.fault_profile.seed) if spec.fault_profile else None
        try:
            self._sock = socket.create_connection((spec.host, spec.port), timeout=connect_timeout)
        except OSError as e:
            raise ConnectFailed(f"cannot connect to {spec.host}:{spec.port}: {e}") from e
        self._sock.settimeout(None)

    def send(self, data: bytes) -> int:
        data = bytes(data)
        if self._closed:
            raise ChannelClosed("send on closed channel")
        if not data:
            return 0
        delivered = data
        if self._spec.fault_profile is not None:
            delivered = _inject(data, self._spec.fault_profile, self._rng)
        if self._spec.latency_ms:
            time.sleep(self._spec.latency_ms / 1000.0)
        try:
            if delivered:
                self._sock.sendall(delivered)
        except OSError as e:
            raise ChannelClosed(f"send failed: {e}") from e
        return len(data)

    def recv(self, max_bytes: int = 4096, timeout: Optional[float] = None) -> bytes:
        if self._closed:
            raise ChannelClosed("recv on closed channel")
        self._sock.settimeout(timeout)
        try:
            return self._sock.recv(max_bytes)
        except socket.timeout as e:
            raise TimeoutError("recv timed out") from e
        except OSError as e:
            if self._closed:
                raise ChannelClosed("recv on closed channel") from e
            raise ChannelClosed(f"recv failed: {e}") from e
        finally:
            if not self._closed:
                self._sock.settimeout(None)

    def close(self) -> None:
        self._closed = True
        try:
            self._sock.close()
        except OSError:
            pass

    @property
    def closed(self) -> bool:
        return self._closed


class SerialEndpoint(Endpoint):
    """Passthrough to an existing serial node. Line configuration is
    best-effort termios; desk-scale stub, never exercised in CI against
    real hardware."""

    kind = "serial"

    _BAUD_CONSTANTS = {2400: "B2400", 4800: "B4800", 9600: "B9600", 19200: "B19200", 38400: "B38400"}

    def __init__(self, spec: ChannelSpec):
        self._spec = spec
        self._closed = False
        if not os.path.exists(spec.device):
            raise PortUnavailable(f"no such serial device: {spec.device}")
        try:
            self._fd = os.open(spec.device, os.O_RDWR | os.O_NOCTTY)
        except OSError as e:
            raise PortUnavailable(f"cannot open {spec.device}: {e}") from e

    def configure(self, baud: int, data_bits: int = 8, parity: str = "none", stop_bits: int = 1) -> None:
        super().configure(baud, data_bits, parity, stop_bits)
        try:
            import termios

            if not os.isatty(self._fd):
                return
            attrs = termios.tcgetattr(self._fd)
            speed = getattr(termios, self._BAUD_CONSTANTS.get(baud, ""), None)
            if speed is None:
                raise UnsupportedLineParams(f"no termios speed constant for {baud} baud")
            attrs[0] = attrs[1] = attrs[3] = 0  # raw mode
            attrs[2] = termios.CS8 | termios.CREAD | termios.CLOCAL
            attrs[4] = attrs[5] = speed
            termios.tcsetattr(self._fd, termios.TCSANOW, attrs)
        except ImportError:
            pass

    def send(self, data: bytes) -> int:
        if self._closed:
            raise ChannelClosed("send on closed channel")
        data = bytes(data)
        if not data:
            return 0
        try:
            return os.write(self._fd, data)
        except OSError as e:
            raise ChannelClosed(f"send failed: {e}") from e

    def recv(self, max_bytes: int = 4096, timeout: Optional[float] = None) -> bytes:
        if self._closed:
            raise ChannelClosed("recv on closed channel")
        ready, _, _ = select.select([self._fd], [], [], timeout)
        if not ready:
            raise TimeoutError("recv timed out")
        try:
            return os.read(self._fd, max_bytes)
        except OSError as e:
            raise ChannelClosed(f"recv failed: {e}") from e

    def close(self) -> None:
        if not self._closed:
            self._closed = True
            try:
                os.close(self._fd)
            except OSError:
                pass

    @property
    def closed(self) -> bool:
        return self._closed


def open_channel(spec: ChannelSpec) -> Endpoint:
    """Open the host end of a channel. For loopback the device end is
    the returned endpoint's ``.peer``."""
    if spec.kind == "loopback":
        a, b = open_loopback(latency_ms=spec.latency_ms, fault_profile=spec.fault_profile)
        return a
    if spec.kind == "tcp":
        return TcpEndpoint(spec)
    if spec.kind == "serial":
        return SerialEndpoint(spec)
    raise ValueError(f"unknown channel kind {spec.kind!r}")
