"""Simulated LED board: a PIC16F84-style register file with 8 LEDs on
PORTB and the serial input on RA1.

Reset values mirror the firmware preamble:

  TRISB = 0x00   all PORTB pins outputs (LED drive)
  TRISA = 0x1F   all PORTA pins inputs (RA1 carries the serial line)
  PORTB = 0x00   all LEDs off

The receive loop is byte-per-frame: every received byte is written
straight to PORTB, so the last byte always wins. The simulator applies
every decoded byte in order — an idealisation of the real firmware,
whose blocking receive can lose bytes that arrive between reads.
"""

from __future__ import annotations

import socket
import threading
from dataclasses import dataclass, replace
from typing import Callable, Optional

from .protocol import LedState, _check_byte, byte_to_state, led_display
from .transport import BindFailed
from .uart import DecodeResult, FrameConfig, Waveform, decode

TRISA_RESET = 0x1F
TRISB_RESET = 0x00
PORTB_RESET = 0x00

RA1 = 1 << 1  # serial input pin


@dataclass
class PicRegisters:
    trisa: int = TRISA_RESET
    trisb: int = TRISB_RESET
    porta: int = 0x00
    portb: int = PORTB_RESET


@dataclass(frozen=True)
class DeviceState:
    """Read-only snapshot of the board; freely shareable."""

    regs: PicRegisters
    leds: LedState
    frames_received: int
    framing_errors: int

    def record(self) -> dict:
        """Structured text record: {portb, leds[8], frames_received, framing_errors}."""
        return {
            "portb": self.regs.portb,
            "leds": list(self.leds.leds),
            "frames_received": self.frames_received,
            "framing_errors": self.framing_errors,
        }


class LedBoard:
    """The board state machine. Single-owner: feed it from one serialized
    command stream; hand out snapshots to everyone else."""

    def __init__(self, link: FrameConfig | None = None):
        self.link = link or FrameConfig()
        self.regs = PicRegisters()
        self.frames_received = 0
        self.framing_errors = 0
        self.reset()

    def reset(self) -> None:
        self.regs = PicRegisters(trisa=TRISA_RESET, trisb=TRISB_RESET, porta=0, portb=PORTB_RESET)
        self.frames_received = 0
        self.framing_errors = 0

    @property
    def leds(self) -> LedState:
        # A tri-stated pin cannot drive its LED; with TRISB=0 this is
        # exactly byte_to_state(PORTB).
        return byte_to_state(self.regs.portb & ~self.regs.trisb & 0xFF)

    def feed_byte(self, b: int) -> None:
        """One received frame: write the byte to PORTB, last byte wins."""
        self.regs.portb = _check_byte(b)
        self.frames_received += 1

    def feed_waveform(self, w: Waveform, cfg: FrameConfig | None = None) -> DecodeResult:
        """Decode a line trace at the configured link and apply each byte."""
        result = decode(w, cfg or self.link)
        for b in result.bytes:
            self.feed_byte(b)
        self.framing_errors += len(result.errors)
        return result

    def snapshot(self) -> DeviceState:
        return DeviceState(
            regs=replace(self.regs),
            leds=self.leds,
            frames_received=self.frames_received,
            framing_errors=self.framing_errors,
        )

    def state_line(self) -> str:
        """Human/machine line, LED #1 leftmost: 'PORTB=0x14 LEDS=00101000'."""
        portb = self.regs.portb
        return f"PORTB=0x{portb:02X} LEDS={led_display(portb)}"


@dataclass(frozen=True)
class ElectricalParams:
    """Per-LED drive: supply rail, series resistor, LED forward voltage,
    and the pin's sink/source budget in milliamps."""

    vcc: float = 5.0
    r_led: float = 301.0
    vf_led: float = 2.0
    max_pin_current: float = 25.0


@dataclass(frozen=True)
class CurrentCheck:
    current_ma: float
    within_limit: bool


def led_current(p: ElectricalParams = ElectricalParams()) -> CurrentCheck:
    """Current through one lit LED, (vcc - vf) / r, flagged against the
    per-pin budget."""
    if p.r_led <= 0:
        raise ValueError(f"r_led must be positive, got {p.r_led}")
    if p.vcc < p.vf_led:
        raise ValueError(f"vcc {p.vcc} V below LED forward voltage {p.vf_led} V")
    ma = (p.vcc - p.vf_led) / p.r_led * 1000.0
    return CurrentCheck(current_ma=ma, within_limit=ma <= p.max_pin_current)


class DeviceServer:
    """Serves a LedBoard as a TCP byte-stream: raw octets in, one PORTB
    write per octet. ``on_state`` fires after every applied byte."""

    def __init__(
        self,
        device: LedBoard,
        host: str = "127.0.0.1",
        port: int = 7788,
        on_state: Optional[Callable[[LedBoard], None]] = None,
    ):
        self.device = device
        self.on_state = on_state
        self._lock = threading.Lock()
        self._running = False
        self._threads: list[threading.Thread] = []
        self._clients: list[socket.socket] = []
        sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        try:
            sock.bind((host, port))
            sock.listen(8)
        except OSError as e:
            sock.close()
            raise BindFailed(f"cannot bind {host}:{port}: {e}") from e
        self._sock = sock

    @property
    def address(self) -> tuple[str, int]:
        addr = self._sock.getsockname()
        return addr[0], addr[1]

    def start(self) -> None:
        """Accept connections on a background thread."""
        self._running = True
        t = threading.Thread(target=self._accept_loop, name="ledboard-device-accept", daemon=True)
        t.start()
        self._threads.append(t)

    def serve_forever(self) -> None:
        self._running = True
        self._accept_loop()

    def stop(self) -> None:
        self._running = False
        try:
            self._sock.close()
        except OSError:
            pass
        with self._lock:
            clients = list(self._clients)
        for c in clients:
            try:
                c.close()
            except OSError:
                pass
        for t in self._threads:
            t.join(timeout=1.0)

    def _accept_loop(self) -> None:
        while self._running:
            try:
                conn, _ = self._sock.accept()
            except OSError:
                return  # listener closed
            with self._lock:
                self._clients.append(conn)
            t = threading.Thread(target=self._serve_client, args=(conn,), daemon=True)
            t.start()
            self._threads.append(t)

    def _serve_client(self, conn: socket.socket) -> None:
        try:
            while True:
                data = conn.recv(4096)
                if not data:
                    return
                for b in data:
                    with self._lock:
                        self.device.feed_byte(b)
                    if self.on_state is not None:
                        self.on_state(self.device)
        except OSError:
            return
        finally:
            try:
                conn.close()
            except OSError:
                pass
            with self._lock:
                if conn in self._clients:
                    self._clients.remove(conn)
