"""Software UART: synthesize and decode sampled serial-line waveforms.

A frame is one start bit, the data bits LSB-first, then the stop bit(s),
each lasting one bit period of ``oversample`` samples. In the true
(TTL-side) polarity the line idles high and the start bit is low; the
inverted polarity — what an RS-232 transceiver produces on its line
side — flips every level.

The receiver is deliberately simple: it hunts for the idle->start edge,
samples each bit once at the midpoint of its nominal period, and checks
the stop bit. A frame whose stop bit samples at the wrong level is
dropped and reported as a framing error; decoding resumes at the next
idle->start edge. Skew tolerance of this sampler is a measured property
of the implementation, not a datasheet claim.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

HIGH = 1
LOW = 0

PARITY_NONE = "none"
PARITY_EVEN = "even"
PARITY_ODD = "odd"
_PARITIES = (PARITY_NONE, PARITY_EVEN, PARITY_ODD)

# Minimum samples per bit the receiver needs to place a mid-bit sample.
MIN_OVERSAMPLE = 4


@dataclass(frozen=True)
class FrameConfig:
    """Line parameters of the serial link. Defaults are the 2400-8-N-1
    true-polarity link the board firmware listens on."""

    baud: int = 2400
    data_bits: int = 8
    parity: str = PARITY_NONE
    stop_bits: int = 1
    inverted: bool = False
    oversample: int = 16

    def __post_init__(self) -> None:
        if self.baud <= 0:
            raise ValueError(f"baud must be positive, got {self.baud}")
        if not 1 <= self.data_bits <= 8:
            raise ValueError(f"data_bits must be in 1..8, got {self.data_bits}")
        if self.parity not in _PARITIES:
            raise ValueError(f"parity must be one of {_PARITIES}, got {self.parity!r}")
        if self.stop_bits < 1:
            raise ValueError(f"stop_bits must be >= 1, got {self.stop_bits}")
        if self.oversample < MIN_OVERSAMPLE:
            raise ValueError(f"oversample must be >= {MIN_OVERSAMPLE}, got {self.oversample}")

    @property
    def sample_rate(self) -> int:
        """Synthesis rate: one bit period is exactly ``oversample`` samples."""
        return self.baud * self.oversample

    @property
    def frame_bits(self) -> int:
        return 1 + self.data_bits + self.stop_bits

    @property
    def idle_level(self) -> int:
        return LOW if self.inverted else HIGH

    def _require_no_parity(self) -> None:
        if self.parity != PARITY_NONE:
            raise NotImplementedError("parity generation/checking is not implemented")

    def _check_value(self, b: int) -> int:
        limit = (1 << self.data_bits) - 1
        if not isinstance(b, int) or isinstance(b, bool) or not 0 <= b <= limit:
            raise ValueError(f"value must be in 0..{limit} for {self.data_bits} data bits, got {b!r}")
        return b


@dataclass(frozen=True)
class Waveform:
    """Uniformly sampled two-level line trace."""

    samples: tuple[int, ...]
    sample_rate: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "samples", tuple(self.samples))
        if any(s not in (LOW, HIGH) for s in self.samples):
            raise ValueError("waveform samples must be 0 or 1")
        if self.sample_rate <= 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def duration(self) -> float:
        """Length in seconds."""
        return len(self.samples) / self.sample_rate


@dataclass(frozen=True)
class FramingError:
    """One rejected frame. ``sample_offset`` is the absolute index of the
    start edge that opened the frame."""

    sample_offset: int
    kind: str  # "stop" (bad stop bit) or "truncated" (input ended mid-frame)


@dataclass
class DecodeResult:
    bytes: list[int] = field(default_factory=list)
    errors: list[FramingError] = field(default_factory=list)


def _frame_levels(b: int, cfg: FrameConfig) -> list[int]:
    # TTL-domain bit levels of one frame: start, data LSB-first, stop(s).
    bits = [LOW]
    bits += [(b >> i) & 1 for i in range(cfg.data_bits)]
    bits += [HIGH] * cfg.stop_bits
    return bits


def encode_byte(b: int, cfg: FrameConfig = FrameConfig()) -> Waveform:
    """Synthesize one frame; length is frame_bits * oversample samples."""
    cfg._require_no_parity()
    cfg._check_value(b)
    samples: list[int] = []
    for level in _frame_levels(b, cfg):
        if cfg.inverted:
            level ^= 1
        samples.extend([level] * cfg.oversample)
    return Waveform(tuple(samples), cfg.sample_rate)


def encode_bytes(bs: Iterable[int], cfg: FrameConfig = FrameConfig(), idle_bits: int = 1) -> Waveform:
    """Concatenate frames separated by ``idle_bits`` bit periods at idle
    level. No leading or trailing idle is added."""
    if idle_bits < 0:
        raise ValueError(f"idle_bits must be >= 0, got {idle_bits}")
    cfg._require_no_parity()
    idle = [cfg.idle_level] * (idle_bits * cfg.oversample)
    samples: list[int] = []
    for i, b in enumerate(bs):
        if i > 0:
            samples.extend(idle)
        samples.extend(encode_byte(b, cfg).samples)
    return Waveform(tuple(samples), cfg.sample_rate)


def invert(w: Waveform) -> Waveform:
    """Flip every level, as a MAX232-style transceiver does."""
    return Waveform(tuple(s ^ 1 for s in w.samples), w.sample_rate)


class StreamDecoder:
    """Incremental UART receiver.

    Feed sample chunks of any size; the accumulated result is identical
    to one-shot decoding of the concatenated waveform. ``finish()``
    flushes a trailing incomplete frame as a "truncated" error.

    Single-writer: feed from one context at a time.
    """

    def __init__(self, cfg: FrameConfig, sample_rate: float | None = None):
        cfg._require_no_parity()
        rate = cfg.sample_rate if sample_rate is None else sample_rate
        if rate < MIN_OVERSAMPLE * cfg.baud:
            raise ValueError(
                f"sample_rate {rate} too low: need at least {MIN_OVERSAMPLE} samples per bit at {cfg.baud} baud"
            )
        self._cfg = cfg
        spb = rate / cfg.baud
        # Mid-bit sample offsets relative to the start edge: bit k of the
        # frame (start = bit 0) is sampled at (k + 0.5) * spb.
        self._data_offsets = [int((1.5 + i) * spb) for i in range(cfg.data_bits)]
        self._stop_offsets = [int((1.5 + cfg.data_bits + j) * spb) for j in range(cfg.stop_bits)]
        self._last_offset = self._stop_offsets[-1]
        self._buf: list[int] = []
        self._base = 0  # absolute index of _buf[0]
        self._prev = HIGH  # TTL level just before _buf[0]; the line idles high
        self._finished = False
        self.result = DecodeResult()

    def feed(self, samples: Iterable[int]) -> list[int]:
        """Append samples and return the bytes newly decoded by them."""
        if self._finished:
            raise RuntimeError("decoder already finished")
        if self._cfg.inverted:
            self._buf.extend(s ^ 1 for s in samples)
        else:
            self._buf.extend(samples)
        before = len(self.result.bytes)
        self._process()
        return self.result.bytes[before:]

    def finish(self) -> DecodeResult:
        """Flush: a pending start edge without a full frame is truncated."""
        if not self._finished:
            self._finished = True
            edge = self._find_edge(0)
            if edge is not None:
                self.result.errors.append(FramingError(self._base + edge, "truncated"))
            self._buf.clear()
        return self.result

    def _find_edge(self, start: int) -> int | None:
        prev = self._prev if start == 0 else self._buf[start - 1]
        for j in range(start, len(self._buf)):
            cur = self._buf[j]
            if prev == HIGH and cur == LOW:
                return j
            prev = cur
        return None

    def _process(self) -> None:
        buf = self._buf
        n = len(buf)
        i = 0
        prev = self._prev
        consumed = 0
        while i < n:
            if not (prev == HIGH and buf[i] == LOW):
                prev = buf[i]
                i += 1
                consumed = i
                continue
            # Start edge at i. Wait for the full frame before sampling.
            if i + self._last_offset >= n:
                consumed = i  # prev already holds the level before the edge
                break
            value = 0
            for bit, off in enumerate(self._data_offsets):
                if buf[i + off]:
                    value |= 1 << bit
            if all(buf[i + off] == HIGH for off in self._stop_offsets):
                self.result.bytes.append(value)
            else:
                self.result.errors.append(FramingError(self._base + i, "stop"))
            # Resume the edge hunt from the mid-stop sample; a bad stop
            # (still low) forces a rise to idle before the next start.
            prev = buf[i + self._last_offset]
            i = i + self._last_offset + 1
            consumed = i
        del buf[:consumed]
        self._base += consumed
        self._prev = prev


def decode(w: Waveform, cfg: FrameConfig = FrameConfig()) -> DecodeResult:
    """One-shot decode of a waveform at the given line parameters."""
    dec = StreamDecoder(cfg, sample_rate=w.sample_rate)
    dec.feed(w.samples)
    return dec.finish()


def dump_waveform(w: Waveform) -> str:
    """Text form: a ``rate=<samples/s>`` header line, then one character
    per sample, '1' = high, '0' = low."""
    rate = w.sample_rate
    if isinstance(rate, float) and rate.is_integer():
        rate = int(rate)
    body = "".join("1" if s else "0" for s in w.samples)
    return f"rate={rate}\n{body}\n"


def load_waveform(text: str) -> Waveform:
    lines = text.splitlines()
    if not lines or not lines[0].startswith("rate="):
        raise ValueError("waveform text must start with a 'rate=<samples/s>' line")
    raw = lines[0][len("rate="):].strip()
    try:
        rate: float = int(raw)
    except ValueError:
        rate = float(raw)
    samples = []
    for line in lines[1:]:
        for ch in line.strip():
            if ch == "1":
                samples.append(HIGH)
            elif ch == "0":
                samples.append(LOW)
            else:
                raise ValueError(f"invalid sample character {ch!r}")
    return Waveform(tuple(samples), rate)
