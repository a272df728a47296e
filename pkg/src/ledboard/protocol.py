"""Byte <-> LED-state codec and single-LED mask algebra.

The board protocol is one byte per update. Bit (n-1) of the byte drives
LED #n (LSB = LED #1), 1 = lit. Everything here is pure; no I/O.
"""

from __future__ import annotations

from dataclasses import dataclass

LED_COUNT = 8


def _check_index(n: int) -> int:
    if not isinstance(n, int) or isinstance(n, bool) or not 1 <= n <= LED_COUNT:
        raise ValueError(f"LED index must be an integer in 1..{LED_COUNT}, got {n!r}")
    return n


def _check_byte(b: int) -> int:
    if not isinstance(b, int) or isinstance(b, bool) or not 0 <= b <= 0xFF:
        raise ValueError(f"byte value must be an integer in 0..255, got {b!r}")
    return b


def led_mask(n: int) -> int:
    """Mask addressing LED #n: 1 shifted left n-1 times."""
    return 1 << (_check_index(n) - 1)


@dataclass(frozen=True)
class LedState:
    """On/off vector of the 8 LEDs; ``leds[i]`` holds LED #(i+1)."""

    leds: tuple[bool, ...]

    def __post_init__(self) -> None:
        if len(self.leds) != LED_COUNT:
            raise ValueError(f"LedState needs exactly {LED_COUNT} entries, got {len(self.leds)}")
        object.__setattr__(self, "leds", tuple(bool(v) for v in self.leds))

    @classmethod
    def from_byte(cls, b: int) -> "LedState":
        _check_byte(b)
        return cls(tuple(bool(b >> i & 1) for i in range(LED_COUNT)))

    @classmethod
    def from_lit(cls, lit: tuple[int, ...] | list[int] | set[int]) -> "LedState":
        """Build a state from 1-based LED numbers that are on."""
        on = {_check_index(n) for n in lit}
        return cls(tuple(i + 1 in on for i in range(LED_COUNT)))

    def to_byte(self) -> int:
        return sum(1 << i for i, on in enumerate(self.leds) if on)

    def lit(self) -> tuple[int, ...]:
        """1-based numbers of the LEDs that are on."""
        return tuple(i + 1 for i, on in enumerate(self.leds) if on)


def byte_to_state(b: int) -> LedState:
    return LedState.from_byte(b)


def state_to_byte(s: LedState) -> int:
    return s.to_byte()


def set_led(b: int, n: int) -> int:
    """Switch LED #n on, leaving the other bits untouched."""
    return _check_byte(b) | led_mask(n)


def clear_led(b: int, n: int) -> int:
    """Switch LED #n off unconditionally (AND-NOT, safe when already off)."""
    return _check_byte(b) & ~led_mask(n) & 0xFF


def toggle_led(b: int, n: int) -> int:
    """Flip LED #n (XOR mask); an involution."""
    return _check_byte(b) ^ led_mask(n)


def led_display(b: int) -> str:
    """8-char on/off string with LED #1 leftmost, e.g. 20 -> '00101000'."""
    _check_byte(b)
    return "".join("1" if b >> i & 1 else "0" for i in range(LED_COUNT))
