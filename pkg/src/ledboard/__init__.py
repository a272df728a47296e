"""Software twin of an RS-232 LED board.

One byte on the wire is one full board update: bit (n-1) drives LED #n.
The package covers the whole path a real board would see — byte <-> LED
mask algebra, 8N1 waveform synthesis/decoding with polarity inversion,
a PIC-style register-file device, byte channels with fault injection,
and a host session + HTTP/SSE control service.

Submodules load lazily so the CLI one-shots stay fast.
"""

import importlib

__version__ = "0.1.0"

_EXPORTS = {
    "protocol": (
        "LED_COUNT",
        "LedState",
        "byte_to_state",
        "clear_led",
        "led_display",
        "led_mask",
        "set_led",
        "state_to_byte",
        "toggle_led",
    ),
    "uart": (
        "DecodeResult",
        "FrameConfig",
        "FramingError",
        "StreamDecoder",
        "Waveform",
        "decode",
        "dump_waveform",
        "encode_byte",
        "encode_bytes",
        "invert",
        "load_waveform",
    ),
    "device": (
        "CurrentCheck",
        "DeviceServer",
        "DeviceState",
        "ElectricalParams",
        "LedBoard",
        "PicRegisters",
        "led_current",
    ),
    "transport": (
        "BindFailed",
        "ChannelClosed",
        "ChannelSpec",
        "ConnectFailed",
        "FaultProfile",
        "PortUnavailable",
        "TransportError",
        "UnsupportedLineParams",
        "inject_faults",
        "open_channel",
        "open_loopback",
        "parse_spec",
    ),
    "host": (
        "ApiServer",
        "ConfigFailed",
        "DevicePump",
        "HostSession",
        "NotConnected",
        "OpenFailed",
        "QueryFailed",
        "SessionConfig",
        "SessionError",
        "open_session",
        "serve_api",
    ),
}

_WHERE = {name: module for module, names in _EXPORTS.items() for name in names}

__all__ = sorted(_WHERE)


def __getattr__(name):
    module = _WHERE.get(name)
    if module is None:
        raise AttributeError(f"module {__name__!r} has no attribute {name!r}")
    value = getattr(importlib.import_module(f".{module}", __name__), name)
    globals()[name] = value
    return value


def __dir__():
    return sorted(set(globals()) | set(__all__))
