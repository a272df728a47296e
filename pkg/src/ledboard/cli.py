"""Command line for the board stack.

Long-running: ``device`` (virtual board TCP server) and ``serve`` (host
session + HTTP API). One-shots: ``set/clear/toggle/raw/state`` talk to a
running serve API, ``dump-waveform`` prints a frame as waveform text.

Exit codes: 0 success, 1 connection/bind failure, 2 invalid argument.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

EXIT_OK = 0
EXIT_CONNECT = 1
EXIT_USAGE = 2

DEFAULT_API = "http://127.0.0.1:8777"
DEFAULT_DEVICE_BIND = "127.0.0.1:7788"
DEFAULT_SERVE_BIND = "127.0.0.1:8777"


def _fail(msg: str, code: int) -> int:
    print(f"ledboard: {msg}", file=sys.stderr)
    return code


def _parse_bind(text: str) -> tuple[str, int]:
    host, sep, port = text.rpartition(":")
    if not sep:
        host, port = "127.0.0.1", text
    if not port.isdigit():
        raise ValueError(f"cannot parse bind address {text!r}; expected HOST:PORT")
    return host or "127.0.0.1", int(port)


def _api_base(connect: str) -> str:
    if connect.startswith(("http://", "https://")):
        return connect.rstrip("/")
    if connect.startswith("api:"):
        return "http://" + connect[len("api:"):]
    if ":" in connect and not connect.startswith(("tcp:", "serial:")) and connect != "loopback":
        return "http://" + connect
    raise ValueError(
        f"{connect!r} is not a serve API address; one-shot commands need "
        "http://HOST:PORT of a running 'ledboard serve'"
    )


def _request(method: str, base: str, path: str, payload: dict | None = None) -> tuple[int, dict]:
    import http.client
    from urllib.parse import urlsplit

    parts = urlsplit(base)
    conn = http.client.HTTPConnection(parts.hostname, parts.port or 80, timeout=10.0)
    body = json.dumps(payload) if payload is not None else None
    headers = {"Content-Type": "application/json"} if body is not None else {}
    try:
        conn.request(method, path, body=body, headers=headers)
        resp = conn.getresponse()
        record = json.loads(resp.read())
    finally:
        conn.close()
    return resp.status, record


def _print_state(record: dict) -> None:
    from .protocol import led_display

    b = record["byte"]
    print(f"byte={b} hex=0x{b:02X} leds={led_display(b)}")


def _client_command(args: argparse.Namespace) -> int:
    try:
        base = _api_base(args.connect)
    except ValueError as e:
        return _fail(str(e), EXIT_USAGE)

    if args.command in ("set", "clear", "toggle") and not 1 <= args.n <= 8:
        return _fail(f"LED index must be in 1..8, got {args.n}", EXIT_USAGE)
    if args.command == "raw" and not 0 <= args.value <= 255:
        return _fail(f"byte value must be in 0..255, got {args.value}", EXIT_USAGE)

    try:
        if args.command == "state":
            status, record = _request("GET", base, "/state")
        elif args.command == "raw":
            status, record = _request("POST", base, "/byte", {"value": args.value})
        else:
            action = {"set": "on", "clear": "off", "toggle": "toggle"}[args.command]
            status, record = _request("POST", base, f"/led/{args.n}", {"action": action})
    except (OSError, ValueError) as e:
        return _fail(f"cannot reach {base}: {e}", EXIT_CONNECT)

    if status >= 400:
        code = EXIT_USAGE if status < 500 else EXIT_CONNECT
        return _fail(f"{status} from {base}: {record.get('error', '')}", code)
    _print_state(record)
    return EXIT_OK


def _run_device(args: argparse.Namespace) -> int:
    from .device import DeviceServer, LedBoard
    from .transport import BindFailed
    from .uart import FrameConfig

    try:
        host, port = _parse_bind(args.bind)
    except ValueError as e:
        return _fail(str(e), EXIT_USAGE)
    link = FrameConfig(baud=args.baud, oversample=args.oversample)
    board = LedBoard(link)
    try:
        server = DeviceServer(board, host, port, on_state=lambda d: print(d.state_line(), flush=True))
    except BindFailed as e:
        return _fail(str(e), EXIT_CONNECT)
    bhost, bport = server.address
    print(f"device listening on {bhost}:{bport} link={link.baud} 8N1", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.stop()
    return EXIT_OK


def _run_serve(args: argparse.Namespace) -> int:
    from .device import LedBoard
    from .host import ApiServer, DevicePump, SessionConfig, SessionError, open_session
    from .transport import BindFailed, FaultProfile, parse_spec
    from .uart import FrameConfig

    profile = None
    if args.flip_prob or args.drop_prob:
        profile = FaultProfile(
            bit_flip_probability=args.flip_prob, drop_probability=args.drop_prob, seed=args.fault_seed
        )
    try:
        spec = parse_spec(args.connect, fault_profile=profile)
        bind = _parse_bind(args.bind)
    except ValueError as e:
        return _fail(str(e), EXIT_USAGE)

    try:
        session = open_session(SessionConfig(endpoint=spec, baud=args.baud))
    except SessionError as e:
        return _fail(str(e), EXIT_CONNECT)

    device = pump = None
    if spec.kind == "loopback":
        device = LedBoard(FrameConfig(baud=args.baud, oversample=args.oversample))
        pump = DevicePump(session.endpoint.peer, device)

    try:
        server = ApiServer(session, bind=bind, device=device, pump=pump, ui_dir=args.ui)
    except BindFailed as e:
        session.close()
        return _fail(str(e), EXIT_CONNECT)
    print(f"api listening on {server.url} (device: {args.connect})", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.stop()
        session.close()
    return EXIT_OK


def _run_dump_waveform(args: argparse.Namespace) -> int:
    from .uart import FrameConfig, dump_waveform, encode_byte

    if not 0 <= args.value <= 255:
        return _fail(f"byte value must be in 0..255, got {args.value}", EXIT_USAGE)
    cfg = FrameConfig(baud=args.baud, oversample=args.oversample, inverted=args.inverted)
    sys.stdout.write(dump_waveform(encode_byte(args.value, cfg)))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ledboard", description="RS-232 LED board twin")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_link_flags(p):
        p.add_argument("--baud", type=int, default=2400, help="link baud rate (default 2400)")
        p.add_argument("--oversample", type=int, default=16, help="samples per bit (default 16)")

    p = sub.add_parser("device", help="run the virtual LED board as a TCP byte server")
    p.add_argument("--bind", default=DEFAULT_DEVICE_BIND, help=f"listen address (default {DEFAULT_DEVICE_BIND})")
    add_link_flags(p)
    p.set_defaults(func=_run_device)

    p = sub.add_parser("serve", help="run the host session and its HTTP control API")
    p.add_argument(
        "--connect",
        default=os.environ.get("LEDBOARD_CONNECT", "loopback"),
        help="device channel: loopback, tcp:HOST:PORT, or serial:/dev/... (default loopback)",
    )
    p.add_argument(
        "--bind",
        default=os.environ.get("LEDBOARD_BIND", DEFAULT_SERVE_BIND),
        help=f"API listen address (default {DEFAULT_SERVE_BIND})",
    )
    add_link_flags(p)
    p.add_argument("--fault-seed", type=int, default=0, help="seed for the channel fault profile")
    p.add_argument("--flip-prob", type=float, default=0.0, help="per-bit flip probability on the channel")
    p.add_argument("--drop-prob", type=float, default=0.0, help="per-byte drop probability on the channel")
    p.add_argument("--ui", default=None, help="directory of built console UI to serve statically")
    p.set_defaults(func=_run_serve)

    for name, help_text in (
        ("set", "switch LED N on"),
        ("clear", "switch LED N off"),
        ("toggle", "flip LED N"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("n", type=int, help="LED number, 1..8")
        p.add_argument("--connect", default=os.environ.get("LEDBOARD_CONNECT", DEFAULT_API))
        p.set_defaults(func=_client_command)

    p = sub.add_parser("raw", help="send a raw state byte")
    p.add_argument("value", type=int, help="byte value, 0..255")
    p.add_argument("--connect", default=os.environ.get("LEDBOARD_CONNECT", DEFAULT_API))
    p.set_defaults(func=_client_command)

    p = sub.add_parser("state", help="print the host's cached board state")
    p.add_argument("--connect", default=os.environ.get("LEDBOARD_CONNECT", DEFAULT_API))
    p.set_defaults(func=_client_command)

    p = sub.add_parser("dump-waveform", help="print a byte's frame in waveform text form")
    p.add_argument("value", type=int, help="byte value, 0..255")
    add_link_flags(p)
    p.add_argument("--inverted", action="store_true", help="emit line-side (inverted) polarity")
    p.set_defaults(func=_run_dump_waveform)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
