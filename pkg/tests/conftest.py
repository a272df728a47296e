import select
import socket
import subprocess
import sys

import pytest

CLI = [sys.executable, "-m", "ledboard"]


def free_port() -> int:
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


def read_line(proc, timeout=10.0) -> str:
    ready, _, _ = select.select([proc.stdout], [], [], timeout)
    if not ready:
        raise TimeoutError("no output from process")
    return proc.stdout.readline()


def spawn(args, banner_prefix, timeout=10.0):
    proc = subprocess.Popen(
        CLI + args, stdout=subprocess.PIPE, stderr=subprocess.PIPE, text=True, bufsize=1
    )
    line = read_line(proc, timeout)
    if not line.startswith(banner_prefix):
        proc.terminate()
        raise AssertionError(f"unexpected banner: {line!r}")
    return proc


def stop(proc):
    proc.terminate()
    try:
        proc.wait(timeout=5.0)
    except subprocess.TimeoutExpired:
        proc.kill()
        proc.wait(timeout=5.0)
    proc.stdout.close()
    proc.stderr.close()


@pytest.fixture(scope="module")
def serve_proc():
    """A `serve` process with an in-process loopback device."""
    port = free_port()
    proc = spawn(["serve", "--connect", "loopback", "--bind", f"127.0.0.1:{port}"], "api listening")
    yield f"http://127.0.0.1:{port}"
    stop(proc)


def run_cli(args, timeout=15.0):
    return subprocess.run(CLI + list(args), capture_output=True, text=True, timeout=timeout)
