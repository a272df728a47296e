import socket
import time

import pytest
from hypothesis import given, settings, strategies as st

from ledboard.device import (
    CurrentCheck,
    DeviceServer,
    ElectricalParams,
    LedBoard,
    led_current,
)
from ledboard.protocol import byte_to_state
from ledboard.transport import BindFailed
from ledboard.uart import LOW, FrameConfig, Waveform, encode_byte, encode_bytes

CFG = FrameConfig()
byte_lists = st.lists(st.integers(min_value=0, max_value=255), min_size=0, max_size=16)


class TestReset:
    def test_reset_values(self):
        board = LedBoard()
        board.feed_byte(90)
        board.reset()
        assert board.regs.trisb == 0
        assert board.regs.trisa == 31
        assert board.regs.portb == 0
        assert board.frames_received == 0
        assert board.framing_errors == 0
        assert board.leds.lit() == ()

    def test_fresh_board_is_reset(self):
        board = LedBoard()
        assert board.regs.trisa == 31
        assert board.regs.portb == 0

    def test_reset_idempotent(self):
        board = LedBoard()
        board.reset()
        first = board.snapshot()
        board.reset()
        assert board.snapshot() == first


class TestFeedByte:
    def test_feed_20_lights_3_and_5(self):
        board = LedBoard()
        board.feed_byte(20)
        assert board.leds.lit() == (3, 5)
        assert board.regs.portb == 20

    def test_feed_255_all_on(self):
        board = LedBoard()
        board.feed_byte(255)
        assert board.leds.lit() == (1, 2, 3, 4, 5, 6, 7, 8)

    def test_feed_0_all_off(self):
        board = LedBoard()
        board.feed_byte(255)
        board.feed_byte(0)
        assert board.leds.lit() == ()

    def test_counts_frames(self):
        board = LedBoard()
        for b in (1, 2, 3):
            board.feed_byte(b)
        assert board.frames_received == 3

    @given(byte_lists)
    @settings(max_examples=60, deadline=None)
    def test_last_byte_wins(self, bs):
        board = LedBoard()
        for b in bs:
            board.feed_byte(b)
        expected = bs[-1] if bs else 0
        assert board.regs.portb == expected
        assert board.leds == byte_to_state(expected)
        assert board.frames_received == len(bs)


class TestFeedWaveform:
    def test_single_frame_equals_feed_byte(self):
        via_wave = LedBoard()
        via_wave.feed_waveform(encode_byte(20, CFG))
        via_byte = LedBoard()
        via_byte.feed_byte(20)
        assert via_wave.snapshot() == via_byte.snapshot()

    def test_18_then_82_ends_at_82(self):
        board = LedBoard()
        board.feed_waveform(encode_bytes([18, 82], CFG))
        assert board.leds == byte_to_state(82)
        assert board.frames_received == 2

    def test_corrupted_frame_leaves_leds_and_counts_error(self):
        board = LedBoard()
        samples = list(encode_byte(20, CFG).samples)
        samples[9 * CFG.oversample:] = [LOW] * CFG.oversample
        board.feed_waveform(Waveform(tuple(samples), CFG.sample_rate))
        assert board.leds.lit() == ()
        assert board.framing_errors == 1
        assert board.frames_received == 0

    @given(byte_lists)
    @settings(max_examples=40, deadline=None)
    def test_waveform_equals_fold_of_feed_byte(self, bs):
        via_wave = LedBoard()
        via_wave.feed_waveform(encode_bytes(bs, CFG, idle_bits=1))
        via_bytes = LedBoard()
        for b in bs:
            via_bytes.feed_byte(b)
        assert via_wave.snapshot() == via_bytes.snapshot()

    def test_counters_sum_to_start_edges(self):
        # 5 frames, one ruined: received + errors still equals frames sent
        payload = [1, 2, 3, 4, 5]
        w = encode_bytes(payload, CFG, idle_bits=2)
        samples = list(w.samples)
        stop_at = 2 * (10 + 2) * CFG.oversample + 9 * CFG.oversample
        samples[stop_at:stop_at + CFG.oversample] = [LOW] * CFG.oversample
        board = LedBoard()
        board.feed_waveform(Waveform(tuple(samples), CFG.sample_rate))
        assert board.frames_received + board.framing_errors == len(payload)
        assert board.framing_errors == 1


def test_snapshot_record_shape():
    board = LedBoard()
    board.feed_byte(20)
    record = board.snapshot().record()
    assert record == {
        "portb": 20,
        "leds": [False, False, True, False, True, False, False, False],
        "frames_received": 1,
        "framing_errors": 0,
    }


def test_state_line_format():
    board = LedBoard()
    board.feed_byte(20)
    assert board.state_line() == "PORTB=0x14 LEDS=00101000"


class TestLedCurrent:
    def test_default_drive_is_under_10_ma(self):
        check = led_current(ElectricalParams())
        assert check == CurrentCheck(pytest.approx((5.0 - 2.0) / 301.0 * 1000.0), True)
        assert abs(check.current_ma - 9.97) < 0.01

    def test_zero_drop_is_zero_current(self):
        check = led_current(ElectricalParams(vcc=5.0, vf_led=5.0))
        assert check.current_ma == 0.0
        assert check.within_limit

    def test_small_resistor_over_limit(self):
        check = led_current(ElectricalParams(r_led=100.0, vf_led=0.0))
        assert check.current_ma == pytest.approx(50.0)
        assert not check.within_limit

    @pytest.mark.parametrize("params", [ElectricalParams(r_led=0.0), ElectricalParams(r_led=-1.0), ElectricalParams(vcc=1.0, vf_led=2.0)])
    def test_invalid_params(self, params):
        with pytest.raises(ValueError):
            led_current(params)


class TestDeviceServer:
    def test_bytes_over_tcp_drive_the_board(self):
        board = LedBoard()
        seen = []
        server = DeviceServer(board, port=0, on_state=lambda d: seen.append(d.regs.portb))
        server.start()
        try:
            with socket.create_connection(server.address, timeout=5.0) as sock:
                sock.sendall(bytes([18, 82]))
                deadline = time.monotonic() + 5.0
                while len(seen) < 2 and time.monotonic() < deadline:
                    time.sleep(0.01)
        finally:
            server.stop()
        assert seen == [18, 82]
        assert board.regs.portb == 82
        assert board.frames_received == 2

    def test_second_bind_on_same_port_fails(self):
        board = LedBoard()
        server = DeviceServer(board, port=0)
        try:
            with pytest.raises(BindFailed):
                DeviceServer(LedBoard(), port=server.address[1])
        finally:
            server.stop()
