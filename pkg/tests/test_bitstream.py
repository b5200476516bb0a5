import numpy as np
import pytest

from saabcodec.bitstream import BitReader, BitWriter, ue_bit_length
from saabcodec.errors import BitstreamError


def test_bit_roundtrip():
    bw = BitWriter()
    bits = [1, 0, 1, 1, 0, 0, 1, 0, 1, 1, 1]
    for b in bits:
        bw.write_bit(b)
    br = BitReader(bw.getvalue())
    assert [br.read_bit() for _ in bits] == bits


def test_write_bits_msb_first():
    bw = BitWriter()
    bw.write_bits(0b101101, 6)
    br = BitReader(bw.getvalue())
    assert br.read_bits(6) == 0b101101


def test_ue_roundtrip():
    bw = BitWriter()
    values = list(range(0, 200)) + [1000, 65535]
    for v in values:
        bw.write_ue(v)
    br = BitReader(bw.getvalue())
    assert [br.read_ue() for _ in values] == values


def test_ue_bit_length_matches_writer():
    values = np.array(list(range(0, 300)) + [2**20])
    lens = ue_bit_length(values)
    for v, n in zip(values, lens):
        bw = BitWriter()
        bw.write_ue(int(v))
        assert bw.bit_length == n, f"ue({v})"


def test_truncated_read_raises():
    br = BitReader(b"\xff")
    br.read_bits(8)
    with pytest.raises(BitstreamError):
        br.read_bit()


def test_runaway_ue_prefix_raises():
    br = BitReader(b"\x00" * 20)
    with pytest.raises(BitstreamError):
        br.read_ue()


def test_position_tracking():
    bw = BitWriter()
    bw.write_bits(0, 13)
    assert bw.bit_length == 13
    br = BitReader(bw.getvalue())
    br.read_bits(5)
    assert br.position == 5
