import numpy as np
import pytest

from snowsim.packets import (SnowPacket, crc16_ccitt, parse_bits, preamble_bits,
                             frame_bit_count, PREAMBLE_WORD)


def test_crc16_ccitt_false_check_value():
    # standard check input for CRC-16/CCITT-FALSE
    assert crc16_ccitt(b"123456789") == 0x29B1


def test_frame_round_trip():
    pkt = SnowPacket(payload=b"hello world")
    bits = pkt.to_bits()
    assert bits.size == frame_bit_count(11)
    back = parse_bits(bits)
    assert back.payload == b"hello world"


def test_preamble_is_alternating():
    bits = preamble_bits()
    assert bits.size == 32
    assert np.array_equal(bits[::2], np.ones(16, dtype=np.uint8))
    assert np.array_equal(bits[1::2], np.zeros(16, dtype=np.uint8))
    assert PREAMBLE_WORD == 0xAAAAAAAA


def test_single_bit_flip_always_detected():
    rng = np.random.default_rng(3)
    pkt = SnowPacket(payload=bytes(rng.integers(0, 256, 30, dtype=np.uint8)))
    bits = pkt.to_bits()
    # any flip after the preamble corrupts sync, length, payload, or CRC
    for pos in range(32, bits.size):
        flipped = bits.copy()
        flipped[pos] ^= 1
        with pytest.raises(ValueError):
            parse_bits(flipped)


def test_truncated_and_oversized():
    pkt = SnowPacket(payload=b"x" * 30)
    bits = pkt.to_bits()
    with pytest.raises(ValueError):
        parse_bits(bits[:-8])
    with pytest.raises(ValueError):
        SnowPacket(payload=b"y" * 256)
