"""Packet framing: 32-bit preamble, 32-bit sync word, length byte, payload, CRC-16.

Framing constants: preamble 0xAAAAAAAA (alternating bits, good envelope
correlation), sync word 0x930B51DE. CRC is CRC-16/CCITT-FALSE (poly 0x1021,
init 0xFFFF) over length byte + payload.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

PREAMBLE_WORD = 0xAAAAAAAA
SYNC_WORD = 0x930B51DE
PREAMBLE_BITS = 32
SYNC_BITS = 32
LENGTH_BITS = 8
CRC_BITS = 16
HEADER_BITS = PREAMBLE_BITS + SYNC_BITS + LENGTH_BITS


def crc16_ccitt(data: bytes, init: int = 0xFFFF) -> int:
    crc = init
    for byte in data:
        crc ^= byte << 8
        for _ in range(8):
            if crc & 0x8000:
                crc = ((crc << 1) ^ 0x1021) & 0xFFFF
            else:
                crc = (crc << 1) & 0xFFFF
    return crc


def int_to_bits(value: int, width: int) -> np.ndarray:
    """MSB-first bit array of a fixed-width integer."""
    return np.array([(value >> (width - 1 - i)) & 1 for i in range(width)], dtype=np.uint8)


def bits_to_int(bits) -> int:
    out = 0
    for b in bits:
        out = (out << 1) | int(b)
    return out


def bytes_to_bits(data: bytes) -> np.ndarray:
    if len(data) == 0:
        return np.zeros(0, dtype=np.uint8)
    return np.unpackbits(np.frombuffer(data, dtype=np.uint8))


def bits_to_bytes(bits) -> bytes:
    return np.packbits(np.asarray(bits, dtype=np.uint8)).tobytes()


@dataclass
class SnowPacket:
    payload: bytes
    preamble: int = PREAMBLE_WORD
    sync_word: int = SYNC_WORD

    def __post_init__(self):
        if len(self.payload) > 255:
            raise ValueError("payload exceeds the one-byte length field")

    @property
    def payload_length(self) -> int:
        return len(self.payload)

    @property
    def crc(self) -> int:
        return crc16_ccitt(bytes([self.payload_length]) + self.payload)

    @property
    def n_bits(self) -> int:
        return HEADER_BITS + 8 * len(self.payload) + CRC_BITS

    def to_bits(self) -> np.ndarray:
        return np.concatenate(
            [
                int_to_bits(self.preamble, PREAMBLE_BITS),
                int_to_bits(self.sync_word, SYNC_BITS),
                int_to_bits(self.payload_length, LENGTH_BITS),
                bytes_to_bits(self.payload),
                int_to_bits(self.crc, CRC_BITS),
            ]
        )


def frame_bit_count(payload_bytes: int) -> int:
    return HEADER_BITS + 8 * payload_bytes + CRC_BITS


def preamble_bits() -> np.ndarray:
    return int_to_bits(PREAMBLE_WORD, PREAMBLE_BITS)


def parse_bits(bits) -> SnowPacket:
    """Rebuild a packet from demodulated bits; raises on CRC mismatch or truncation."""
    bits = np.asarray(bits, dtype=np.uint8)
    if bits.shape[0] < HEADER_BITS + CRC_BITS:
        raise ValueError("bit stream shorter than a minimal frame")
    preamble = bits_to_int(bits[:PREAMBLE_BITS])
    sync = bits_to_int(bits[PREAMBLE_BITS : PREAMBLE_BITS + SYNC_BITS])
    if sync != SYNC_WORD:
        raise ValueError("sync word mismatch")
    length = bits_to_int(bits[PREAMBLE_BITS + SYNC_BITS : HEADER_BITS])
    need = HEADER_BITS + 8 * length + CRC_BITS
    if bits.shape[0] < need:
        raise ValueError("bit stream truncated before CRC")
    payload = bits_to_bytes(bits[HEADER_BITS : HEADER_BITS + 8 * length])[:length]
    crc = bits_to_int(bits[HEADER_BITS + 8 * length : need])
    if crc != crc16_ccitt(bytes([length]) + payload):
        raise ValueError("CRC mismatch")
    pkt = SnowPacket(payload=payload, preamble=preamble)
    return pkt
