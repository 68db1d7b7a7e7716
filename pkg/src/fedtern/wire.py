"""Byte-level serialization used by the simulator's message bus.

Two formats:

* length-prefixed big-integer sequences (commitment vectors, shares,
  complaints): 4-byte big-endian byte count, then magnitude bytes;
* fixed-width group elements for ciphertexts and partial decryptions,
  ceil(bits(p)/8) bytes per component, so a ciphertext on a 3072-bit group
  serializes to exactly 2*384 bytes.
"""

from __future__ import annotations

from .group import GroupParams


def encode_int_seq(values) -> bytes:
    out = bytearray()
    for v in values:
        if v < 0:
            raise ValueError("only nonnegative integers are serialized")
        blob = v.to_bytes((v.bit_length() + 7) // 8 or 1, "big")
        out += len(blob).to_bytes(4, "big")
        out += blob
    return bytes(out)


def decode_int_seq(data: bytes) -> list[int]:
    values = []
    pos = 0
    while pos < len(data):
        if pos + 4 > len(data):
            raise ValueError("truncated length prefix")
        n = int.from_bytes(data[pos:pos + 4], "big")
        pos += 4
        if pos + n > len(data):
            raise ValueError("truncated integer body")
        values.append(int.from_bytes(data[pos:pos + n], "big"))
        pos += n
    return values


def element_width(params: GroupParams) -> int:
    """Bytes per serialized group element (384 for a 3072-bit p)."""
    return (params.p.bit_length() + 7) // 8


def element_to_bytes(value: int, params: GroupParams) -> bytes:
    return value.to_bytes(element_width(params), "big")


def ciphertext_nbytes(params: GroupParams) -> int:
    return 2 * element_width(params)
