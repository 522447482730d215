"""One-time polynomial-hash authentication.

tag = poly_hash_k1(message) + k2, over a finite field.  The hash key k1
may be long-lived; the pad k2 masks the hash and is information-
theoretically spent after one tag, so the tagging side enforces single
use.  Forgery succeeds with probability at most d/|F| for messages of at
most d blocks, which the toy-field enumeration tests measure exactly.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import Sequence

from qkdsim.errors import DomainError, OneTimeKeyReuseError, ValidationError
from qkdsim.chain.fields import GF2_64, Field

BLOCK_OCTETS = 8
# Degree bound: production messages are at most this many blocks.
MAX_BLOCKS = 2**16


def blocks_from_bytes(msg: bytes) -> list[int]:
    """Split into 8-octet big-endian blocks, zero-padding the tail, and
    append the byte length as a final block so padding cannot collide."""
    blocks = [
        int.from_bytes(msg[i : i + BLOCK_OCTETS].ljust(BLOCK_OCTETS, b"\x00"), "big")
        for i in range(0, len(msg), BLOCK_OCTETS)
    ]
    blocks.append(len(msg))
    if len(blocks) > MAX_BLOCKS:
        raise ValidationError(f"message exceeds {MAX_BLOCKS} blocks")
    return blocks


def poly_hash(field: Field, k1: int, blocks: Sequence[int]) -> int:
    """Horner evaluation: sum of blocks[i] * k1^(t-i) for t blocks."""
    h = 0
    for b in blocks:
        h = field.mul(field.add(h, field.check(b)), k1)
    return h


@dataclass
class AuthKey:
    """One-time authentication key; k2 is consumed by the first tag."""

    k1: int
    k2: int
    field: Field = GF2_64
    used: bool = False

    def __post_init__(self) -> None:
        self.field.check(self.k1)
        self.field.check(self.k2)

    @classmethod
    def from_material(cls, material: bytes, field: Field = GF2_64) -> "AuthKey":
        """Derive (k1, k2) from delivered key material; needs 16 octets."""
        if len(material) < 16:
            raise ValidationError("need at least 16 octets of key material")
        k1, k2 = struct.unpack(">QQ", material[:16])
        return cls(k1 % field.order, k2 % field.order, field)


def _as_blocks(msg: bytes | Sequence[int]) -> list[int]:
    if isinstance(msg, (bytes, bytearray)):
        return blocks_from_bytes(bytes(msg))
    blocks = list(msg)
    if len(blocks) > MAX_BLOCKS:
        raise DomainError(f"message exceeds {MAX_BLOCKS} blocks")
    return blocks


def wc_tag(key: AuthKey, msg: bytes | Sequence[int]) -> int:
    """Tag a message, spending k2; a second call on the same key is a
    hard error."""
    if key.used:
        raise OneTimeKeyReuseError("authentication key already spent")
    key.used = True
    return key.field.add(poly_hash(key.field, key.k1, _as_blocks(msg)), key.k2)


def wc_verify(key: AuthKey, msg: bytes | Sequence[int], tag: int) -> bool:
    """Exact recomputation on the receiving side; does not spend the key."""
    expected = key.field.add(poly_hash(key.field, key.k1, _as_blocks(msg)), key.k2)
    return expected == key.field.check(tag)
