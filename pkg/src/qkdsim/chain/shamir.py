"""k-out-of-n secret sharing over GF(256), one polynomial per octet.

Coefficients come from a seeded deterministic stream so a split is
reproducible; any k distinct shares reconstruct the secret by Lagrange
interpolation at zero, and k-1 shares reveal nothing, which the toy-field
enumeration test checks by exact count.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Sequence

from qkdsim.errors import InsufficientSharesError, InvalidArgumentError
from qkdsim.chain.fields import GF256, Field

MAX_SHARES = 255  # nonzero evaluation points available in GF(256)


@dataclass(frozen=True)
class Share:
    """One share: the evaluation point index and one octet per secret octet."""

    index: int
    values: bytes

    def __post_init__(self) -> None:
        if not 1 <= self.index <= MAX_SHARES:
            raise InvalidArgumentError(
                f"share index must be in [1, {MAX_SHARES}], got {self.index}"
            )


def poly_eval(field: Field, coeffs: Sequence[int], x: int) -> int:
    """Evaluate coeffs[0] + coeffs[1] x + ... by Horner's rule."""
    acc = 0
    for c in reversed(coeffs):
        acc = field.add(field.mul(acc, x), field.check(c))
    return acc


def lagrange_at_zero(field: Field, points: Sequence[tuple[int, int]]) -> int:
    """Interpolate the polynomial through the points and read it at x=0."""
    secret = 0
    for i, (xi, yi) in enumerate(points):
        num, den = 1, 1
        for j, (xj, _) in enumerate(points):
            if i == j:
                continue
            num = field.mul(num, xj)
            den = field.mul(den, field.sub(xj, xi))
        secret = field.add(secret, field.mul(yi, field.mul(num, field.inv(den))))
    return secret


def _coefficient_stream(seed: int, secret: bytes, k: int, n: int):
    """Deterministic coefficient source bound to the split's shape."""
    header = (
        seed.to_bytes(8, "big", signed=True)
        + len(secret).to_bytes(4, "big")
        + bytes([k, n])
    )
    counter = 0
    while True:
        digest = hashlib.sha256(b"qkdsim-shamir:" + header + counter.to_bytes(8, "big")).digest()
        yield from digest
        counter += 1


def shamir_split(secret: bytes, k: int, n: int, seed: int) -> list[Share]:
    """Split into n shares, any k of which reconstruct the secret."""
    if not 1 <= k <= n <= MAX_SHARES:
        raise InvalidArgumentError(f"need 1 <= k <= n <= {MAX_SHARES}, got k={k} n={n}")
    coeffs_source = _coefficient_stream(seed, secret, k, n)
    rows: list[list[int]] = [[] for _ in range(n)]
    for octet in secret:
        coeffs = [octet] + [next(coeffs_source) for _ in range(k - 1)]
        for idx in range(1, n + 1):
            rows[idx - 1].append(poly_eval(GF256, coeffs, idx))
    return [Share(idx + 1, bytes(row)) for idx, row in enumerate(rows)]


def shamir_reconstruct(shares: Sequence[Share], k: int) -> bytes:
    """Recover the secret from any k distinct shares.

    Exactly the first k shares are interpolated; extras are ignored.
    """
    if k < 1:
        raise InvalidArgumentError(f"k must be >= 1, got {k}")
    if len(shares) < k:
        raise InsufficientSharesError(
            f"need at least {k} shares, got {len(shares)}"
        )
    chosen = list(shares)[:k]
    indices = [s.index for s in chosen]
    if len(set(indices)) != len(indices):
        raise InvalidArgumentError("share indices must be distinct")
    lengths = {len(s.values) for s in chosen}
    if len(lengths) != 1:
        raise InvalidArgumentError("shares disagree on secret length")
    width = lengths.pop()
    out = bytearray()
    for pos in range(width):
        points = [(s.index, s.values[pos]) for s in chosen]
        out.append(lagrange_at_zero(GF256, points))
    return bytes(out)
