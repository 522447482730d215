"""Finite fields used by the authentication and secret-sharing layers.

Elements are plain ints in [0, order).  GF(256) uses the AES reduction
polynomial with log/antilog tables; GF(2^64) uses shift-and-reduce
multiplication; small prime fields exist for exhaustive enumeration
oracles where every key pair can be tried.
"""

from __future__ import annotations

from qkdsim.errors import DomainError


class Field:
    """Common arithmetic interface; subclasses fix the element set."""

    order: int

    def check(self, a: int) -> int:
        if not 0 <= a < self.order:
            raise DomainError(f"element {a} outside field of order {self.order}")
        return a

    def add(self, a: int, b: int) -> int:
        raise NotImplementedError

    def sub(self, a: int, b: int) -> int:
        raise NotImplementedError

    def mul(self, a: int, b: int) -> int:
        raise NotImplementedError

    def inv(self, a: int) -> int:
        raise NotImplementedError


class PrimeField(Field):
    """Integers mod a prime."""

    def __init__(self, p: int) -> None:
        if p < 2:
            raise DomainError("modulus must be a prime >= 2")
        self.order = p

    def add(self, a: int, b: int) -> int:
        return (self.check(a) + self.check(b)) % self.order

    def sub(self, a: int, b: int) -> int:
        return (self.check(a) - self.check(b)) % self.order

    def mul(self, a: int, b: int) -> int:
        return (self.check(a) * self.check(b)) % self.order

    def inv(self, a: int) -> int:
        if self.check(a) == 0:
            raise DomainError("zero has no inverse")
        return pow(a, self.order - 2, self.order)


class BinaryField(Field):
    """GF(2^n) with a caller-supplied reduction polynomial.

    reduction_poly is the full polynomial including the x^n term, e.g.
    0x11B for the AES field.
    """

    def __init__(self, bits: int, reduction_poly: int) -> None:
        if bits < 1 or reduction_poly >> bits != 1:
            raise DomainError("reduction polynomial must have degree == bits")
        self.bits = bits
        self.order = 1 << bits
        self._poly = reduction_poly

    def add(self, a: int, b: int) -> int:
        return self.check(a) ^ self.check(b)

    def sub(self, a: int, b: int) -> int:
        return self.add(a, b)

    def mul(self, a: int, b: int) -> int:
        self.check(a)
        self.check(b)
        result = 0
        top = 1 << (self.bits - 1)
        mask = self.order - 1
        reducer = self._poly & mask
        for _ in range(self.bits):
            if b & 1:
                result ^= a
            b >>= 1
            carry = a & top
            a = (a << 1) & mask
            if carry:
                a ^= reducer
        return result

    def pow(self, a: int, e: int) -> int:
        result = 1
        base = self.check(a)
        while e > 0:
            if e & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            e >>= 1
        return result

    def inv(self, a: int) -> int:
        if self.check(a) == 0:
            raise DomainError("zero has no inverse")
        return self.pow(a, self.order - 2)


class _Gf256(BinaryField):
    """The AES byte field, with table-driven multiplication."""

    def __init__(self) -> None:
        super().__init__(8, 0x11B)
        exp = [0] * 510
        log = [0] * 256
        x = 1
        for i in range(255):
            exp[i] = x
            log[x] = i
            x = super().mul(x, 3)  # 3 generates the multiplicative group
        for i in range(255, 510):
            exp[i] = exp[i - 255]
        self._exp = exp
        self._log = log

    def mul(self, a: int, b: int) -> int:
        self.check(a)
        self.check(b)
        if a == 0 or b == 0:
            return 0
        return self._exp[self._log[a] + self._log[b]]

    def inv(self, a: int) -> int:
        if self.check(a) == 0:
            raise DomainError("zero has no inverse")
        return self._exp[255 - self._log[a]]


GF256 = _Gf256()
# x^64 + x^4 + x^3 + x + 1
GF2_64 = BinaryField(64, (1 << 64) | 0x1B)
GF251 = PrimeField(251)
GF7 = PrimeField(7)
