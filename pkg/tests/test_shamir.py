"""Secret-sharing tests: exhaustive reconstruction and measured secrecy.

The secrecy claim is checked by enumeration over GF(7): with k-1 shares
every candidate secret is consistent with exactly the same number of
coefficient choices, so the shares carry zero information.
"""

import itertools

import pytest

from qkdsim.chain.fields import GF7
from qkdsim.chain.shamir import (
    Share,
    lagrange_at_zero,
    poly_eval,
    shamir_reconstruct,
    shamir_split,
)
from qkdsim.errors import InsufficientSharesError, InvalidArgumentError

SECRET = b"thirteen-byte"  # 13 octets


class TestReconstruction:
    def test_every_k_subset_reconstructs(self):
        for n in range(1, 7):
            for k in range(1, n + 1):
                shares = shamir_split(SECRET, k, n, seed=42)
                for subset in itertools.combinations(shares, k):
                    assert shamir_reconstruct(subset, k) == SECRET, (k, n)

    def test_extra_shares_are_ignored(self):
        shares = shamir_split(SECRET, 3, 6, seed=1)
        assert shamir_reconstruct(shares, 3) == SECRET

    def test_share_order_does_not_matter(self):
        shares = shamir_split(SECRET, 3, 5, seed=2)
        assert shamir_reconstruct(list(reversed(shares)), 3) == SECRET

    def test_k_equals_one_publishes_the_secret(self):
        shares = shamir_split(SECRET, 1, 4, seed=3)
        for share in shares:
            assert share.values == SECRET

    def test_empty_secret_round_trips(self):
        shares = shamir_split(b"", 2, 3, seed=4)
        assert shamir_reconstruct(shares[:2], 2) == b""

    def test_split_is_deterministic_per_seed(self):
        assert shamir_split(SECRET, 3, 5, seed=9) == shamir_split(SECRET, 3, 5, seed=9)
        assert shamir_split(SECRET, 3, 5, seed=9) != shamir_split(SECRET, 3, 5, seed=10)

    def test_wrong_subset_size_never_reconstructs_by_luck(self):
        # With k-1 shares reconstruction must refuse rather than guess.
        shares = shamir_split(SECRET, 3, 5, seed=5)
        with pytest.raises(InsufficientSharesError):
            shamir_reconstruct(shares[:2], 3)


class TestArgumentChecks:
    def test_split_bounds(self):
        with pytest.raises(InvalidArgumentError):
            shamir_split(SECRET, 0, 3, seed=0)
        with pytest.raises(InvalidArgumentError):
            shamir_split(SECRET, 4, 3, seed=0)
        with pytest.raises(InvalidArgumentError):
            shamir_split(SECRET, 2, 256, seed=0)

    def test_share_index_bounds(self):
        with pytest.raises(InvalidArgumentError):
            Share(0, b"\x00")
        with pytest.raises(InvalidArgumentError):
            Share(256, b"\x00")

    def test_duplicate_indices_rejected(self):
        shares = shamir_split(SECRET, 2, 3, seed=0)
        with pytest.raises(InvalidArgumentError):
            shamir_reconstruct([shares[0], shares[0]], 2)

    def test_mismatched_lengths_rejected(self):
        with pytest.raises(InvalidArgumentError):
            shamir_reconstruct([Share(1, b"\x00"), Share(2, b"\x00\x01")], 2)

    def test_k_below_one_rejected(self):
        with pytest.raises(InvalidArgumentError):
            shamir_reconstruct([Share(1, b"\x00")], 0)


class TestShareIndependence:
    def test_changing_one_octet_changes_only_that_position(self):
        base = shamir_split(b"\x00\x01\x02\x03", 2, 3, seed=7)
        # Same length and shape, so the coefficient stream is identical and
        # only the polynomial for the changed octet moves.
        changed = shamir_split(b"\x00\x01\xff\x03", 2, 3, seed=7)
        for b, c in zip(base, changed):
            diff = [i for i in range(4) if b.values[i] != c.values[i]]
            assert diff == [2]


class TestPerfectSecrecy:
    """Exact secrecy counts over GF(7), enumerating every polynomial."""

    def test_one_share_under_k2_reveals_nothing(self):
        # For each (secret, observed point x, observed value v): exactly
        # one degree-1 polynomial fits, so all secrets stay equally likely.
        for x in range(1, 7):
            for v in range(7):
                for secret in range(7):
                    fits = sum(
                        1
                        for a1 in range(7)
                        if poly_eval(GF7, [secret, a1], x) == v
                    )
                    assert fits == 1

    def test_two_shares_under_k3_reveal_nothing(self):
        # Two observed points under a quadratic: for every secret exactly
        # one (a1, a2) coefficient pair matches, over all 49 candidates.
        x1, x2 = 2, 5
        for v1 in range(7):
            for v2 in range(7):
                for secret in range(7):
                    fits = sum(
                        1
                        for a1 in range(7)
                        for a2 in range(7)
                        if poly_eval(GF7, [secret, a1, a2], x1) == v1
                        and poly_eval(GF7, [secret, a1, a2], x2) == v2
                    )
                    assert fits == 1

    def test_k_shares_pin_the_polynomial(self):
        # Sanity inverse of the secrecy counts: k points determine the
        # polynomial, so lagrange recovers the constant term.
        coeffs = [4, 2, 6]
        points = [(x, poly_eval(GF7, coeffs, x)) for x in (1, 3, 4)]
        assert lagrange_at_zero(GF7, points) == 4
