"""Encrypted-channel tests: capacity, refresh, framing, corruption handling."""

import uuid

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qkdsim.errors import (
    EstablishmentError,
    FrameAuthError,
    InvalidArgumentError,
    UnknownKeyIdError,
    ValidationError,
)
from qkdsim.kms import KmsService, LinkKeyStore
from qkdsim.securechannel import (
    Frame,
    channels_supported,
    decode_frame,
    encode_frame,
    establish,
)
from qkdsim.session import KeyStream


def service_with(count: int) -> KmsService:
    store = LinkKeyStore()
    stream = KeyStream(23, "chan-test")
    store.ingest([stream.block(i) for i in range(count)])
    svc = KmsService()
    svc.register_pair("alice", "bob", store)
    return svc


class TestCapacity:
    def test_reference_rates(self):
        assert channels_supported(66163.0, 256, 1.0) == 258
        assert channels_supported(2000.0, 256, 1.0) == 7
        assert channels_supported(100.0, 256, 1.0) == 0

    def test_doubling_refresh_halves_capacity(self):
        assert channels_supported(66163.0, 256, 2.0) == 129

    @given(
        st.floats(min_value=1.0, max_value=1e9),
        st.floats(min_value=1.0, max_value=1e9),
    )
    def test_monotone_in_rate(self, lo, hi):
        lo, hi = sorted((lo, hi))
        assert channels_supported(lo, 256, 1.0) <= channels_supported(hi, 256, 1.0)

    def test_non_positive_inputs_rejected(self):
        with pytest.raises(InvalidArgumentError):
            channels_supported(0.0, 256, 1.0)
        with pytest.raises(InvalidArgumentError):
            channels_supported(1000.0, 0, 1.0)
        with pytest.raises(InvalidArgumentError):
            channels_supported(1000.0, 256, 0.0)


class TestEstablishAndRefresh:
    def test_both_ends_share_the_establishment_key(self):
        pair = establish("alice", "bob", service_with(4))
        m, s = pair.master_session, pair.slave_session
        assert m.current_key_id == s.current_key_id
        assert m.epoch == 0 and s.epoch == 0
        assert m.keys_consumed == 0  # establishment is not a refresh

        frame = m.seal(b"hello", b"meta")
        assert s.open(frame) == b"hello"
        assert m.open(s.seal(b"reply")) == b"reply"  # both directions work

    def test_empty_store_fails_establishment(self):
        svc = service_with(0)
        with pytest.raises(EstablishmentError):
            establish("alice", "bob", svc)
        # Establishment succeeds once material arrives.
        stream = KeyStream(24, "late")
        svc.pairs[frozenset(("alice", "bob"))].store.ingest([stream.block(0)])
        establish("alice", "bob", svc)

    def test_refresh_advances_epoch_and_resets_counter(self):
        pair = establish("alice", "bob", service_with(64))
        m = pair.master_session
        m.seal(b"x")
        m.seal(b"x")
        for _ in range(60):
            assert pair.refresh_tick()
        assert m.keys_consumed == 60
        assert m.epoch == 60
        assert m.frame_counter == 0  # reset by the last refresh
        assert pair.slave_session.epoch == 60

    def test_seal_without_key_raises(self):
        session_pair = establish("alice", "bob", service_with(2))
        # A raw session with no key yet must refuse to seal.
        from qkdsim.securechannel import ChannelSession

        bare = ChannelSession("alice", "bob")
        with pytest.raises(EstablishmentError):
            bare.seal(b"data")
        del session_pair

    def test_invalid_refresh_rate_rejected(self):
        with pytest.raises(InvalidArgumentError):
            establish("alice", "bob", service_with(2), refresh_hz=0.0)


class TestStarvation:
    def test_exhaustion_keeps_the_channel_alive(self):
        pair = establish("alice", "bob", service_with(1))  # only the establish key
        m, s = pair.master_session, pair.slave_session

        assert pair.refresh_tick(now_s=5.0) is False
        assert pair.starved
        assert [a.kind.value for a in m.alarms] == ["KeyStarvation"]
        assert [a.raised_at_s for a in m.alarms] == [5.0]

        # Repeated failures do not spam the alarm list.
        assert pair.refresh_tick(now_s=6.0) is False
        assert len(m.alarms) == 1

        # Traffic continues under the last installed key.
        assert s.open(m.seal(b"still alive")) == b"still alive"

    def test_recovery_clears_starvation_and_rearms_the_alarm(self):
        svc = service_with(1)
        pair = establish("alice", "bob", svc)
        pair.refresh_tick(now_s=1.0)
        assert pair.starved

        stream = KeyStream(30, "relief")
        svc.pairs[frozenset(("alice", "bob"))].store.ingest([stream.block(0)])
        assert pair.refresh_tick(now_s=2.0) is True
        assert not pair.starved

        # Starving again raises a second alarm: edge-triggered per episode.
        assert pair.refresh_tick(now_s=3.0) is False
        assert len(pair.master_session.alarms) == 2


class TestRoundTrip:
    @settings(max_examples=40)
    @given(st.binary(min_size=0, max_size=4096), st.binary(min_size=0, max_size=64))
    def test_seal_open_identity(self, plaintext, aad):
        pair = establish("alice", "bob", service_with(2))
        frame = pair.master_session.seal(plaintext, aad)
        assert pair.slave_session.open(frame) == plaintext

    @pytest.mark.parametrize("size", [0, 1, 1024, 65536])
    def test_explicit_sizes_through_the_wire_format(self, size):
        pair = establish("alice", "bob", service_with(2))
        payload = bytes(i % 251 for i in range(size))
        frame = pair.master_session.seal(payload, b"sz")
        relayed = decode_frame(encode_frame(frame))
        assert pair.slave_session.open(relayed) == payload

    def test_aad_tamper_rejected(self):
        pair = establish("alice", "bob", service_with(2))
        frame = pair.master_session.seal(b"payload", b"route=7")
        forged = Frame(frame.key_id, frame.nonce, frame.ciphertext, frame.tag, b"route=8")
        with pytest.raises(FrameAuthError):
            pair.slave_session.open(forged)
        assert pair.slave_session.rejected_frames == 1

    def test_unknown_key_id_is_distinct_from_bad_tag(self):
        pair = establish("alice", "bob", service_with(2))
        frame = pair.master_session.seal(b"payload")
        stranger = Frame(uuid.uuid4(), frame.nonce, frame.ciphertext, frame.tag)
        with pytest.raises(UnknownKeyIdError):
            pair.slave_session.open(stranger)
        assert pair.slave_session.rejected_frames == 0  # not an auth failure


class TestCorruption:
    def test_every_single_bit_flip_is_rejected(self):
        pair = establish("alice", "bob", service_with(2))
        frame = pair.master_session.seal(bytes(range(24)), b"hdr4")
        wire = encode_frame(frame)
        assert len(wire) == 16 + 12 + 2 + 4 + 4 + 24 + 16  # 78 octets

        for bit in range(len(wire) * 8):
            corrupted = bytearray(wire)
            corrupted[bit // 8] ^= 1 << (bit % 8)
            try:
                mangled = decode_frame(bytes(corrupted))
            except ValidationError:
                continue  # length fields no longer match
            with pytest.raises((FrameAuthError, UnknownKeyIdError)):
                pair.slave_session.open(mangled)


class TestEpochRetention:
    def test_previous_epoch_still_opens(self):
        pair = establish("alice", "bob", service_with(8))
        old = pair.master_session.seal(b"in flight")
        pair.refresh_tick()
        assert pair.slave_session.open(old) == b"in flight"

    def test_two_refreshes_age_a_key_out(self):
        pair = establish("alice", "bob", service_with(8))
        old = pair.master_session.seal(b"too old")
        pair.refresh_tick()
        pair.refresh_tick()
        with pytest.raises(UnknownKeyIdError):
            pair.slave_session.open(old)

    def test_nonce_pairs_never_repeat_across_refreshes(self):
        pair = establish("alice", "bob", service_with(16))
        seen: set[tuple[uuid.UUID, bytes]] = set()
        for _ in range(10):
            for _ in range(25):
                frame = pair.master_session.seal(b"tick")
                assert (frame.key_id, frame.nonce) not in seen
                seen.add((frame.key_id, frame.nonce))
            pair.refresh_tick()
        assert len(seen) == 250


class TestFrameCodec:
    def test_round_trip(self):
        frame = Frame(uuid.uuid4(), bytes(12), b"ct-bytes", bytes(16), b"aad")
        assert decode_frame(encode_frame(frame)) == frame

    def test_empty_ciphertext_and_aad(self):
        frame = Frame(uuid.uuid4(), bytes(12), b"", bytes(16))
        assert decode_frame(encode_frame(frame)) == frame

    def test_every_truncation_rejected(self):
        frame = Frame(uuid.uuid4(), bytes(12), b"some ciphertext", bytes(16), b"aad")
        wire = encode_frame(frame)
        for cut in range(len(wire)):
            with pytest.raises(ValidationError):
                decode_frame(wire[:cut])

    def test_trailing_garbage_rejected(self):
        frame = Frame(uuid.uuid4(), bytes(12), b"payload", bytes(16))
        with pytest.raises(ValidationError):
            decode_frame(encode_frame(frame) + b"\x00")

    def test_field_validation(self):
        with pytest.raises(ValidationError):
            Frame(uuid.uuid4(), bytes(11), b"", bytes(16))  # short nonce
        with pytest.raises(ValidationError):
            Frame(uuid.uuid4(), bytes(12), b"", bytes(15))  # short tag
        with pytest.raises(ValidationError):
            Frame(uuid.uuid4(), bytes(12), b"", bytes(16), bytes(65536))  # aad too long
