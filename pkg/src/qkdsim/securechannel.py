"""AES-256-GCM data channel with once-per-second key refresh.

Each refresh consumes one 256-bit key from the delivery service and opens
a new epoch; the previous epoch's key stays usable for one more epoch so
frames in flight across a refresh boundary still open.  Nonces encode
(epoch, frame counter), so no (key id, nonce) pair ever repeats.
"""

from __future__ import annotations

import struct
import uuid
from dataclasses import dataclass, field

from cryptography.exceptions import InvalidTag
from cryptography.hazmat.primitives.ciphers.aead import AESGCM

from qkdsim.errors import (
    EstablishmentError,
    FrameAuthError,
    InvalidArgumentError,
    KeyExhaustedError,
    UnknownKeyIdError,
    ValidationError,
)
from qkdsim.kms.service import KmsService, SaeId
from qkdsim.session import KEY_BITS, Alarm, AlarmKind

TAG_OCTETS = 16
NONCE_OCTETS = 12
KEY_ID_OCTETS = 16
MAX_AAD_OCTETS = 0xFFFF
MAX_EPOCH = 2**32 - 1
MAX_FRAME_COUNTER = 2**64 - 1

# A key sealed in epoch k still opens in epoch k+1, then ages out.
KEY_RETENTION_EPOCHS = 2


def channels_supported(skr_bps: float, key_bits: int, refresh_hz: float) -> int:
    """How many encrypted channels one link's key production can feed."""
    if skr_bps <= 0 or key_bits <= 0 or refresh_hz <= 0:
        raise InvalidArgumentError("all capacity inputs must be > 0")
    return int(skr_bps // (key_bits * refresh_hz))


@dataclass(frozen=True)
class Frame:
    """One sealed record; aad carries cleartext channel metadata."""

    key_id: uuid.UUID
    nonce: bytes
    ciphertext: bytes
    tag: bytes
    aad: bytes = b""

    def __post_init__(self) -> None:
        if len(self.nonce) != NONCE_OCTETS:
            raise ValidationError(f"nonce must be {NONCE_OCTETS} octets")
        if len(self.tag) != TAG_OCTETS:
            raise ValidationError(f"tag must be {TAG_OCTETS} octets")
        if len(self.aad) > MAX_AAD_OCTETS:
            raise ValidationError("aad too long for the frame layout")


def encode_frame(frame: Frame) -> bytes:
    """Serialize: key_id(16) nonce(12) aad_len(2) aad ct_len(4) ct tag(16),
    integers big-endian."""
    return b"".join(
        (
            frame.key_id.bytes,
            frame.nonce,
            struct.pack(">H", len(frame.aad)),
            frame.aad,
            struct.pack(">I", len(frame.ciphertext)),
            frame.ciphertext,
            frame.tag,
        )
    )


def decode_frame(data: bytes) -> Frame:
    """Parse the binary layout; any length mismatch is a validation error."""
    view = memoryview(data)
    need = KEY_ID_OCTETS + NONCE_OCTETS + 2
    if len(view) < need:
        raise ValidationError("frame truncated in header")
    key_id = uuid.UUID(bytes=bytes(view[:KEY_ID_OCTETS]))
    offset = KEY_ID_OCTETS
    nonce = bytes(view[offset : offset + NONCE_OCTETS])
    offset += NONCE_OCTETS
    (aad_len,) = struct.unpack_from(">H", view, offset)
    offset += 2
    if len(view) < offset + aad_len + 4:
        raise ValidationError("frame truncated in aad")
    aad = bytes(view[offset : offset + aad_len])
    offset += aad_len
    (ct_len,) = struct.unpack_from(">I", view, offset)
    offset += 4
    if len(view) != offset + ct_len + TAG_OCTETS:
        raise ValidationError("frame length does not match its headers")
    ciphertext = bytes(view[offset : offset + ct_len])
    tag = bytes(view[offset + ct_len :])
    return Frame(key_id, nonce, ciphertext, tag, aad)


def _nonce(epoch: int, counter: int) -> bytes:
    return struct.pack(">IQ", epoch, counter)


@dataclass
class ChannelSession:
    """One side of an established channel.

    Sealing always uses the current key; opening accepts any retained key
    named by the frame.
    """

    master: SaeId
    slave: SaeId
    refresh_hz: float = 1.0
    current_key_id: uuid.UUID | None = None
    epoch: int = 0
    frame_counter: int = 0
    keys_consumed: int = 0
    starved: bool = False
    rejected_frames: int = 0
    alarms: list[Alarm] = field(default_factory=list)
    _keys: dict[uuid.UUID, tuple[bytes, int]] = field(default_factory=dict)

    def install_key(self, key_id: uuid.UUID, material: bytes) -> None:
        """Adopt a fresh key: next epoch, counter reset, old epochs pruned."""
        if len(material) * 8 != KEY_BITS:
            raise ValidationError("session keys must be 256 bits")
        epoch = self.epoch + 1 if self.current_key_id is not None else 0
        if epoch > MAX_EPOCH:
            raise ValidationError("epoch space exhausted")
        self.epoch = epoch
        self.current_key_id = key_id
        self.frame_counter = 0
        self.keys_consumed += 1
        self.starved = False
        self._keys[key_id] = (material, epoch)
        cutoff = epoch - (KEY_RETENTION_EPOCHS - 1)
        for kid in [k for k, (_, e) in self._keys.items() if e < cutoff]:
            del self._keys[kid]

    def mark_starved(self, now_s: float, detail: str) -> None:
        """Record a failed refresh; traffic continues under the current key."""
        if not self.starved:
            self.alarms.append(Alarm(AlarmKind.KEY_STARVATION, now_s, detail))
        self.starved = True

    def seal(self, plaintext: bytes, aad: bytes = b"") -> Frame:
        if self.current_key_id is None:
            raise EstablishmentError("session has no key")
        if self.frame_counter > MAX_FRAME_COUNTER:
            raise ValidationError("frame counter exhausted under this key")
        material, epoch = self._keys[self.current_key_id]
        nonce = _nonce(epoch, self.frame_counter)
        self.frame_counter += 1
        sealed = AESGCM(material).encrypt(nonce, plaintext, aad)
        return Frame(
            key_id=self.current_key_id,
            nonce=nonce,
            ciphertext=sealed[:-TAG_OCTETS],
            tag=sealed[-TAG_OCTETS:],
            aad=aad,
        )

    def open(self, frame: Frame) -> bytes:
        held = self._keys.get(frame.key_id)
        if held is None:
            raise UnknownKeyIdError(f"no retained key with id {frame.key_id}")
        material, _ = held
        try:
            return AESGCM(material).decrypt(
                frame.nonce, frame.ciphertext + frame.tag, frame.aad
            )
        except InvalidTag as exc:
            self.rejected_frames += 1
            raise FrameAuthError(
                f"authentication failed for frame under key {frame.key_id}"
            ) from exc


@dataclass
class SessionPair:
    """Both ends of one channel plus the service they draw keys from."""

    master_session: ChannelSession
    slave_session: ChannelSession
    service: KmsService

    @property
    def starved(self) -> bool:
        return self.master_session.starved

    def refresh_tick(self, now_s: float = 0.0) -> bool:
        """Pull one fresh key into both ends; on exhaustion keep the
        current key, raise a starvation alarm, and report False."""
        master = self.master_session
        slave = self.slave_session
        try:
            container = self.service.get_enc_keys(master.master, master.slave, 1, KEY_BITS)
        except KeyExhaustedError as exc:
            detail = f"refresh failed: {exc}"
            master.mark_starved(now_s, detail)
            slave.mark_starved(now_s, detail)
            return False
        (kid, material) = container.entries[0]
        peer = self.service.get_dec_keys(master.slave, master.master, [kid])
        master.install_key(kid, material)
        slave.install_key(peer.entries[0][0], peer.entries[0][1])
        return True


def establish(
    master: SaeId, slave: SaeId, service: KmsService, refresh_hz: float = 1.0
) -> SessionPair:
    """Stand up both session ends on one shared initial key."""
    if refresh_hz <= 0:
        raise InvalidArgumentError("refresh_hz must be > 0")
    try:
        container = service.get_enc_keys(master, slave, 1, KEY_BITS)
    except KeyExhaustedError as exc:
        raise EstablishmentError(f"no key available to establish: {exc}") from exc
    (kid, material) = container.entries[0]
    peer = service.get_dec_keys(slave, master, [kid])
    master_session = ChannelSession(master, slave, refresh_hz)
    slave_session = ChannelSession(master, slave, refresh_hz)
    master_session.install_key(kid, material)
    slave_session.install_key(peer.entries[0][0], peer.entries[0][1])
    # install_key counts refreshes; the establishment key is not a refresh.
    master_session.keys_consumed = 0
    slave_session.keys_consumed = 0
    return SessionPair(master_session, slave_session, service)
