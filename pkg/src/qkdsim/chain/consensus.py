"""Share-recovery consensus over the secured links.

The originator splits a transaction into one share per validator, tags
each share with a one-time authentication key, and seals it into the
per-pair encrypted session.  Validators drop shares whose authentication
fails, then every k-subset of surviving validators pools its shares over
the pairwise sessions and reconstructs; the transaction is accepted when
every quorum arrives at the same payload digest.
"""

from __future__ import annotations

import hashlib
import itertools
import random
from dataclasses import dataclass

from qkdsim.errors import ChannelError, InvalidArgumentError, ValidationError
from qkdsim.chain.shamir import Share, shamir_reconstruct, shamir_split
from qkdsim.chain.wegman_carter import AuthKey, wc_tag, wc_verify
from qkdsim.securechannel import SessionPair

TAG_OCTETS = 8  # GF(2^64) tag on the wire


@dataclass(frozen=True)
class Transaction:
    payload: bytes
    origin: str
    seq: int

    def __post_init__(self) -> None:
        if not self.payload:
            raise ValidationError("transaction payload must be non-empty")
        if self.seq < 0:
            raise ValidationError("seq must be >= 0")

    def digest(self) -> str:
        return hashlib.sha256(self.payload).hexdigest()


@dataclass(frozen=True)
class ConsensusResult:
    accepted: bool
    reason: str
    digest: str | None
    flagged: tuple[int, ...]
    quorums_checked: int


def _pair_key(a: str, b: str) -> tuple[str, str]:
    return (a, b) if a <= b else (b, a)


def _encode_share(share: Share) -> bytes:
    return bytes([share.index]) + share.values


def _decode_share(data: bytes) -> Share:
    if len(data) < 2:
        raise ValidationError("share message too short")
    return Share(data[0], data[1:])


def propagate(
    tx: Transaction,
    validators: list[str],
    k: int,
    sessions: dict[tuple[str, str], SessionPair],
    auth_keys: dict[str, tuple[AuthKey, AuthKey]],
    *,
    seed: int = 0,
    tamper_index: int | None = None,
    offline: set[str] | None = None,
    transcript: list[str] | None = None,
) -> ConsensusResult:
    """Run one transaction through split, transport, and quorum recovery.

    sessions maps sorted node-id pairs to their established channel;
    auth_keys maps each validator to (sender copy, receiver copy) of its
    one-time authentication key.  A tamper_index corrupts that share after
    tagging and before sealing, modeling a fault between the two layers.
    Delivery order is shuffled deterministically from the seed.
    """
    n = len(validators)
    if len(set(validators)) != n or n == 0:
        raise InvalidArgumentError("validators must be non-empty and distinct")
    if not 1 <= k <= n:
        raise InvalidArgumentError(f"need 1 <= k <= n={n}, got k={k}")
    if tamper_index is not None and not 1 <= tamper_index <= n:
        raise InvalidArgumentError(f"tamper index must be in [1, {n}]")
    offline = offline or set()
    lines = transcript if transcript is not None else []

    lines.append(
        f"tx origin={tx.origin} seq={tx.seq} octets={len(tx.payload)} "
        f"digest={tx.digest()[:16]}"
    )

    shares = shamir_split(tx.payload, k, n, seed)
    bus: list[tuple[str, bytes]] = []
    for validator, share in zip(validators, shares):
        sender_key, _ = auth_keys[validator]
        tag = wc_tag(sender_key, _encode_share(share))
        wire_share = share
        if tamper_index == share.index:
            corrupted = bytearray(share.values)
            corrupted[0] ^= 0x01
            wire_share = Share(share.index, bytes(corrupted))
            lines.append(f"tamper: share {share.index} corrupted after tagging")
        body = _encode_share(wire_share) + tag.to_bytes(TAG_OCTETS, "big")
        aad = f"{tx.origin}:{tx.seq}:{share.index}".encode()
        session = sessions[_pair_key(tx.origin, validator)]
        frame = session.master_session.seal(body, aad)
        lines.append(
            f"share {share.index} -> {validator} tag={tag:016x} "
            f"sealed={len(frame.ciphertext)}B"
        )
        bus.append((validator, frame))

    order = list(range(len(bus)))
    random.Random(seed).shuffle(order)

    held: dict[str, Share] = {}
    flagged: list[int] = []
    for slot in order:
        validator, frame = bus[slot]
        if validator in offline:
            lines.append(f"deliver {validator}: offline, share lost")
            continue
        session = sessions[_pair_key(tx.origin, validator)]
        try:
            body = session.slave_session.open(frame)
        except ChannelError:
            idx = validators.index(validator) + 1
            flagged.append(idx)
            lines.append(f"deliver {validator}: frame rejected (flagged share {idx})")
            continue
        share = _decode_share(body[:-TAG_OCTETS])
        tag = int.from_bytes(body[-TAG_OCTETS:], "big")
        _, receiver_key = auth_keys[validator]
        if not wc_verify(receiver_key, _encode_share(share), tag):
            flagged.append(share.index)
            lines.append(f"deliver {validator}: tag FAIL (flagged share {share.index})")
            continue
        held[validator] = share
        lines.append(f"deliver {validator}: share {share.index} tag ok")

    flagged_t = tuple(sorted(flagged))
    intact = sorted(held, key=validators.index)
    if len(intact) < k:
        lines.append(
            f"result REJECTED reason=InsufficientShares intact={len(intact)} need={k}"
        )
        return ConsensusResult(False, "InsufficientShares", None, flagged_t, 0)

    digests: set[str] = set()
    quorums = 0
    for quorum in itertools.combinations(intact, k):
        # Every member gathers the others' shares over the pairwise
        # sessions and reconstructs for itself.
        member_digests: list[str] = []
        for receiver in quorum:
            received: dict[str, Share] = {receiver: held[receiver]}
            for sender in quorum:
                if sender == receiver:
                    continue
                session = sessions[_pair_key(sender, receiver)]
                sender_is_master = _pair_key(sender, receiver)[0] == sender
                sender_end = (
                    session.master_session if sender_is_master else session.slave_session
                )
                receiver_end = (
                    session.slave_session if sender_is_master else session.master_session
                )
                frame = sender_end.seal(_encode_share(held[sender]), b"quorum")
                received[sender] = _decode_share(receiver_end.open(frame))
            payload = shamir_reconstruct([received[m] for m in quorum], k)
            member_digests.append(hashlib.sha256(payload).hexdigest())
        digests.update(member_digests)
        quorums += 1
        agreed = len(set(member_digests)) == 1
        label = member_digests[0][:16] if agreed else "DISAGREE"
        lines.append(f"quorum {'+'.join(quorum)}: digest {label}")

    if len(digests) != 1:
        lines.append(f"result REJECTED reason=QuorumDisagreement digests={len(digests)}")
        return ConsensusResult(False, "QuorumDisagreement", None, flagged_t, quorums)

    digest = digests.pop()
    flag_note = f" flagged={list(flagged_t)}" if flagged_t else ""
    lines.append(f"result ACCEPTED digest={digest[:16]} quorums={quorums}{flag_note}")
    return ConsensusResult(True, "", digest, flagged_t, quorums)
