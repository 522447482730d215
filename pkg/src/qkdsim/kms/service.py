"""Key-delivery service: status, enc_keys, dec_keys over registered SAE pairs.

The master SAE pulls fresh keys (enc_keys); the slave SAE pulls the same
keys by id (dec_keys).  Either SAE of a registered pair may act as master;
the store is direction-agnostic because both link endpoints hold identical
material.
"""

from __future__ import annotations

import base64
import uuid
from dataclasses import dataclass, field

from qkdsim.errors import InvalidArgumentError, PairNotFoundError
from qkdsim.kms.store import LinkKeyStore
from qkdsim.session import KEY_BITS

SaeId = str


def _require_sae(sae: SaeId) -> SaeId:
    if not sae:
        raise InvalidArgumentError("SAE id must be non-empty")
    return sae


@dataclass(frozen=True)
class KmeStatus:
    """Answer to a status query, mirroring the delivery API's data model."""

    source_kme: str
    target_kme: str
    master_sae: SaeId
    slave_sae: SaeId
    key_size_bits: int
    stored_key_count: int
    max_key_count: int

    def to_json(self) -> dict:
        return {
            "source_KME_ID": self.source_kme,
            "target_KME_ID": self.target_kme,
            "master_SAE_ID": self.master_sae,
            "slave_SAE_ID": self.slave_sae,
            "key_size": self.key_size_bits,
            "stored_key_count": self.stored_key_count,
            "max_key_count": self.max_key_count,
        }


@dataclass(frozen=True)
class KeyContainer:
    """Batch of delivered keys."""

    entries: tuple[tuple[uuid.UUID, bytes], ...]

    def to_json(self) -> dict:
        return {
            "keys": [
                {
                    "key_ID": str(kid),
                    "key": base64.b64encode(material).decode("ascii"),
                }
                for kid, material in self.entries
            ]
        }


@dataclass
class PairHandle:
    """One registered SAE pair and its backing store."""

    sae_a: SaeId
    sae_b: SaeId
    store: LinkKeyStore
    token_a: str = ""
    token_b: str = ""

    def peer_of(self, sae: SaeId) -> SaeId:
        return self.sae_b if sae == self.sae_a else self.sae_a


@dataclass
class KmsService:
    """Registry of SAE pairs plus the three delivery operations."""

    pairs: dict[frozenset, PairHandle] = field(default_factory=dict)
    clock_s: float = 0.0

    def register_pair(
        self,
        sae_a: SaeId,
        sae_b: SaeId,
        store: LinkKeyStore,
        token_a: str = "",
        token_b: str = "",
    ) -> PairHandle:
        _require_sae(sae_a)
        _require_sae(sae_b)
        if sae_a == sae_b:
            raise InvalidArgumentError("an SAE cannot pair with itself")
        key = frozenset((sae_a, sae_b))
        if key in self.pairs:
            raise InvalidArgumentError(f"pair {sae_a}/{sae_b} already registered")
        handle = PairHandle(sae_a, sae_b, store, token_a, token_b)
        self.pairs[key] = handle
        return handle

    def _pair(self, a: SaeId, b: SaeId) -> PairHandle:
        handle = self.pairs.get(frozenset((_require_sae(a), _require_sae(b))))
        if handle is None:
            raise PairNotFoundError(f"no registered pair for {a!r} and {b!r}")
        return handle

    def advance_clock(self, now_s: float) -> None:
        """Move service time forward and expire stale reservations."""
        self.clock_s = now_s
        for handle in self.pairs.values():
            handle.store.expire_reservations(now_s)

    def get_status(self, requester: SaeId, slave: SaeId) -> KmeStatus:
        handle = self._pair(requester, slave)
        return KmeStatus(
            source_kme=f"kme-{requester}",
            target_kme=f"kme-{slave}",
            master_sae=requester,
            slave_sae=slave,
            key_size_bits=KEY_BITS,
            stored_key_count=handle.store.available_count(),
            max_key_count=handle.store.max_key_count,
        )

    def get_enc_keys(
        self, master: SaeId, slave: SaeId, number: int, size_bits: int = KEY_BITS
    ) -> KeyContainer:
        """Reserve `number` fresh keys for the pair; all-or-nothing."""
        handle = self._pair(master, slave)
        if size_bits != KEY_BITS:
            raise InvalidArgumentError(
                f"only size {KEY_BITS} is supported, got {size_bits}"
            )
        if number < 1:
            raise InvalidArgumentError(f"number must be >= 1, got {number}")
        picked = handle.store.reserve(number, now_s=self.clock_s)
        return KeyContainer(tuple(picked))

    def get_dec_keys(
        self, slave: SaeId, master: SaeId, key_ids: list[uuid.UUID]
    ) -> KeyContainer:
        """Deliver previously reserved keys to the peer; each id exactly once."""
        handle = self._pair(slave, master)
        if not key_ids:
            raise InvalidArgumentError("key_IDs must be non-empty")
        fetched = handle.store.fetch(list(key_ids))
        return KeyContainer(tuple(fetched))
