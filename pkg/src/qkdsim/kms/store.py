"""Shared key store backing one SAE pair.

The two key-management endpoints of a link hold the same carved blocks, so
one store with a three-state life cycle per key id models the pair exactly:

    AVAILABLE --enc_keys--> RESERVED --dec_keys--> consumed (purged)

All mutation happens under one lock; reservation is all-or-nothing, and a
reserved id is deliverable to the peer exactly once.
"""

from __future__ import annotations

import threading
import uuid
from collections import OrderedDict

from qkdsim.errors import InvalidArgumentError, KeyExhaustedError, KeyNotFoundError
from qkdsim.session import KeyBlock

# Reserved-but-unfetched keys are purged after this long.
DEFAULT_RESERVATION_TTL_S = 3600.0
DEFAULT_MAX_KEY_COUNT = 100_000


class LinkKeyStore:
    """Thread-safe shared store of carved keys for one SAE pair.

    Keys live in two FIFO maps so every operation only walks the keys it
    acts on: ``_available`` ordered by ingest, ``_reserved`` ordered by
    reservation time.
    """

    def __init__(
        self,
        max_key_count: int = DEFAULT_MAX_KEY_COUNT,
        reservation_ttl_s: float = DEFAULT_RESERVATION_TTL_S,
    ) -> None:
        if max_key_count < 1:
            raise InvalidArgumentError("max_key_count must be >= 1")
        self.max_key_count = max_key_count
        self.reservation_ttl_s = reservation_ttl_s
        self._lock = threading.Lock()
        self._available: "OrderedDict[uuid.UUID, bytes]" = OrderedDict()
        self._reserved: "OrderedDict[uuid.UUID, tuple[bytes, float]]" = OrderedDict()
        self.dropped_total = 0
        self.expired_total = 0

    def ingest(self, blocks: list[KeyBlock]) -> None:
        """Add freshly carved blocks; oldest available keys are dropped
        beyond capacity so the store never blocks production."""
        with self._lock:
            for block in blocks:
                if block.key_id in self._available or block.key_id in self._reserved:
                    raise InvalidArgumentError(f"duplicate key id {block.key_id}")
                self._available[block.key_id] = block.material
            while (
                len(self._available) + len(self._reserved) > self.max_key_count
                and self._available
            ):
                self._available.popitem(last=False)
                self.dropped_total += 1

    def available_count(self) -> int:
        with self._lock:
            return len(self._available)

    def reserve(self, number: int, now_s: float = 0.0) -> list[tuple[uuid.UUID, bytes]]:
        """Atomically move `number` oldest available keys to RESERVED and
        return them; raises without touching the store when short."""
        if number < 1:
            raise InvalidArgumentError(f"number must be >= 1, got {number}")
        with self._lock:
            if len(self._available) < number:
                raise KeyExhaustedError(
                    f"requested {number} keys, only {len(self._available)} available"
                )
            picked: list[tuple[uuid.UUID, bytes]] = []
            for _ in range(number):
                kid, material = self._available.popitem(last=False)
                self._reserved[kid] = (material, now_s)
                picked.append((kid, material))
            return picked

    def fetch(self, key_ids: list[uuid.UUID]) -> list[tuple[uuid.UUID, bytes]]:
        """Deliver reserved keys to the peer and purge them.

        All-or-nothing but non-destructive: if any id is unknown or not
        reserved the whole batch fails and every valid id stays
        deliverable.
        """
        if not key_ids:
            raise InvalidArgumentError("key_ids must be non-empty")
        with self._lock:
            missing = [kid for kid in key_ids if kid not in self._reserved]
            if missing:
                raise KeyNotFoundError(missing)
            out = [(kid, self._reserved[kid][0]) for kid in key_ids]
            for kid in key_ids:
                del self._reserved[kid]
            return out

    def expire_reservations(self, now_s: float) -> int:
        """Purge reservations older than the TTL; returns how many."""
        with self._lock:
            stale = [
                kid
                for kid, (_, at_s) in self._reserved.items()
                if now_s - at_s > self.reservation_ttl_s
            ]
            for kid in stale:
                del self._reserved[kid]
            self.expired_total += len(stale)
            return len(stale)
