"""Stateful QKD link endpoints: rate integration, key carving, alarms.

Both endpoints of a link draw key material from the same seeded
deterministic stream, standing in for the sifted-key pipeline, so a pair
constructed with the same seed and link id emits bit-identical key blocks.
"""

from __future__ import annotations

import enum
import hashlib
import uuid
from dataclasses import dataclass, field

from qkdsim.errors import ValidationError

KEY_BITS = 256
KEY_OCTETS = KEY_BITS // 8

# Status flips to Halted only after the rate has been zero this long.
HALT_GRACE_S = 10.0


class LinkStatus(str, enum.Enum):
    RUNNING = "Running"
    DEGRADED = "Degraded"
    HALTED = "Halted"


class AlarmKind(str, enum.Enum):
    QBER_WARN = "QberWarn"
    SKR_LOW = "SkrLow"
    KEY_STARVATION = "KeyStarvation"
    HALT = "Halt"


@dataclass(frozen=True)
class Alarm:
    kind: AlarmKind
    raised_at_s: float
    detail: str


@dataclass(frozen=True)
class AlarmThresholds:
    """Warning levels; a buffer_low_bits of 0 disables the buffer alarm
    (steady-state carving keeps the raw bit buffer below one key width,
    so the useful starvation signal comes from the key consumers)."""

    qber_warn: float = 0.044
    skr_low_bps: float = 2560.0
    buffer_low_bits: float = 0.0


@dataclass(frozen=True)
class KeyBlock:
    """One 256-bit key with its identifier; the unit the delivery API serves."""

    key_id: uuid.UUID
    material: bytes
    epoch: int

    def __post_init__(self) -> None:
        if len(self.material) != KEY_OCTETS:
            raise ValidationError(
                f"key material must be {KEY_OCTETS} octets, got {len(self.material)}"
            )
        if self.epoch < 0:
            raise ValidationError("epoch must be >= 0")


class KeyStream:
    """Deterministic key-block source; identical (seed, link_id) pairs
    yield identical blocks on both ends of the link."""

    def __init__(self, seed: int, link_id: str) -> None:
        self._prefix = seed.to_bytes(8, "big", signed=True) + link_id.encode()

    def material(self, index: int) -> bytes:
        return hashlib.sha256(
            b"qkdsim-key:" + self._prefix + index.to_bytes(8, "big")
        ).digest()

    def key_id(self, index: int) -> uuid.UUID:
        digest = hashlib.sha256(
            b"qkdsim-uid:" + self._prefix + index.to_bytes(8, "big")
        ).digest()
        raw = bytearray(digest[:16])
        raw[6] = (raw[6] & 0x0F) | 0x40
        raw[8] = (raw[8] & 0x3F) | 0x80
        return uuid.UUID(bytes=bytes(raw))

    def block(self, index: int) -> KeyBlock:
        return KeyBlock(self.key_id(index), self.material(index), index)


@dataclass
class QkdLinkState:
    """Live observables of one link endpoint."""

    qber_current: float = 0.0
    skr_current: float = 0.0
    key_buffer_bits: float = 0.0
    status: LinkStatus = LinkStatus.RUNNING
    alarms: list[Alarm] = field(default_factory=list)
    sim_time_s: float = 0.0
    zero_skr_elapsed_s: float = 0.0
    active_conditions: frozenset[AlarmKind] = frozenset()


def _conditions(
    state: QkdLinkState, thresholds: AlarmThresholds, halted: bool
) -> frozenset[AlarmKind]:
    active: set[AlarmKind] = set()
    if state.qber_current >= thresholds.qber_warn:
        active.add(AlarmKind.QBER_WARN)
    if state.skr_current <= thresholds.skr_low_bps and not halted:
        active.add(AlarmKind.SKR_LOW)
    if 0 < thresholds.buffer_low_bits and state.key_buffer_bits < thresholds.buffer_low_bits:
        active.add(AlarmKind.KEY_STARVATION)
    if halted:
        active.add(AlarmKind.HALT)
    return frozenset(active)


def _detail(kind: AlarmKind, state: QkdLinkState, thresholds: AlarmThresholds) -> str:
    if kind is AlarmKind.QBER_WARN:
        return f"qber {state.qber_current:.6g} >= {thresholds.qber_warn:.6g}"
    if kind is AlarmKind.SKR_LOW:
        return f"skr {state.skr_current:.6g} bps <= {thresholds.skr_low_bps:.6g}"
    if kind is AlarmKind.KEY_STARVATION:
        return (
            f"buffer {state.key_buffer_bits:.6g} bits < {thresholds.buffer_low_bits:.6g}"
        )
    return f"skr zero for {state.zero_skr_elapsed_s:.6g} s"


def alarm_eval(state: QkdLinkState, thresholds: AlarmThresholds) -> list[Alarm]:
    """Edge-triggered alarm pass: returns alarms newly raised by this call.

    A condition raises once when it becomes true and may raise again only
    after clearing; the currently-true set is kept on the state.
    """
    halted = state.status is LinkStatus.HALTED
    active = _conditions(state, thresholds, halted)
    fresh = [
        Alarm(kind, state.sim_time_s, _detail(kind, state, thresholds))
        for kind in sorted(active - state.active_conditions, key=lambda k: k.value)
    ]
    state.alarms.extend(fresh)
    state.active_conditions = active
    if not halted:
        state.status = LinkStatus.DEGRADED if active else LinkStatus.RUNNING
    return fresh


class LinkEndpoint:
    """Single-owner state machine for one end of a QKD link."""

    def __init__(
        self,
        seed: int,
        link_id: str,
        thresholds: AlarmThresholds | None = None,
    ) -> None:
        self.state = QkdLinkState()
        self.thresholds = thresholds if thresholds is not None else AlarmThresholds()
        self._stream = KeyStream(seed, link_id)
        self._next_key = 0

    def tick(self, model_skr: float, model_qber: float, dt: float) -> QkdLinkState:
        """Advance simulated time: integrate rate into the buffer, refresh
        observables, re-evaluate status and alarms."""
        if dt <= 0:
            raise ValidationError(f"dt must be > 0, got {dt}")
        if model_skr < 0 or not 0 <= model_qber <= 0.5:
            raise ValidationError("model observables out of range")
        state = self.state
        state.sim_time_s += dt
        state.skr_current = model_skr
        state.qber_current = model_qber
        state.key_buffer_bits += model_skr * dt
        if model_skr == 0:
            state.zero_skr_elapsed_s += dt
        else:
            state.zero_skr_elapsed_s = 0.0
        if state.zero_skr_elapsed_s > HALT_GRACE_S:
            state.status = LinkStatus.HALTED
        elif state.status is LinkStatus.HALTED:
            state.status = LinkStatus.RUNNING
        alarm_eval(state, self.thresholds)
        return state

    def carve_keys(self) -> list[KeyBlock]:
        """Cut whole 256-bit blocks out of the buffer, oldest stream index
        first; the sub-key remainder stays buffered."""
        state = self.state
        count = int(state.key_buffer_bits // KEY_BITS)
        if count <= 0:
            return []
        blocks = [self._stream.block(self._next_key + i) for i in range(count)]
        self._next_key += count
        state.key_buffer_bits -= KEY_BITS * count
        return blocks
