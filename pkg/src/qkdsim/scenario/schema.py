"""Scenario documents: a timed event script over an initial link setup.

Scenarios are JSON with an explicit format version.  Validation happens
entirely at load time so a run never starts on a bad document; events are
stably ordered by (time, kind priority) to make same-timestamp behavior
deterministic.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Union

from qkdsim.errors import ValidationError
from qkdsim.physmodel.types import ChannelPlan, ClassicalChannel, FiberSpan

SCENARIO_FORMAT = "qkdsim-scenario/1"


@dataclass(frozen=True)
class SetDistance:
    at_s: int
    distance_km: float


@dataclass(frozen=True)
class AddChannel:
    at_s: int
    channel: ClassicalChannel


@dataclass(frozen=True)
class AttenuationStep:
    at_s: int
    delta_db: float


@dataclass(frozen=True)
class SopBurst:
    at_s: int
    rad_s: float
    duration_s: float


@dataclass(frozen=True)
class StartSessions:
    at_s: int
    count: int


Event = Union[SetDistance, AddChannel, AttenuationStep, SopBurst, StartSessions]

# Same-timestamp application order; lower applies first.
EVENT_PRIORITY: dict[type, int] = {
    SetDistance: 0,
    AddChannel: 1,
    AttenuationStep: 2,
    SopBurst: 3,
    StartSessions: 4,
}


@dataclass(frozen=True)
class Scenario:
    name: str
    seed: int
    duration_s: int
    initial_plan: ChannelPlan
    initial_span: FiberSpan
    events: tuple[Event, ...]
    params_file: str | None = None


def _expect(doc: dict, key: str, kinds: tuple[type, ...], where: str):
    if key not in doc:
        raise ValidationError(f"{where}: missing required field {key!r}")
    value = doc[key]
    if not isinstance(value, kinds) or isinstance(value, bool):
        names = "/".join(k.__name__ for k in kinds)
        raise ValidationError(f"{where}: field {key!r} must be {names}")
    return value


def _parse_channel(doc: dict, where: str) -> ClassicalChannel:
    if not isinstance(doc, dict):
        raise ValidationError(f"{where}: channel must be an object")
    wavelength = _expect(doc, "wavelength_nm", (int, float), where)
    power = _expect(doc, "power_dbm", (int, float), where)
    rate = doc.get("rate_gbps", 100.0)
    label = doc.get("label", "")
    if not isinstance(rate, (int, float)) or isinstance(rate, bool):
        raise ValidationError(f"{where}: rate_gbps must be a number")
    if not isinstance(label, str):
        raise ValidationError(f"{where}: label must be a string")
    return ClassicalChannel(float(wavelength), float(power), float(rate), label)


def _parse_event(doc: dict, index: int, duration_s: int) -> Event:
    where = f"events[{index}]"
    if not isinstance(doc, dict):
        raise ValidationError(f"{where}: event must be an object")
    at_s = _expect(doc, "at_s", (int,), where)
    if not 0 <= at_s <= duration_s:
        raise ValidationError(f"{where}: at_s {at_s} outside [0, duration_s]")
    kind = _expect(doc, "kind", (str,), where)
    if kind == "SetDistance":
        distance = _expect(doc, "distance_km", (int, float), where)
        if distance < 0:
            raise ValidationError(f"{where}: distance_km must be >= 0")
        return SetDistance(at_s, float(distance))
    if kind == "AddChannel":
        return AddChannel(at_s, _parse_channel(_expect(doc, "channel", (dict,), where), where))
    if kind == "AttenuationStep":
        delta = _expect(doc, "delta_db", (int, float), where)
        return AttenuationStep(at_s, float(delta))
    if kind == "SopBurst":
        rad_s = _expect(doc, "rad_s", (int, float), where)
        duration = _expect(doc, "duration_s", (int, float), where)
        if rad_s < 0 or duration < 0:
            raise ValidationError(f"{where}: rad_s and duration_s must be >= 0")
        return SopBurst(at_s, float(rad_s), float(duration))
    if kind == "StartSessions":
        count = _expect(doc, "count", (int,), where)
        if count < 1:
            raise ValidationError(f"{where}: count must be >= 1")
        return StartSessions(at_s, count)
    raise ValidationError(f"{where}: unknown event kind {kind!r}")


def parse_scenario(doc: dict) -> Scenario:
    """Validate a parsed JSON document into a Scenario."""
    if not isinstance(doc, dict):
        raise ValidationError("scenario document must be a JSON object")
    fmt = _expect(doc, "format", (str,), "scenario")
    if fmt != SCENARIO_FORMAT:
        raise ValidationError(
            f"unsupported scenario format {fmt!r}, expected {SCENARIO_FORMAT!r}"
        )
    name = _expect(doc, "name", (str,), "scenario")
    if not name:
        raise ValidationError("scenario: name must be non-empty")
    seed = _expect(doc, "seed", (int,), "scenario")
    if not -(2**63) <= seed < 2**63:
        raise ValidationError("scenario: seed must fit in 64 bits")
    duration = _expect(doc, "duration_s", (int,), "scenario")
    if duration < 1:
        raise ValidationError("scenario: duration_s must be >= 1")

    initial = _expect(doc, "initial", (dict,), "scenario")
    distance = _expect(initial, "distance_km", (int, float), "initial")
    extra = initial.get("extra_loss_db", 0.0)
    if not isinstance(extra, (int, float)) or isinstance(extra, bool):
        raise ValidationError("initial: extra_loss_db must be a number")
    quantum_nm = initial.get("quantum_wavelength_nm", 1312.73)
    if not isinstance(quantum_nm, (int, float)) or isinstance(quantum_nm, bool):
        raise ValidationError("initial: quantum_wavelength_nm must be a number")
    channels_doc = _expect(initial, "channels", (list,), "initial")
    channels = tuple(
        _parse_channel(ch, f"initial.channels[{i}]") for i, ch in enumerate(channels_doc)
    )
    plan = ChannelPlan(channels, float(quantum_nm))
    span = FiberSpan(float(distance), extra_loss_db=float(extra))

    events_doc = doc.get("events", [])
    if not isinstance(events_doc, list):
        raise ValidationError("scenario: events must be a list")
    events = [_parse_event(e, i, duration) for i, e in enumerate(events_doc)]
    events.sort(key=lambda e: (e.at_s, EVENT_PRIORITY[type(e)]))

    # Attenuation must stay physical across the whole script.
    running_extra = span.extra_loss_db
    for event in events:
        if isinstance(event, AttenuationStep):
            running_extra += event.delta_db
            if running_extra < 0:
                raise ValidationError(
                    f"attenuation goes negative ({running_extra:g} dB) at t={event.at_s}"
                )
        if isinstance(event, AddChannel):
            # Surface duplicate-wavelength collisions before the run starts.
            plan = plan.with_channel(event.channel)

    params_file = doc.get("params_file")
    if params_file is not None and not isinstance(params_file, str):
        raise ValidationError("scenario: params_file must be a string path")

    return Scenario(
        name=name,
        seed=seed,
        duration_s=duration,
        initial_plan=ChannelPlan(channels, float(quantum_nm)),
        initial_span=span,
        events=tuple(events),
        params_file=params_file,
    )


def load_scenario(path: str | Path) -> Scenario:
    """Read and validate a scenario file."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ValidationError(f"cannot read scenario file {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"scenario file {path} is not valid JSON: {exc}") from exc
    return parse_scenario(doc)
