"""Discrete-event driver: one-second ticks over the scripted link.

Each tick applies due events, evaluates the physical model, integrates the
link endpoint, feeds carved keys to the delivery service, and advances the
encrypted sessions.  Runs are fully deterministic: the same scenario and
seed produce byte-identical CSV output.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace
from pathlib import Path

from qkdsim.errors import EstablishmentError, ValidationError
from qkdsim.kms.service import KmsService
from qkdsim.kms.store import LinkKeyStore
from qkdsim.physmodel.model import link_observables
from qkdsim.physmodel.types import CALM_SOP, QkdModelParams, SopState
from qkdsim.scenario.schema import (
    AddChannel,
    AttenuationStep,
    Scenario,
    SetDistance,
    SopBurst,
    StartSessions,
)
from qkdsim.securechannel import SessionPair, establish
from qkdsim.session import AlarmKind, AlarmThresholds, LinkEndpoint, LinkStatus

SAE_MASTER = "sae-master"
SAE_SLAVE = "sae-slave"

CSV_COLUMNS = (
    "sim_time_s",
    "qber",
    "skr_bps",
    "buffer_bits",
    "status",
    "active_alarms",
    "keys_consumed_total",
    "distance_km",
    "channel_count",
    "extra_loss_db",
    "sop_rad_s",
)


@dataclass(frozen=True)
class RunRow:
    sim_time_s: int
    qber: float
    skr_bps: float
    buffer_bits: float
    status: str
    active_alarms: str
    keys_consumed_total: int
    distance_km: float
    channel_count: int
    extra_loss_db: float
    sop_rad_s: float


@dataclass
class RunLog:
    scenario_name: str
    seed: int
    rows: list[RunRow]


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def run(
    scenario: Scenario,
    params: QkdModelParams,
    thresholds: AlarmThresholds | None = None,
) -> RunLog:
    """Execute the scenario against the calibrated model."""
    thresholds = thresholds if thresholds is not None else AlarmThresholds()
    span = scenario.initial_span
    plan = scenario.initial_plan
    burst: SopBurst | None = None

    link = LinkEndpoint(scenario.seed, f"scenario:{scenario.name}", thresholds)
    store = LinkKeyStore()
    service = KmsService()
    service.register_pair(SAE_MASTER, SAE_SLAVE, store, "tok-master", "tok-slave")

    sessions: list[SessionPair] = []
    pending_sessions = 0
    keys_consumed_total = 0
    next_event = 0
    rows: list[RunRow] = []

    for t in range(scenario.duration_s):
        while next_event < len(scenario.events) and scenario.events[next_event].at_s <= t:
            event = scenario.events[next_event]
            next_event += 1
            if isinstance(event, SetDistance):
                span = replace(span, length_km=event.distance_km)
            elif isinstance(event, AddChannel):
                plan = plan.with_channel(event.channel)
            elif isinstance(event, AttenuationStep):
                span = replace(span, extra_loss_db=span.extra_loss_db + event.delta_db)
            elif isinstance(event, SopBurst):
                burst = event
            elif isinstance(event, StartSessions):
                pending_sessions += event.count

        # A burst is in view on every tick its window overlaps; the model
        # sees the burst's full duration, so only sustained ones gate.
        sop = CALM_SOP
        sop_rad_s = 0.0
        if burst is not None and burst.at_s <= t < burst.at_s + burst.duration_s:
            sop = SopState(burst.rad_s, burst.duration_s)
            sop_rad_s = burst.rad_s

        model_qber, model_skr = link_observables(plan, span, params, sop)
        link.tick(model_skr, model_qber, 1.0)
        store.ingest(link.carve_keys())
        service.advance_clock(float(t))

        # Sessions started this tick draw their first key now and begin
        # refreshing on the next tick.
        fresh: list[SessionPair] = []
        establish_starved = False
        while pending_sessions > 0:
            try:
                fresh.append(establish(SAE_MASTER, SAE_SLAVE, service))
            except EstablishmentError:
                establish_starved = True
                break
            pending_sessions -= 1
            keys_consumed_total += 1
        for session in sessions:
            if session.refresh_tick(float(t)):
                keys_consumed_total += 1
        sessions.extend(fresh)

        active = {kind.value for kind in link.state.active_conditions}
        if establish_starved or any(s.starved for s in sessions):
            active.add(AlarmKind.KEY_STARVATION.value)
        status = link.state.status
        if status is not LinkStatus.HALTED and active:
            status = LinkStatus.DEGRADED

        rows.append(
            RunRow(
                sim_time_s=t,
                qber=model_qber,
                skr_bps=model_skr,
                buffer_bits=link.state.key_buffer_bits,
                status=status.value,
                active_alarms=";".join(sorted(active)),
                keys_consumed_total=keys_consumed_total,
                distance_km=span.length_km,
                channel_count=len(plan.channels),
                extra_loss_db=span.extra_loss_db,
                sop_rad_s=sop_rad_s,
            )
        )

    return RunLog(scenario.name, scenario.seed, rows)


def write_csv(log: RunLog, path: str | Path) -> None:
    """Write the log with fixed columns and 6-significant-digit floats."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in log.rows:
            writer.writerow(
                (
                    row.sim_time_s,
                    _fmt(row.qber),
                    _fmt(row.skr_bps),
                    _fmt(row.buffer_bits),
                    row.status,
                    row.active_alarms,
                    row.keys_consumed_total,
                    _fmt(row.distance_km),
                    row.channel_count,
                    _fmt(row.extra_loss_db),
                    _fmt(row.sop_rad_s),
                )
            )


def read_csv(path: str | Path) -> RunLog:
    """Read a log written by write_csv."""
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or tuple(header) != CSV_COLUMNS:
                raise ValidationError(f"{path}: unrecognized log header")
            rows = []
            for record in reader:
                if len(record) != len(CSV_COLUMNS):
                    raise ValidationError(f"{path}: malformed log row {record!r}")
                rows.append(
                    RunRow(
                        sim_time_s=int(record[0]),
                        qber=float(record[1]),
                        skr_bps=float(record[2]),
                        buffer_bits=float(record[3]),
                        status=record[4],
                        active_alarms=record[5],
                        keys_consumed_total=int(record[6]),
                        distance_km=float(record[7]),
                        channel_count=int(record[8]),
                        extra_loss_db=float(record[9]),
                        sop_rad_s=float(record[10]),
                    )
                )
    except OSError as exc:
        raise ValidationError(f"cannot read log file {path}: {exc}") from exc
    except ValueError as exc:
        raise ValidationError(f"{path}: malformed log value: {exc}") from exc
    return RunLog(Path(path).stem, 0, rows)
