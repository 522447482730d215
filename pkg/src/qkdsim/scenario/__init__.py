"""Deterministic scripted runs, CSV logs, and summary reports."""

from qkdsim.scenario.schema import (
    AddChannel,
    AttenuationStep,
    Event,
    Scenario,
    SetDistance,
    SopBurst,
    StartSessions,
    load_scenario,
    parse_scenario,
)
from qkdsim.scenario.engine import RunLog, RunRow, run, write_csv, read_csv
from qkdsim.scenario.report import REPORT_KINDS, Table, report

__all__ = [
    "AddChannel",
    "AttenuationStep",
    "Event",
    "Scenario",
    "SetDistance",
    "SopBurst",
    "StartSessions",
    "load_scenario",
    "parse_scenario",
    "RunLog",
    "RunRow",
    "run",
    "write_csv",
    "read_csv",
    "REPORT_KINDS",
    "Table",
    "report",
]
