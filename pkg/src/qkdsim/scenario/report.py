"""Summary tables over run logs, one aggregation per experiment shape."""

from __future__ import annotations

from dataclasses import dataclass

from qkdsim.errors import InvalidArgumentError
from qkdsim.scenario.engine import RunLog

REPORT_KINDS = (
    "qber_vs_channels",
    "skr_vs_distance",
    "attenuation_profile",
    "sop_timeline",
)


@dataclass(frozen=True)
class Table:
    columns: tuple[str, ...]
    rows: tuple[tuple, ...]

    def render(self) -> str:
        """Fixed-width text rendering with 6-significant-digit floats."""
        cells = [list(self.columns)]
        for row in self.rows:
            cells.append(
                [f"{v:.6g}" if isinstance(v, float) else str(v) for v in row]
            )
        widths = [max(len(r[i]) for r in cells) for i in range(len(self.columns))]
        lines = []
        for r, row in enumerate(cells):
            lines.append("  ".join(c.rjust(w) for c, w in zip(row, widths)))
            if r == 0:
                lines.append("  ".join("-" * w for w in widths))
        return "\n".join(lines) + "\n"


def _last_by(log: RunLog, key) -> dict:
    """Last row per group, in first-seen group order."""
    groups: dict = {}
    for row in log.rows:
        groups[key(row)] = row
    return groups


def report(log: RunLog, kind: str) -> Table:
    """Aggregate the log into the named table."""
    if kind not in REPORT_KINDS:
        raise InvalidArgumentError(
            f"unknown report kind {kind!r}; pick one of {', '.join(REPORT_KINDS)}"
        )
    if not log.rows:
        raise InvalidArgumentError("cannot report on an empty log")

    if kind == "qber_vs_channels":
        groups = _last_by(log, lambda r: r.channel_count)
        rows = tuple(
            (count, groups[count].qber) for count in sorted(groups)
        )
        return Table(("channel_count", "qber"), rows)

    if kind == "skr_vs_distance":
        groups = _last_by(log, lambda r: r.distance_km)
        rows = tuple(
            (distance, groups[distance].skr_bps) for distance in sorted(groups)
        )
        return Table(("distance_km", "skr_bps"), rows)

    if kind == "attenuation_profile":
        groups = _last_by(log, lambda r: r.extra_loss_db)
        rows = tuple(
            (
                extra,
                groups[extra].skr_bps,
                groups[extra].qber,
                groups[extra].status,
            )
            for extra in sorted(groups)
        )
        return Table(("extra_loss_db", "skr_bps", "qber", "status"), rows)

    # sop_timeline: keep only the transitions so bursts stand out.
    rows = []
    previous = None
    for row in log.rows:
        signature = (row.sop_rad_s, row.status)
        if signature != previous:
            rows.append((row.sim_time_s, row.sop_rad_s, row.skr_bps, row.status))
            previous = signature
    return Table(("sim_time_s", "sop_rad_s", "skr_bps", "status"), tuple(rows))
