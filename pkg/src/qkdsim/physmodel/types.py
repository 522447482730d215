"""Value types for the physical-layer link model.

All types are immutable; validation happens at construction so downstream
code can assume the invariants hold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields

from qkdsim.errors import ValidationError

# Transmission windows used for wavelength validation, nm.
C_BAND_NM = (1528.0, 1570.0)
O_BAND_NM = (1260.0, 1360.0)

# Launch powers outside this range void the linear-crosstalk assumption.
POWER_RANGE_DBM = (-10.0, 5.0)

PARAMS_FORMAT = "qkdsim-params/1"


def _require_finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise ValidationError(f"{name} must be finite, got {value!r}")
    return value


@dataclass(frozen=True)
class FiberSpan:
    """One fiber span carrying both the data channels and the quantum channel.

    extra_loss_db models deliberately inserted attenuation; it applies to the
    quantum (O-band) path only, matching a variable attenuator tuned to the
    quantum wavelength.
    """

    length_km: float
    alpha_c_db_per_km: float = 0.18
    alpha_o_db_per_km: float = 0.32
    extra_loss_db: float = 0.0

    def __post_init__(self) -> None:
        for f in fields(self):
            _require_finite(f.name, getattr(self, f.name))
        if self.length_km < 0:
            raise ValidationError(f"length_km must be >= 0, got {self.length_km}")
        if self.alpha_c_db_per_km <= 0 or self.alpha_o_db_per_km <= 0:
            raise ValidationError("attenuation coefficients must be > 0")
        if self.extra_loss_db < 0:
            raise ValidationError(f"extra_loss_db must be >= 0, got {self.extra_loss_db}")


@dataclass(frozen=True)
class ClassicalChannel:
    """A single C-band data channel described by its launch conditions."""

    wavelength_nm: float
    power_dbm: float
    rate_gbps: float = 100.0
    label: str = ""

    def __post_init__(self) -> None:
        _require_finite("wavelength_nm", self.wavelength_nm)
        _require_finite("power_dbm", self.power_dbm)
        _require_finite("rate_gbps", self.rate_gbps)
        lo, hi = POWER_RANGE_DBM
        if not lo <= self.power_dbm <= hi:
            raise ValidationError(
                f"power_dbm {self.power_dbm} outside model validity range [{lo}, {hi}]"
            )
        if self.rate_gbps < 0:
            raise ValidationError(f"rate_gbps must be >= 0, got {self.rate_gbps}")


@dataclass(frozen=True)
class ChannelPlan:
    """The DWDM lineup plus the quantum-channel wavelength.

    Data channels must sit in the C band and the quantum channel in the
    O band; the spectral gap is what makes the crosstalk model additive.
    """

    channels: tuple[ClassicalChannel, ...] = ()
    quantum_wavelength_nm: float = 1312.73

    def __post_init__(self) -> None:
        object.__setattr__(self, "channels", tuple(self.channels))
        _require_finite("quantum_wavelength_nm", self.quantum_wavelength_nm)
        c_lo, c_hi = C_BAND_NM
        o_lo, o_hi = O_BAND_NM
        if not o_lo <= self.quantum_wavelength_nm <= o_hi:
            raise ValidationError(
                f"quantum wavelength {self.quantum_wavelength_nm} nm outside "
                f"O band [{o_lo}, {o_hi}]"
            )
        seen: set[float] = set()
        for ch in self.channels:
            if not isinstance(ch, ClassicalChannel):
                raise ValidationError("channels must be ClassicalChannel instances")
            if not c_lo <= ch.wavelength_nm <= c_hi:
                raise ValidationError(
                    f"channel wavelength {ch.wavelength_nm} nm outside "
                    f"C band [{c_lo}, {c_hi}]"
                )
            if ch.wavelength_nm in seen:
                raise ValidationError(f"duplicate wavelength {ch.wavelength_nm} nm")
            seen.add(ch.wavelength_nm)

    def with_channel(self, channel: ClassicalChannel) -> "ChannelPlan":
        return ChannelPlan(self.channels + (channel,), self.quantum_wavelength_nm)


@dataclass(frozen=True)
class SopState:
    """Polarization activity: Stokes-space angular velocity and how long it lasts."""

    angular_velocity_rad_s: float = 0.0
    duration_s: float = 0.0

    def __post_init__(self) -> None:
        _require_finite("angular_velocity_rad_s", self.angular_velocity_rad_s)
        _require_finite("duration_s", self.duration_s)
        if self.angular_velocity_rad_s < 0 or self.duration_s < 0:
            raise ValidationError("SOP velocity and duration must be >= 0")


CALM_SOP = SopState(0.0, 0.0)


@dataclass(frozen=True)
class QkdModelParams:
    """Calibratable constants of the link model.

    s0_cps is the detected-signal scale at 0 dB quantum-channel loss;
    dark_cps the detector noise floor; raman_cps_per_mw_km the crosstalk
    coefficient; e_det the intrinsic misalignment error; f_ec the
    error-correction inefficiency; q_sift the sifting fraction; qber_abort
    the hard abort threshold above which no key is distilled.
    """

    s0_cps: float
    dark_cps: float
    raman_cps_per_mw_km: float
    e_det: float
    f_ec: float
    q_sift: float = 0.5
    qber_abort: float = 0.11

    def __post_init__(self) -> None:
        for f in fields(self):
            value = _require_finite(f.name, getattr(self, f.name))
            if value < 0:
                raise ValidationError(f"{f.name} must be >= 0, got {value}")
        if not 0 < self.q_sift <= 1:
            raise ValidationError(f"q_sift must be in (0, 1], got {self.q_sift}")
        if not 0 < self.qber_abort < 0.5:
            raise ValidationError(
                f"qber_abort must be in (0, 0.5), got {self.qber_abort}"
            )
        if self.e_det >= self.qber_abort:
            raise ValidationError(
                f"e_det {self.e_det} must be below qber_abort {self.qber_abort}"
            )
        if self.f_ec < 1:
            raise ValidationError(f"f_ec must be >= 1, got {self.f_ec}")


_PARAM_FIELDS = (
    "s0_cps",
    "dark_cps",
    "raman_cps_per_mw_km",
    "e_det",
    "f_ec",
    "q_sift",
    "qber_abort",
)


def params_to_text(params: QkdModelParams) -> str:
    """Serialize params to the versioned key-value text format."""
    lines = [f"format: {PARAMS_FORMAT}"]
    for name in _PARAM_FIELDS:
        lines.append(f"{name}: {getattr(params, name)!r}")
    return "\n".join(lines) + "\n"


def params_from_text(text: str) -> QkdModelParams:
    """Parse the key-value text format produced by params_to_text.

    Lines starting with '#' and blank lines are ignored.  The first
    meaningful line must declare a supported format version.
    """
    values: dict[str, float] = {}
    format_seen = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if ":" not in line:
            raise ValidationError(f"params line {lineno}: expected 'key: value'")
        key, _, value = line.partition(":")
        key = key.strip()
        value = value.strip()
        if not format_seen:
            if key != "format" or value != PARAMS_FORMAT:
                raise ValidationError(
                    f"params line {lineno}: expected 'format: {PARAMS_FORMAT}'"
                )
            format_seen = True
            continue
        if key not in _PARAM_FIELDS:
            raise ValidationError(f"params line {lineno}: unknown field {key!r}")
        try:
            values[key] = float(value)
        except ValueError as exc:
            raise ValidationError(f"params line {lineno}: bad number {value!r}") from exc
    if not format_seen:
        raise ValidationError("params text is empty or missing its format line")
    missing = [name for name in _PARAM_FIELDS if name not in values]
    if missing:
        raise ValidationError(f"params text missing fields: {', '.join(missing)}")
    return QkdModelParams(**values)
