"""Pure link-model functions: loss, noise, QBER, secure key rate.

Everything here is a stateless function over the value types in
qkdsim.physmodel.types, safe to call from any thread.
"""

from __future__ import annotations

import math
from typing import Literal

from qkdsim.errors import DomainError
from qkdsim.physmodel.types import (
    CALM_SOP,
    ChannelPlan,
    FiberSpan,
    QkdModelParams,
    SopState,
)

Band = Literal["O", "C"]

# Sustained polarization activity at or above this rate stops key generation.
SOP_HALT_RAD_S = 50.0
# Bursts shorter than this survive; sub-millisecond transients never gate.
SOP_HOLD_TIME_S = 1.0


def binary_entropy(x: float) -> float:
    """Shannon entropy of a binary variable, in bits, with 0*log0 = 0."""
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"binary_entropy argument must be in [0, 1], got {x}")
    if x == 0.0 or x == 1.0:
        return 0.0
    return -x * math.log2(x) - (1.0 - x) * math.log2(1.0 - x)


def link_loss_db(span: FiberSpan, band: Band) -> float:
    """Total loss of the span in the given band, dB.

    Inserted attenuation targets the quantum wavelength, so it counts in
    the O band only.
    """
    if band == "O":
        return span.alpha_o_db_per_km * span.length_km + span.extra_loss_db
    if band == "C":
        return span.alpha_c_db_per_km * span.length_km
    raise DomainError(f"band must be 'O' or 'C', got {band!r}")


def total_launch_power_mw(plan: ChannelPlan) -> float:
    """Aggregate classical launch power in mW; 0 for a quantum-only fiber."""
    return sum(10.0 ** (ch.power_dbm / 10.0) for ch in plan.channels)


def raman_noise_rate(
    plan: ChannelPlan, span: FiberSpan, params: QkdModelParams
) -> float:
    """Crosstalk count rate from the data channels, counts/s.

    Forward-scatter single-pass approximation: linear in aggregate launch
    power and in span length, with the scattered light attenuated at the
    O-band coefficient on its way to the receiver.
    """
    power_mw = total_launch_power_mw(plan)
    transit = 10.0 ** (-(span.alpha_o_db_per_km * span.length_km) / 10.0)
    return params.raman_cps_per_mw_km * power_mw * span.length_km * transit


def detected_signal_rate(span: FiberSpan, params: QkdModelParams) -> float:
    """Detected quantum-signal count rate after span loss, counts/s."""
    return params.s0_cps * 10.0 ** (-link_loss_db(span, "O") / 10.0)


def noise_rate(plan: ChannelPlan, span: FiberSpan, params: QkdModelParams) -> float:
    """Total background count rate: detector floor plus crosstalk."""
    return params.dark_cps + raman_noise_rate(plan, span, params)


def qber(signal_cps: float, noise_cps: float, e_det: float) -> float:
    """Quantum bit error rate of the sifted stream.

    Signal photons err at the intrinsic rate e_det; background counts are
    uncorrelated with the basis choice, so half of them err.
    """
    if signal_cps < 0 or noise_cps < 0:
        raise DomainError("count rates must be >= 0")
    total = signal_cps + noise_cps
    if total == 0:
        raise DomainError("QBER is undefined with zero signal and zero noise")
    return (e_det * signal_cps + 0.5 * noise_cps) / total


def sop_factor(
    sop: SopState,
    halt_rad_s: float = SOP_HALT_RAD_S,
    hold_time_s: float = SOP_HOLD_TIME_S,
) -> int:
    """Binary polarization gate: 0 stops key generation, 1 leaves it alive.

    Only sustained activity gates; a fast transient shorter than the hold
    time passes.
    """
    if sop.angular_velocity_rad_s >= halt_rad_s and sop.duration_s >= hold_time_s:
        return 0
    return 1


def secure_fraction(e: float, params: QkdModelParams) -> float:
    """Fraction of sifted bits surviving correction and amplification."""
    if e >= params.qber_abort:
        return 0.0
    h = binary_entropy(e)
    return max(0.0, 1.0 - params.f_ec * h - h)


def skr(
    plan: ChannelPlan,
    span: FiberSpan,
    sop: SopState,
    params: QkdModelParams,
) -> float:
    """Secure key rate in bits/s; 0 when aborted or gated, never negative."""
    gate = sop_factor(sop)
    if gate == 0:
        return 0.0
    s = detected_signal_rate(span, params)
    n = noise_rate(plan, span, params)
    if s + n == 0:
        return 0.0
    e = qber(s, n, params.e_det)
    return gate * params.q_sift * s * secure_fraction(e, params)


def link_observables(
    plan: ChannelPlan,
    span: FiberSpan,
    params: QkdModelParams,
    sop: SopState = CALM_SOP,
) -> tuple[float, float]:
    """Convenience pair (qber, skr_bps) for one configuration."""
    s = detected_signal_rate(span, params)
    n = noise_rate(plan, span, params)
    e = qber(s, n, params.e_det)
    return e, skr(plan, span, sop, params)
