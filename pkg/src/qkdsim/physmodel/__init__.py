"""Parametric physical-layer link model and its calibration routine."""

from qkdsim.physmodel.types import (
    ChannelPlan,
    ClassicalChannel,
    FiberSpan,
    QkdModelParams,
    SopState,
    params_from_text,
    params_to_text,
)
from qkdsim.physmodel.model import (
    binary_entropy,
    detected_signal_rate,
    link_loss_db,
    noise_rate,
    qber,
    raman_noise_rate,
    skr,
    sop_factor,
    total_launch_power_mw,
)
from qkdsim.physmodel.calibrate import (
    QberAnchor,
    SkrAnchor,
    calibrate,
    parse_anchors_file,
    uniform_plan,
)

__all__ = [
    "ChannelPlan",
    "ClassicalChannel",
    "FiberSpan",
    "QkdModelParams",
    "SopState",
    "params_from_text",
    "params_to_text",
    "binary_entropy",
    "detected_signal_rate",
    "link_loss_db",
    "noise_rate",
    "qber",
    "raman_noise_rate",
    "skr",
    "sop_factor",
    "total_launch_power_mw",
    "QberAnchor",
    "SkrAnchor",
    "calibrate",
    "parse_anchors_file",
    "uniform_plan",
]
