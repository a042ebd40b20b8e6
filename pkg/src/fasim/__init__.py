"""Link-level simulator and analysis toolkit for fluid-antenna index
modulation over spatially correlated MIMO channels."""

from .analysis import (
    AbepResult,
    PairwiseEvent,
    abep_bound,
    cpep,
    cpep_approx,
    mgf,
    pairwise_events,
    upep,
)
from .channel import (
    ChannelRealization,
    CorrelationMatrix,
    SpectralFactor,
    build_correlation_matrix,
    spatial_correlation,
    spectral_decompose,
    synthesize_channel,
)
from .config import (
    CompareConfig,
    CurveSpec,
    RunConfig,
    load_compare_config,
    load_run_config,
)
from .detection import (
    DetectionResult,
    NoiseSpec,
    ReceivedSignal,
    faps_select_ports,
    ml_detect,
    transmit,
)
from .errors import ConfigError, EnumerationCapError, PsdViolationError
from .geometry import (
    GroupingSpec,
    PortLayout,
    SurfaceSpec,
    global_label,
    group_label,
    port_label_in_group,
    port_position,
    split_global_label,
)
from .modulation import (
    Codebook,
    Constellation,
    SchemeConfig,
    TransmitVector,
    build_codebook,
    faim_encode,
    fagim_encode,
    faps_encode,
    rate_fagim,
    rate_faim,
    rate_faps,
)
from .simulate import BerCurve, BerPoint, GainRow, run_ber, run_comparison, snr_at_ber

__version__ = "0.1.0"

__all__ = [
    "AbepResult",
    "BerCurve",
    "BerPoint",
    "ChannelRealization",
    "Codebook",
    "CompareConfig",
    "ConfigError",
    "Constellation",
    "CorrelationMatrix",
    "CurveSpec",
    "DetectionResult",
    "EnumerationCapError",
    "GainRow",
    "GroupingSpec",
    "NoiseSpec",
    "PairwiseEvent",
    "PortLayout",
    "PsdViolationError",
    "ReceivedSignal",
    "RunConfig",
    "SchemeConfig",
    "SpectralFactor",
    "SurfaceSpec",
    "TransmitVector",
    "abep_bound",
    "build_codebook",
    "build_correlation_matrix",
    "cpep",
    "cpep_approx",
    "faim_encode",
    "fagim_encode",
    "faps_encode",
    "faps_select_ports",
    "global_label",
    "group_label",
    "load_compare_config",
    "load_run_config",
    "mgf",
    "ml_detect",
    "pairwise_events",
    "port_label_in_group",
    "port_position",
    "rate_fagim",
    "rate_faim",
    "rate_faps",
    "run_ber",
    "run_comparison",
    "snr_at_ber",
    "spatial_correlation",
    "spectral_decompose",
    "split_global_label",
    "synthesize_channel",
    "transmit",
    "upep",
]
