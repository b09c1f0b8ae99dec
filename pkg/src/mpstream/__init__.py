"""Multi-path systematic streaming code with in-order delivery delay analysis."""
from .analysis import (
    AnalysisDomainError,
    LossModel,
    RenewalMoments,
    build_loss_model,
    expected_delay_multipath,
    expected_delay_single,
    x_moments,
    x_pmf,
)
from .codec import CodedPacket, Decoder, Encoder, FeedbackMessage, InfoPacket
from .galois import GF, GF256
from .policy import CodingPolicy, PathSpec, interval_from_rate, is_admissible, max_coded_path_rate
from .sim import SimConfig, SimResult, run, sweep

__version__ = "0.1.0"
