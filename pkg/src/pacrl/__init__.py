"""PAC codes with list decoding and Q-learning rate-profile construction."""
__version__ = "0.1.0"

from .core import (  # noqa: F401
    POLAR, TABLE1, W_1011011, W_11010001001, CodeParams, PrecoderPolynomial, ProfileError,
    RateProfile, hex_to_profile, pac_encode, pac_encode_all, parse_profile, polar_transform,
    profile_to_hex, rm_profile, rm_score, rm_scores,
)
from .scl import DecodeResult, DecoderConfig, DecoderSession, decode  # noqa: F401
from .channel import ChannelConfig, SimConfig, SimResult, run_fer  # noqa: F401
from .profiler import (  # noqa: F401
    TrainConfig, extract_profile, rm_score_partition, run_episode, train,
)
