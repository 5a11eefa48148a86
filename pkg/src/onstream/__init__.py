"""Adversarially-robust online importance sampling and its applications."""

from .sampling import (
    OnlineSumSampler,
    SamplerConfig,
    SamplerState,
    StepRecord,
    amplification_param,
)
from .game import (
    AdversaryStrategy,
    GameRound,
    GameTranscript,
    IllegalMoveError,
    STRATEGIES,
    TrialStats,
    audit_transcript,
    make_strategy,
    play_game,
    run_trials,
    transcript_to_csv,
)
from .errors import SizeLimitError
from .seeding import derive_seed
from . import embedding, experiments, hypergraph

__version__ = "0.1.0"

__all__ = [
    "OnlineSumSampler",
    "SamplerConfig",
    "SamplerState",
    "StepRecord",
    "amplification_param",
    "AdversaryStrategy",
    "GameRound",
    "GameTranscript",
    "IllegalMoveError",
    "STRATEGIES",
    "TrialStats",
    "audit_transcript",
    "make_strategy",
    "play_game",
    "run_trials",
    "transcript_to_csv",
    "SizeLimitError",
    "derive_seed",
    "embedding",
    "experiments",
    "hypergraph",
]
