"""Simulator and auditor for multi-party quantum private comparison built on
entanglement swapping of d-level cat states and Bell states."""

from mqpc.adversary import AttackKind, AttackStrategy, DetectionStats, estimate_detection_rate
from mqpc.errors import DomainError, MeasurementError, MQPCError, ProtocolError, SizeError
from mqpc.label_algebra import BellLabels, CatLabels, SwapOutcome, recover_kl, sequential_swaps, swap
from mqpc.protocol import (
    Engine,
    PartySecret,
    SessionConfig,
    SessionResult,
    SessionTranscript,
    Verdict,
    run_session,
)
from mqpc.qudit_state import Basis, StateVector

__version__ = "0.1.0"

__all__ = [
    "AttackKind",
    "AttackStrategy",
    "Basis",
    "BellLabels",
    "CatLabels",
    "DetectionStats",
    "DomainError",
    "Engine",
    "MQPCError",
    "MeasurementError",
    "PartySecret",
    "ProtocolError",
    "SessionConfig",
    "SessionResult",
    "SessionTranscript",
    "SizeError",
    "StateVector",
    "SwapOutcome",
    "Verdict",
    "estimate_detection_rate",
    "recover_kl",
    "run_session",
    "sequential_swaps",
    "swap",
]
