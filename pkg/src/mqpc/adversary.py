"""Channel attacks on in-flight qudits and their detection statistics."""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass

import numpy as np
from scipy.stats import binomtest

from mqpc.decoys import insert_decoys, measure_decoys
from mqpc.errors import DomainError
from mqpc.qudit_state import Basis, StateVector, basis_vector, measure_single_qudit


class AttackKind(enum.Enum):
    NONE = "none"
    INTERCEPT_RESEND = "intercept-resend"
    MEASURE_RESEND = "measure-resend"


@dataclass(frozen=True)
class AttackStrategy:
    """An eavesdropper on the quantum channel.

    The attacker picks V1 or V2 uniformly and independently for every qudit
    it touches. Subclasses may override :meth:`intercept` to plug in other
    strategies.
    """

    kind: AttackKind = AttackKind.NONE

    @property
    def active(self) -> bool:
        return self.kind is not AttackKind.NONE

    def intercept(self, state: StateVector, qudit: int, rng: np.random.Generator) -> StateVector:
        if self.kind is AttackKind.NONE:
            return state
        basis = Basis.V2 if rng.integers(0, 2) else Basis.V1
        value, collapsed = measure_single_qudit(state, qudit, basis, rng)
        if self.kind is AttackKind.MEASURE_RESEND and state.q == 1:
            # a freshly prepared eigenstate; same channel effect as the collapse
            return basis_vector(state.d, basis, value)
        return collapsed


NO_ATTACK = AttackStrategy()


def apply_attack(
    strategy: AttackStrategy | None, state: StateVector, rng: np.random.Generator, qudit: int = 0
) -> StateVector:
    """Let ``strategy`` act on qudit ``qudit`` of an in-flight state."""
    if strategy is None:
        return state
    return strategy.intercept(state, qudit, rng)


def expected_detection_rate(d: int, strategy: AttackStrategy | None) -> float:
    """Per-decoy mismatch probability: wrong basis (1/2) times disturbance (1 - 1/d)."""
    if strategy is None or not strategy.active:
        return 0.0
    return (d - 1) / (2 * d)


def enumerate_detection_rate(d: int) -> float:
    """Exact per-decoy detection probability of a uniform-basis intercept-resend.

    Sums over sender basis/value, attacker basis, attacker outcome and
    receiver outcome, with every transition probability taken from state
    overlaps.
    """
    total = 0.0
    bases = (Basis.V1, Basis.V2)
    for sb, x, ab in itertools.product(bases, range(d), bases):
        sent = basis_vector(d, sb, x)
        for y in range(d):
            relay = basis_vector(d, ab, y)
            p_y = abs(relay.inner(sent)) ** 2
            for z in range(d):
                if z == x:
                    continue
                p_z = abs(basis_vector(d, sb, z).inner(relay)) ** 2
                total += p_y * p_z / (2 * d * 2)
    return total


@dataclass(frozen=True)
class DetectionStats:
    decoys_checked: int
    mismatches: int
    rate: float
    wilson_interval: tuple[float, float]


def estimate_detection_rate(
    config, strategy: AttackStrategy | None, trials: int, rng: np.random.Generator | None = None
) -> DetectionStats:
    """Run the decoy check ``trials`` times under ``strategy``.

    Each trial sends ``max(config.decoys, 1)`` decoys through the attacked
    channel; the receiver measures them in the announced bases.
    """
    if trials < 1:
        raise DomainError(f"trials must be >= 1, got {trials}")
    if rng is None:
        rng = np.random.default_rng(config.seed)
    d = config.d
    per_trial = max(config.decoys, 1)
    checked = mismatches = 0
    for _ in range(trials):
        protected, record = insert_decoys([], per_trial, d, rng)
        protected = [apply_attack(strategy, q, rng) for q in protected]
        results = measure_decoys(
            protected, [x.position for x in record], [x.basis for x in record], rng
        )
        checked += len(record)
        mismatches += sum(int(r != x.value) for r, x in zip(results, record))
    ci = binomtest(mismatches, checked).proportion_ci(confidence_level=0.95, method="wilson")
    return DetectionStats(checked, mismatches, mismatches / checked, (float(ci.low), float(ci.high)))


def attack_report(config, strategy: AttackStrategy | None, trials: int) -> dict:
    stats = estimate_detection_rate(config, strategy, trials)
    return {
        "strategy": (strategy or NO_ATTACK).kind.value,
        "d": config.d,
        "trials": trials,
        "decoys_checked": stats.decoys_checked,
        "rate": stats.rate,
        "interval": list(stats.wilson_interval),
        "expected": expected_detection_rate(config.d, strategy),
    }
