"""Multi-party private equality comparison over cat-state entanglement swapping.

A session runs TP and ``n`` parties through six steps:

0. each party prepares ``L`` Bell pairs Psi(0,0);
1. TP prepares ``L`` random (n+1)-particle cat states, sends particle ``i`` of
   each to party ``i`` behind decoys and privately tells her its labels;
2. decoy check on every outbound sequence;
3. party ``i`` turns one Bell pair into Psi(v, v) for her bit ``v``, Bell
   measures it against her cat particle and recovers (k, l);
4. the sums of all k and all l are published;
5. the cat particles come back behind the parties' own decoys, TP measures
   each cat and strips his own labels and the published sums, leaving the
   per-position digit sum S_V;
6. TP declares "all equal" iff every S_V is divisible by ``n``.

Two physics back ends share this orchestration: the symbolic label engine
and the dense state-vector oracle. Both draw measurement outcomes through
:func:`mqpc.qudit_state.sample_index` on the same random stream, so the same
seed gives identical transcripts.
"""

from __future__ import annotations

import enum
import json
from dataclasses import asdict, dataclass, field
from typing import Mapping, Sequence

import numpy as np

from mqpc.adversary import AttackStrategy, apply_attack
from mqpc.decoys import BASIS_CODES, insert_decoys, measure_decoys, strip_decoys, verify_decoys
from mqpc.errors import DomainError, ProtocolError
from mqpc.label_algebra import BellLabels, CatLabels, recover_kl, swap
from mqpc.oracle import swap_state
from mqpc.qudit_state import (
    StateVector,
    apply_generalized_pauli,
    make_bell,
    make_cat,
    measure_cat_basis,
    sample_index,
)

TP = "TP"
PUBLIC = "*"


def party(i: int) -> str:
    return f"P{i}"


class Engine(str, enum.Enum):
    SYMBOLIC = "symbolic"
    ORACLE = "oracle"


class SumMode(str, enum.Enum):
    """How the published k/l sums are formed."""

    MODULAR = "modular"
    INTEGER = "integer"


@dataclass(frozen=True)
class SessionConfig:
    d: int
    n: int
    L: int
    decoy_count: int | None = None
    strict_mode: bool = True
    seed: int = 0
    engine: Engine = Engine.SYMBOLIC
    digit_mode: bool = False
    sum_mode: SumMode = SumMode.MODULAR

    def __post_init__(self):
        object.__setattr__(self, "engine", Engine(self.engine))
        object.__setattr__(self, "sum_mode", SumMode(self.sum_mode))
        if self.d < 2:
            raise DomainError(f"d must be >= 2, got {self.d}")
        if self.n < 2:
            raise DomainError(f"n must be >= 2, got {self.n}")
        if self.L < 1:
            raise DomainError(f"L must be >= 1, got {self.L}")
        if self.decoy_count is not None and self.decoy_count < 0:
            raise DomainError(f"decoy_count must be >= 0, got {self.decoy_count}")
        if not 0 <= self.seed < 2**64:
            raise DomainError(f"seed must be a 64-bit unsigned integer, got {self.seed}")

    @property
    def decoys(self) -> int:
        return self.L if self.decoy_count is None else self.decoy_count

    @property
    def sound(self) -> bool:
        """Whether S_V in Z_d pins down the true digit sum (needs d >= n + 1)."""
        return self.d >= self.n + 1 and not self.digit_mode

    def to_dict(self) -> dict:
        out = asdict(self)
        out["engine"] = self.engine.value
        out["sum_mode"] = self.sum_mode.value
        return out


@dataclass(frozen=True)
class PartySecret:
    """Digits of one party's input, least significant first."""

    bits: tuple[int, ...]
    base: int = 2

    def __post_init__(self):
        bits = tuple(int(b) for b in self.bits)
        if any(not 0 <= b < self.base for b in bits):
            raise DomainError(f"secret digits must lie in [0, {self.base}), got {bits}")
        object.__setattr__(self, "bits", bits)

    @classmethod
    def from_int(cls, x: int, L: int, base: int = 2) -> "PartySecret":
        if not 0 <= x < base**L:
            raise DomainError(f"secret {x} does not fit in {L} base-{base} digits")
        return cls(tuple((x // base**j) % base for j in range(L)), base)

    @property
    def value(self) -> int:
        return sum(b * self.base**j for j, b in enumerate(self.bits))


@dataclass(frozen=True)
class Announcements:
    S_L: tuple[int, ...]
    S_K: tuple[int, ...]


@dataclass(frozen=True)
class TpComputation:
    measured_labels: tuple[tuple[int, ...], ...]
    S_C: tuple[int, ...]
    S_V: tuple[int, ...]


class Outcome(enum.Enum):
    ALL_EQUAL = 0
    NOT_ALL_EQUAL = 1
    ABORTED = 2


class AbortReason(enum.Enum):
    EAVESDROPPER_DETECTED = 1
    CONFIG_REJECTED = 2


@dataclass(frozen=True)
class Verdict:
    outcome: Outcome
    reason: AbortReason | None = None
    unsound: bool = False

    @property
    def all_equal(self) -> bool:
        return self.outcome is Outcome.ALL_EQUAL

    @property
    def aborted(self) -> bool:
        return self.outcome is Outcome.ABORTED

    def label(self) -> str:
        if self.aborted:
            return f"Aborted({self.reason.name})"
        text = "AllEqual" if self.all_equal else "NotAllEqual"
        return text + (" [unsound configuration]" if self.unsound else "")


# --- transcript -----------------------------------------------------------


@dataclass(frozen=True)
class Event:
    seq: int
    step: int
    actor: str
    event: str
    payload: dict
    audience: tuple[str, ...]

    def record(self) -> dict:
        return {
            "seq": self.seq,
            "step": self.step,
            "actor": self.actor,
            "event": self.event,
            "payload": self.payload,
        }


@dataclass
class SessionTranscript:
    seed: int
    config: dict
    events: list[Event] = field(default_factory=list)

    def add(self, step, actor, event, payload, audience=(PUBLIC,)) -> None:
        self.events.append(Event(len(self.events), step, actor, event, payload, tuple(audience)))

    def view(self, actor: str) -> list[Event]:
        """Events visible to ``actor``."""
        return [e for e in self.events if PUBLIC in e.audience or actor in e.audience]

    def header(self) -> dict:
        return {"seed": self.seed, "config": self.config}

    def to_lines(self) -> list[str]:
        dump = lambda obj: json.dumps(obj, separators=(",", ":"))  # noqa: E731
        return [dump(self.header())] + [dump(e.record()) for e in self.events]


# --- protocol steps -------------------------------------------------------


@dataclass(frozen=True)
class Preparation:
    cats: tuple[CatLabels, ...]
    sequences: tuple[tuple[int, ...], ...]
    announcements: dict[int, tuple[int, ...]]

    @property
    def u0(self) -> tuple[int, ...]:
        return tuple(c.phase_label for c in self.cats)


def tp_prepare(config: SessionConfig, rng: np.random.Generator) -> Preparation:
    """Draw the L cat states and split them into per-party sequences.

    Sequence ``S_i`` lists the positions ``j`` of the cat particles party ``i``
    receives; ``announcements[i]`` is the label list (u_i^1..u_i^L) TP tells
    party ``i`` privately.
    """
    if config.strict_mode and config.d < config.n + 1:
        raise DomainError(f"strict mode requires d >= n + 1 (d={config.d}, n={config.n})")
    labels = rng.integers(0, config.d, size=(config.L, config.n + 1))
    cats = tuple(CatLabels.from_labels(config.d, [int(x) for x in row]) for row in labels)
    sequences = tuple(tuple(range(config.L)) for _ in range(config.n))
    announcements = {
        i: tuple(int(labels[j, i]) for j in range(config.L)) for i in range(1, config.n + 1)
    }
    return Preparation(cats, sequences, announcements)


def encode_bell(d: int, v: int, engine: Engine):
    """Psi(v, v) obtained as (I ⊗ U_(v,v)) Psi(0,0)."""
    if engine is Engine.ORACLE:
        return apply_generalized_pauli(make_bell(d, 0, 0), 1, v, v)
    # U_(a,b) on the second particle of Psi(0,0) relabels it to Psi(a,b)
    return BellLabels(d, v, v)


@dataclass(frozen=True)
class PartySwap:
    k: int
    l: int  # noqa: E741
    measured: BellLabels


def party_encode_and_swap(
    cat,
    i: int,
    v: int,
    u_i: int,
    rng: np.random.Generator | None = None,
    *,
    outcome: tuple[int, int] | None = None,
    digit_mode: bool = False,
):
    """Party ``i`` encodes bit ``v`` and swaps it into her cat particle.

    ``cat`` is the physical cat state, either :class:`CatLabels` (symbolic)
    or a :class:`StateVector` (oracle); party ``i`` holds particle ``i + 1``.
    Returns ``(PartySwap, new_cat)``. A forced ``outcome`` is the (k, l)
    pair; otherwise the Bell measurement is sampled from ``rng``.
    """
    d = cat.d
    if not 0 <= v < (d if digit_mode else 2):
        raise DomainError(f"secret digit {v!r} out of range")
    m = i + 1
    if isinstance(cat, StateVector):
        bell = encode_bell(d, v, Engine.ORACLE)
        forced = None if outcome is None else ((v - outcome[0]) % d, (u_i - outcome[1]) % d)
        (p, q), new_cat = swap_state(cat, bell, m, rng=rng, outcome=forced)
        measured = BellLabels(d, p, q)
    else:
        bell = encode_bell(d, v, Engine.SYMBOLIC)
        if outcome is None:
            p, q = divmod(sample_index(np.full(d * d, 1.0 / (d * d)), rng), d)
            outcome = recover_kl(BellLabels(d, p, q), v, u_i)
        res = swap(cat, bell, m, outcome)
        measured, new_cat = res.measured, res.new_cat
    k, l = recover_kl(measured, v, u_i)  # noqa: E741
    return PartySwap(k, l, measured), new_cat


def aggregate_announcements(
    reports: Mapping[int, Sequence[tuple[int, int]]], n: int, modulus: int | None = None
) -> Announcements:
    """Sum every party's (k, l) per position.

    ``reports[i][j]`` is party ``i``'s pair for position ``j``. With a
    ``modulus`` the sums are reduced mod it; otherwise they are plain
    integer sums of the canonical residues.
    """
    missing = [i for i in range(1, n + 1) if i not in reports]
    if missing:
        raise ProtocolError(f"no report from parties {missing}")
    lengths = {len(reports[i]) for i in range(1, n + 1)}
    if len(lengths) != 1:
        raise ProtocolError("parties reported different numbers of positions")
    L = lengths.pop()
    s_k = [sum(reports[i][j][0] for i in range(1, n + 1)) for j in range(L)]
    s_l = [sum(reports[i][j][1] for i in range(1, n + 1)) for j in range(L)]
    if modulus is not None:
        s_k = [x % modulus for x in s_k]
        s_l = [x % modulus for x in s_l]
    return Announcements(tuple(s_l), tuple(s_k))


def tp_finalize(
    cats: Sequence,
    u0: Sequence[int],
    ann: Announcements,
    rng: np.random.Generator | None = None,
) -> TpComputation:
    """Measure each returned cat and strip u0, S_L and S_K from the label sum."""
    labels = []
    for cat in cats:
        if isinstance(cat, StateVector):
            got, _ = measure_cat_basis(cat, range(cat.q), rng)
        else:
            got = cat.labels
        labels.append(tuple(got))
    d = cats[0].d
    s_c = tuple(sum(x) % d for x in labels)
    s_v = tuple((c - u - sl - sk) % d for c, u, sl, sk in zip(s_c, u0, ann.S_L, ann.S_K))
    return TpComputation(tuple(labels), s_c, s_v)


def decide_verdict(tp: TpComputation, n: int, unsound: bool = False) -> Verdict:
    if all(s % n == 0 for s in tp.S_V):
        return Verdict(Outcome.ALL_EQUAL, unsound=unsound)
    return Verdict(Outcome.NOT_ALL_EQUAL, unsound=unsound)


# --- full session ---------------------------------------------------------


@dataclass
class SessionResult:
    config: SessionConfig
    transcript: SessionTranscript
    verdict: Verdict
    tp: TpComputation | None = None
    aborted_at: int | None = None
    detection_events: list[dict] = field(default_factory=list)
    particles_created: int = 0

    def __iter__(self):
        # allows ``transcript, verdict = run_session(...)``
        return iter((self.transcript, self.verdict))

    def summary(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "verdict": self.verdict.label(),
            "S_V": None if self.tp is None else list(self.tp.S_V),
            "aborted_at": self.aborted_at,
            "detection_events": self.detection_events,
            "particles_created": self.particles_created,
        }


class _Streams:
    """Independent RNG streams so one concern never shifts another."""

    def __init__(self, seed: int):
        prep, decoy, channel, swaps, receiver = (
            np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(5)
        )
        self.prep, self.decoy, self.channel, self.swaps, self.receiver = (
            prep, decoy, channel, swaps, receiver,
        )


def _transmit(config, payload, attack, cats, qudit, streams):
    """Send one sequence through the channel behind fresh decoys.

    Returns ``(passed, mismatches, record, results)``; the attacker touches
    every slot. Payload slots are only disturbed under the oracle engine,
    where they are real qudits of the cat states in ``cats``.
    """
    protected, record = insert_decoys(payload, config.decoys, config.d, streams.decoy)
    if attack is not None and attack.active:
        decoy_slots = {x.position for x in record}
        for pos, slot in enumerate(protected):
            if pos in decoy_slots:
                protected[pos] = apply_attack(attack, slot, streams.channel)
            elif config.engine is Engine.ORACLE:
                cats[slot] = apply_attack(attack, cats[slot], streams.channel, qudit)
    results = measure_decoys(
        protected, [x.position for x in record], [x.basis for x in record], streams.receiver
    )
    mismatches = sum(int(r != x.value) for r, x in zip(results, record))
    passed = verify_decoys(protected, record, results)
    return passed, mismatches, record, results, strip_decoys(protected, record)


def run_session(
    config: SessionConfig,
    secrets: Sequence[PartySecret],
    attack: AttackStrategy | None = None,
    forced_outcomes: Mapping[tuple[int, int], tuple[int, int]] | None = None,
) -> SessionResult:
    """Execute one full comparison session.

    ``forced_outcomes[(i, j)]`` pins party ``i``'s swap outcome (k, l) at
    position ``j`` (0-based); unlisted swaps are sampled. Under the symbolic
    engine an attack only disturbs decoys, since label states cannot carry a
    partially measured cat; the oracle engine disturbs the payload too.
    """
    d, n, L = config.d, config.n, config.L
    if len(secrets) != n:
        raise DomainError(f"expected {n} secrets, got {len(secrets)}")
    base = d if config.digit_mode else 2
    for s in secrets:
        if len(s.bits) != L:
            raise DomainError(f"every secret needs {L} digits, got {len(s.bits)}")
        if any(b >= base for b in s.bits):
            raise DomainError(f"secret digits must lie in [0, {base})")

    transcript = SessionTranscript(config.seed, config.to_dict())
    result = SessionResult(config, transcript, Verdict(Outcome.ABORTED, AbortReason.CONFIG_REJECTED))
    if config.strict_mode and d < n + 1:
        return result
    streams = _Streams(config.seed)
    forced_outcomes = forced_outcomes or {}

    for i in range(1, n + 1):
        transcript.add(0, party(i), "prepare", {"bell_pairs": L}, [party(i)])
    result.particles_created += 2 * n * L

    prep = tp_prepare(config, streams.prep)
    result.particles_created += (n + 1) * L
    transcript.add(1, TP, "prepare", {"labels": [list(c.labels) for c in prep.cats]}, [TP])
    if config.engine is Engine.ORACLE:
        cats = [make_cat(d, c.labels) for c in prep.cats]
    else:
        cats = list(prep.cats)
    for i in range(1, n + 1):
        transcript.add(
            1, TP, "announce-labels", {"party": i, "labels": list(prep.announcements[i])},
            [TP, party(i)],
        )

    def check(step, sender, receiver, i):
        passed, mismatches, record, results, _ = _transmit(
            config, list(prep.sequences[i - 1]), attack, cats, i, streams
        )
        check_step = 2 if step == 1 else 5
        transcript.add(step, sender, "send", {"party": i, "length": L + len(record)})
        transcript.add(
            check_step, sender, "decoy-check",
            {
                "party": i,
                "positions": [x.position for x in record],
                "bases": [BASIS_CODES[x.basis] for x in record],
                "results": results,
                "mismatches": mismatches,
                "passed": int(passed),
            },
            [TP, party(i)],
        )
        if mismatches:
            result.detection_events.append({"step": check_step, "party": i, "mismatches": mismatches})
        return passed

    def abort(step):
        result.verdict = Verdict(Outcome.ABORTED, AbortReason.EAVESDROPPER_DETECTED)
        result.aborted_at = step
        transcript.add(6, TP, "verdict", {"outcome": 2, "reason": 1, "unsound": 0})
        return result

    # steps 1-2: outbound transmissions and their checks
    for i in range(1, n + 1):
        if not check(1, TP, party(i), i):
            return abort(2)

    # step 3: encoding and swapping, ascending party index
    reports: dict[int, list[tuple[int, int]]] = {i: [] for i in range(1, n + 1)}
    for i in range(1, n + 1):
        for j in range(L):
            v = secrets[i - 1].bits[j]
            u_i = prep.announcements[i][j]
            sw, cats[j] = party_encode_and_swap(
                cats[j], i, v, u_i, streams.swaps,
                outcome=forced_outcomes.get((i, j)), digit_mode=config.digit_mode,
            )
            reports[i].append((sw.k, sw.l))
            transcript.add(
                3, party(i), "swap",
                {"j": j, "v": v, "measured": [sw.measured.u, sw.measured.v], "k": sw.k, "l": sw.l},
                [party(i)],
            )

    # step 4: published sums
    modulus = d if config.sum_mode is SumMode.MODULAR else None
    ann = aggregate_announcements(reports, n, modulus)
    transcript.add(4, "parties", "announce-sums", {"S_L": list(ann.S_L), "S_K": list(ann.S_K)})

    # step 5: return transmissions, checked with the parties' own decoys
    for i in range(1, n + 1):
        if not check(5, party(i), TP, i):
            return abort(5)
    tp = tp_finalize(cats, prep.u0, ann, streams.swaps)
    result.tp = tp
    transcript.add(
        5, TP, "tp-measure",
        {"labels": [list(x) for x in tp.measured_labels], "S_C": list(tp.S_C), "S_V": list(tp.S_V)},
        [TP],
    )

    # step 6
    verdict = decide_verdict(tp, n, unsound=not config.sound)
    result.verdict = verdict
    transcript.add(
        6, TP, "verdict",
        {"outcome": verdict.outcome.value, "reason": 0, "unsound": int(verdict.unsound)},
    )
    return result


def all_equal(secrets: Sequence[PartySecret]) -> bool:
    """Ground truth the protocol is meant to compute."""
    return len({s.bits for s in secrets}) == 1
