"""Exhaustive desk-scale audits: verdict soundness, TP leakage, collusion, efficiency.

Every distribution here is computed exactly by enumerating all secrets and
all swap outcomes, with integer counts standing in for probabilities. Swap
randomness is independent across positions j, so per-position distributions
are computed once and composed.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from mqpc.errors import DomainError, SizeError
from mqpc.label_algebra import BellLabels, CatLabels, sequential_swaps, swap
from mqpc.protocol import (
    Engine,
    PartySecret,
    SessionConfig,
    SumMode,
    aggregate_announcements,
    all_equal,
    run_session,
)

MAX_SOUNDNESS_BITS = 20
MAX_LEAKAGE_BITS = 16
MAX_SUPPORT = 2_000_000


def _secret_tuples(n: int, L: int) -> Iterable[tuple[int, ...]]:
    return itertools.product(range(2**L), repeat=n)


def _bit_column(secrets: Sequence[int], j: int) -> tuple[int, ...]:
    return tuple((x >> j) & 1 for x in secrets)


# --- soundness ------------------------------------------------------------


@dataclass
class SoundnessReport:
    d: int
    n: int
    L: int
    false_equal_cases: list[tuple[int, ...]] = field(default_factory=list)
    false_unequal_cases: list[tuple[int, ...]] = field(default_factory=list)
    sessions: int = 0

    @property
    def sound(self) -> bool:
        return not self.false_equal_cases and not self.false_unequal_cases

    def to_record(self) -> dict:
        return {
            "report": "soundness",
            "d": self.d,
            "n": self.n,
            "L": self.L,
            "sessions": self.sessions,
            "false_equal_cases": [list(c) for c in self.false_equal_cases],
            "false_unequal_cases": [list(c) for c in self.false_unequal_cases],
        }


def soundness_scan(d: int, n: int, L: int, engine: Engine | str = Engine.SYMBOLIC, seed: int = 0) -> SoundnessReport:
    """Run one honest session per secret tuple and compare with the truth.

    Verdict arithmetic is the protocol's own (S_V in Z_d, then mod n), so
    configurations with d <= n expose their misclassifications here.
    """
    if n * L > MAX_SOUNDNESS_BITS:
        raise SizeError(f"2^{n * L} secret tuples exceeds the 2^{MAX_SOUNDNESS_BITS} limit")
    report = SoundnessReport(d, n, L)
    for index, xs in enumerate(_secret_tuples(n, L)):
        config = SessionConfig(
            d, n, L, decoy_count=0, strict_mode=False, seed=(seed + index) % 2**64, engine=engine
        )
        secrets = [PartySecret.from_int(x, L) for x in xs]
        verdict = run_session(config, secrets).verdict
        truth = all_equal(secrets)
        if verdict.all_equal and not truth:
            report.false_equal_cases.append(xs)
        elif truth and not verdict.all_equal:
            report.false_unequal_cases.append(xs)
        report.sessions += 1
    return report


# --- TP view leakage -------------------------------------------------------


def _entropy(counts: Iterable[int]) -> float:
    # pool equal probabilities first so the float sum has few terms
    counts = Counter(c for c in counts if c)
    total = sum(c * times for c, times in counts.items())
    return -math.fsum(
        Fraction(c * times, total) * math.log2(Fraction(c, total)) for c, times in counts.items()
    )


def _mutual_information(dists: dict) -> float:
    """I(column; view) in bits, uniform prior over the columns of ``dists``."""
    # I = sum p(v, x) log2 p(x|v) / p(x); pool terms by their exact ratio
    totals = {v: sum(dist.values()) for v, dist in dists.items()}
    mass: dict[Fraction, Fraction] = defaultdict(Fraction)
    for v, dist in dists.items():
        for view, c in dist.items():
            p_x_given_v = Fraction(c, totals[v])
            p_x = sum(Fraction(dists[w][view], totals[w]) for w in dists) / len(dists)
            mass[p_x_given_v / p_x] += p_x_given_v / len(dists)
    return math.fsum(float(m) * math.log2(ratio) for ratio, m in mass.items())


def tp_position_view(d: int, bits: Sequence[int], sum_mode: SumMode = SumMode.MODULAR) -> Counter:
    """Exact distribution (as counts) of TP's view of one position.

    Enumerates TP's phase label u0 and every party's swap outcome (k, l).
    The view is (u0, measured cat labels, S_L, S_K). TP's other labels
    u_1..u_n are drawn independently of the secrets and of every other view
    component (swapping overwrites them), so they are left out.
    """
    n = len(bits)
    bells = [(BellLabels(d, v, v), i + 2) for i, v in enumerate(bits)]
    modulus = d if SumMode(sum_mode) is SumMode.MODULAR else None
    dist: Counter = Counter()
    for u0 in range(d):
        cat = CatLabels(d, u0, (0,) * n)
        for flat in itertools.product(range(d), repeat=2 * n):
            outcomes = list(zip(flat[::2], flat[1::2]))
            final, _ = sequential_swaps(cat, bells, outcomes)
            ann = aggregate_announcements({i + 1: [kl] for i, kl in enumerate(outcomes)}, n, modulus)
            dist[(u0, final.labels, ann.S_L[0], ann.S_K[0])] += 1
    return dist


@dataclass
class LeakageReport:
    d: int
    n: int
    L: int
    sum_mode: str
    tp_view_partition: dict[tuple[int, ...], tuple[int, ...]]
    mutual_information_bits: float
    verdict_mutual_information_bits: float
    analytic_sum_entropy_bits: float
    factors_through_sum: bool
    verdict_only_equivalent: bool
    view_classes: int

    def to_record(self) -> dict:
        return {
            "report": "leakage",
            "d": self.d,
            "n": self.n,
            "L": self.L,
            "sum_mode": self.sum_mode,
            "mutual_information_bits": self.mutual_information_bits,
            "verdict_mutual_information_bits": self.verdict_mutual_information_bits,
            "analytic_sum_entropy_bits": self.analytic_sum_entropy_bits,
            "factors_through_sum": self.factors_through_sum,
            "verdict_only_equivalent": self.verdict_only_equivalent,
            "view_classes": self.view_classes,
            "tp_view_partition": [
                [list(k), list(v)] for k, v in sorted(self.tp_view_partition.items())
            ],
        }


def digit_sum_entropy(d: int, n: int) -> float:
    """H(sum of n fair bits, reduced mod d), in bits."""
    mass: Counter = Counter()
    for s in range(n + 1):
        mass[s % d] += math.comb(n, s)
    return _entropy(mass.values())


def _canonical(dist: Counter) -> frozenset:
    total = sum(dist.values())
    return frozenset((view, Fraction(c, total)) for view, c in dist.items())


def tp_view_leakage(d: int, n: int, L: int, sum_mode: SumMode | str = SumMode.MODULAR) -> LeakageReport:
    """What TP learns about the secrets from everything he sees."""
    if n * L > MAX_LEAKAGE_BITS:
        raise SizeError(f"2^{n * L} secret tuples exceeds the 2^{MAX_LEAKAGE_BITS} limit")
    sum_mode = SumMode(sum_mode)
    columns = list(itertools.product((0, 1), repeat=n))
    dists = {v: tp_position_view(d, v, sum_mode) for v in columns}

    # positions are independent, so per-position information adds up
    mi = L * _mutual_information(dists)

    # group columns by identical view distributions
    classes: dict[frozenset, list] = defaultdict(list)
    for v in columns:
        classes[_canonical(dists[v])].append(v)
    by_sum = {tuple(sorted(vs)) for vs in _group(columns, lambda v: sum(v) % d)}
    by_view = {tuple(sorted(vs)) for vs in classes.values()}
    factors = by_sum == by_view

    partition = {}
    verdict_counts: Counter = Counter()
    tuple_classes: dict = {}
    class_id = {key: i for i, key in enumerate(classes)}
    col_class = {v: class_id[key] for key, vs in classes.items() for v in vs}
    for xs in _secret_tuples(n, L):
        cols = [_bit_column(xs, j) for j in range(L)]
        partition[xs] = tuple(sum(c) % d for c in cols)
        equal = len(set(xs)) == 1
        verdict_counts[equal] += 1
        tuple_classes.setdefault(tuple(col_class[c] for c in cols), set()).add(equal)
    # the view refines the verdict; it is equivalent only if no two view
    # classes share a verdict
    verdict_only = all(len(s) == 1 for s in tuple_classes.values()) and len(tuple_classes) == len(verdict_counts)

    return LeakageReport(
        d, n, L, sum_mode.value, partition, mi, _entropy(verdict_counts.values()),
        L * digit_sum_entropy(d, n), factors, verdict_only, len(classes),
    )


def _group(items, key):
    out = defaultdict(list)
    for x in items:
        out[key(x)].append(x)
    return list(out.values())


# --- collusion ------------------------------------------------------------


@dataclass
class CollusionReport:
    d: int
    n: int
    L: int
    colluders: tuple[int, ...]
    target: int
    passed: bool
    verdict_inherent: bool
    evidence: dict | None = None

    def to_record(self) -> dict:
        return {
            "report": "collusion",
            "d": self.d,
            "n": self.n,
            "L": self.L,
            "colluders": list(self.colluders),
            "target": self.target,
            "passed": self.passed,
            "verdict_inherent": self.verdict_inherent,
            "evidence": self.evidence,
        }


def colluder_position_view(
    d: int, bits: Sequence[int], colluders: Sequence[int], sum_mode: SumMode = SumMode.MODULAR
) -> Counter:
    """Exact distribution of the colluders' joint view of one position.

    Each colluder ``m`` contributes her cat label u_m, her Bell measurement
    result and her (k, l); everyone sees the published sums. Enumerates the
    colluders' labels and every party's swap outcome.
    """
    n = len(bits)
    modulus = d if SumMode(sum_mode) is SumMode.MODULAR else None
    local = {}
    for m in colluders:
        rows = []
        for u_m, k, l in itertools.product(range(d), repeat=3):  # noqa: E741
            cat = CatLabels(d, 0, tuple(u_m if p == m else 0 for p in range(1, n + 1)))
            res = swap(cat, BellLabels(d, bits[m - 1], bits[m - 1]), m + 1, (k, l))
            rows.append(((u_m, res.measured.u, res.measured.v, k, l), (k, l)))
        local[m] = rows
    others = [i for i in range(1, n + 1) if i not in colluders]
    dist: Counter = Counter()
    pairs = list(itertools.product(range(d), repeat=2))
    for own in itertools.product(*(local[m] for m in colluders)):
        seen = tuple(view for view, _ in own)
        for rest in itertools.product(pairs, repeat=len(others)):
            reports = {m: [kl] for m, (_, kl) in zip(colluders, own)}
            reports.update({i: [kl] for i, kl in zip(others, rest)})
            ann = aggregate_announcements(reports, n, modulus)
            dist[(seen, ann.S_L[0], ann.S_K[0])] += 1
    return dist


def _product(dists: Sequence[Counter]) -> Counter:
    out: Counter = Counter({(): 1})
    for dist in dists:
        if len(out) * len(dist) > MAX_SUPPORT:
            raise SizeError("view distribution too large to expand exactly")
        nxt: Counter = Counter()
        for a, ca in out.items():
            for b, cb in dist.items():
                nxt[a + (b,)] += ca * cb
        out = nxt
    return out


def collusion_privacy_check(
    d: int,
    n: int,
    L: int,
    colluders: Iterable[int],
    target: int,
    sum_mode: SumMode | str = SumMode.MODULAR,
) -> CollusionReport:
    """Can the colluders tell the target's secret apart beyond the verdict?

    For every assignment of the colluders' own secrets and every verdict,
    the view distribution must be the same for every target secret that is
    consistent with that verdict; the remaining honest parties' secrets are
    averaged out under a uniform prior.
    """
    colluders = tuple(sorted(set(colluders)))
    if target in colluders:
        raise DomainError("the target cannot be one of the colluders")
    if not colluders or any(not 1 <= c <= n for c in colluders) or not 1 <= target <= n:
        raise DomainError("colluders and target must be parties 1..n")
    if n * L > MAX_LEAKAGE_BITS:
        raise SizeError(f"2^{n * L} secret tuples exceeds the 2^{MAX_LEAKAGE_BITS} limit")
    sum_mode = SumMode(sum_mode)
    columns = {v: colluder_position_view(d, v, colluders, sum_mode) for v in itertools.product((0, 1), repeat=n)}

    # mixture[(own secrets, verdict)][target secret] -> Counter of full views
    mixture: dict = defaultdict(lambda: defaultdict(Counter))
    for xs in _secret_tuples(n, L):
        full = _product([columns[_bit_column(xs, j)] for j in range(L)])
        key = (tuple(xs[c - 1] for c in colluders), len(set(xs)) == 1)
        mixture[key][xs[target - 1]].update(full)

    passed, inherent, evidence = True, False, None
    for (own, verdict), by_target in sorted(mixture.items()):
        if len(by_target) == 1 and 2**L > 1:
            inherent = True
        items = sorted(by_target.items())
        ref_t, ref = items[0]
        ref_c = _canonical(ref)
        for t, dist in items[1:]:
            if _canonical(dist) != ref_c and passed:
                passed = False
                evidence = _distinguish(ref, dist, own, verdict, ref_t, t)
    return CollusionReport(d, n, L, colluders, target, passed, inherent, evidence)


def _distinguish(a: Counter, b: Counter, own, verdict, ta, tb) -> dict:
    ta_total, tb_total = sum(a.values()), sum(b.values())
    for view in sorted(set(a) | set(b), key=repr):
        if a[view] * tb_total != b[view] * ta_total:
            return {
                "colluder_secrets": list(own),
                "verdict_all_equal": verdict,
                "target_secrets": [ta, tb],
                "view": repr(view),
                "probabilities": [str(Fraction(a[view], ta_total)), str(Fraction(b[view], tb_total))],
            }
    return {}


# --- efficiency -----------------------------------------------------------


@dataclass(frozen=True)
class EfficiencyRow:
    protocol_name: str
    compared_bits: int
    consumed_particles: int

    @property
    def eta(self) -> Fraction:
        return Fraction(self.compared_bits, self.consumed_particles)

    def to_record(self) -> dict:
        return {
            "protocol": self.protocol_name,
            "c": self.compared_bits,
            "t": self.consumed_particles,
            "eta": str(self.eta),
        }


# consumed-particle formulas t(n, L); every protocol compares L bits
EFFICIENCY_FORMULAS = {
    "cat-bell-swapping": lambda n, L: 3 * n * L + L,
    "ghz-class": lambda n, L: n * L,
    "d-level-basis-states": lambda n, L: n * L,
    "n-level-entangled-A": lambda n, L: 3 * n * L,
    "n-level-entangled-B": lambda n, L: 2 * L,
}


def efficiency_table(n: int, L: int = 1) -> list[EfficiencyRow]:
    """Qubit efficiency c/t of this protocol and four earlier multi-party ones."""
    if n < 2:
        raise DomainError(f"n must be >= 2, got {n}")
    if L < 1:
        raise DomainError(f"L must be >= 1, got {L}")
    return [EfficiencyRow(name, L, t(n, L)) for name, t in EFFICIENCY_FORMULAS.items()]
