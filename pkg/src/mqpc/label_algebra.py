"""Symbolic cat/Bell states and the entanglement-swapping label rule.

A cat state on ``n`` particles is named by its phase label ``u1`` and the
offsets ``u2..un`` of particles 2..n relative to particle 1; a Bell state is
the two-particle case. Swapping a Bell pair (u, v) against cat particle
``m`` (m >= 2) yields, for outcome (k, l),

    cat:      u1 -> u1 + k,   offset m -> v + l
    measured: (u - k, u_m - l)  on (first Bell particle, cat particle m)

with branch amplitude zeta^{kl} / d. Everything is mod d with canonical
residues 0..d-1.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from mqpc.errors import DomainError
from mqpc.qudit_state import StateVector, make_bell, make_cat


def _residue(d: int, value: int, name: str) -> int:
    if not isinstance(value, (int, np.integer)) or not 0 <= value < d:
        raise DomainError(f"{name} must lie in [0, {d}), got {value!r}")
    return int(value)


@dataclass(frozen=True)
class CatLabels:
    d: int
    phase_label: int
    offsets: tuple[int, ...]

    def __post_init__(self):
        if self.d < 2:
            raise DomainError(f"dimension must be >= 2, got {self.d}")
        _residue(self.d, self.phase_label, "phase label")
        offsets = tuple(_residue(self.d, x, "offset") for x in self.offsets)
        if not offsets:
            raise DomainError("a cat state needs at least 2 particles")
        object.__setattr__(self, "offsets", offsets)

    @classmethod
    def from_labels(cls, d: int, labels: Sequence[int]) -> "CatLabels":
        return cls(d, labels[0], tuple(labels[1:]))

    @property
    def n_particles(self) -> int:
        return len(self.offsets) + 1

    @property
    def labels(self) -> tuple[int, ...]:
        return (self.phase_label, *self.offsets)

    def offset(self, m: int) -> int:
        """Label of particle ``m`` (1-based, m >= 2)."""
        return self.offsets[self._position(m)]

    def _position(self, m: int) -> int:
        if not isinstance(m, (int, np.integer)) or not 2 <= m <= self.n_particles:
            raise DomainError(
                f"swap position must lie in [2, {self.n_particles}], got {m!r}"
            )
        return int(m) - 2

    def to_state(self) -> StateVector:
        return make_cat(self.d, self.labels)


@dataclass(frozen=True)
class BellLabels:
    d: int
    u: int
    v: int

    def __post_init__(self):
        _residue(self.d, self.u, "u")
        _residue(self.d, self.v, "v")

    def to_state(self) -> StateVector:
        return make_bell(self.d, self.u, self.v)


@dataclass(frozen=True)
class SwapOutcome:
    k: int
    l: int  # noqa: E741
    phase_exponent: int
    measured: BellLabels
    new_cat: CatLabels


def swap(
    cat: CatLabels,
    bell: BellLabels,
    m: int,
    outcome: tuple[int, int] | None = None,
    rng: np.random.Generator | None = None,
) -> SwapOutcome:
    """Swap ``bell`` against particle ``m`` of ``cat``.

    Either ``outcome`` (k, l) is forced, or it is drawn uniformly from
    Z_d x Z_d with ``rng``.
    """
    if cat.d != bell.d:
        raise DomainError(f"dimension mismatch: cat d={cat.d}, bell d={bell.d}")
    d = cat.d
    pos = cat._position(m)
    if outcome is None:
        if rng is None:
            raise DomainError("either a forced outcome or rng is required")
        k, l = (int(x) for x in rng.integers(0, d, size=2))  # noqa: E741
    else:
        k, l = _residue(d, outcome[0], "k"), _residue(d, outcome[1], "l")  # noqa: E741
    offsets = list(cat.offsets)
    u_m = offsets[pos]
    offsets[pos] = (bell.v + l) % d
    new_cat = replace(cat, phase_label=(cat.phase_label + k) % d, offsets=tuple(offsets))
    measured = BellLabels(d, (bell.u - k) % d, (u_m - l) % d)
    return SwapOutcome(k, l, (k * l) % d, measured, new_cat)


def recover_kl(measured: BellLabels, original_v: int, original_um: int) -> tuple[int, int]:
    """Invert the measured Bell labels back to the swap outcome (k, l)."""
    d = measured.d
    original_v = _residue(d, original_v, "original v")
    original_um = _residue(d, original_um, "original u_m")
    return (original_v - measured.u) % d, (original_um - measured.v) % d


def sequential_swaps(
    cat: CatLabels,
    bells: Sequence[tuple[BellLabels, int]],
    outcomes: Sequence[tuple[int, int]] | None = None,
    rng: np.random.Generator | None = None,
) -> tuple[CatLabels, list[SwapOutcome]]:
    """Apply one swap per (bell, position) pair, in the given order."""
    positions = [m for _, m in bells]
    if len(set(positions)) != len(positions):
        raise DomainError(f"swap positions must be distinct, got {positions}")
    if outcomes is not None and len(outcomes) != len(bells):
        raise DomainError("need one forced outcome per swap")
    results = []
    for i, (bell, m) in enumerate(bells):
        out = swap(cat, bell, m, None if outcomes is None else outcomes[i], rng)
        results.append(out)
        cat = out.new_cat
    return cat, results
