"""State-vector counterparts of the symbolic swap, and their equivalence check."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from mqpc.label_algebra import BellLabels, CatLabels, swap
from mqpc.qudit_state import (
    StateVector,
    discard_factor,
    make_bell,
    measure_bell_basis,
    permute,
    root_of_unity,
)


def _layout(n: int, m: int) -> list[int]:
    # Maps the joint register [cat_0..cat_{n-1}, s, s'] onto
    # [new_cat_0..new_cat_{n-1}, measured_s, measured_m] ordering.
    order = list(range(n)) + [n, n + 1]
    order[m - 1] = n + 1
    order[n + 1] = m - 1
    return order


def swap_state(
    cat: StateVector,
    bell: StateVector,
    m: int,
    rng: np.random.Generator | None = None,
    outcome: tuple[int, int] | None = None,
) -> tuple[tuple[int, int], StateVector]:
    """Bell-measure the first particle of ``bell`` against cat particle ``m``.

    Returns the measured Bell labels and the remaining ``cat.q``-qudit state,
    with the second Bell particle occupying slot ``m``.
    """
    n = cat.q
    joint = cat.tensor(bell)
    res = measure_bell_basis(joint, n, m - 1, rng=rng, outcome=outcome)
    rest = discard_factor(res.post_state, [n, m - 1], make_bell(cat.d, res.u, res.v))
    # rest holds cat qudits except m-1, then s'; put s' back into slot m-1
    order = list(range(n - 1))
    order.insert(m - 1, n - 1)
    return (res.u, res.v), permute(rest, order)


def swap_branch(cat: CatLabels, bell: BellLabels, m: int, k: int, l: int) -> tuple[complex, float]:  # noqa: E741
    """Amplitude and post-state fidelity of one swap branch, computed densely.

    The amplitude is <new_cat ⊗ measured | cat ⊗ bell> in the joint register;
    the fidelity compares the collapsed oracle state with the symbolic
    prediction.
    """
    predicted = swap(cat, bell, m, (k, l))
    n = cat.n_particles
    joint = cat.to_state().tensor(bell.to_state())
    expected = permute(
        predicted.new_cat.to_state().tensor(predicted.measured.to_state()),
        _layout(n, m),
    )
    amplitude = expected.inner(joint)
    res = measure_bell_basis(
        joint, n, m - 1, outcome=(predicted.measured.u, predicted.measured.v)
    )
    fid = abs(expected.inner(res.post_state)) ** 2
    return amplitude, fid


@dataclass
class EquivalenceReport:
    d: int
    n_particles: int
    branches: int = 0
    matched: int = 0
    max_fidelity_deficit: float = 0.0
    max_amplitude_error: float = 0.0
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.branches > 0 and self.matched == self.branches


def check_swap_equivalence(d: int, n_particles: int, tol: float = 1e-9) -> EquivalenceReport:
    """Exhaustively compare symbolic swaps with the dense oracle.

    Covers every cat label tuple, every Bell label pair, every swap position
    and every outcome (k, l).
    """
    report = EquivalenceReport(d, n_particles)
    zeta = root_of_unity(d)
    for labels in itertools.product(range(d), repeat=n_particles):
        cat = CatLabels.from_labels(d, labels)
        for u, v in itertools.product(range(d), repeat=2):
            bell = BellLabels(d, u, v)
            for m in range(2, n_particles + 1):
                for k, l in itertools.product(range(d), repeat=2):  # noqa: E741
                    amp, fid = swap_branch(cat, bell, m, k, l)
                    amp_err = abs(amp - zeta ** (k * l) / d)
                    deficit = 1.0 - fid
                    report.branches += 1
                    report.max_fidelity_deficit = max(report.max_fidelity_deficit, deficit)
                    report.max_amplitude_error = max(report.max_amplitude_error, amp_err)
                    if deficit <= tol and amp_err <= tol:
                        report.matched += 1
                    elif len(report.failures) < 10:
                        report.failures.append((labels, (u, v), m, (k, l), fid, amp))
    return report
