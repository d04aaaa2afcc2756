"""Decoy photons: insertion into a transmitted sequence and the receipt check.

A protected sequence is a plain list in which decoys appear as one-qudit
:class:`~mqpc.qudit_state.StateVector` objects and payload slots hold
whatever token the caller passed in. The decoy record stays with the sender.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from mqpc.errors import DomainError, ProtocolError
from mqpc.qudit_state import Basis, StateVector, basis_vector, measure_single_qudit

BASIS_CODES = {Basis.V1: 0, Basis.V2: 1}


@dataclass(frozen=True)
class DecoyPhoton:
    basis: Basis
    value: int
    position: int


def insert_decoys(
    sequence: Sequence, count: int, d: int, rng: np.random.Generator
) -> tuple[list, list[DecoyPhoton]]:
    """Insert ``count`` random decoys at uniformly random positions."""
    if count < 0:
        raise DomainError(f"decoy count must be >= 0, got {count}")
    protected = list(sequence)
    if count == 0:
        return protected, []
    bases = rng.integers(0, 2, size=count)
    values = rng.integers(0, d, size=count)
    total = len(protected) + count
    positions = np.sort(rng.choice(total, size=count, replace=False))
    record = [
        DecoyPhoton(Basis.V2 if b else Basis.V1, int(x), int(p))
        for b, x, p in zip(bases, values, positions)
    ]
    out: list = []
    payload = iter(protected)
    decoys = iter(record)
    slots = set(int(p) for p in positions)
    for i in range(total):
        if i in slots:
            dec = next(decoys)
            out.append(basis_vector(d, dec.basis, dec.value))
        else:
            out.append(next(payload))
    return out, record


def measure_decoys(
    protected: Sequence, positions: Sequence[int], bases: Sequence[Basis], rng: np.random.Generator
) -> list[int]:
    """Receiver side: measure each announced position in its announced basis."""
    if len(positions) != len(bases):
        raise ProtocolError("positions and bases must have equal length")
    results = []
    for pos, basis in zip(positions, bases):
        slot = protected[pos]
        if not isinstance(slot, StateVector) or slot.q != 1:
            raise ProtocolError(f"position {pos} does not hold a decoy qudit")
        value, _ = measure_single_qudit(slot, 0, basis, rng)
        results.append(value)
    return results


def verify_decoys(protected: Sequence, record: Sequence[DecoyPhoton], results: Sequence[int]) -> bool:
    """Sender side: pass iff every reported value equals the prepared one."""
    if len(results) != len(record):
        raise ProtocolError(f"expected {len(record)} decoy results, got {len(results)}")
    if any(not 0 <= dec.position < len(protected) for dec in record):
        raise ProtocolError("decoy record does not match the sequence length")
    return all(int(r) == dec.value for r, dec in zip(results, record))


def strip_decoys(protected: Sequence, record: Sequence[DecoyPhoton]) -> list:
    """Payload items in order, decoy slots removed."""
    drop = {dec.position for dec in record}
    return [x for i, x in enumerate(protected) if i not in drop]
