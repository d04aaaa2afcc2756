"""Dense state-vector engine for registers of d-level systems.

Amplitudes are stored as a flat complex vector whose index is the base-d
digit string of the register, qudit 0 being the most significant digit.
Every operation returns a new :class:`StateVector`; measurements keep the
full register and collapse it in place (non-matching amplitudes zeroed,
then renormalised) so qudit indices stay stable.

All measurements accept either an injected ``numpy.random.Generator`` or a
forced ``outcome``. Forced outcomes are used for deterministic replay and
exhaustive branch enumeration.
"""

from __future__ import annotations

import enum
import functools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from mqpc.errors import DomainError, MeasurementError, SizeError

ATOL = 1e-9
MAX_AMPLITUDES = 10**7
# An outcome this close to certain is returned without consuming randomness.
CERTAIN = 1.0 - 1e-12


@functools.lru_cache(maxsize=None)
def root_of_unity(d: int) -> complex:
    """Return zeta = exp(2*pi*i/d)."""
    return complex(np.exp(2j * np.pi / d))


@functools.lru_cache(maxsize=None)
def _powers(d: int) -> np.ndarray:
    # zeta**k for k in Z_d, computed once per dimension
    out = np.exp(2j * np.pi * np.arange(d) / d)
    out.setflags(write=False)
    return out


def _check_dim(d: int) -> None:
    if not isinstance(d, (int, np.integer)) or d < 2:
        raise DomainError(f"qudit dimension must be an integer >= 2, got {d!r}")


def _check_label(d: int, value: int, name: str = "label") -> int:
    if not isinstance(value, (int, np.integer)) or not 0 <= value < d:
        raise DomainError(f"{name} must lie in [0, {d}), got {value!r}")
    return int(value)


class Basis(enum.Enum):
    """Single-qudit measurement bases: computational (V1) and Fourier (V2)."""

    V1 = "V1"
    V2 = "V2"


@dataclass(frozen=True, eq=False)
class StateVector:
    """Pure state of ``q`` qudits of dimension ``d``."""

    d: int
    q: int
    amps: np.ndarray

    def __post_init__(self):
        _check_dim(self.d)
        if self.q < 1:
            raise DomainError(f"qudit count must be >= 1, got {self.q}")
        size = self.d**self.q
        if size > MAX_AMPLITUDES:
            raise SizeError(
                f"{self.d}^{self.q} = {size} amplitudes exceeds the oracle limit "
                f"of {MAX_AMPLITUDES}"
            )
        amps = np.asarray(self.amps, dtype=np.complex128).reshape(-1)
        if amps.shape[0] != size:
            raise DomainError(f"expected {size} amplitudes, got {amps.shape[0]}")
        norm = float(np.vdot(amps, amps).real)
        if abs(norm - 1.0) > ATOL:
            raise DomainError(f"state is not normalised (squared norm {norm!r})")
        if amps is self.amps:
            amps = amps.copy()
        amps.setflags(write=False)
        object.__setattr__(self, "amps", amps)

    def as_tensor(self) -> np.ndarray:
        return self.amps.reshape((self.d,) * self.q)

    def inner(self, other: "StateVector") -> complex:
        """<self|other>."""
        _same_shape(self, other)
        return complex(np.vdot(self.amps, other.amps))

    def tensor(self, other: "StateVector") -> "StateVector":
        """self ⊗ other; ``other``'s qudits are appended after ours."""
        if self.d != other.d:
            raise DomainError(f"dimension mismatch: {self.d} vs {other.d}")
        return StateVector(self.d, self.q + other.q, np.kron(self.amps, other.amps))

    def __repr__(self) -> str:
        return f"StateVector(d={self.d}, q={self.q})"


def _same_shape(a: StateVector, b: StateVector) -> None:
    if a.d != b.d or a.q != b.q:
        raise DomainError(f"shape mismatch: (d={a.d}, q={a.q}) vs (d={b.d}, q={b.q})")


def _check_qudit(s: StateVector, qudit: int) -> int:
    if not isinstance(qudit, (int, np.integer)) or not 0 <= qudit < s.q:
        raise DomainError(f"qudit index must lie in [0, {s.q}), got {qudit!r}")
    return int(qudit)


def _check_distinct(s: StateVector, qudits: Sequence[int]) -> list[int]:
    qudits = [_check_qudit(s, k) for k in qudits]
    if len(set(qudits)) != len(qudits):
        raise DomainError(f"qudit indices must be distinct, got {qudits}")
    return qudits


def tensor(*states: StateVector) -> StateVector:
    """Tensor product of several states, in argument order."""
    if not states:
        raise DomainError("tensor() needs at least one state")
    out = states[0]
    for s in states[1:]:
        out = out.tensor(s)
    return out


def permute(s: StateVector, order: Sequence[int]) -> StateVector:
    """Reorder qudits: qudit ``i`` of the result is qudit ``order[i]`` of ``s``."""
    order = list(order)
    if sorted(order) != list(range(s.q)):
        raise DomainError(f"{order} is not a permutation of range({s.q})")
    return StateVector(s.d, s.q, np.transpose(s.as_tensor(), order).reshape(-1))


def format_state(s: StateVector, atol: float = 1e-12) -> str:
    """Debug dump: one ``digits : re,im`` line per non-zero amplitude."""
    lines = []
    for index in np.flatnonzero(np.abs(s.amps) > atol):
        digits = "".join(str(x) for x in np.unravel_index(index, (s.d,) * s.q))
        a = s.amps[index]
        lines.append(f"{digits} : {a.real:.12g},{a.imag:.12g}")
    return "\n".join(lines)


# --- construction ---------------------------------------------------------


def make_basis_state(d: int, digits: Sequence[int]) -> StateVector:
    _check_dim(d)
    digits = [_check_label(d, x, "digit") for x in digits]
    if not digits:
        raise DomainError("need at least one digit")
    amps = np.zeros(d ** len(digits), dtype=np.complex128)
    amps[np.ravel_multi_index(digits, (d,) * len(digits))] = 1.0
    return StateVector(d, len(digits), amps)


def _cat_amps(d: int, labels: Sequence[int]) -> np.ndarray:
    n = len(labels)
    amps = np.zeros(d**n, dtype=np.complex128)
    zeta = _powers(d)
    j = np.arange(d)
    index = np.zeros(d, dtype=np.int64)
    for offset in (0, *labels[1:]):
        index = index * d + (j + offset) % d
    amps[index] = zeta[(j * labels[0]) % d] / np.sqrt(d)
    return amps


def make_cat(d: int, labels: Sequence[int]) -> StateVector:
    """(1/sqrt d) sum_j zeta^{j u1} |j, j+u2, ..., j+un>."""
    _check_dim(d)
    labels = [_check_label(d, x) for x in labels]
    if len(labels) < 2:
        raise DomainError(f"a cat state needs at least 2 particles, got {len(labels)}")
    return StateVector(d, len(labels), _cat_amps(d, labels))


def make_bell(d: int, u: int, v: int) -> StateVector:
    """Generalised Bell state (1/sqrt d) sum_j zeta^{ju} |j>|j+v>."""
    return make_cat(d, [u, v])


# --- single-qudit operators -----------------------------------------------


@dataclass(frozen=True, eq=False)
class QuditOperator:
    """A d x d unitary acting on one qudit."""

    d: int
    matrix: np.ndarray

    def __post_init__(self):
        _check_dim(self.d)
        m = np.asarray(self.matrix, dtype=np.complex128)
        if m.shape != (self.d, self.d):
            raise DomainError(f"operator must be {self.d}x{self.d}, got {m.shape}")
        if np.max(np.abs(m.conj().T @ m - np.eye(self.d))) >= ATOL:
            raise DomainError("operator is not unitary")
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def apply(self, s: StateVector, qudit: int) -> StateVector:
        if s.d != self.d:
            raise DomainError(f"dimension mismatch: {self.d} vs {s.d}")
        qudit = _check_qudit(s, qudit)
        t = np.tensordot(self.matrix, s.as_tensor(), axes=([1], [qudit]))
        t = np.moveaxis(t, 0, qudit)
        return StateVector(s.d, s.q, t.reshape(-1))


@functools.lru_cache(maxsize=None)
def fourier_operator(d: int) -> QuditOperator:
    """F|k> = (1/sqrt d) sum_r zeta^{kr} |r>; column k is F|k>."""
    _check_dim(d)
    k = np.arange(d)
    return QuditOperator(d, _powers(d)[np.outer(k, k) % d] / np.sqrt(d))


@functools.lru_cache(maxsize=None)
def pauli_operator(d: int, u: int, v: int) -> QuditOperator:
    """U_(u,v) = sum_j zeta^{ju} |j+v><j|."""
    _check_dim(d)
    u, v = _check_label(d, u, "u"), _check_label(d, v, "v")
    m = np.zeros((d, d), dtype=np.complex128)
    j = np.arange(d)
    m[(j + v) % d, j] = _powers(d)[(j * u) % d]
    return QuditOperator(d, m)


def apply_fourier(s: StateVector, qudit: int) -> StateVector:
    return fourier_operator(s.d).apply(s, qudit)


def apply_generalized_pauli(s: StateVector, qudit: int, u: int, v: int) -> StateVector:
    return pauli_operator(s.d, u, v).apply(s, qudit)


def basis_vector(d: int, basis: Basis, k: int) -> StateVector:
    """|k> for V1, F|k> for V2."""
    if basis is Basis.V1:
        return make_basis_state(d, [k])
    _check_label(d, k, "value")
    return StateVector(d, 1, fourier_operator(d).matrix[:, k])


def fidelity_up_to_phase(a: StateVector, b: StateVector) -> float:
    """|<a|b>|^2, insensitive to global phase."""
    return abs(a.inner(b)) ** 2


# --- measurement ----------------------------------------------------------


def sample_index(probs: np.ndarray, rng: np.random.Generator) -> int:
    """Inverse-CDF draw from ``probs``.

    A (numerically) certain outcome is returned without touching ``rng`` so
    that eigenstate measurements do not shift the random stream.
    """
    probs = np.asarray(probs, dtype=float)
    best = int(np.argmax(probs))
    if probs[best] >= CERTAIN:
        return best
    cdf = np.cumsum(probs)
    r = rng.random() * cdf[-1]
    return min(int(np.searchsorted(cdf, r, side="right")), len(probs) - 1)


def _split(s: StateVector, qudits: list[int]) -> np.ndarray:
    # rows: digit string of the selected qudits; columns: everything else
    lead = list(range(len(qudits)))
    t = s.as_tensor() if qudits == lead else np.moveaxis(s.as_tensor(), qudits, lead)
    return t.reshape(s.d ** len(qudits), -1)


def _join(s: StateVector, qudits: list[int], block: np.ndarray) -> np.ndarray:
    lead = list(range(len(qudits)))
    if qudits == lead:
        return block.reshape(-1)
    t = block.reshape((s.d,) * s.q)
    return np.moveaxis(t, lead, qudits).reshape(-1)


def _cat_coefficients(d: int, m: int, block: np.ndarray) -> np.ndarray:
    """Cat-basis coefficients of a (d**m, rest) block.

    Row ``r`` of the result is <Psi(labels_r)| applied to the block, with
    labels enumerated lexicographically (first label most significant).
    """
    rest = block.shape[1]
    t = block.reshape((d,) * m + (rest,))
    offsets = np.array(np.unravel_index(np.arange(d ** (m - 1)), (d,) * (m - 1))).T
    j = np.arange(d)
    index = tuple([np.broadcast_to(j, (len(offsets), d))] + [
        (j[None, :] + offsets[:, c][:, None]) % d for c in range(m - 1)
    ])
    g = t[index]  # (offset, j, rest)
    # <Psi(u1, o)|.> = (1/sqrt d) sum_j zeta^{-j u1} g[o, j]
    coeff = np.fft.fft(g, axis=1) / np.sqrt(d)  # (offset, u1, rest)
    return coeff.transpose(1, 0, 2).reshape(d**m, rest)


def _collapse(s, qudits, coeff, vectors, rng, outcome):
    probs = np.einsum("ij,ij->i", coeff, coeff.conj()).real
    if outcome is None:
        if rng is None:
            raise DomainError("either rng or a forced outcome is required")
        outcome = sample_index(probs, rng)
    p = float(probs[outcome])
    if p < ATOL**2:
        raise MeasurementError(f"forced outcome has probability {p:.3g}")
    block = np.outer(vectors(outcome), coeff[outcome] / np.sqrt(p))
    return outcome, p, StateVector(s.d, s.q, _join(s, qudits, block))


@dataclass(frozen=True, eq=False)
class BellOutcome:
    u: int
    v: int
    probability: float
    post_state: StateVector


def bell_probabilities(s: StateVector, a: int, b: int) -> np.ndarray:
    """d x d array of Born probabilities for Bell outcomes (u, v) on (a, b)."""
    qudits = _check_distinct(s, [a, b])
    coeff = _cat_coefficients(s.d, 2, _split(s, qudits))
    return np.einsum("ij,ij->i", coeff, coeff.conj()).real.reshape(s.d, s.d)


def measure_bell_basis(
    s: StateVector,
    a: int,
    b: int,
    rng: np.random.Generator | None = None,
    outcome: tuple[int, int] | None = None,
) -> BellOutcome:
    """Project qudits (a, b) onto the generalised Bell basis."""
    qudits = _check_distinct(s, [a, b])
    d = s.d
    forced = None
    if outcome is not None:
        forced = _check_label(d, outcome[0], "u") * d + _check_label(d, outcome[1], "v")
    coeff = _cat_coefficients(d, 2, _split(s, qudits))
    index, p, post = _collapse(
        s, qudits, coeff, lambda r: _cat_amps(d, divmod(r, d)), rng, forced
    )
    u, v = divmod(index, d)
    return BellOutcome(u, v, p, post)


def measure_cat_basis(
    s: StateVector,
    qudits: Sequence[int],
    rng: np.random.Generator | None = None,
    outcome: Sequence[int] | None = None,
) -> tuple[tuple[int, ...], StateVector]:
    """Project the listed qudits onto the cat basis; return (labels, post-state)."""
    qudits = _check_distinct(s, qudits)
    m, d = len(qudits), s.d
    if m < 2:
        raise DomainError("cat measurement needs at least 2 qudits")
    forced = None
    if outcome is not None:
        if len(outcome) != m:
            raise DomainError(f"forced outcome needs {m} labels")
        forced = int(np.ravel_multi_index([_check_label(d, x) for x in outcome], (d,) * m))
    coeff = _cat_coefficients(d, m, _split(s, qudits))

    def vec(r):
        return _cat_amps(d, np.unravel_index(r, (d,) * m))

    index, _, post = _collapse(s, qudits, coeff, vec, rng, forced)
    labels = tuple(int(x) for x in np.unravel_index(index, (d,) * m))
    return labels, post


def measure_single_qudit(
    s: StateVector,
    qudit: int,
    basis: Basis,
    rng: np.random.Generator | None = None,
    outcome: int | None = None,
) -> tuple[int, StateVector]:
    """Measure one qudit in V1 (computational) or V2 (Fourier)."""
    qudit = _check_qudit(s, qudit)
    d = s.d
    basis = Basis(basis)
    if outcome is not None:
        outcome = _check_label(d, outcome, "outcome")
    block = _split(s, [qudit])
    if basis is Basis.V1:
        coeff = block
        vec = lambda k: np.eye(d, dtype=np.complex128)[k]  # noqa: E731
    else:
        f = fourier_operator(d).matrix
        coeff = f.conj().T @ block
        vec = lambda k: f[:, k]  # noqa: E731
    index, _, post = _collapse(s, [qudit], coeff, vec, rng, outcome)
    return int(index), post


def discard_factor(s: StateVector, qudits: Sequence[int], factor: StateVector) -> StateVector:
    """Remove qudits that are in the known product state ``factor``.

    Returns the state of the remaining qudits, in their original order.
    Raises DomainError if ``s`` does not factor as ``factor ⊗ rest``.
    """
    qudits = _check_distinct(s, qudits)
    if factor.d != s.d or factor.q != len(qudits):
        raise DomainError("factor does not match the selected qudits")
    if len(qudits) == s.q:
        raise DomainError("cannot discard every qudit")
    rest = factor.amps.conj() @ _split(s, qudits)
    if abs(np.vdot(rest, rest).real - 1.0) > ATOL:
        raise DomainError("state does not factor through the given product")
    return StateVector(s.d, s.q - len(qudits), rest)
