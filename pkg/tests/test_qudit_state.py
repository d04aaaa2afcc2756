import cmath
import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mqpc.errors import DomainError, MeasurementError, SizeError
from mqpc.qudit_state import (
    Basis,
    StateVector,
    apply_fourier,
    apply_generalized_pauli,
    basis_vector,
    bell_probabilities,
    discard_factor,
    fidelity_up_to_phase,
    format_state,
    fourier_operator,
    make_basis_state,
    make_bell,
    make_cat,
    measure_bell_basis,
    measure_cat_basis,
    measure_single_qudit,
    pauli_operator,
    permute,
    tensor,
)

R2 = 1 / math.sqrt(2)


def zeta(d, k=1):
    return cmath.exp(2j * math.pi * k / d)


def dft_matrix(d):
    """F built entry by entry from its definition."""
    return np.array([[zeta(d, r * k) / math.sqrt(d) for k in range(d)] for r in range(d)])


def gram(states):
    m = np.array([s.amps for s in states])
    return m.conj() @ m.T


# --- construction ---


def test_basis_state_qubit():
    assert np.allclose(make_basis_state(2, [0]).amps, [1, 0])


def test_basis_state_positional_encoding():
    s = make_basis_state(3, [2, 1])
    assert s.amps[7] == 1 and np.count_nonzero(s.amps) == 1
    assert make_basis_state(5, [4, 4, 4]).amps[124] == 1


def test_basis_state_rejects_bad_digit():
    with pytest.raises(DomainError):
        make_basis_state(3, [3])


def test_fourier_on_qubit_basis():
    assert np.allclose(apply_fourier(make_basis_state(2, [0]), 0).amps, [R2, R2])
    assert np.allclose(apply_fourier(make_basis_state(2, [1]), 0).amps, [R2, -R2])


def test_fourier_matches_definition():
    for d in range(2, 8):
        assert np.allclose(fourier_operator(d).matrix, dft_matrix(d))


@pytest.mark.parametrize("k", range(3))
def test_fourier_squared_negates(k):
    f2 = dft_matrix(3) @ dft_matrix(3)
    expected = np.zeros(3)
    expected[(-k) % 3] = 1
    assert np.allclose(f2[:, k], expected)
    out = apply_fourier(apply_fourier(make_basis_state(3, [k]), 0), 0)
    assert fidelity_up_to_phase(out, make_basis_state(3, [(-k) % 3])) == pytest.approx(1, abs=1e-12)


def test_fourier_index_error():
    with pytest.raises(DomainError):
        apply_fourier(make_basis_state(2, [0]), 1)


@pytest.mark.parametrize("d", [2, 3, 5])
def test_bell_00_is_uniform_diagonal(d):
    amps = make_bell(d, 0, 0).amps
    expected = np.zeros(d * d)
    expected[[j * d + j for j in range(d)]] = 1 / math.sqrt(d)
    assert np.allclose(amps, expected)


def test_bell_11_qubit_singlet():
    assert np.allclose(make_bell(2, 1, 1).amps, [0, R2, -R2, 0])


def test_bell_rejects_labels():
    with pytest.raises(DomainError):
        make_bell(3, 0, 3)


@pytest.mark.parametrize("d", range(2, 8))
def test_bell_basis_orthonormal(d):
    g = gram([make_bell(d, u, v) for u in range(d) for v in range(d)])
    assert np.max(np.abs(g - np.eye(d * d))) < 1e-9


def test_cat_ghz():
    amps = make_cat(2, [0, 0, 0, 0]).amps
    assert amps[0] == pytest.approx(R2) and amps[15] == pytest.approx(R2)
    assert np.count_nonzero(np.abs(amps) > 1e-12) == 2


@pytest.mark.parametrize("d", [2, 3, 4])
def test_two_particle_cat_is_bell(d):
    for u, v in itertools.product(range(d), repeat=2):
        assert np.allclose(make_cat(d, [u, v]).amps, make_bell(d, u, v).amps)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_cat_basis_orthonormal(n):
    states = [make_cat(2, list(t)) for t in itertools.product(range(2), repeat=n)]
    assert np.max(np.abs(gram(states) - np.eye(2**n))) < 1e-9


def test_cat_needs_two_particles():
    with pytest.raises(DomainError):
        make_cat(3, [1])


# --- generalised Pauli ---


@pytest.mark.parametrize("d", [2, 3, 5])
def test_pauli_generates_every_bell_state(d):
    base = make_bell(d, 0, 0)
    for u, v in itertools.product(range(d), repeat=2):
        out = apply_generalized_pauli(base, 1, u, v)
        assert fidelity_up_to_phase(out, make_bell(d, u, v)) == pytest.approx(1, abs=1e-9)


def test_pauli_identity():
    assert np.allclose(pauli_operator(4, 0, 0).matrix, np.eye(4))


def test_pauli_phase_on_qubit():
    out = apply_generalized_pauli(make_basis_state(2, [1]), 0, 1, 0)
    assert np.allclose(out.amps, [0, -1])


@pytest.mark.parametrize("d", range(2, 8))
def test_operators_unitary(d):
    ops = [fourier_operator(d).matrix] + [
        pauli_operator(d, u, v).matrix for u in range(d) for v in range(d)
    ]
    for m in ops:
        assert np.max(np.abs(m.conj().T @ m - np.eye(d))) < 1e-9


# --- measurement ---


@pytest.mark.parametrize("d", [2, 3])
def test_bell_measurement_on_eigenstate(d):
    rng = np.random.default_rng(0)
    for u, v in itertools.product(range(d), repeat=2):
        res = measure_bell_basis(make_bell(d, u, v), 0, 1, rng)
        assert (res.u, res.v) == (u, v)
        assert res.probability == pytest.approx(1)


def test_bell_measurement_on_cat_times_bell_is_uniform():
    s = make_cat(2, [0, 0, 0, 0]).tensor(make_bell(2, 0, 0))
    for m in range(1, 4):
        probs = bell_probabilities(s, 4, m)
        assert np.allclose(probs, 0.25, atol=1e-9)


def test_bell_measurement_rejects_same_qudit():
    with pytest.raises(DomainError):
        measure_bell_basis(make_bell(2, 0, 0), 1, 1, np.random.default_rng(0))


def test_forced_zero_probability_outcome():
    with pytest.raises(MeasurementError):
        measure_bell_basis(make_bell(3, 1, 2), 0, 1, outcome=(0, 0))


def test_cat_measurement_eigenstate():
    labels, post = measure_cat_basis(make_cat(3, [1, 2, 0]), [0, 1, 2], np.random.default_rng(3))
    assert labels == (1, 2, 0)
    assert fidelity_up_to_phase(post, make_cat(3, [1, 2, 0])) == pytest.approx(1)


def test_cat_measurement_of_product_state():
    # |000> = (Psi(0,0,0) + Psi(1,0,0)) / sqrt 2 for qubits
    s = make_basis_state(2, [0, 0, 0])
    probs = {}
    for t in itertools.product(range(2), repeat=3):
        try:
            _, post = measure_cat_basis(s, [0, 1, 2], outcome=t)
        except MeasurementError:
            probs[t] = 0.0
            continue
        probs[t] = abs(make_cat(2, list(t)).inner(s)) ** 2
        assert fidelity_up_to_phase(post, make_cat(2, list(t))) == pytest.approx(1)
    assert probs[(0, 0, 0)] == pytest.approx(0.5)
    assert probs[(1, 0, 0)] == pytest.approx(0.5)
    assert sum(probs.values()) == pytest.approx(1)


def test_cat_measurement_duplicate_index():
    with pytest.raises(DomainError):
        measure_cat_basis(make_cat(2, [0, 0, 0]), [0, 0], np.random.default_rng(0))


def test_cat_measurement_on_subset_keeps_register():
    s = make_cat(3, [2, 1]).tensor(make_basis_state(3, [2]))
    labels, post = measure_cat_basis(s, [0, 1], np.random.default_rng(1))
    assert labels == (2, 1) and post.q == 3


def test_single_qudit_measurements():
    rng = np.random.default_rng(5)
    assert measure_single_qudit(make_basis_state(3, [1]), 0, Basis.V1, rng)[0] == 1
    f1 = apply_fourier(make_basis_state(3, [1]), 0)
    assert measure_single_qudit(f1, 0, Basis.V2, rng)[0] == 1


def test_v2_measurement_of_zero_is_fair():
    s = make_basis_state(2, [0])
    for k in range(2):
        assert abs(basis_vector(2, Basis.V2, k).inner(s)) ** 2 == pytest.approx(0.5)
        value, post = measure_single_qudit(s, 0, Basis.V2, outcome=k)
        assert value == k
        assert fidelity_up_to_phase(post, basis_vector(2, Basis.V2, k)) == pytest.approx(1)
    rng = np.random.default_rng(11)
    hits = sum(measure_single_qudit(s, 0, Basis.V2, rng)[0] for _ in range(4000))
    assert abs(hits / 4000 - 0.5) < 4 * math.sqrt(0.25 / 4000)


def test_single_qudit_index_error():
    with pytest.raises(DomainError):
        measure_single_qudit(make_basis_state(2, [0]), 2, Basis.V1, np.random.default_rng(0))


@settings(max_examples=40, deadline=None)
@given(
    d=st.integers(2, 4),
    seed=st.integers(0, 2**32 - 1),
    q=st.integers(2, 4),
)
def test_measurements_conserve_probability(d, seed, q):
    rng = np.random.default_rng(seed)
    raw = rng.normal(size=d**q) + 1j * rng.normal(size=d**q)
    s = StateVector(d, q, raw / np.linalg.norm(raw))
    assert bell_probabilities(s, 0, q - 1).sum() == pytest.approx(1, abs=1e-9)
    res = measure_bell_basis(s, q - 1, 0, rng)
    assert np.linalg.norm(res.post_state.amps) == pytest.approx(1, abs=1e-9)
    labels, post = measure_cat_basis(s, list(range(q)), rng)
    assert np.linalg.norm(post.amps) == pytest.approx(1, abs=1e-9)
    assert fidelity_up_to_phase(post, make_cat(d, list(labels))) == pytest.approx(1, abs=1e-9)


# --- fidelity and helpers ---


def test_fidelity_properties():
    s = make_cat(3, [1, 2, 0])
    assert fidelity_up_to_phase(s, s) == pytest.approx(1)
    phased = StateVector(3, 3, s.amps * zeta(3))
    assert fidelity_up_to_phase(s, phased) == pytest.approx(1)
    assert fidelity_up_to_phase(make_bell(4, 0, 0), make_bell(4, 0, 1)) == pytest.approx(0, abs=1e-12)


def test_fidelity_shape_mismatch():
    with pytest.raises(DomainError):
        fidelity_up_to_phase(make_bell(2, 0, 0), make_cat(2, [0, 0, 0]))


def test_state_vector_invariants():
    with pytest.raises(DomainError):
        StateVector(2, 1, [1, 1])
    with pytest.raises(DomainError):
        StateVector(2, 2, [1, 0])
    with pytest.raises(SizeError):
        StateVector(10, 8, np.zeros(1))


def test_amplitudes_are_read_only():
    s = make_bell(2, 0, 0)
    with pytest.raises(ValueError):
        s.amps[0] = 0


def test_permute_and_discard():
    a, b = make_basis_state(3, [2]), make_bell(3, 1, 2)
    s = tensor(a, b)
    swapped = permute(s, [1, 2, 0])
    assert fidelity_up_to_phase(swapped, tensor(b, a)) == pytest.approx(1)
    rest = discard_factor(s, [1, 2], b)
    assert fidelity_up_to_phase(rest, a) == pytest.approx(1)
    with pytest.raises(DomainError):
        discard_factor(make_cat(3, [0, 0, 0]), [1, 2], b)


def test_format_state():
    text = format_state(make_bell(2, 1, 1))
    lines = text.splitlines()
    assert lines[0] == "01 : 0.707106781187,0"
    assert lines[1].startswith("10 : -0.707106781187,")
