"""Tests for the excitation gate templates against dense matrix exponentials."""

import itertools
import math

import numpy as np
import pytest
from scipy.linalg import expm

from ion_vqe.circuit import Angle, GateCounts, count_gates
from ion_vqe.errors import ContractViolation
from ion_vqe.pauli import excitation_generator
from ion_vqe.simulator import circuit_unitary, run_exact
from ion_vqe.synthesis import chain_xx, synth_bosonic, synth_nonbosonic, synth_pauli_exponential
from tests.helpers import pauli_matrix, pauli_sum_matrix, phase_distance

RAISE = np.array([[0, 0], [1, 0]], dtype=complex)  # |1⟩⟨0|


def _on(matrix: np.ndarray, q: int, n: int) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for k in reversed(range(n)):
        out = np.kron(out, matrix if k == q else np.eye(2))
    return out


class TestBosonic:
    """Two-XX pair excitation."""

    @pytest.mark.parametrize("j,k,n", [(0, 1, 2), (1, 0, 2), (0, 2, 3), (2, 1, 3)])
    @pytest.mark.parametrize("theta", [0.0, 0.3, -1.1])
    def test_matches_exponential(self, j, k, n, theta):
        circuit = synth_bosonic(j, k, 0, scale=0.5, n_qubits=n)
        hop = _on(RAISE, j, n) @ _on(RAISE.T, k, n)
        expected = expm(theta * 0.5 * (hop - hop.T))
        assert phase_distance(circuit_unitary(circuit, [theta]), expected) < 1e-10

    def test_gate_count(self):
        counts = count_gates(synth_bosonic(0, 1, 0))
        assert counts.xx_small_angle == 2
        assert counts.cnot == 0

    def test_same_qubit(self):
        with pytest.raises(ContractViolation):
            synth_bosonic(1, 1, 0)

    def test_pair_transfer(self):
        # θ = π/2 moves the excitation from qubit k to qubit j completely
        circuit = synth_bosonic(1, 0, 0, n_qubits=2)
        prep = circuit_unitary(circuit, [math.pi / 2])[:, 0b01]
        assert abs(prep[0b10]) == pytest.approx(1.0)

    @pytest.mark.parametrize("seed", range(100))
    def test_random_instances(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 8))
        j, k = (int(q) for q in rng.choice(n, size=2, replace=False))
        pid = int(rng.integers(3))
        scale = float(rng.uniform(-1.5, 1.5))
        theta = rng.uniform(-math.pi, math.pi, size=3)
        circuit = synth_bosonic(j, k, pid, scale=scale, n_qubits=n, n_parameters=3)
        hop = _on(RAISE, j, n) @ _on(RAISE.T, k, n)
        expected = expm(theta[pid] * scale * (hop - hop.T))
        assert phase_distance(circuit_unitary(circuit, list(theta)), expected) < 1e-10


class TestNonBosonic:
    """13-CNOT / 8-Rz double excitation."""

    CASES = [
        (3, 2, 1, 0),
        (0, 1, 2, 3),
        (2, 3, 0, 1),
        (1, 3, 0, 2),
        (5, 4, 1, 0),
        (5, 3, 2, 0),
        (4, 2, 3, 0),
    ]

    @pytest.mark.parametrize("qubits", CASES)
    @pytest.mark.parametrize("theta", [0.4, -0.9])
    def test_matches_exponential(self, qubits, theta):
        n = max(qubits) + 1
        circuit = synth_nonbosonic(qubits, 0, scale=0.75)
        gen = pauli_sum_matrix(excitation_generator(*qubits, n), n)
        expected = expm(theta * 0.75 * gen)
        assert phase_distance(circuit_unitary(circuit, [theta]), expected) < 1e-9

    def test_random_orderings(self):
        rng = np.random.default_rng(7)
        for _ in range(10):
            qubits = tuple(int(q) for q in rng.choice(6, size=4, replace=False))
            gen = pauli_sum_matrix(excitation_generator(*qubits, 6), 6)
            circuit = synth_nonbosonic(qubits, 1, n_qubits=6, n_parameters=2)
            theta = [0.0, float(rng.normal())]
            assert phase_distance(circuit_unitary(circuit, theta), expm(theta[1] * gen)) < 1e-9

    @pytest.mark.parametrize("seed", range(100))
    def test_random_instances(self, seed):
        rng = np.random.default_rng(1000 + seed)
        n = int(rng.integers(4, 9))
        qubits = tuple(int(q) for q in rng.choice(n, size=4, replace=False))
        pid = int(rng.integers(3))
        scale = float(rng.uniform(-1.5, 1.5))
        theta = rng.uniform(-math.pi, math.pi, size=3)
        circuit = synth_nonbosonic(qubits, pid, scale=scale, n_qubits=n, n_parameters=3)
        gen = pauli_sum_matrix(excitation_generator(*qubits, n), n)
        expected = expm(theta[pid] * scale * gen)
        assert phase_distance(circuit_unitary(circuit, list(theta)), expected) < 1e-10

    def test_gate_counts(self):
        circuit = synth_nonbosonic((3, 2, 1, 0), 0)
        counts = count_gates(circuit)
        assert counts.cnot == 13
        assert sum(1 for g in circuit.gates if g.name == "rz") == 8

    def test_jw_ladder_adds_cnots(self):
        # two Z-string qubits, each CNOT-ed in and out
        assert count_gates(synth_nonbosonic((5, 3, 2, 0), 0)).cnot == 13 + 2 * 2

    def test_repeated_qubit(self):
        with pytest.raises(ContractViolation, match="four distinct"):
            synth_nonbosonic((0, 1, 1, 2), 0)


class TestPauliExponential:
    """Single Pauli-string rotations."""

    @pytest.mark.parametrize(
        "pauli",
        [{0: "X"}, {1: "Z"}, {0: "X", 2: "Y", 3: "Z"}, {0: "Y", 1: "Y"}, {0: "Z", 1: "Z", 2: "X"}],
    )
    def test_matches_exponential(self, pauli):
        n = max(pauli) + 1
        circuit = synth_pauli_exponential(pauli, 0.7)
        expected = expm(-0.35j * pauli_matrix(pauli, n))
        assert phase_distance(circuit_unitary(circuit, []), expected) < 1e-10

    def test_parameterized(self):
        circuit = synth_pauli_exponential({0: "X", 1: "X"}, Angle.parameter(2, 0.5))
        assert circuit.n_parameters == 3

    def test_target_must_be_in_support(self):
        with pytest.raises(ContractViolation, match="Target"):
            synth_pauli_exponential({0: "X"}, 0.1, target=1)

    def test_identity_rejected(self):
        with pytest.raises(ContractViolation):
            synth_pauli_exponential({0: "I"}, 0.1)


class TestChainXX:
    """Repeated small-angle XX pulses."""

    def test_fifty_steps_make_a_full_entangler(self):
        state = run_exact(chain_xx(0, 1, 50, math.pi / 100), [])
        expected = np.array([1, 0, 0, -1j]) / math.sqrt(2)
        assert np.allclose(state.amplitudes, expected, atol=1e-12)

    def test_counts(self):
        assert count_gates(chain_xx(0, 1, 5, 0.1)) == GateCounts(xx_small_angle=5)
        assert len(chain_xx(0, 1, 0, 0.1)) == 0

    @pytest.mark.parametrize("args", [(0, 1, -1), (1, 1, 2)])
    def test_invalid(self, args):
        with pytest.raises(ContractViolation):
            chain_xx(*args, 0.1)


@pytest.mark.parametrize("p,q,r,s", list(itertools.permutations(range(4)))[:6])
def test_generator_is_anti_hermitian(p, q, r, s):
    gen = pauli_sum_matrix(excitation_generator(p, q, r, s, 4), 4)
    assert np.allclose(gen, -gen.conj().T)
