"""Dense state-vector simulation, readout (SPAM) noise and shot sampling.

Amplitude index ``i`` holds basis state ``|b_{n-1} … b_1 b_0⟩`` with
``b_q = (i >> q) & 1`` (qubit 0 least significant). Bitstring labels in
histograms are written qubit-first: character ``q`` is the bit of qubit ``q``.

SPAM confusion matrix of one qubit (columns: prepared 0, prepared 1)::

    M = | 1 − ε0    ε1   |        ε0 = P(read 1 | prepared 0)
        |   ε0    1 − ε1 |        ε1 = P(read 0 | prepared 1)

and the register matrix is ``M_{n−1} ⊗ … ⊗ M_0``; it is applied and inverted
one tensor axis at a time.
"""

from __future__ import annotations

import json
import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any

import numpy as np

from ion_vqe.circuit import CNOT, H, RZ, SDG, XX, Circuit, Gate, S, X
from ion_vqe.errors import ContractViolation, SingularConfusionError
from ion_vqe.pauli import QubitHamiltonian

if TYPE_CHECKING:
    from ion_vqe.measurement import MeasurementBasis

log = logging.getLogger("ion_vqe.simulator")

MAX_QUBITS = 20
NORM_TOL = 1e-10
DEPOLARIZING_TRAJECTORIES = 32

SeedLike = int | np.random.SeedSequence | None

_FIXED = {
    H: np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2),
    S: np.array([[1, 0], [0, 1j]], dtype=complex),
    SDG: np.array([[1, 0], [0, -1j]], dtype=complex),
    X: np.array([[0, 1], [1, 0]], dtype=complex),
}


# ---------------------------------------------------------------------------
# State vectors
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StateVector:
    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        if self.amplitudes.shape != (1 << self.n_qubits,):
            raise ContractViolation(
                f"{self.amplitudes.shape[0]} amplitudes for {self.n_qubits} qubits"
            )

    @classmethod
    def zero(cls, n_qubits: int) -> StateVector:
        amps = np.zeros(1 << n_qubits, dtype=complex)
        amps[0] = 1.0
        return cls(n_qubits, amps)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def overlap(self, other: StateVector) -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))


def _indices(n_qubits: int) -> np.ndarray:
    return np.arange(1 << n_qubits, dtype=np.int64)


def _broadcast(vec: np.ndarray, psi: np.ndarray) -> np.ndarray:
    return vec.reshape((-1,) + (1,) * (psi.ndim - 1))


def apply_gate(psi: np.ndarray, gate: Gate, theta: Sequence[float], n_qubits: int) -> np.ndarray:
    """Apply one gate to a state (or a stack of states along axis 1)."""
    if gate.name in _FIXED:
        return _apply_single(psi, _FIXED[gate.name], gate.qubits[0], n_qubits)
    idx = _indices(n_qubits)
    if gate.name == RZ:
        alpha = gate.angle.resolve(theta)
        (q,) = gate.qubits
        bit = (idx >> q) & 1
        phase = np.where(bit, np.exp(0.5j * alpha), np.exp(-0.5j * alpha))
        return psi * _broadcast(phase, psi)
    if gate.name == CNOT:
        c, t = gate.qubits
        return psi[idx ^ (((idx >> c) & 1) << t)]
    if gate.name == XX:
        phi = gate.angle.resolve(theta)
        i, j = gate.qubits
        mask = (1 << i) | (1 << j)
        return math.cos(phi / 2) * psi - 1j * math.sin(phi / 2) * psi[idx ^ mask]
    raise ContractViolation(f"Cannot simulate gate {gate.name!r}")


def _apply_single(psi: np.ndarray, matrix: np.ndarray, q: int, n_qubits: int) -> np.ndarray:
    shape = psi.shape
    view = psi.reshape(1 << (n_qubits - 1 - q), 2, 1 << q, -1)
    out = np.einsum("ij,ajbm->aibm", matrix, view)
    return out.reshape(shape)


def apply_pauli(psi: np.ndarray, x: int, z: int, n_qubits: int) -> np.ndarray:
    """X^x · Z^z applied to the state (global phase ignored)."""
    idx = _indices(n_qubits)
    if z:
        psi = psi * _broadcast(1 - 2 * parity(idx, z), psi)
    if x:
        psi = psi[idx ^ x]
    return psi


def parity(idx: np.ndarray, mask: int) -> np.ndarray:
    """popcount(idx & mask) mod 2, elementwise."""
    out = np.zeros_like(idx)
    q = 0
    while mask >> q:
        if (mask >> q) & 1:
            out ^= (idx >> q) & 1
        q += 1
    return out


def _check_register(circuit: Circuit) -> None:
    if circuit.n_qubits > MAX_QUBITS:
        raise ContractViolation(f"{circuit.n_qubits} qubits exceed the {MAX_QUBITS}-qubit simulator cap")


def evolve(circuit: Circuit, theta: Sequence[float], psi: np.ndarray, *, apply_frame: bool = True) -> np.ndarray:
    circuit.check_parameters(theta)
    _check_register(circuit)
    n = circuit.n_qubits
    for gate in circuit.gates:
        psi = apply_gate(psi, gate, theta, n)
    if apply_frame:
        psi = apply_pauli(psi, circuit.flip_mask, circuit.phase_mask, n)
    return psi


def run_exact(circuit: Circuit, theta: Sequence[float], *, apply_frame: bool = True) -> StateVector:
    """Evolve |0…0⟩ through the circuit; the Pauli frame is applied last."""
    psi = evolve(circuit, theta, StateVector.zero(circuit.n_qubits).amplitudes, apply_frame=apply_frame)
    state = StateVector(circuit.n_qubits, psi)
    if abs(state.norm() - 1.0) > NORM_TOL:
        raise ContractViolation(f"State norm drifted to {state.norm():.15f}")
    return state


def circuit_unitary(circuit: Circuit, theta: Sequence[float], *, apply_frame: bool = True) -> np.ndarray:
    """Dense 2ⁿ×2ⁿ unitary (columns are images of basis states)."""
    dim = 1 << circuit.n_qubits
    return evolve(circuit, theta, np.eye(dim, dtype=complex), apply_frame=apply_frame)


def expectation(state: StateVector, hamiltonian: QubitHamiltonian) -> float:
    """⟨ψ|H|ψ⟩ in Hartree."""
    if state.n_qubits != hamiltonian.n_qubits:
        raise ContractViolation(
            f"State on {state.n_qubits} qubits, Hamiltonian on {hamiltonian.n_qubits}"
        )
    return hamiltonian.expectation(state.amplitudes)


# ---------------------------------------------------------------------------
# SPAM
# ---------------------------------------------------------------------------


def _per_axis(probs: np.ndarray, matrices: Sequence[np.ndarray]) -> np.ndarray:
    n = len(matrices)
    t = np.asarray(probs, dtype=float).reshape((2,) * n)
    for q, m in enumerate(matrices):
        axis = n - 1 - q
        t = np.moveaxis(np.tensordot(m, t, axes=([1], [axis])), 0, axis)
    return t.reshape(-1)


@dataclass(frozen=True)
class SpamModel:
    """Independent per-qubit readout confusion."""

    eps0: np.ndarray
    eps1: np.ndarray

    def __post_init__(self) -> None:
        e0 = np.asarray(self.eps0, dtype=float).reshape(-1)
        e1 = np.asarray(self.eps1, dtype=float).reshape(-1)
        if e0.shape != e1.shape:
            raise ContractViolation("eps0 and eps1 must have one entry per qubit")
        if np.any((e0 < 0) | (e0 > 1) | (e1 < 0) | (e1 > 1)):
            raise ContractViolation("SPAM error rates must lie in [0, 1]")
        object.__setattr__(self, "eps0", e0)
        object.__setattr__(self, "eps1", e1)

    @classmethod
    def uniform(cls, n_qubits: int, eps0: float, eps1: float) -> SpamModel:
        if not (0 <= eps0 < 0.5 and 0 <= eps1 < 0.5):
            raise ContractViolation(f"SPAM rates must be in [0, 0.5), got ({eps0}, {eps1})")
        return cls(np.full(n_qubits, eps0), np.full(n_qubits, eps1))

    @property
    def n_qubits(self) -> int:
        return int(self.eps0.shape[0])

    def qubit_matrix(self, q: int) -> np.ndarray:
        e0, e1 = self.eps0[q], self.eps1[q]
        return np.array([[1 - e0, e1], [e0, 1 - e1]])

    def qubit_inverse(self, q: int) -> np.ndarray:
        e0, e1 = self.eps0[q], self.eps1[q]
        det = 1.0 - e0 - e1
        if det <= 0:
            raise SingularConfusionError(q)
        return np.array([[1 - e1, -e1], [-e0, 1 - e0]]) / det

    def matrix(self) -> np.ndarray:
        """Dense register matrix; for tests and small registers."""
        out = np.ones((1, 1))
        for q in reversed(range(self.n_qubits)):
            out = np.kron(out, self.qubit_matrix(q))
        return out

    def apply(self, probs: np.ndarray) -> np.ndarray:
        self._check(probs)
        return _per_axis(probs, [self.qubit_matrix(q) for q in range(self.n_qubits)])

    def correct(self, probs: np.ndarray) -> np.ndarray:
        """Inverse confusion applied per qubit; negative entries are kept."""
        self._check(probs)
        return _per_axis(probs, [self.qubit_inverse(q) for q in range(self.n_qubits)])

    def _check(self, probs: np.ndarray) -> None:
        if np.shape(probs) != (1 << self.n_qubits,):
            raise ContractViolation(
                f"Distribution of length {np.shape(probs)[0]} for {self.n_qubits}-qubit SPAM model"
            )

    def calibrate(self, n_shots: int, rng: np.random.Generator) -> SpamCalibration:
        """Simulate preparing |0…0⟩ and |1…1⟩ ``n_shots`` times each."""
        return SpamCalibration(
            n_shots=n_shots,
            flips0=rng.binomial(n_shots, self.eps0),
            flips1=rng.binomial(n_shots, self.eps1),
        )

    def to_dict(self) -> dict[str, Any]:
        return {"eps0": self.eps0.tolist(), "eps1": self.eps1.tolist()}


@dataclass(frozen=True)
class SpamCalibration:
    """Raw SPAM characterization counts: flips0[q] reads of 1 after preparing 0, and vice versa."""

    n_shots: int
    flips0: np.ndarray
    flips1: np.ndarray

    def model(self) -> SpamModel:
        return SpamModel(np.asarray(self.flips0) / self.n_shots, np.asarray(self.flips1) / self.n_shots)

    def resample(self, rng: np.random.Generator) -> SpamCalibration:
        model = self.model()
        return SpamCalibration(
            self.n_shots,
            rng.binomial(self.n_shots, model.eps0),
            rng.binomial(self.n_shots, model.eps1),
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "n_shots": self.n_shots,
            "flips0": np.asarray(self.flips0).tolist(),
            "flips1": np.asarray(self.flips1).tolist(),
        }


# ---------------------------------------------------------------------------
# Shots
# ---------------------------------------------------------------------------


def bitstring(index: int, n_qubits: int) -> str:
    return "".join("1" if (index >> q) & 1 else "0" for q in range(n_qubits))


def bitstring_index(label: str) -> int:
    return sum(1 << q for q, ch in enumerate(label) if ch == "1")


@dataclass(frozen=True)
class ShotHistogram:
    """Raw measured counts of one basis group.

    ``flip_mask`` marks the qubits whose bits must be inverted classically
    before parities are formed (from the circuit's Pauli frame).
    """

    basis_id: int
    n_qubits: int
    counts: dict[str, int]
    n_shots: int
    rng_seed: list[int] = field(default_factory=list)
    flip_mask: int = 0
    spam: dict[str, Any] | None = None

    def __post_init__(self) -> None:
        total = sum(self.counts.values())
        if total != self.n_shots:
            raise ContractViolation(f"Histogram counts sum to {total}, expected {self.n_shots}")

    def frequencies(self) -> np.ndarray:
        out = np.zeros(1 << self.n_qubits)
        for label, count in self.counts.items():
            out[bitstring_index(label)] += count
        return out / self.n_shots

    def with_counts(self, counts: np.ndarray) -> ShotHistogram:
        labels = {bitstring(i, self.n_qubits): int(c) for i, c in enumerate(counts) if c}
        return ShotHistogram(
            self.basis_id, self.n_qubits, labels, int(np.sum(counts)),
            self.rng_seed, self.flip_mask, self.spam,
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "basis_id": self.basis_id,
            "n_qubits": self.n_qubits,
            "n_shots": self.n_shots,
            "counts": dict(sorted(self.counts.items())),
            "rng_seed": list(self.rng_seed),
            "flip_mask": self.flip_mask,
            "spam": self.spam,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> ShotHistogram:
        data = json.loads(text)
        return cls(
            basis_id=int(data["basis_id"]),
            n_qubits=int(data["n_qubits"]),
            counts={k: int(v) for k, v in data["counts"].items()},
            n_shots=int(data["n_shots"]),
            rng_seed=[int(s) for s in data.get("rng_seed", [])],
            flip_mask=int(data.get("flip_mask", 0)),
            spam=data.get("spam"),
        )


def seed_record(seed: SeedLike) -> list[int]:
    """JSON-able record of a seed (entropy followed by the spawn key)."""
    if seed is None:
        return []
    if isinstance(seed, np.random.SeedSequence):
        entropy = np.atleast_1d(np.asarray(seed.entropy, dtype=object)).tolist()
        return [*map(int, entropy), *map(int, seed.spawn_key)]
    return [int(seed)]


def outcome_probabilities(
    circuit: Circuit,
    theta: Sequence[float],
    basis: MeasurementBasis,
    *,
    depolarizing: float = 0.0,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """Device-qubit outcome distribution in the basis (Pauli frame not applied)."""
    rotation = Circuit(circuit.n_qubits, tuple(basis.rotation_gates()))
    if depolarizing <= 0.0:
        psi = run_exact(circuit, theta, apply_frame=False).amplitudes
        psi = evolve(rotation, (), psi, apply_frame=False)
        return np.abs(psi) ** 2
    rng = rng or np.random.default_rng()
    n = circuit.n_qubits
    circuit.check_parameters(theta)
    total = np.zeros(1 << n)
    for _ in range(DEPOLARIZING_TRAJECTORIES):
        psi = StateVector.zero(n).amplitudes
        for gate in circuit.gates:
            psi = apply_gate(psi, gate, theta, n)
            if gate.is_entangling and rng.random() < depolarizing:
                x = z = 0
                for q in gate.qubits:
                    x |= int(rng.integers(2)) << q
                    z |= int(rng.integers(2)) << q
                psi = apply_pauli(psi, x, z, n)
        psi = evolve(rotation, (), psi, apply_frame=False)
        total += np.abs(psi) ** 2
    return total / DEPOLARIZING_TRAJECTORIES


def sample_shots(
    circuit: Circuit,
    theta: Sequence[float],
    basis: MeasurementBasis,
    n_shots: int,
    spam: SpamModel | None = None,
    seed: SeedLike = None,
    *,
    depolarizing: float = 0.0,
) -> ShotHistogram:
    """Multinomial shots after the basis change, with optional readout noise."""
    if n_shots < 1:
        raise ContractViolation(f"n_shots must be >= 1, got {n_shots}")
    rng = np.random.default_rng(seed)
    probs = outcome_probabilities(circuit, theta, basis, depolarizing=depolarizing, rng=rng)
    if spam is not None:
        probs = spam.apply(probs)
    probs = np.clip(probs, 0.0, None)
    counts = rng.multinomial(n_shots, probs / probs.sum())
    hist = ShotHistogram(
        basis_id=basis.basis_id,
        n_qubits=circuit.n_qubits,
        counts={},
        n_shots=0,
        rng_seed=seed_record(seed),
        flip_mask=basis.flip_mask(circuit),
        spam=spam.to_dict() if spam is not None else None,
    ).with_counts(counts)
    log.debug("Sampled basis %d: %d shots, %d outcomes", basis.basis_id, n_shots, len(hist.counts))
    return hist
