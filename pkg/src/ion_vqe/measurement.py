"""Measurement bases, SPAM correction, energy estimators and bootstrap errors.

A :class:`MeasurementBasis` rotates every qubit so that a group of
qubit-wise commuting Pauli terms becomes diagonal::

    Z   no rotation
    X   H
    Y   Sdg · H

A term's expectation is the parity ``(−1)^popcount(i & support)`` averaged
over the (SPAM-corrected) outcome distribution, times
``(−1)^popcount(flip_mask & support)`` for the circuit's Pauli frame.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import warnings
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
from scipy.optimize import OptimizeWarning, curve_fit

from ion_vqe.circuit import Circuit, Gate
from ion_vqe.errors import ContractViolation, FitError, MissingBasisError
from ion_vqe.pauli import QubitHamiltonian, masks_to_factors
from ion_vqe.simulator import (
    SeedLike,
    ShotHistogram,
    SpamCalibration,
    SpamModel,
    outcome_probabilities,
    parity,
    sample_shots,
    seed_record,
)

log = logging.getLogger("ion_vqe.measurement")

DEFAULT_BOOTSTRAP = 500


# ---------------------------------------------------------------------------
# Bases
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MeasurementBasis:
    basis_id: int
    rotations: tuple[str, ...]
    covered_terms: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if any(r not in ("X", "Y", "Z") for r in self.rotations):
            raise ContractViolation(f"Basis rotations must be X, Y or Z, got {self.rotations}")

    @property
    def n_qubits(self) -> int:
        return len(self.rotations)

    def rotation_gates(self) -> list[Gate]:
        gates: list[Gate] = []
        for q, r in enumerate(self.rotations):
            if r == "X":
                gates.append(Gate.h(q))
            elif r == "Y":
                gates.extend((Gate.sdg(q), Gate.h(q)))
        return gates

    def flip_mask(self, circuit: Circuit) -> int:
        """Qubits whose measured bit the circuit's Pauli frame inverts in this basis."""
        fx, fz = circuit.flip_mask, circuit.phase_mask
        mask = 0
        for q, r in enumerate(self.rotations):
            x, z = (fx >> q) & 1, (fz >> q) & 1
            flipped = {"Z": x, "X": z, "Y": x ^ z}[r]
            mask |= flipped << q
        return mask

    def label(self) -> str:
        return "".join(self.rotations)


def group_terms(hamiltonian: QubitHamiltonian) -> list[MeasurementBasis]:
    """Greedy qubit-wise commuting partition, terms taken by descending |coefficient|."""
    order = sorted(range(len(hamiltonian.terms)), key=lambda i: -abs(hamiltonian.terms[i].coefficient))
    groups: list[tuple[dict[int, str], list[int]]] = []
    for i in order:
        factors = hamiltonian.terms[i].factors
        for letters, members in groups:
            if all(letters.get(q, p) == p for q, p in factors.items()):
                letters.update(factors)
                members.append(i)
                break
        else:
            groups.append((dict(factors), [i]))
    bases = [
        MeasurementBasis(
            basis_id=k,
            rotations=tuple(letters.get(q, "Z") for q in range(hamiltonian.n_qubits)),
            covered_terms=tuple(sorted(members)),
        )
        for k, (letters, members) in enumerate(groups)
    ]
    log.debug("Grouped %d terms into %d bases", len(hamiltonian.terms), len(bases))
    return bases


# ---------------------------------------------------------------------------
# Estimators
# ---------------------------------------------------------------------------


def spam_correct(hist: ShotHistogram, spam: SpamModel) -> np.ndarray:
    """Frequencies multiplied by the inverse confusion matrix, one qubit at a time."""
    return spam.correct(hist.frequencies())


def _as_model(spam: SpamModel | SpamCalibration | None) -> SpamModel | None:
    return spam.model() if isinstance(spam, SpamCalibration) else spam


def basis_energy(
    probs: np.ndarray,
    hamiltonian: QubitHamiltonian,
    basis: MeasurementBasis,
    flip_mask: int = 0,
) -> float:
    """Σ coefficient · parity over the terms this basis covers."""
    idx = np.arange(probs.shape[0], dtype=np.int64)
    total = 0.0
    for i in basis.covered_terms:
        term = hamiltonian.terms[i]
        support = term.x | term.z
        value = float(np.dot(probs, 1 - 2 * parity(idx, support)))
        if (flip_mask & support).bit_count() & 1:
            value = -value
        total += term.coefficient * value
    return total


def estimate_energy(
    histograms: Sequence[ShotHistogram],
    hamiltonian: QubitHamiltonian,
    spam: SpamModel | SpamCalibration | None = None,
    *,
    bases: Sequence[MeasurementBasis] | None = None,
) -> float:
    """Hamiltonian constant plus the corrected parity expectation of every term."""
    bases = group_terms(hamiltonian) if bases is None else bases
    model = _as_model(spam)
    by_id = {h.basis_id: h for h in histograms}
    energy = hamiltonian.constant
    for basis in bases:
        hist = by_id.get(basis.basis_id)
        if hist is None:
            raise MissingBasisError(basis.basis_id)
        probs = spam_correct(hist, model) if model is not None else hist.frequencies()
        energy += basis_energy(probs, hamiltonian, basis, hist.flip_mask)
    return energy


def estimate_energy_exact(
    circuit: Circuit,
    theta: Sequence[float],
    hamiltonian: QubitHamiltonian,
    *,
    bases: Sequence[MeasurementBasis] | None = None,
) -> float:
    """The basis-by-basis estimator evaluated on exact outcome probabilities."""
    bases = group_terms(hamiltonian) if bases is None else bases
    energy = hamiltonian.constant
    for basis in bases:
        probs = outcome_probabilities(circuit, theta, basis)
        energy += basis_energy(probs, hamiltonian, basis, basis.flip_mask(circuit))
    return energy


def measure_all(
    circuit: Circuit,
    theta: Sequence[float],
    bases: Sequence[MeasurementBasis],
    n_shots: int,
    spam: SpamModel | None,
    seed: SeedLike,
    *,
    depolarizing: float = 0.0,
) -> list[ShotHistogram]:
    """One histogram per basis, each drawn from its own spawned seed."""
    root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    children = root.spawn(len(bases))
    return [
        sample_shots(circuit, theta, basis, n_shots, spam, child, depolarizing=depolarizing)
        for basis, child in zip(bases, children, strict=True)
    ]


# ---------------------------------------------------------------------------
# Bootstrap
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EnergyEstimate:
    """Energy in Hartree with its 1σ bootstrap uncertainty."""

    mean: float
    sigma: float = 0.0
    n_bootstrap: int = 0
    inputs: tuple[str, ...] = ()
    seed: tuple[int, ...] = ()
    point: float | None = None
    replicates: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not math.isfinite(self.mean):
            raise ContractViolation(f"Energy estimate is not finite: {self.mean}")
        if not self.sigma >= 0:
            raise ContractViolation(f"Energy sigma must be >= 0, got {self.sigma}")

    @classmethod
    def exact(cls, value: float) -> EnergyEstimate:
        return cls(mean=float(value), point=float(value))

    def to_dict(self) -> dict[str, Any]:
        return {
            "mean": self.mean,
            "sigma": self.sigma,
            "n_bootstrap": self.n_bootstrap,
            "point": self.point,
            "inputs": list(self.inputs),
            "seed": list(self.seed),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def write_replicates_csv(self, path: Path | str) -> None:
        if self.replicates is None:
            raise ContractViolation("Estimate was made without keeping bootstrap replicates")
        with Path(path).open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["replicate", "energy"])
            writer.writerows((i, repr(float(e))) for i, e in enumerate(self.replicates))


def _resampled(hist: ShotHistogram, rng: np.random.Generator) -> ShotHistogram:
    freq = hist.frequencies()
    return hist.with_counts(rng.multinomial(hist.n_shots, freq / freq.sum()))


def bootstrap(
    histograms: Sequence[ShotHistogram],
    hamiltonian: QubitHamiltonian,
    spam: SpamModel | SpamCalibration | None = None,
    n: int = DEFAULT_BOOTSTRAP,
    seed: SeedLike = 0,
    *,
    workers: int | None = None,
    bases: Sequence[MeasurementBasis] | None = None,
    keep_replicates: bool = False,
) -> EnergyEstimate:
    """Empirical bootstrap of the energy.

    Every replicate redraws each histogram at its original size and, when
    raw SPAM calibration counts are given, redraws those independently.
    Results do not depend on ``workers``: replicate r always uses the r-th
    spawned seed.
    """
    if n < 2:
        raise ContractViolation(f"bootstrap needs n >= 2, got {n}")
    bases = group_terms(hamiltonian) if bases is None else bases
    point = estimate_energy(histograms, hamiltonian, spam, bases=bases)
    root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)

    def replicate(child: np.random.SeedSequence) -> float:
        rng = np.random.default_rng(child)
        drawn = [_resampled(h, rng) for h in histograms]
        model = spam.resample(rng).model() if isinstance(spam, SpamCalibration) else spam
        return estimate_energy(drawn, hamiltonian, model, bases=bases)

    children = root.spawn(n)
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            values = list(pool.map(replicate, children))
    else:
        values = [replicate(c) for c in children]
    reps = np.asarray(values)
    estimate = EnergyEstimate(
        mean=float(reps.mean()),
        sigma=float(reps.std(ddof=1)),
        n_bootstrap=n,
        inputs=tuple(f"basis{h.basis_id}:{h.n_shots}" for h in histograms),
        seed=tuple(seed_record(root)),
        point=point,
        replicates=reps if keep_replicates else None,
    )
    log.debug("Bootstrap: %.6f ± %.6f Ha from %d replicates", estimate.mean, estimate.sigma, n)
    return estimate


# ---------------------------------------------------------------------------
# XX parity calibration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CalibrationFit:
    """Fitted scale k of Π(Θ) = sin(2kΘ)."""

    k: float
    k_stderr: float
    thetas: tuple[float, ...]
    parities: tuple[float, ...]
    n_shots: int | None
    seed: tuple[int, ...] = ()

    def to_dict(self) -> dict[str, Any]:
        return {
            "k": self.k,
            "k_stderr": self.k_stderr,
            "thetas": list(self.thetas),
            "parities": list(self.parities),
            "n_shots": self.n_shots,
            "seed": list(self.seed),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def parity_circuit(theta: float, k: float = 1.0) -> Circuit:
    """Two XX(kΘ) pulses on |00⟩, then the analysis rotations (parity = sin 2kΘ)."""
    gates = (
        Gate.xx(0, 1, k * theta),
        Gate.xx(0, 1, k * theta),
        Gate.s(1),
        Gate.h(0),
        Gate.h(1),
    )
    return Circuit(2, gates)


def _initial_k(thetas: np.ndarray, parities: np.ndarray) -> float:
    nonzero = thetas != 0
    u = np.abs(thetas[nonzero])
    v = parities[nonzero] * np.sign(thetas[nonzero])
    order = np.argsort(u, kind="stable")
    u, v = u[order], v[order]
    for i in range(len(u) - 1):
        if v[i] > 0 >= v[i + 1]:
            zero = u[i] + (u[i + 1] - u[i]) * v[i] / (v[i] - v[i + 1])
            return math.pi / (2 * zero)
    peak = u[int(np.argmax(np.abs(v)))]
    return math.pi / (4 * peak)


def parity_calibration(
    thetas: Sequence[float],
    n_shots: int | None = 1000,
    spam: SpamModel | None = None,
    seed: SeedLike = 0,
    *,
    true_k: float = 1.0,
) -> CalibrationFit:
    """Simulate the Θ scan, form P00 + P11 − P01 − P10 and least-squares fit sin(2kΘ).

    ``n_shots=None`` uses exact probabilities.
    """
    grid = np.asarray(thetas, dtype=float)
    if grid.size < 5:
        raise ContractViolation(f"Parity calibration needs >= 5 scan points, got {grid.size}")
    if not np.any(grid):
        raise ContractViolation("Parity calibration scan must contain a nonzero angle")
    root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    children = root.spawn(grid.size)
    basis = MeasurementBasis(0, ("Z", "Z"))
    idx = np.arange(4, dtype=np.int64)
    signs = 1 - 2 * parity(idx, 0b11)

    values = []
    for theta, child in zip(grid, children, strict=True):
        circuit = parity_circuit(float(theta), true_k)
        if n_shots is None:
            probs = outcome_probabilities(circuit, (), basis)
            if spam is not None:
                probs = spam.apply(probs)
        else:
            probs = sample_shots(circuit, (), basis, n_shots, spam, child).frequencies()
        if spam is not None:
            probs = spam.correct(probs)
        values.append(float(np.dot(probs, signs)))
    parities = np.asarray(values)

    k0 = _initial_k(grid, parities)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", OptimizeWarning)
            popt, pcov = curve_fit(lambda t, k: np.sin(2 * k * t), grid, parities, p0=[k0])
    except (RuntimeError, ValueError) as exc:
        raise FitError(f"Parity fit did not converge from k0={k0:.4f}: {exc}") from exc
    k = float(popt[0])
    stderr = float(np.sqrt(pcov[0, 0])) if np.isfinite(pcov[0, 0]) else float("inf")
    if not math.isfinite(k):
        raise FitError(f"Parity fit returned k={k}")
    log.info("Parity calibration: k = %.6f ± %.2e (k0 = %.4f)", k, stderr, k0)
    return CalibrationFit(
        k=k,
        k_stderr=stderr,
        thetas=tuple(float(t) for t in grid),
        parities=tuple(float(p) for p in parities),
        n_shots=n_shots,
        seed=tuple(seed_record(root)),
    )


def describe_bases(bases: Sequence[MeasurementBasis], hamiltonian: QubitHamiltonian) -> list[dict[str, Any]]:
    """JSON-ready summary of the measurement plan."""
    return [
        {
            "basis_id": b.basis_id,
            "rotations": b.label(),
            "terms": [
                {"pauli": masks_to_factors(hamiltonian.terms[i].x, hamiltonian.terms[i].z),
                 "coefficient": hamiltonian.terms[i].coefficient}
                for i in b.covered_terms
            ],
        }
        for b in bases
    ]
