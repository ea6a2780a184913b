"""Variational loop: energy evaluation, Nelder-Mead minimization, scans and HF+N reports.

Example::

    ham = load_fcidump("h2o_sto3g.fcidump")
    report = convergence_report(ham, 3, Mode.EXACT)
    for row in report.rows:
        print(row.n, row.energy, row.gap)
"""

from __future__ import annotations

import csv
import logging
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import product
from pathlib import Path
from typing import Any

import numpy as np
from scipy.optimize import minimize as scipy_minimize

from ion_vqe.ansatz import AnsatzSpec, build_ucc_ansatz
from ion_vqe.circuit import Circuit, GateCounts, count_gates
from ion_vqe.compiler import assemble
from ion_vqe.config import Mode, OptimizerConfig, PassConfig, SamplingConfig, TrotterConfig
from ion_vqe.errors import ContractViolation, ParameterCountError
from ion_vqe.hamiltonian import FciSolution, SpinOrbitalHamiltonian, fci_ground_state, hf_energy, rank_excitations
from ion_vqe.measurement import EnergyEstimate, MeasurementBasis, bootstrap, estimate_energy, group_terms, measure_all
from ion_vqe.pauli import QubitHamiltonian
from ion_vqe.simulator import SpamCalibration, SpamModel, expectation, run_exact, seed_record

log = logging.getLogger("ion_vqe.vqe")


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Evaluator:
    """Compiled circuit, reduced Hamiltonian and measurement plan of one ansatz."""

    spec: AnsatzSpec
    circuit: Circuit
    hamiltonian: QubitHamiltonian
    mode: Mode
    sampling: SamplingConfig
    bases: tuple[MeasurementBasis, ...] = ()

    @classmethod
    def build(
        cls,
        spec: AnsatzSpec,
        ham: SpinOrbitalHamiltonian,
        mode: Mode | str = Mode.EXACT,
        *,
        trotter: TrotterConfig | None = None,
        passes: PassConfig | None = None,
        sampling: SamplingConfig | None = None,
    ) -> Evaluator:
        mode = Mode.parse(mode)
        circuit = assemble(spec, trotter, passes)
        qh = spec.qubit_hamiltonian(ham)
        bases = tuple(group_terms(qh)) if mode is Mode.SAMPLED else ()
        return cls(spec, circuit, qh, mode, sampling or SamplingConfig(), bases)

    @property
    def n_parameters(self) -> int:
        return self.circuit.n_parameters

    @property
    def counts(self) -> GateCounts:
        return count_gates(self.circuit)

    def _true_spam(self) -> SpamModel | None:
        if self.sampling.spam is None:
            return None
        eps0, eps1 = self.sampling.spam
        return SpamModel.uniform(self.circuit.n_qubits, eps0, eps1)

    def energy(
        self,
        theta: Sequence[float],
        seed: int | Sequence[int] | None = None,
        *,
        with_error: bool = True,
    ) -> EnergyEstimate:
        """Energy at θ; sampled mode draws fresh shots from ``seed`` (default: config seed)."""
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (self.n_parameters,):
            raise ParameterCountError(self.n_parameters, theta.size)
        if self.mode is Mode.EXACT:
            return EnergyEstimate.exact(expectation(run_exact(self.circuit, theta), self.hamiltonian))

        cfg = self.sampling
        root = np.random.SeedSequence(cfg.seed if seed is None else seed)
        shots_seed, calibration_seed, bootstrap_seed = root.spawn(3)
        true_spam = self._true_spam()
        hists = measure_all(
            self.circuit, theta, self.bases, cfg.shots, true_spam, shots_seed,
            depolarizing=cfg.depolarizing,
        )
        calibration: SpamCalibration | None = None
        if true_spam is not None:
            calibration = true_spam.calibrate(cfg.calibration_shots, np.random.default_rng(calibration_seed))
        if not with_error or not self.bases:
            value = estimate_energy(hists, self.hamiltonian, calibration, bases=self.bases)
            return EnergyEstimate(mean=value, point=value, seed=tuple(seed_record(root)))
        return bootstrap(
            hists, self.hamiltonian, calibration, cfg.n_bootstrap, bootstrap_seed,
            workers=cfg.workers, bases=self.bases,
        )


def energy_at(
    spec: AnsatzSpec,
    theta: Sequence[float],
    mode: Mode | str,
    ham: SpinOrbitalHamiltonian,
    *,
    trotter: TrotterConfig | None = None,
    passes: PassConfig | None = None,
    sampling: SamplingConfig | None = None,
) -> EnergyEstimate:
    """One-shot evaluation (compiles the ansatz on every call)."""
    evaluator = Evaluator.build(spec, ham, mode, trotter=trotter, passes=passes, sampling=sampling)
    return evaluator.energy(theta)


# ---------------------------------------------------------------------------
# Minimization
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TracePoint:
    evaluation: int
    theta: tuple[float, ...]
    energy: float


@dataclass(frozen=True)
class VqeRun:
    """Optimization trace plus the best point found."""

    mode: Mode
    n_parameters: int
    trace: tuple[TracePoint, ...]
    best_theta: tuple[float, ...]
    best_energy: float
    final: EnergyEstimate
    hit_iteration_cap: bool
    counts: GateCounts
    n_qubits: int

    def to_dict(self) -> dict[str, Any]:
        return {
            "mode": self.mode.value,
            "n_parameters": self.n_parameters,
            "n_qubits": self.n_qubits,
            "gate_counts": self.counts.to_dict(),
            "best_theta": list(self.best_theta),
            "best_energy": self.best_energy,
            "final": self.final.to_dict(),
            "hit_iteration_cap": self.hit_iteration_cap,
            "n_evaluations": len(self.trace),
        }

    def write_trace_csv(self, path: Path | str) -> None:
        with Path(path).open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["evaluation", *(f"theta{i}" for i in range(self.n_parameters)), "energy"])
            for point in self.trace:
                writer.writerow([point.evaluation, *map(repr, point.theta), repr(point.energy)])


def minimize(
    evaluator: Evaluator,
    cfg: OptimizerConfig | None = None,
    *,
    x0: Sequence[float] | None = None,
) -> VqeRun:
    """Nelder-Mead from θ = 0 (or ``x0``); every evaluation is recorded in the trace.

    Sampled mode optimizes shot-noisy point estimates with the energy tolerance
    set to half the bootstrap σ at θ = 0, then bootstraps the best point.
    """
    cfg = cfg or OptimizerConfig()
    n = evaluator.n_parameters
    start = np.zeros(n) if x0 is None else np.asarray(x0, dtype=float)
    if start.shape != (n,):
        raise ParameterCountError(n, start.size)

    sampled = evaluator.mode is Mode.SAMPLED
    base_seed = evaluator.sampling.seed
    trace: list[TracePoint] = []

    def objective(theta: np.ndarray) -> float:
        k = len(trace)
        # sampled evaluations each draw fresh shots from (seed, k + 1)
        seed = (base_seed, k + 1) if sampled else None
        value = evaluator.energy(theta, seed, with_error=False).mean
        trace.append(TracePoint(k, tuple(float(t) for t in theta), value))
        return value

    hit_cap = False
    if n == 0:
        objective(start)
    else:
        fatol = cfg.fatol
        if sampled:
            sigma0 = evaluator.energy(np.zeros(n), base_seed).sigma
            fatol = max(sigma0 / 2, cfg.fatol)
            log.info("Sampled optimization: sigma(theta=0) = %.2e Ha, fatol = %.2e", sigma0, fatol)
        simplex = np.vstack([start] + [start + cfg.initial_step * np.eye(n)[i] for i in range(n)])
        result = scipy_minimize(
            objective,
            start,
            method="Nelder-Mead",
            options={
                "initial_simplex": simplex,
                "fatol": fatol,
                "xatol": cfg.xatol,
                "maxiter": cfg.max_iter,
                "maxfev": cfg.max_iter * max(n, 1) * 2,
            },
        )
        hit_cap = not result.success
        if hit_cap:
            log.warning("Nelder-Mead stopped without converging: %s", result.message)

    best = min(trace, key=lambda p: p.energy)
    final = evaluator.energy(best.theta, base_seed) if sampled else EnergyEstimate.exact(best.energy)
    log.info(
        "HF+%d minimum %.6f Ha after %d evaluations", n, final.mean, len(trace),
    )
    return VqeRun(
        mode=evaluator.mode,
        n_parameters=n,
        trace=tuple(trace),
        best_theta=best.theta,
        best_energy=best.energy,
        final=final,
        hit_iteration_cap=hit_cap,
        counts=evaluator.counts,
        n_qubits=evaluator.circuit.n_qubits,
    )


# ---------------------------------------------------------------------------
# Parameter scans
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SurfacePoint:
    theta: tuple[float, ...]
    estimate: EnergyEstimate


def scan_surface(
    evaluator: Evaluator,
    grid: Sequence[Sequence[float]],
    *,
    workers: int | None = None,
) -> list[SurfacePoint]:
    """Energy on the Cartesian product of per-parameter axes, row-major order.

    In sampled mode point i uses the i-th seed spawned from the configured seed,
    so the result does not depend on ``workers``.
    """
    if len(grid) != evaluator.n_parameters:
        raise ParameterCountError(evaluator.n_parameters, len(grid))
    if any(len(axis) == 0 for axis in grid):
        raise ContractViolation("Every grid axis needs at least one value")
    points = [tuple(float(v) for v in p) for p in product(*grid)]
    seed = evaluator.sampling.seed

    def evaluate(i: int) -> SurfacePoint:
        return SurfacePoint(points[i], evaluator.energy(points[i], (seed, 0, i)))

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(evaluate, range(len(points))))
    else:
        results = [evaluate(i) for i in range(len(points))]
    log.info("Scanned %d grid points", len(results))
    return results


def write_surface_csv(points: Sequence[SurfacePoint], path: Path | str, digest: str = "") -> None:
    n = len(points[0].theta) if points else 0
    with Path(path).open("w", newline="") as fh:
        if digest:
            fh.write(f"# config {digest}\n")
        writer = csv.writer(fh)
        writer.writerow([*(f"theta{i}" for i in range(n)), "energy", "sigma"])
        for p in points:
            writer.writerow([*map(repr, p.theta), repr(p.estimate.mean), repr(p.estimate.sigma)])


# ---------------------------------------------------------------------------
# HF+N convergence
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ReportRow:
    n: int
    n_qubits: int
    counts: GateCounts
    energy: float
    sigma: float
    gap: float
    theta: tuple[float, ...] = ()
    hit_iteration_cap: bool = False

    def to_dict(self) -> dict[str, Any]:
        return {
            "n": self.n,
            "n_qubits": self.n_qubits,
            **self.counts.to_dict(),
            "energy": self.energy,
            "sigma": self.sigma,
            "gap": self.gap,
            "theta": list(self.theta),
            "hit_iteration_cap": self.hit_iteration_cap,
        }


@dataclass(frozen=True)
class ConvergenceReport:
    hf_energy: float
    fci_energy: float
    rows: tuple[ReportRow, ...] = field(default_factory=tuple)

    def to_dict(self) -> dict[str, Any]:
        return {
            "hf_energy": self.hf_energy,
            "fci_energy": self.fci_energy,
            "rows": [r.to_dict() for r in self.rows],
        }

    def write_csv(self, path: Path | str, digest: str = "") -> None:
        with Path(path).open("w", newline="") as fh:
            if digest:
                fh.write(f"# config {digest}\n")
            writer = csv.writer(fh)
            writer.writerow(
                ["n", "n_qubits", "cnot", "xx_small_angle", "entangling_total", "energy", "sigma", "gap"]
            )
            for r in self.rows:
                writer.writerow([
                    r.n, r.n_qubits, r.counts.cnot, r.counts.xx_small_angle,
                    r.counts.entangling_total, repr(r.energy), repr(r.sigma), repr(r.gap),
                ])


def convergence_report(
    ham: SpinOrbitalHamiltonian,
    n_max: int,
    mode: Mode | str = Mode.EXACT,
    *,
    trotter: TrotterConfig | None = None,
    passes: PassConfig | None = None,
    sampling: SamplingConfig | None = None,
    optimizer: OptimizerConfig | None = None,
    fci: FciSolution | None = None,
) -> ConvergenceReport:
    """Optimized energy, qubit and gate counts for HF+0 … HF+n_max.

    All rows are nested truncations of one HF+n_max ansatz; each row starts
    from the previous row's optimum (new angles at 0), so exact-mode energies
    never increase with n.
    """
    mode = Mode.parse(mode)
    passes = passes or PassConfig()
    fci = fci or fci_ground_state(ham)
    reference = ham.reference()
    ranked = rank_excitations(fci, reference, n_max)
    if len(ranked) < n_max:
        log.warning("Only %d excitations have nonzero FCI amplitude; stopping at HF+%d", len(ranked), len(ranked))
        n_max = len(ranked)
    full = build_ucc_ansatz(
        ranked, n_max, reference, ham.n_spatial,
        reorder=passes.order_terms, remap=passes.map_qubits,
    )
    rows: list[ReportRow] = []
    warm: tuple[float, ...] = ()
    for n in range(n_max + 1):
        spec = full.truncated(n)
        evaluator = Evaluator.build(spec, ham, mode, trotter=trotter, passes=passes, sampling=sampling)
        run = minimize(evaluator, optimizer, x0=list(warm) + [0.0] * (n - len(warm)))
        energy = run.final.mean
        rows.append(
            ReportRow(
                n=n,
                n_qubits=run.n_qubits,
                counts=run.counts,
                energy=energy,
                sigma=run.final.sigma,
                gap=energy - fci.energy,
                theta=run.best_theta,
                hit_iteration_cap=run.hit_iteration_cap,
            )
        )
        warm = run.best_theta
        log.info("HF+%d: %.6f Ha (gap %+.2f mHa) on %d qubits", n, energy, 1e3 * (energy - fci.energy), run.n_qubits)
    return ConvergenceReport(hf_energy=hf_energy(ham, reference), fci_energy=fci.energy, rows=tuple(rows))
