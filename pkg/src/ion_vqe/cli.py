"""``ion-vqe`` command line.

Subcommands::

    fci           HF and FCI reference energies
    synth         compile HF+N and write the circuit text and gate counts
    vqe           minimize HF+N, write the estimate JSON and the trace CSV
    scan          energy on a parameter grid (CSV)
    report        HF+0..N convergence table (CSV + JSON)
    calibrate     XX parity-calibration fit (JSON)
    gen-fcidump   regenerate the water integrals with pyscf

Settings come from ``--config file.toml`` first, then from flags. Every JSON
artifact embeds the config digest and the seed. Exit codes: 0 success,
1 input error (bad flags included), 2 numerical failure.

Example::

    ion-vqe vqe --hfplus 3 --mode sampled --shots 1000 --seed 7 --out runs/hf3
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from collections.abc import Sequence
from pathlib import Path
from typing import Any, NoReturn

import numpy as np

from ion_vqe import __version__
from ion_vqe.ansatz import AnsatzSpec, build_ucc_ansatz
from ion_vqe.circuit import count_gates
from ion_vqe.compiler import assemble
from ion_vqe.config import RunConfig
from ion_vqe.errors import ConfigError, VqeError, error_for_exit_code
from ion_vqe.hamiltonian import (
    FciSolution,
    SpinOrbitalHamiltonian,
    fci_ground_state,
    hf_energy,
    load_fcidump,
    rank_excitations,
    select_orbitals,
)
from ion_vqe.measurement import describe_bases, parity_calibration
from ion_vqe.simulator import SpamModel
from ion_vqe.vqe import Evaluator, convergence_report, minimize, scan_surface, write_surface_csv

log = logging.getLogger("ion_vqe.cli")


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------


def parse_axis(text: str) -> list[float]:
    """``start:stop:num`` (inclusive linspace) or a comma list of values."""
    try:
        if ":" in text:
            start, stop, num = text.split(":")
            return [float(v) for v in np.linspace(float(start), float(stop), int(num))]
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"Bad grid axis {text!r}; use start:stop:num or v1,v2,...") from None


def _axis_arg(text: str) -> list[float]:
    try:
        return parse_axis(text)
    except ConfigError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


class _Parser(argparse.ArgumentParser):
    """Usage errors raise instead of exiting 2, so they share exit code 1 with other input errors."""

    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        raise error_for_exit_code(1, f"{self.prog}: {message}")


def _common_flags() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", type=Path, help="TOML config file (flags override it)")
    common.add_argument("--fcidump", type=Path, help="integral file (default: bundled H2O/STO-3G)")
    common.add_argument("--freeze", help="comma list of MOs to freeze (index or label, e.g. 1a1)")
    common.add_argument("--drop", help="comma list of MOs to drop (index or label, e.g. 1b2)")
    common.add_argument("--hfplus", type=int, metavar="N", help="ansatz size HF+N")
    common.add_argument("--trotter-order", type=int, help="product formula order (1 or even)")
    common.add_argument("--trotter-steps", type=int, help="Trotter steps")
    common.add_argument("--mode", choices=["exact", "sampled"])
    common.add_argument("--shots", type=int, help="shots per measurement basis")
    common.add_argument("--spam", help="e0,e1 readout error rates, or 'none'")
    common.add_argument("--seed", type=int)
    common.add_argument("--depolarizing", type=float, help="Pauli error rate after entangling gates")
    common.add_argument("--bootstrap", type=int, help="bootstrap replicates")
    common.add_argument("--workers", type=int, help="threads for bootstrap and scans")
    common.add_argument("--no-cancel", dest="cancel", action="store_const", const=False)
    common.add_argument("--no-xx", dest="convert_xx", action="store_const", const=False)
    common.add_argument("--no-encode", dest="encode_zero", action="store_const", const=False)
    common.add_argument("--no-reorder", dest="order_terms", action="store_const", const=False)
    common.add_argument("--no-remap", dest="map_qubits", action="store_const", const=False)
    common.add_argument("--out", type=Path, help="output directory")
    common.add_argument(
        "--log-level", default="WARNING", choices=["DEBUG", "INFO", "WARNING", "ERROR"],
    )
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_flags()
    parser = _Parser(
        prog="ion-vqe",
        description="UCC ansatz compiler and VQE simulator for a trapped-ion gate set",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("fci", parents=[common], help="HF and FCI energies")
    sub.add_parser("synth", parents=[common], help="compile HF+N")
    sub.add_parser("vqe", parents=[common], help="minimize HF+N")
    scan = sub.add_parser("scan", parents=[common], help="energy on a parameter grid")
    scan.add_argument(
        "--grid", action="append", type=_axis_arg, metavar="AXIS",
        help="one per parameter: start:stop:num or v1,v2,...",
    )
    sub.add_parser("report", parents=[common], help="HF+0..N convergence table")
    cal = sub.add_parser("calibrate", parents=[common], help="XX parity calibration")
    cal.add_argument("--thetas", type=_axis_arg, default=parse_axis(f"0:{math.pi / 2}:21"))
    cal.add_argument("--true-k", type=float, default=1.0, help="scale of the simulated gate")
    gen = sub.add_parser("gen-fcidump", parents=[common], help="regenerate H2O integrals (needs pyscf)")
    gen.add_argument("--output", type=Path, help="destination (default: --fcidump or bundled path)")
    return parser


def load_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig.from_toml(args.config) if args.config else RunConfig()
    cfg.apply_overrides(
        fcidump=args.fcidump,
        freeze=args.freeze,
        drop=args.drop,
        hfplus=args.hfplus,
        trotter_order=args.trotter_order,
        trotter_steps=args.trotter_steps,
        mode=args.mode,
        shots=args.shots,
        spam=args.spam,
        seed=args.seed,
        depolarizing=args.depolarizing,
        bootstrap=args.bootstrap,
        workers=args.workers,
        grid=getattr(args, "grid", None),
        out=args.out,
        cancel=args.cancel,
        convert_xx=args.convert_xx,
        encode_zero=args.encode_zero,
        order_terms=args.order_terms,
        map_qubits=args.map_qubits,
    )
    return cfg


# ---------------------------------------------------------------------------
# Shared steps
# ---------------------------------------------------------------------------


def _problem(cfg: RunConfig) -> SpinOrbitalHamiltonian:
    ham = load_fcidump(cfg.fcidump)
    if cfg.freeze or cfg.drop:
        ham = select_orbitals(ham, cfg.freeze, cfg.drop)
    return ham


def _ansatz(cfg: RunConfig, ham: SpinOrbitalHamiltonian, fci: FciSolution | None = None) -> AnsatzSpec:
    reference = ham.reference()
    if cfg.hfplus == 0:
        return build_ucc_ansatz((), 0, reference, ham.n_spatial)
    fci = fci or fci_ground_state(ham)
    ranked = rank_excitations(fci, reference, cfg.hfplus)
    return build_ucc_ansatz(
        ranked, cfg.hfplus, reference, ham.n_spatial,
        reorder=cfg.passes.order_terms, remap=cfg.passes.map_qubits,
    )


def _evaluator(cfg: RunConfig, ham: SpinOrbitalHamiltonian) -> Evaluator:
    return Evaluator.build(
        _ansatz(cfg, ham), ham, cfg.mode,
        trotter=cfg.trotter, passes=cfg.passes, sampling=cfg.sampling,
    )


def _emit(cfg: RunConfig, name: str, payload: dict[str, Any]) -> dict[str, Any]:
    """Write ``<out>/<name>.json`` with digest and seed attached; echo it to stdout."""
    document = {"config_digest": cfg.digest(), "seed": cfg.sampling.seed, **payload}
    text = json.dumps(document, indent=2, sort_keys=True) + "\n"
    cfg.out.mkdir(parents=True, exist_ok=True)
    (cfg.out / f"{name}.json").write_text(text, encoding="utf-8")
    sys.stdout.write(text)
    return document


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_fci(cfg: RunConfig) -> dict[str, Any]:
    ham = _problem(cfg)
    hf = hf_energy(ham, ham.reference())
    fci = fci_ground_state(ham)
    return _emit(cfg, "fci", {
        "hf_energy": hf,
        "fci_energy": fci.energy,
        "correlation_energy": fci.energy - hf,
        "n_spatial": ham.n_spatial,
        "n_electrons": ham.n_electrons,
        "fci_dimension": len(fci.basis),
    })


def cmd_synth(cfg: RunConfig) -> dict[str, Any]:
    ham = _problem(cfg)
    spec = _ansatz(cfg, ham)
    circuit = assemble(spec, cfg.trotter, cfg.passes)
    cfg.out.mkdir(parents=True, exist_ok=True)
    (cfg.out / f"hf{cfg.hfplus}.circuit").write_text(circuit.to_text(), encoding="utf-8")
    (cfg.out / f"hf{cfg.hfplus}.ansatz.json").write_text(
        json.dumps(spec.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return _emit(cfg, "synth", {
        "hfplus": cfg.hfplus,
        "n_qubits": circuit.n_qubits,
        "n_gates": len(circuit),
        "gate_counts": count_gates(circuit).to_dict(),
    })


def cmd_vqe(cfg: RunConfig) -> dict[str, Any]:
    ham = _problem(cfg)
    evaluator = _evaluator(cfg, ham)
    run = minimize(evaluator, cfg.optimizer)
    cfg.out.mkdir(parents=True, exist_ok=True)
    run.write_trace_csv(cfg.out / "trace.csv")
    payload = {"hfplus": cfg.hfplus, **run.to_dict()}
    if evaluator.bases:
        payload["measurement_bases"] = describe_bases(evaluator.bases, evaluator.hamiltonian)
    return _emit(cfg, "vqe", payload)


def cmd_scan(cfg: RunConfig) -> dict[str, Any]:
    ham = _problem(cfg)
    evaluator = _evaluator(cfg, ham)
    grid = cfg.grid or [[0.0]] * evaluator.n_parameters
    points = scan_surface(evaluator, grid, workers=cfg.sampling.workers)
    cfg.out.mkdir(parents=True, exist_ok=True)
    write_surface_csv(points, cfg.out / "scan.csv", cfg.digest())
    best = min(points, key=lambda p: p.estimate.mean)
    return _emit(cfg, "scan", {
        "hfplus": cfg.hfplus,
        "n_points": len(points),
        "best_theta": list(best.theta),
        "best_energy": best.estimate.mean,
    })


def cmd_report(cfg: RunConfig) -> dict[str, Any]:
    ham = _problem(cfg)
    report = convergence_report(
        ham, cfg.hfplus, cfg.mode,
        trotter=cfg.trotter, passes=cfg.passes, sampling=cfg.sampling, optimizer=cfg.optimizer,
    )
    cfg.out.mkdir(parents=True, exist_ok=True)
    report.write_csv(cfg.out / "report.csv", cfg.digest())
    return _emit(cfg, "report", report.to_dict())


def cmd_calibrate(cfg: RunConfig, thetas: Sequence[float], true_k: float = 1.0) -> dict[str, Any]:
    spam = SpamModel.uniform(2, *cfg.sampling.spam) if cfg.sampling.spam is not None else None
    fit = parity_calibration(thetas, cfg.sampling.shots, spam, cfg.sampling.seed, true_k=true_k)
    return _emit(cfg, "calibrate", fit.to_dict())


def cmd_gen_fcidump(cfg: RunConfig, output: Path | None = None) -> dict[str, Any]:
    from ion_vqe.fcidump_gen import generate_h2o

    path = output or cfg.fcidump
    ham = generate_h2o(path)
    return _emit(cfg, "gen_fcidump", {
        "path": str(path),
        "n_spatial": ham.n_spatial,
        "orbital_labels": list(ham.orbital_labels),
        "hf_energy": hf_energy(ham, ham.reference()),
    })


def run(args: argparse.Namespace) -> dict[str, Any]:
    cfg = load_config(args)
    log.debug("Config %s: %s", cfg.digest(), cfg.to_dict())
    match args.command:
        case "fci":
            return cmd_fci(cfg)
        case "synth":
            return cmd_synth(cfg)
        case "vqe":
            return cmd_vqe(cfg)
        case "scan":
            return cmd_scan(cfg)
        case "report":
            return cmd_report(cfg)
        case "calibrate":
            return cmd_calibrate(cfg, args.thetas, args.true_k)
        case "gen-fcidump":
            return cmd_gen_fcidump(cfg, args.output)
    raise ConfigError(f"Unknown command {args.command!r}")


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(
            level=getattr(logging, args.log_level),
            format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        )
        run(args)
    except VqeError as exc:
        log.error("%s", exc)
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code()
    return 0


if __name__ == "__main__":
    sys.exit(main())
