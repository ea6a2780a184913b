"""Configuration classes for ion-vqe components."""

from __future__ import annotations

import hashlib
import json
import sys
from dataclasses import asdict, dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any

from ion_vqe.errors import ConfigError, ContractViolation

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


class Mode(Enum):
    """How energies are evaluated."""

    EXACT = "exact"
    SAMPLED = "sampled"

    @staticmethod
    def parse(value: str | Mode) -> Mode:
        """Accept a Mode or its string value."""
        if isinstance(value, Mode):
            return value
        try:
            return Mode(value.lower())
        except ValueError:
            raise ConfigError(f"Unknown mode {value!r} (expected 'exact' or 'sampled')") from None


@dataclass(slots=True)
class TrotterConfig:
    """Product-formula order and step count."""

    order: int = 1
    steps: int = 1

    def __post_init__(self) -> None:
        self.validate()

    def validate(self) -> None:
        if self.steps < 1:
            raise ContractViolation(f"Trotter steps must be >= 1, got {self.steps}")
        if self.order < 1 or (self.order > 1 and self.order % 2):
            raise ContractViolation(f"Trotter order must be 1 or even, got {self.order}")

    def with_order(self, order: int) -> TrotterConfig:
        self.order = order
        self.validate()
        return self

    def with_steps(self, steps: int) -> TrotterConfig:
        self.steps = steps
        self.validate()
        return self


@dataclass(slots=True)
class PassConfig:
    """Which compilation passes run in ``assemble``."""

    order_terms: bool = True
    map_qubits: bool = True
    cancel: bool = True
    convert_xx: bool = True
    encode_zero: bool = True

    def with_order_terms(self, enabled: bool) -> PassConfig:
        self.order_terms = enabled
        return self

    def with_map_qubits(self, enabled: bool) -> PassConfig:
        self.map_qubits = enabled
        return self

    def with_cancel(self, enabled: bool) -> PassConfig:
        self.cancel = enabled
        return self

    def with_convert_xx(self, enabled: bool) -> PassConfig:
        self.convert_xx = enabled
        return self

    def with_encode_zero(self, enabled: bool) -> PassConfig:
        self.encode_zero = enabled
        return self


@dataclass(slots=True)
class SamplingConfig:
    """Shot-based estimation parameters."""

    shots: int = 1000
    spam: tuple[float, float] | None = (0.006, 0.013)
    seed: int = 0
    depolarizing: float = 0.0
    calibration_shots: int = 10_000
    n_bootstrap: int = 500
    workers: int | None = None

    def with_shots(self, shots: int) -> SamplingConfig:
        if shots < 1:
            raise ConfigError(f"shots must be >= 1, got {shots}")
        self.shots = shots
        return self

    def with_spam(self, eps0: float, eps1: float) -> SamplingConfig:
        self.spam = (eps0, eps1)
        return self

    def without_spam(self) -> SamplingConfig:
        self.spam = None
        return self

    def with_seed(self, seed: int) -> SamplingConfig:
        self.seed = seed
        return self

    def with_depolarizing(self, p: float) -> SamplingConfig:
        if not 0.0 <= p < 1.0:
            raise ConfigError(f"depolarizing probability must be in [0, 1), got {p}")
        self.depolarizing = p
        return self

    def with_bootstrap(self, n: int) -> SamplingConfig:
        self.n_bootstrap = n
        return self

    def with_workers(self, workers: int | None) -> SamplingConfig:
        self.workers = workers
        return self


@dataclass(slots=True)
class OptimizerConfig:
    """Nelder-Mead settings."""

    initial_step: float = 0.05
    fatol: float = 1e-7
    xatol: float = 1e-6
    max_iter: int = 4000

    def with_initial_step(self, step: float) -> OptimizerConfig:
        self.initial_step = step
        return self

    def with_fatol(self, fatol: float) -> OptimizerConfig:
        self.fatol = fatol
        return self

    def with_max_iter(self, n: int) -> OptimizerConfig:
        self.max_iter = n
        return self


# ---------------------------------------------------------------------------
# Run configuration (CLI)
# ---------------------------------------------------------------------------


def _bundled_fcidump() -> Path:
    return Path(__file__).parent / "data" / "h2o_sto3g.fcidump"


@dataclass(slots=True)
class RunConfig:
    """Everything one CLI command needs; loaded from TOML, overridden by flags."""

    fcidump: Path = field(default_factory=_bundled_fcidump)
    freeze: list[str] = field(default_factory=list)
    drop: list[str] = field(default_factory=list)
    hfplus: int = 1
    trotter: TrotterConfig = field(default_factory=TrotterConfig)
    passes: PassConfig = field(default_factory=PassConfig)
    mode: Mode = Mode.EXACT
    sampling: SamplingConfig = field(default_factory=SamplingConfig)
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    grid: list[list[float]] = field(default_factory=list)
    out: Path = field(default_factory=lambda: Path("out"))

    # ----- loading -----

    @classmethod
    def from_toml(cls, path: Path | str) -> RunConfig:
        """Load a config file; unknown keys are an error."""
        path = Path(path)
        try:
            with path.open("rb") as fh:
                data = tomllib.load(fh)
        except FileNotFoundError:
            raise ConfigError(f"Config file not found: {path}") from None
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"Invalid TOML in {path}: {exc}") from exc
        cfg = cls()
        cfg.apply_overrides(**data)
        return cfg

    def apply_overrides(self, **values: Any) -> RunConfig:
        """Apply flat key/value settings; ``None`` values are ignored.

        Keys: fcidump, freeze, drop, hfplus, trotter_order, trotter_steps, mode,
        shots, spam, seed, depolarizing, bootstrap, workers, grid, out,
        and the pass switches (order_terms, map_qubits, cancel, convert_xx, encode_zero).
        """
        for key, value in values.items():
            if value is None:
                continue
            if key == "fcidump":
                self.fcidump = Path(value)
            elif key in ("freeze", "drop"):
                setattr(self, key, _as_label_list(value))
            elif key == "hfplus":
                self.hfplus = int(value)
                if self.hfplus < 0:
                    raise ConfigError(f"hfplus must be >= 0, got {value}")
            elif key == "trotter_order":
                self.trotter.with_order(int(value))
            elif key == "trotter_steps":
                self.trotter.with_steps(int(value))
            elif key == "mode":
                self.mode = Mode.parse(value)
            elif key == "shots":
                self.sampling.with_shots(int(value))
            elif key == "spam":
                self._apply_spam(value)
            elif key == "seed":
                self.sampling.with_seed(int(value))
            elif key == "depolarizing":
                self.sampling.with_depolarizing(float(value))
            elif key == "bootstrap":
                self.sampling.with_bootstrap(int(value))
            elif key == "workers":
                self.sampling.with_workers(int(value))
            elif key == "grid":
                self.grid = [[float(x) for x in axis] for axis in value]
            elif key == "out":
                self.out = Path(value)
            elif key in PassConfig.__slots__:
                setattr(self.passes, key, bool(value))
            else:
                raise ConfigError(f"Unknown config key: {key}")
        return self

    def _apply_spam(self, value: Any) -> None:
        if isinstance(value, str):
            if value.lower() == "none":
                self.sampling.without_spam()
                return
            value = value.split(",")
        try:
            eps0, eps1 = (float(v) for v in value)
        except (TypeError, ValueError):
            raise ConfigError(f"spam must be 'e0,e1' or 'none', got {value!r}") from None
        self.sampling.with_spam(eps0, eps1)

    # ----- provenance -----

    def to_dict(self) -> dict[str, Any]:
        """JSON-ready form (paths as strings, enums as values)."""
        data = asdict(self)
        data["fcidump"] = str(self.fcidump)
        data["out"] = str(self.out)
        data["mode"] = self.mode.value
        if self.sampling.spam is not None:
            data["sampling"]["spam"] = list(self.sampling.spam)
        return data

    def digest(self) -> str:
        """Short SHA-256 of the canonical JSON form; embedded in every output."""
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]


def _as_label_list(value: Any) -> list[str]:
    if isinstance(value, str):
        return [v.strip() for v in value.split(",") if v.strip()]
    return [str(v) for v in value]
