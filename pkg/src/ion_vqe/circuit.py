"""Gate-level circuit IR over {H, S, Sdg, X, Rz, CNOT, XX}.

Gate conventions::

    Rz(α)      = exp(−i α Z / 2)
    XX(φ)      = exp(−i φ X⊗X / 2)        XX(±π/2) is the maximal entangler
    CNOT(c, t) control c, target t

Angles are symbolic: a constant plus a sum of ``coefficient · θ[id]`` terms,
resolved against a parameter vector at simulation time, so one compiled
circuit serves a whole VQE scan. Constant parts are kept modulo 2π in
(−π, π] (global phase is not tracked).

After the filled-as-zero pass a circuit also carries a Pauli *frame*: the
physical state is ``X^classical_flips · Z^phase_flips · U |0…0⟩``. Measured
bits on ``classical_flips`` are inverted classically; ``phase_flips`` matter
only for X/Y-basis measurements.

Text format
-----------

One header block then one gate per line::

    qubits 2
    params 1
    flips 0
    phases
    h 1
    xx 0 1 theta0*0.5
    rz 0 1.5707963267948966,theta0*-1.0

Angle tokens are comma-joined parts: a float constant and/or ``theta<id>*<coeff>``.
"""

from __future__ import annotations

import json
import math
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field, replace
from typing import Any

from ion_vqe.errors import ContractViolation, ParameterCountError

H, S, SDG, X, RZ, CNOT, XX = "h", "s", "sdg", "x", "rz", "cnot", "xx"

_ARITY = {H: 1, S: 1, SDG: 1, X: 1, RZ: 1, CNOT: 2, XX: 2}
_ROTATIONS = frozenset({RZ, XX})
DIAGONAL = frozenset({S, SDG, RZ})
ENTANGLING = frozenset({CNOT, XX})
_INVERSE = {H: H, S: SDG, SDG: S, X: X, CNOT: CNOT}

ANGLE_TOL = 1e-12
TWO_PI = 2.0 * math.pi


def wrap_angle(value: float) -> float:
    """Reduce modulo 2π into (−π, π]."""
    wrapped = math.remainder(value, TWO_PI)
    if wrapped <= -math.pi:
        wrapped += TWO_PI
    return 0.0 if abs(wrapped) < ANGLE_TOL else wrapped


# ---------------------------------------------------------------------------
# Angles
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class Angle:
    """constant + Σ coefficient · θ[parameter_id]."""

    constant: float = 0.0
    terms: tuple[tuple[int, float], ...] = ()

    @classmethod
    def fixed(cls, value: float) -> Angle:
        return cls(wrap_angle(value))

    @classmethod
    def parameter(cls, parameter_id: int, coefficient: float = 1.0) -> Angle:
        return cls(0.0, ((parameter_id, float(coefficient)),))

    @classmethod
    def coerce(cls, value: Angle | float) -> Angle:
        return value if isinstance(value, Angle) else cls.fixed(float(value))

    @property
    def is_parametric(self) -> bool:
        return bool(self.terms)

    @property
    def is_zero(self) -> bool:
        return not self.terms and self.constant == 0.0

    def parameter_ids(self) -> set[int]:
        return {pid for pid, _ in self.terms}

    def resolve(self, theta: Sequence[float]) -> float:
        return self.constant + sum(c * theta[pid] for pid, c in self.terms)

    def scaled(self, factor: float) -> Angle:
        return Angle(wrap_angle(self.constant * factor), tuple((p, c * factor) for p, c in self.terms))

    def __neg__(self) -> Angle:
        return Angle(wrap_angle(-self.constant), tuple((p, -c) for p, c in self.terms))

    def __add__(self, other: Angle) -> Angle:
        merged: dict[int, float] = dict(self.terms)
        for pid, c in other.terms:
            merged[pid] = merged.get(pid, 0.0) + c
        terms = tuple(sorted((p, c) for p, c in merged.items() if abs(c) > ANGLE_TOL))
        return Angle(wrap_angle(self.constant + other.constant), terms)

    def is_close(self, other: Angle, tol: float = 1e-9) -> bool:
        if abs(wrap_angle(self.constant - other.constant)) > tol:
            return False
        mine, theirs = dict(self.terms), dict(other.terms)
        return all(abs(mine.get(p, 0.0) - theirs.get(p, 0.0)) <= tol for p in mine.keys() | theirs.keys())

    # ----- text form -----

    def to_text(self) -> str:
        parts = [f"theta{pid}*{c!r}" for pid, c in self.terms]
        if self.constant or not parts:
            parts.insert(0, repr(self.constant))
        return ",".join(parts)

    @classmethod
    def from_text(cls, token: str) -> Angle:
        constant = 0.0
        terms: list[tuple[int, float]] = []
        for part in token.split(","):
            if part.startswith("theta"):
                pid, _, coeff = part[5:].partition("*")
                terms.append((int(pid), float(coeff) if coeff else 1.0))
            else:
                constant += float(part)
        return cls(wrap_angle(constant), tuple(terms))


# ---------------------------------------------------------------------------
# Gates
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class Gate:
    name: str
    qubits: tuple[int, ...]
    angle: Angle | None = None

    def __post_init__(self) -> None:
        arity = _ARITY.get(self.name)
        if arity is None:
            raise ContractViolation(f"Unknown gate {self.name!r}")
        if len(self.qubits) != arity or len(set(self.qubits)) != arity:
            raise ContractViolation(f"{self.name} needs {arity} distinct qubits, got {self.qubits}")
        if (self.angle is None) == (self.name in _ROTATIONS):
            raise ContractViolation(f"{self.name} angle mismatch: {self.angle}")

    @classmethod
    def h(cls, q: int) -> Gate:
        return cls(H, (q,))

    @classmethod
    def s(cls, q: int) -> Gate:
        return cls(S, (q,))

    @classmethod
    def sdg(cls, q: int) -> Gate:
        return cls(SDG, (q,))

    @classmethod
    def x(cls, q: int) -> Gate:
        return cls(X, (q,))

    @classmethod
    def rz(cls, q: int, angle: Angle | float) -> Gate:
        return cls(RZ, (q,), Angle.coerce(angle))

    @classmethod
    def cnot(cls, control: int, target: int) -> Gate:
        return cls(CNOT, (control, target))

    @classmethod
    def xx(cls, i: int, j: int, angle: Angle | float) -> Gate:
        return cls(XX, (i, j), Angle.coerce(angle))

    @property
    def is_entangling(self) -> bool:
        return self.name in ENTANGLING

    @property
    def is_diagonal(self) -> bool:
        return self.name in DIAGONAL

    def inverse(self) -> Gate:
        if self.angle is not None:
            return replace(self, angle=-self.angle)
        return replace(self, name=_INVERSE[self.name])

    def with_angle(self, angle: Angle) -> Gate:
        return replace(self, angle=angle)

    def to_text(self) -> str:
        head = " ".join([self.name, *map(str, self.qubits)])
        return head if self.angle is None else f"{head} {self.angle.to_text()}"

    @classmethod
    def from_text(cls, line: str) -> Gate:
        fields = line.split()
        name = fields[0].lower()
        arity = _ARITY.get(name)
        if arity is None:
            raise ContractViolation(f"Unknown gate {name!r}")
        qubits = tuple(int(f) for f in fields[1 : 1 + arity])
        angle = Angle.from_text(fields[1 + arity]) if name in _ROTATIONS else None
        return cls(name, qubits, angle)


# ---------------------------------------------------------------------------
# Circuits
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Circuit:
    """Immutable gate list on ``n_qubits`` qubits plus the classical Pauli frame."""

    n_qubits: int
    gates: tuple[Gate, ...] = ()
    classical_flips: frozenset[int] = field(default_factory=frozenset)
    phase_flips: frozenset[int] = field(default_factory=frozenset)
    n_parameters: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "gates", tuple(self.gates))
        object.__setattr__(self, "classical_flips", frozenset(self.classical_flips))
        object.__setattr__(self, "phase_flips", frozenset(self.phase_flips))
        for g in self.gates:
            if max(g.qubits) >= self.n_qubits or min(g.qubits) < 0:
                raise ContractViolation(f"{g.to_text()} outside {self.n_qubits}-qubit register")
            if g.angle is not None and any(p >= self.n_parameters or p < 0 for p in g.angle.parameter_ids()):
                raise ContractViolation(f"{g.to_text()} binds a parameter beyond {self.n_parameters}")
        for q in self.classical_flips | self.phase_flips:
            if not 0 <= q < self.n_qubits:
                raise ContractViolation(f"Frame qubit {q} outside register")

    def __len__(self) -> int:
        return len(self.gates)

    @property
    def flip_mask(self) -> int:
        return sum(1 << q for q in self.classical_flips)

    @property
    def phase_mask(self) -> int:
        return sum(1 << q for q in self.phase_flips)

    def with_gates(self, gates: Iterable[Gate]) -> Circuit:
        return replace(self, gates=tuple(gates))

    def check_parameters(self, theta: Sequence[float]) -> None:
        if len(theta) != self.n_parameters:
            raise ParameterCountError(self.n_parameters, len(theta))

    def then(self, other: Circuit) -> Circuit:
        """Append ``other``; only circuits without a frame can be extended."""
        if other.n_qubits != self.n_qubits:
            raise ContractViolation(f"Cannot join {self.n_qubits}- and {other.n_qubits}-qubit circuits")
        if self.classical_flips or self.phase_flips:
            raise ContractViolation("Cannot append gates after a Pauli frame")
        return Circuit(
            self.n_qubits,
            self.gates + other.gates,
            other.classical_flips,
            other.phase_flips,
            max(self.n_parameters, other.n_parameters),
        )

    def inverse(self) -> Circuit:
        """Gate-wise inverse (frame must be empty)."""
        if self.classical_flips or self.phase_flips:
            raise ContractViolation("Cannot invert a circuit carrying a Pauli frame")
        return replace(self, gates=tuple(g.inverse() for g in reversed(self.gates)))

    # ----- serialization -----

    def to_text(self) -> str:
        lines = [
            f"qubits {self.n_qubits}",
            f"params {self.n_parameters}",
            " ".join(["flips", *map(str, sorted(self.classical_flips))]),
            " ".join(["phases", *map(str, sorted(self.phase_flips))]),
        ]
        lines.extend(g.to_text() for g in self.gates)
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> Circuit:
        header: dict[str, list[str]] = {}
        gates: list[Gate] = []
        for line_no, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, *rest = line.split()
            try:
                if key in ("qubits", "params", "flips", "phases"):
                    header[key] = rest
                else:
                    gates.append(Gate.from_text(line))
            except (ValueError, IndexError) as exc:
                raise ContractViolation(f"line {line_no}: cannot parse {raw!r}") from exc
        if "qubits" not in header:
            raise ContractViolation("Circuit text has no 'qubits' header")
        return cls(
            n_qubits=int(header["qubits"][0]),
            gates=tuple(gates),
            classical_flips=frozenset(int(q) for q in header.get("flips", [])),
            phase_flips=frozenset(int(q) for q in header.get("phases", [])),
            n_parameters=int(header.get("params", ["0"])[0]),
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "n_qubits": self.n_qubits,
            "n_parameters": self.n_parameters,
            "classical_flips": sorted(self.classical_flips),
            "phase_flips": sorted(self.phase_flips),
            "gates": [
                {
                    "name": g.name,
                    "qubits": list(g.qubits),
                    **(
                        {"angle": {"constant": g.angle.constant, "terms": [list(t) for t in g.angle.terms]}}
                        if g.angle is not None
                        else {}
                    ),
                }
                for g in self.gates
            ],
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> Circuit:
        gates = []
        for g in data["gates"]:
            angle = None
            if "angle" in g:
                a = g["angle"]
                angle = Angle(float(a["constant"]), tuple((int(p), float(c)) for p, c in a["terms"]))
            gates.append(Gate(g["name"], tuple(g["qubits"]), angle))
        return cls(
            n_qubits=int(data["n_qubits"]),
            gates=tuple(gates),
            classical_flips=frozenset(data.get("classical_flips", ())),
            phase_flips=frozenset(data.get("phase_flips", ())),
            n_parameters=int(data.get("n_parameters", 0)),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> Circuit:
        return cls.from_dict(json.loads(text))


# ---------------------------------------------------------------------------
# Gate counts
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class GateCounts:
    cnot: int = 0
    xx_small_angle: int = 0
    single_qubit: int = 0

    @property
    def entangling_total(self) -> int:
        return self.cnot + self.xx_small_angle

    def to_dict(self) -> dict[str, int]:
        return {
            "cnot": self.cnot,
            "xx_small_angle": self.xx_small_angle,
            "single_qubit": self.single_qubit,
            "entangling_total": self.entangling_total,
        }


def is_maximal_xx(gate: Gate) -> bool:
    return (
        gate.name == XX
        and gate.angle is not None
        and not gate.angle.is_parametric
        and abs(abs(gate.angle.constant) - math.pi / 2) < 1e-9
    )


def count_gates(circuit: Circuit) -> GateCounts:
    """Tally; constant XX(±π/2) counts as a CNOT-equivalent entangler."""
    cnot = small = single = 0
    for g in circuit.gates:
        if g.name == CNOT or is_maximal_xx(g):
            cnot += 1
        elif g.name == XX:
            small += 1
        else:
            single += 1
    return GateCounts(cnot=cnot, xx_small_angle=small, single_qubit=single)
