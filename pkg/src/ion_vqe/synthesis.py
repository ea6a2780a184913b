"""Gate templates for excitation exponentials.

Bosonic pair excitation (two XX gates)::

    exp[θ(σ+^j σ−^k − h.c.)] = exp(iθ/2 X_j Y_k) · exp(−iθ/2 Y_j X_k)

    Sdg(k) · XX(−θ) · S(k) · Sdg(j) · XX(θ) · S(j)

Non-bosonic excitation (13 CNOTs, 8 Rz): the eight commuting Pauli strings of
the JW generator are rotated onto one qubit ``d`` (the highest of the four)::

    CNOT(d→a) CNOT(d→b) CNOT(d→c) Sdg(d) H(d)        basis change
    CNOT(j→d) for every JW-string qubit j             Z-string ladder
    Rz · CNOT(c→d) · Rz · CNOT(a→d) · Rz · CNOT(c→d) · Rz · CNOT(b→d)
       · Rz · CNOT(c→d) · Rz · CNOT(a→d) · Rz · CNOT(c→d) · Rz
    CNOT(j→d) ladder again
    H(d) CNOT(d→c) Sdg(b) CNOT(d→b) S(b) CNOT(d→a)    inverse basis change

The roles (a, b, c) are chosen so that the CNOT·Rz(α)·CNOT·Rz(−α)·CNOT motifs
around the a-controlled CNOTs exist for the XX conversion pass.
"""

from __future__ import annotations

from collections.abc import Mapping
from itertools import permutations

from ion_vqe.circuit import Angle, Circuit, Gate
from ion_vqe.errors import ContractViolation
from ion_vqe.pauli import conjugate, excitation_generator

# Control sequence of the Gray-code walk and the Z-support (beyond d) before each Rz
_WALK_CONTROLS = ("c", "a", "c", "b", "c", "a", "c")
_WALK_SETS = ((), ("c",), ("a", "c"), ("a",), ("a", "b"), ("a", "b", "c"), ("b", "c"), ("b",))
_MOTIF_PAIRS = ((1, 2), (5, 6))


def synth_bosonic(
    j: int,
    k: int,
    parameter_id: int,
    *,
    scale: float = 1.0,
    n_qubits: int | None = None,
    n_parameters: int | None = None,
) -> Circuit:
    """exp[θ·scale·(σ+^j σ−^k − σ−^j σ+^k)] with two parameter-bound XX gates."""
    if j == k:
        raise ContractViolation("Bosonic excitation needs two distinct qubits")
    angle = Angle.parameter(parameter_id, scale)
    gates = (
        Gate.sdg(k),
        Gate.xx(j, k, -angle),
        Gate.s(k),
        Gate.sdg(j),
        Gate.xx(j, k, angle),
        Gate.s(j),
    )
    return Circuit(
        n_qubits=n_qubits if n_qubits is not None else max(j, k) + 1,
        gates=gates,
        n_parameters=n_parameters if n_parameters is not None else parameter_id + 1,
    )


def synth_pauli_exponential(
    pauli: Mapping[int, str],
    angle: Angle | float,
    target: int | None = None,
    *,
    n_qubits: int | None = None,
    n_parameters: int = 0,
) -> Circuit:
    """exp(−i·angle/2·P) with every other support qubit CNOT-ed onto one target.

    The default target is the last X/Y qubit of the string (last qubit if all Z).
    """
    factors = {q: p.upper() for q, p in pauli.items() if p.upper() != "I"}
    if not factors:
        raise ContractViolation("Pauli exponential needs a non-identity string")
    support = sorted(factors)
    if target is None:
        xy = [q for q in support if factors[q] in "XY"]
        target = xy[-1] if xy else support[-1]
    elif target not in factors:
        raise ContractViolation(f"Target qubit {target} not in Pauli support {support}")

    into: list[Gate] = []
    for q in support:
        if factors[q] == "X":
            into.append(Gate.h(q))
        elif factors[q] == "Y":
            into.extend((Gate.sdg(q), Gate.h(q)))
    into.extend(Gate.cnot(q, target) for q in support if q != target)
    gates = into + [Gate.rz(target, Angle.coerce(angle))] + [g.inverse() for g in reversed(into)]
    if isinstance(angle, Angle) and angle.terms:
        n_parameters = max(n_parameters, max(angle.parameter_ids()) + 1)
    return Circuit(
        n_qubits=n_qubits if n_qubits is not None else support[-1] + 1,
        gates=tuple(gates),
        n_parameters=n_parameters,
    )


def _rotation_angles(
    generator: Mapping[tuple[int, int], complex],
    d: int,
    roles: dict[str, int],
    jw_mask: int,
) -> dict[int, float]:
    """Map Z-support mask (beyond d, J) → coefficient of −2·g·θ after the basis change."""
    basis_change = [
        ("cnot", (d, roles["a"])),
        ("cnot", (d, roles["b"])),
        ("cnot", (d, roles["c"])),
        ("sdg", (d,)),
        ("h", (d,)),
    ]
    out: dict[int, float] = {}
    for (x, z), coeff in generator.items():
        sign = 1
        for name, qubits in basis_change:
            x, z, sign = conjugate(x, z, sign, name, qubits)
        if x or not (z >> d) & 1:
            raise ContractViolation("Excitation generator does not diagonalize onto the pivot qubit")
        w = z & ~(1 << d) & ~jw_mask
        # generator terms are i·g·Q with real g
        out[w] = -2.0 * sign * complex(coeff).imag
    return out


def synth_nonbosonic(
    qubits: tuple[int, int, int, int],
    parameter_id: int,
    *,
    scale: float = 1.0,
    n_qubits: int | None = None,
    n_parameters: int | None = None,
) -> Circuit:
    """exp[θ·scale·(c_p^† c_q^† c_r c_s − h.c.)] for register qubits (p, q, r, s)."""
    if len(set(qubits)) != 4:
        raise ContractViolation(f"Non-bosonic excitation needs four distinct qubits, got {qubits}")
    p, q, r, s = qubits
    size = max(qubits) + 1
    generator = excitation_generator(p, q, r, s, size)
    four = sorted(qubits)
    d = four[-1]
    x_mask = sum(1 << i for i in four)
    _, z_any = next(iter(generator))
    jw_mask = z_any & ~x_mask
    ladder = [Gate.cnot(j, d) for j in range(size) if (jw_mask >> j) & 1]

    chosen: tuple[dict[str, int], list[float]] | None = None
    for perm in permutations(four[:3]):
        roles = dict(zip("abc", perm, strict=True))
        by_mask = _rotation_angles(generator, d, roles, jw_mask)
        coeffs = [by_mask.get(sum(1 << roles[n] for n in walk), 0.0) for walk in _WALK_SETS]
        if chosen is None:
            chosen = (roles, coeffs)
        if all(abs(coeffs[i] + coeffs[k]) < 1e-12 for i, k in _MOTIF_PAIRS):
            chosen = (roles, coeffs)
            break
    assert chosen is not None
    roles, coeffs = chosen
    a, b, c = roles["a"], roles["b"], roles["c"]

    def rz(i: int) -> Gate:
        return Gate.rz(d, Angle.parameter(parameter_id, coeffs[i] * scale))

    gates = [Gate.cnot(d, a), Gate.cnot(d, b), Gate.cnot(d, c), Gate.sdg(d), Gate.h(d)]
    gates.extend(ladder)
    gates.append(rz(0))
    for step, name in enumerate(_WALK_CONTROLS, start=1):
        gates.append(Gate.cnot(roles[name], d))
        gates.append(rz(step))
    gates.extend(reversed(ladder))
    gates.extend([Gate.h(d), Gate.cnot(d, c), Gate.sdg(b), Gate.cnot(d, b), Gate.s(b), Gate.cnot(d, a)])
    return Circuit(
        n_qubits=n_qubits if n_qubits is not None else size,
        gates=tuple(gates),
        n_parameters=n_parameters if n_parameters is not None else parameter_id + 1,
    )


def chain_xx(i: int, j: int, n: int, angle: float, *, n_qubits: int | None = None) -> Circuit:
    """``n`` consecutive XX(angle) gates; XX(π/100) fifty times equals XX(π/2)."""
    if n < 0:
        raise ContractViolation(f"Chain length must be non-negative, got {n}")
    if i == j:
        raise ContractViolation("XX chain needs two distinct qubits")
    return Circuit(
        n_qubits=n_qubits if n_qubits is not None else max(i, j) + 1,
        gates=tuple(Gate.xx(i, j, angle) for _ in range(n)),
    )
