"""Circuit → circuit rewrite passes.

All passes preserve the circuit unitary up to global phase (and, for
``encode_filled_as_zero``, up to the recorded Pauli frame).

cancel_pass rules
-----------------

Reducing rules, each applied when the partner is reachable through gates
that commute with the first one:

    CNOT·CNOT, H·H, X·X, S·Sdg            → removed
    Rz(a)·Rz(b), XX(a)·XX(b)              → Rz(a+b), XX(a+b) (dropped at 0)
    CNOT(c→t)·H(c)·CNOT(c→t)              → H_t Sdg_c CNOT(t→c) S_c Sdg_t H_c H_t

Enabling rules, kept only if the reduced circuit is strictly cheaper:

    H·S·H   → Sdg·H·Sdg
    H·Sdg·H → S·H·S
"""

from __future__ import annotations

import logging
from collections.abc import Sequence

from ion_vqe.circuit import CNOT, H, RZ, SDG, XX, Circuit, Gate, S, X, count_gates
from ion_vqe.errors import ContractViolation
from ion_vqe.pauli import conjugate

log = logging.getLogger("ion_vqe.passes")


# ---------------------------------------------------------------------------
# Commutation
# ---------------------------------------------------------------------------


def commutes(g: Gate, h: Gate) -> bool:
    """Conservative syntactic commutation test (False when unsure)."""
    if not set(g.qubits) & set(h.qubits):
        return True
    if g.is_diagonal and h.is_diagonal:
        return True
    if g.name == CNOT or h.name == CNOT:
        cn, other = (g, h) if g.name == CNOT else (h, g)
        ctrl, tgt = cn.qubits
        if other.name == CNOT:
            c2, t2 = other.qubits
            if ctrl == c2:
                return tgt != t2 and tgt != c2 and t2 != ctrl
            if tgt == t2:
                return ctrl != t2 and c2 != tgt
            return False
        if other.is_diagonal:
            return other.qubits[0] == ctrl
        if other.name == X:
            return other.qubits[0] == tgt
        if other.name == XX:
            return tgt in other.qubits and ctrl not in other.qubits
        return False
    return g.name in (X, XX) and h.name in (X, XX)


# ---------------------------------------------------------------------------
# Cancellation
# ---------------------------------------------------------------------------


def _merge(g: Gate, h: Gate) -> list[Gate] | None:
    """Replacement for the pair (g … h), or None if they do not combine."""
    if g.name == h.name and g.name in (H, X, CNOT) and g.qubits == h.qubits:
        return []
    if {g.name, h.name} == {S, SDG} and g.qubits == h.qubits:
        return []
    if g.name == h.name == RZ and g.qubits == h.qubits:
        angle = g.angle + h.angle
        return [] if angle.is_zero else [g.with_angle(angle)]
    if g.name == h.name == XX and set(g.qubits) == set(h.qubits):
        angle = g.angle + h.angle
        return [] if angle.is_zero else [g.with_angle(angle)]
    return None


def _cnot_h_cnot(control: int, target: int) -> list[Gate]:
    return [
        Gate.h(target),
        Gate.sdg(control),
        Gate.cnot(target, control),
        Gate.s(control),
        Gate.sdg(target),
        Gate.h(control),
        Gate.h(target),
    ]


def _reduce_at(gates: list[Gate], i: int) -> list[Gate] | None:
    g = gates[i]
    qs = set(g.qubits)
    for j in range(i + 1, len(gates)):
        h = gates[j]
        if not qs & set(h.qubits):
            continue
        merged = _merge(g, h)
        if merged is not None:
            return gates[:i] + gates[i + 1 : j] + merged + gates[j + 1 :]
        if g.name == CNOT and h.name == H and h.qubits[0] == g.qubits[0]:
            for k in range(j + 1, len(gates)):
                nxt = gates[k]
                if not qs & set(nxt.qubits):
                    continue
                if nxt.name == CNOT and nxt.qubits == g.qubits:
                    c, t = g.qubits
                    return gates[:i] + gates[i + 1 : j] + _cnot_h_cnot(c, t) + gates[j + 1 : k] + gates[k + 1 :]
                break
        if commutes(g, h):
            continue
        return None
    return None


def _reduce(gates: list[Gate]) -> list[Gate]:
    gates = [g for g in gates if g.angle is None or not g.angle.is_zero]
    # every rewrite lowers (entanglers, length), so the sweeps terminate
    changed = True
    while changed:
        changed = False
        i = 0
        while i < len(gates):
            rewritten = _reduce_at(gates, i)
            if rewritten is None:
                i += 1
            else:
                gates = rewritten
                changed = True
    return gates


def _cost(gates: Sequence[Gate]) -> tuple[int, int]:
    return sum(1 for g in gates if g.is_entangling), len(gates)


_ENABLING = {S: (SDG, SDG), SDG: (S, S)}


def _enabling_rewrites(gates: list[Gate]):
    """Yield copies of ``gates`` with one H·S·H or H·Sdg·H window rewritten."""
    for i, g in enumerate(gates):
        if g.name != H:
            continue
        (q,) = g.qubits
        window = [i]
        for j in range(i + 1, len(gates)):
            if q in gates[j].qubits:
                window.append(j)
                if len(window) == 3:
                    break
        if len(window) < 3:
            continue
        _, mid, last = window
        if gates[mid].name in _ENABLING and gates[last].name == H and gates[last].qubits == (q,):
            outer = _ENABLING[gates[mid].name]
            out = list(gates)
            out[i] = Gate(outer[0], (q,))
            out[mid] = Gate.h(q)
            out[last] = Gate(outer[1], (q,))
            yield out


def cancel_pass(circuit: Circuit) -> Circuit:
    """Apply the cancellation rules to a fixed point."""
    gates = _reduce(list(circuit.gates))
    while True:
        cost = _cost(gates)
        for candidate in _enabling_rewrites(gates):
            trial = _reduce(candidate)
            if _cost(trial) < cost:
                gates = trial
                break
        else:
            break
    before, after = count_gates(circuit), count_gates(circuit.with_gates(gates))
    log.debug(
        "cancel_pass: %d -> %d gates, %d -> %d entanglers",
        len(circuit), len(gates), before.entangling_total, after.entangling_total,
    )
    return circuit.with_gates(gates)


# ---------------------------------------------------------------------------
# CNOT → XX
# ---------------------------------------------------------------------------


def _motif(gates: list[Gate], i: int) -> tuple[int, int, int, int] | None:
    """Indices of Rz, CNOT(c'→t), Rz, CNOT closing the motif opened by gates[i]."""
    first = gates[i]
    if first.name != CNOT:
        return None
    c, t = first.qubits
    touched: list[int] = []
    for j in range(i + 1, len(gates)):
        if c in gates[j].qubits or t in gates[j].qubits:
            touched.append(j)
            if len(touched) == 4:
                break
    if len(touched) < 4:
        return None
    j1, j2, j3, j4 = touched
    rz1, mid, rz2, last = (gates[k] for k in touched)
    if not (rz1.name == RZ and rz1.qubits == (t,)):
        return None
    if not (mid.name == CNOT and mid.qubits[1] == t and mid.qubits[0] != c):
        return None
    if not (rz2.name == RZ and rz2.qubits == (t,) and (rz1.angle + rz2.angle).is_zero):
        return None
    if not (last.name == CNOT and last.qubits == (c, t)):
        return None
    return j1, j2, j3, j4


def convert_cnot_to_xx(circuit: Circuit) -> Circuit:
    """Rewrite CNOT(c→t)·Rz_t(α)·CNOT(c'→t)·Rz_t(−α)·CNOT(c→t) with two XX gates.

    The motif becomes ``H_t H_c XX_ct(α) H_t CNOT(c'→t) H_t XX_ct(−α) H_t H_c``.
    """
    gates = list(circuit.gates)
    converted = 0
    i = 0
    while i < len(gates):
        found = _motif(gates, i)
        if found is None:
            i += 1
            continue
        j1, j2, j3, j4 = found
        c, t = gates[i].qubits
        alpha = gates[j1].angle
        middle = gates[j2]
        block = [
            Gate.h(t),
            Gate.h(c),
            Gate.xx(c, t, alpha),
            Gate.h(t),
            middle,
            Gate.h(t),
            Gate.xx(c, t, -alpha),
            Gate.h(t),
            Gate.h(c),
        ]
        gates = (
            gates[:i]
            + gates[i + 1 : j1]
            + gates[j1 + 1 : j2]
            + block
            + gates[j2 + 1 : j3]
            + gates[j3 + 1 : j4]
            + gates[j4 + 1 :]
        )
        converted += 1
        i += 1
    log.debug("convert_cnot_to_xx: %d motifs converted", converted)
    return circuit.with_gates(gates)


# ---------------------------------------------------------------------------
# Filled-as-zero encoding
# ---------------------------------------------------------------------------


def encode_filled_as_zero(circuit: Circuit, reference: int | None = None) -> Circuit:
    """Remove X gates by pushing them to the end as a Pauli frame.

    X gates are absorbed into the frame; Clifford gates conjugate it; Rz and XX
    gates anticommuting with the frame have their angle negated. The frame's X
    part becomes ``classical_flips`` and its Z part ``phase_flips``.
    """
    if reference is not None:
        prepared = 0
        touched = 0
        for g in circuit.gates:
            q = g.qubits[0]
            if g.name == X and not (touched >> q) & 1:
                prepared |= 1 << q
            for qq in g.qubits:
                touched |= 1 << qq
        if prepared != reference:
            raise ContractViolation(
                f"Reference-preparation X gates {prepared:#b} do not match reference {reference:#b}"
            )

    fx = fz = 0
    out: list[Gate] = []
    for g in circuit.gates:
        if g.name == X:
            fx ^= 1 << g.qubits[0]
            continue
        if g.name == RZ:
            (q,) = g.qubits
            out.append(g.with_angle(-g.angle) if (fx >> q) & 1 else g)
            continue
        if g.name == XX:
            i, j = g.qubits
            flip = ((fz >> i) ^ (fz >> j)) & 1
            out.append(g.with_angle(-g.angle) if flip else g)
            continue
        fx, fz, _ = conjugate(fx, fz, 1, g.name, g.qubits)
        out.append(g)

    fx ^= circuit.flip_mask
    fz ^= circuit.phase_mask
    flips = frozenset(q for q in range(circuit.n_qubits) if (fx >> q) & 1)
    phases = frozenset(q for q in range(circuit.n_qubits) if (fz >> q) & 1)
    log.debug("encode_filled_as_zero: flips %s, phases %s", sorted(flips), sorted(phases))
    return Circuit(circuit.n_qubits, tuple(out), flips, phases, circuit.n_parameters)
