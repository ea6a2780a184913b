"""Ansatz → optimized gate circuit.

Pipeline::

    reference X gates
    bosonic prefix on MO qubits          synth_bosonic
    CNOT(MO qubit → ancilla) per MO      only when non-bosonic terms follow
    remaining exponentials (any kind)    synth_nonbosonic
    cancel_pass → convert_cnot_to_xx → cancel_pass → encode_filled_as_zero

Example::

    spec = build_ucc_ansatz(ranked, 3, ham.reference(), ham.n_spatial)
    circuit = assemble(spec, TrotterConfig(), PassConfig())
    print(count_gates(circuit))
"""

from __future__ import annotations

import logging

from ion_vqe.ansatz import AnsatzSpec, trotterize
from ion_vqe.circuit import Circuit, Gate, count_gates
from ion_vqe.config import PassConfig, TrotterConfig
from ion_vqe.passes import cancel_pass, convert_cnot_to_xx, encode_filled_as_zero
from ion_vqe.synthesis import synth_bosonic, synth_nonbosonic

log = logging.getLogger("ion_vqe.compiler")


def raw_circuit(spec: AnsatzSpec, trotter: TrotterConfig | None = None) -> Circuit:
    """Unoptimized circuit: reference preparation plus one template per exponential.

    Only the leading run of electron-pair exponentials is synthesized on MO
    qubits. Once the pair qubits are unpacked into the spin-orbital register,
    a pair exponential that appears again later in the product formula (second
    half of an order-2 step, or any step after the first) is compiled with the
    general double-excitation template. Moving it back into the pair block
    would reorder non-commuting exponentials and change the product formula.
    """
    trotter = trotter or TrotterConfig()
    sequence = trotterize(spec, trotter)
    n_qubits = spec.n_qubits
    n_params = spec.n_parameters
    reference = spec.prepared_reference()
    gates: list[Gate] = [Gate.x(q) for q in range(n_qubits) if (reference >> q) & 1]

    prefix = 0
    while prefix < len(sequence) and sequence[prefix][0].is_bosonic:
        prefix += 1

    for term, scale in sequence[:prefix]:
        occ, virt = term.mos
        block = synth_bosonic(
            spec.mo_qubits[virt],
            spec.mo_qubits[occ],
            term.parameter_id,
            scale=scale * spec.pair_sign(term),
            n_qubits=n_qubits,
            n_parameters=n_params,
        )
        gates.extend(block.gates)

    if not spec.bosonic_only:
        for mo in spec.bosonic_mos:
            gates.append(Gate.cnot(spec.mo_qubits[mo], spec.ancillas[mo]))
        for term, scale in sequence[prefix:]:
            block = synth_nonbosonic(
                spec.register_qubits(term),
                term.parameter_id,
                scale=scale,
                n_qubits=n_qubits,
                n_parameters=n_params,
            )
            gates.extend(block.gates)

    return Circuit(n_qubits=n_qubits, gates=tuple(gates), n_parameters=n_params)


def assemble(
    spec: AnsatzSpec,
    trotter: TrotterConfig | None = None,
    passes: PassConfig | None = None,
) -> Circuit:
    """Compile the ansatz with the configured passes."""
    passes = passes or PassConfig()
    circuit = raw_circuit(spec, trotter)
    raw_counts = count_gates(circuit)
    if passes.cancel:
        circuit = cancel_pass(circuit)
    if passes.convert_xx:
        circuit = convert_cnot_to_xx(circuit)
        if passes.cancel:
            circuit = cancel_pass(circuit)
    if passes.encode_zero:
        circuit = encode_filled_as_zero(circuit, spec.prepared_reference())
    counts = count_gates(circuit)
    log.info(
        "Compiled HF+%d on %d qubits: %d entanglers (%d CNOT, %d XX), raw %d",
        spec.n_parameters, circuit.n_qubits, counts.entangling_total,
        counts.cnot, counts.xx_small_angle, raw_counts.entangling_total,
    )
    return circuit
