"""Shared test data: small molecules and dense-matrix references."""

from __future__ import annotations

import math
from collections.abc import Mapping

import numpy as np

from ion_vqe.hamiltonian import SpinOrbitalHamiltonian

# H2 / STO-3G near equilibrium, canonical RHF orbitals
H2_E_NUC = 0.7137539936876182
H2_H00 = -1.2524635735648986
H2_H11 = -0.4759487172683844
H2_J00 = 0.6744887663568382
H2_J11 = 0.6973979494693556
H2_J01 = 0.6636340478615040
H2_K01 = 0.1812698831703577

H2_FCIDUMP = f"""&FCI NORB=2,NELEC=2,MS2=0,
 ORBSYM=1,3,
 ISYM=1,
&END
 {H2_J00:.16e} 1 1 1 1
 {H2_K01:.16e} 2 1 2 1
 {H2_J01:.16e} 2 2 1 1
 {H2_J11:.16e} 2 2 2 2
 {H2_H00:.16e} 1 1 0 0
 {H2_H11:.16e} 2 2 0 0
 {H2_E_NUC:.16e} 0 0 0 0
"""


def h2_hf_energy() -> float:
    return 2 * H2_H00 + H2_J00 + H2_E_NUC


def h2_fci_energy() -> float:
    """Lowest root of the 2×2 CI between the two closed-shell determinants."""
    a = 2 * H2_H00 + H2_J00
    b = 2 * H2_H11 + H2_J11
    return 0.5 * (a + b) - math.sqrt((0.5 * (b - a)) ** 2 + H2_K01**2) + H2_E_NUC


def random_molecule(n_spatial: int, n_electrons: int, seed: int = 0, scale: float = 0.15) -> SpinOrbitalHamiltonian:
    """Seeded molecule-like integrals: ascending orbital energies, PSD 8-fold symmetric ERIs."""
    rng = np.random.default_rng(seed)
    h1 = np.diag(np.linspace(-2.0, 1.0, n_spatial))
    off = rng.normal(scale=0.05, size=(n_spatial, n_spatial))
    h1 = h1 + off + off.T
    factors = rng.normal(scale=scale, size=(n_spatial + 2, n_spatial, n_spatial))
    factors = factors + factors.transpose(0, 2, 1)
    eri = np.einsum("mij,mkl->ijkl", factors, factors)
    eri += 0.5 * np.einsum("ij,kl->ijkl", np.eye(n_spatial), np.eye(n_spatial))
    return SpinOrbitalHamiltonian.from_spatial(h1, eri, 0.3, n_electrons)


_PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def pauli_matrix(factors: Mapping[int, str], n_qubits: int) -> np.ndarray:
    """Dense Pauli string; qubit 0 is the least significant index bit."""
    out = np.ones((1, 1), dtype=complex)
    for q in reversed(range(n_qubits)):
        out = np.kron(out, _PAULI[factors.get(q, "I")])
    return out


def pauli_sum_matrix(terms: Mapping[tuple[int, int], complex], n_qubits: int) -> np.ndarray:
    from ion_vqe.pauli import masks_to_factors

    out = np.zeros((1 << n_qubits, 1 << n_qubits), dtype=complex)
    for (x, z), c in terms.items():
        out += c * pauli_matrix(masks_to_factors(x, z), n_qubits)
    return out


def phase_distance(u: np.ndarray, v: np.ndarray) -> float:
    """max |u − e^{iφ} v| with φ fitted from the largest entry."""
    k = np.unravel_index(np.argmax(np.abs(v)), v.shape)
    phase = u[k] / v[k]
    phase /= abs(phase)
    return float(np.max(np.abs(u - phase * v)))


def fermionic_energy(ham: SpinOrbitalHamiltonian, sequence, theta) -> float:
    """⟨ψ|H|ψ⟩ for ψ = Π exp(θ·scale·G) |HF⟩ built directly on all spin-orbitals.

    ``sequence`` is the ``(term, scale)`` list from ``trotterize``; no qubit
    layout, pair encoding or circuit is involved.
    """
    from scipy.linalg import expm

    from ion_vqe.hamiltonian import jordan_wigner
    from ion_vqe.pauli import excitation_generator

    n = ham.n_spin_orbitals
    psi = np.zeros(1 << n, dtype=complex)
    psi[ham.reference()] = 1.0
    for term, scale in sequence:
        gen = pauli_sum_matrix(excitation_generator(*term.indices, n), n)
        psi = expm(theta[term.parameter_id] * scale * gen) @ psi
    return float(np.real(np.vdot(psi, jordan_wigner(ham).to_matrix() @ psi)))
