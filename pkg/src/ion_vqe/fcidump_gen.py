"""Regenerate the bundled water integrals with pyscf (``pip install ion-vqe[chem]``).

The molecule lies in the xz plane, so the in-plane b orbitals are b1 and the
out-of-plane oxygen lone pair (the HOMO) is 1b2.
"""

from __future__ import annotations

import logging
import math
from pathlib import Path

import numpy as np

from ion_vqe.errors import ConvergenceError, InputError
from ion_vqe.hamiltonian import C2V_IRREPS, SpinOrbitalHamiltonian, c2v_labels, dump_fcidump

log = logging.getLogger("ion_vqe.fcidump_gen")

BOND_BOHR = 1.8
ANGLE_DEG = 105.0
BASIS = "sto-3g"

_MOLPRO_ID = {name.upper(): irrep for irrep, name in C2V_IRREPS.items()}


def h2o_atoms(bond: float = BOND_BOHR, angle_deg: float = ANGLE_DEG) -> list[tuple[str, tuple[float, float, float]]]:
    """O at the origin, H atoms in the xz plane, symmetric about z (bohr)."""
    half = math.radians(angle_deg) / 2
    x, z = bond * math.sin(half), bond * math.cos(half)
    return [("O", (0.0, 0.0, 0.0)), ("H", (x, 0.0, z)), ("H", (-x, 0.0, z))]


def generate_h2o(
    path: Path | str | None = None,
    *,
    bond: float = BOND_BOHR,
    angle_deg: float = ANGLE_DEG,
    basis: str = BASIS,
) -> SpinOrbitalHamiltonian:
    """RHF canonical-orbital integrals of water; written as FCIDUMP when ``path`` is given."""
    try:
        from pyscf import ao2mo, gto, scf, symm
    except ImportError as exc:
        raise InputError("Generating integrals needs pyscf (install the 'chem' extra)") from exc

    mol = gto.M(atom=h2o_atoms(bond, angle_deg), unit="Bohr", basis=basis, symmetry=True, verbose=0)
    mf = scf.RHF(mol)
    mf.conv_tol = 1e-12
    mf.kernel()
    if not mf.converged:
        raise ConvergenceError("RHF did not converge")

    coeff = mf.mo_coeff
    n = coeff.shape[1]
    h1 = coeff.T @ mf.get_hcore() @ coeff
    eri = ao2mo.restore(1, ao2mo.kernel(mol, coeff), n)

    names = [symm.irrep_id2name(mol.groupname, i).upper() for i in scf.hf_symm.get_orbsym(mol, coeff)]
    homo = mol.nelectron // 2 - 1
    if mol.groupname == "C2v" and names[homo] == "B1":
        # pyscf chose the yz plane; relabel to the xz convention
        names = [{"B1": "B2", "B2": "B1"}.get(name, name) for name in names]
    labels = c2v_labels([_MOLPRO_ID.get(name, 0) for name in names]) if mol.groupname == "C2v" else ()

    ham = SpinOrbitalHamiltonian.from_spatial(
        np.asarray(h1), np.asarray(eri), mol.energy_nuc(), mol.nelectron, 0, labels
    )
    log.info("RHF energy %.10f Ha, %d MOs (%s)", mf.e_tot, n, " ".join(labels))
    if path is not None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(dump_fcidump(ham), encoding="utf-8")
        log.info("Wrote %s", path)
    return ham
