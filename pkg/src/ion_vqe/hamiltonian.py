"""Molecular Hamiltonians: FCIDUMP ingestion, HF/FCI reference energies, excitation ranking.

Spin-orbital layout is blocked by spin: for ``n`` molecular orbitals, spin-orbital
``p < n`` is (MO p, α) and ``p >= n`` is (MO p - n, β). The Hamiltonian is::

    H = e_core + Σ h[p,q] c_p^† c_q + Σ g[p,q,r,s] c_p^† c_q^† c_r c_s

with ``g[(i,σ),(k,τ),(l,τ),(j,σ)] = ½ (ij|kl)`` built from chemists'-notation
integrals. Determinants are bitmasks; bit q is spin-orbital q, which is also
qubit q under the identity Jordan-Wigner layout, so FCI amplitudes and JW state
amplitudes coincide.

Example::

    ham = load_fcidump("h2o_sto3g.fcidump")
    ref = ham.reference()
    fci = fci_ground_state(ham)
    print(hf_energy(ham, ref), fci.energy)
    for exc in rank_excitations(fci, ref, limit=3):
        print(exc.indices, exc.kind.value, exc.amplitude)
"""

from __future__ import annotations

import logging
import re
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations
from pathlib import Path

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

from ion_vqe.errors import ContractViolation, ConvergenceError, FcidumpParseError, InputError
from ion_vqe.pauli import PauliSum, QubitHamiltonian, accumulate, ladder, multiply

log = logging.getLogger("ion_vqe.hamiltonian")

# Molpro irrep numbering for C2v, as written by FCIDUMP ORBSYM
C2V_IRREPS = {1: "a1", 2: "b1", 3: "b2", 4: "a2"}

MAX_FCI_SPIN_ORBITALS = 28
DENSE_FCI_CUTOFF = 64
AMPLITUDE_CUTOFF = 1e-10


# ---------------------------------------------------------------------------
# Spin-orbital Hamiltonian
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SpinOrbitalHamiltonian:
    """Second-quantized molecular Hamiltonian over spin-orbitals (real orbitals)."""

    n_spatial: int
    e_core: float
    one_body: np.ndarray
    two_body: np.ndarray
    n_electrons: int
    ms2: int = 0
    orbital_labels: tuple[str, ...] = field(default=())

    def __post_init__(self) -> None:
        n = self.n_spin_orbitals
        if self.one_body.shape != (n, n) or self.two_body.shape != (n, n, n, n):
            raise ContractViolation(
                f"Coefficient shapes {self.one_body.shape}/{self.two_body.shape} do not match "
                f"{n} spin-orbitals"
            )
        if not (np.all(np.isfinite(self.one_body)) and np.all(np.isfinite(self.two_body))):
            raise ContractViolation("Hamiltonian coefficients must be finite")
        if not np.allclose(self.one_body, self.one_body.T, atol=1e-10):
            raise ContractViolation("One-body coefficients are not Hermitian")
        if not np.allclose(self.two_body, self.two_body.transpose(3, 2, 1, 0), atol=1e-10):
            raise ContractViolation("Two-body coefficients are not Hermitian")
        if not 0 <= self.n_electrons <= n or (self.n_electrons + self.ms2) % 2:
            raise ContractViolation(
                f"{self.n_electrons} electrons with MS2={self.ms2} do not fit {n} spin-orbitals"
            )
        if self.orbital_labels and len(self.orbital_labels) != self.n_spatial:
            raise ContractViolation("One orbital label per MO required")
        self.one_body.setflags(write=False)
        self.two_body.setflags(write=False)

    @classmethod
    def from_spatial(
        cls,
        h1: np.ndarray,
        eri: np.ndarray,
        e_core: float,
        n_electrons: int,
        ms2: int = 0,
        orbital_labels: Sequence[str] = (),
    ) -> SpinOrbitalHamiltonian:
        """Spin-expand MO integrals h1[i,j] and chemists' eri[i,j,k,l] = (ij|kl)."""
        n = h1.shape[0]
        one = np.zeros((2 * n, 2 * n))
        two = np.zeros((2 * n,) * 4)
        half = 0.5 * eri.transpose(0, 2, 3, 1)
        for a in (0, n):
            one[a : a + n, a : a + n] = h1
            for b in (0, n):
                two[a : a + n, b : b + n, b : b + n, a : a + n] = half
        return cls(
            n_spatial=n,
            e_core=float(e_core),
            one_body=one,
            two_body=two,
            n_electrons=n_electrons,
            ms2=ms2,
            orbital_labels=tuple(orbital_labels),
        )

    @property
    def n_spin_orbitals(self) -> int:
        return 2 * self.n_spatial

    @property
    def n_alpha(self) -> int:
        return (self.n_electrons + self.ms2) // 2

    @property
    def n_beta(self) -> int:
        return (self.n_electrons - self.ms2) // 2

    def spin_orbital(self, mo: int, beta: bool) -> int:
        return mo + self.n_spatial if beta else mo

    def reference(self) -> int:
        """Aufbau determinant: lowest n_alpha α and n_beta β orbitals filled."""
        alpha = (1 << self.n_alpha) - 1
        beta = ((1 << self.n_beta) - 1) << self.n_spatial
        return alpha | beta

    def label(self, mo: int) -> str:
        return self.orbital_labels[mo] if self.orbital_labels else str(mo)

    def resolve_orbitals(self, items: Iterable[int | str]) -> tuple[int, ...]:
        """Map MO indices or labels (``"1b2"``) to sorted 0-based MO indices."""
        lookup = {lbl.lower(): i for i, lbl in enumerate(self.orbital_labels)}
        out: set[int] = set()
        for item in items:
            if isinstance(item, str):
                key = item.strip().lower()
                if key.isdigit():
                    item = int(key)
                elif key in lookup:
                    item = lookup[key]
                else:
                    raise ContractViolation(f"Unknown orbital {item!r}")
            if not 0 <= item < self.n_spatial:
                raise ContractViolation(f"Orbital index {item} outside 0..{self.n_spatial - 1}")
            out.add(int(item))
        return tuple(sorted(out))

    def spatial_integrals(self) -> tuple[np.ndarray, np.ndarray]:
        """Inverse of :meth:`from_spatial`: (h1, eri)."""
        n = self.n_spatial
        h1 = np.array(self.one_body[:n, :n])
        eri = 2.0 * self.two_body[:n, n:, n:, :n].transpose(0, 3, 1, 2)
        return h1, eri


# ---------------------------------------------------------------------------
# FCIDUMP
# ---------------------------------------------------------------------------

_NAMELIST_INT = {key: re.compile(rf"\b{key}\s*=\s*(-?\d+)", re.IGNORECASE) for key in ("NORB", "NELEC", "MS2")}
_ORBSYM = re.compile(r"\bORBSYM\s*=\s*((?:\d+\s*,\s*)*\d+)", re.IGNORECASE)


def parse_fcidump(text: str) -> SpinOrbitalHamiltonian:
    """Parse FCIDUMP text (1-based spatial indices, 8-fold symmetric integrals)."""
    lines = text.splitlines()
    if not lines or not lines[0].lstrip().upper().startswith("&FCI"):
        raise FcidumpParseError("missing &FCI namelist header", 1)

    header_end = None
    for i, line in enumerate(lines):
        stripped = line.strip().upper()
        if "&END" in stripped or stripped.endswith("/"):
            header_end = i
            break
    if header_end is None:
        raise FcidumpParseError("unterminated namelist header", len(lines))
    header = " ".join(lines[: header_end + 1])

    values: dict[str, int] = {}
    for key, pattern in _NAMELIST_INT.items():
        m = pattern.search(header)
        if m:
            values[key] = int(m.group(1))
    if "NORB" not in values or "NELEC" not in values:
        raise FcidumpParseError("header must declare NORB and NELEC", 1)
    norb, nelec, ms2 = values["NORB"], values["NELEC"], values.get("MS2", 0)
    if norb < 1:
        raise FcidumpParseError(f"NORB must be positive, got {norb}", 1)

    labels: tuple[str, ...] = ()
    m = _ORBSYM.search(header)
    if m:
        irreps = [int(v) for v in re.split(r"\s*,\s*", m.group(1).strip())]
        if len(irreps) != norb:
            raise FcidumpParseError(f"ORBSYM lists {len(irreps)} entries for NORB={norb}", 1)
        labels = c2v_labels(irreps)

    h1 = np.zeros((norb, norb))
    eri = np.zeros((norb,) * 4)
    e_core = 0.0
    for lineno, line in enumerate(lines[header_end + 1 :], start=header_end + 2):
        tokens = line.split()
        if not tokens:
            continue
        if len(tokens) != 5:
            raise FcidumpParseError(f"expected 'value i j k l', got {line.strip()!r}", lineno)
        try:
            value = float(tokens[0].replace("D", "E").replace("d", "e"))
            i, j, k, l = (int(t) for t in tokens[1:])
        except ValueError:
            raise FcidumpParseError(f"non-numeric entry {line.strip()!r}", lineno) from None
        if not np.isfinite(value):
            raise FcidumpParseError(f"non-finite value {tokens[0]}", lineno)
        if any(not 0 <= idx <= norb for idx in (i, j, k, l)):
            raise FcidumpParseError(f"index out of range 0..{norb}", lineno)

        if i == j == k == l == 0:
            e_core = value
        elif k == l == 0 and i and j:
            h1[i - 1, j - 1] = h1[j - 1, i - 1] = value
        elif j == k == l == 0:
            continue  # orbital energy
        elif i and j and k and l:
            i, j, k, l = i - 1, j - 1, k - 1, l - 1
            for a, b, c, d in (
                (i, j, k, l), (j, i, k, l), (i, j, l, k), (j, i, l, k),
                (k, l, i, j), (l, k, i, j), (k, l, j, i), (l, k, j, i),
            ):  # fmt: skip
                eri[a, b, c, d] = value
        else:
            raise FcidumpParseError(f"invalid index pattern {i} {j} {k} {l}", lineno)

    try:
        return SpinOrbitalHamiltonian.from_spatial(h1, eri, e_core, nelec, ms2, labels)
    except ContractViolation as exc:
        raise FcidumpParseError(str(exc), 1) from exc


def load_fcidump(path: Path | str) -> SpinOrbitalHamiltonian:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"Cannot read integral file {path}: {exc.strerror}") from exc
    ham = parse_fcidump(text)
    log.info(
        "Loaded %s: %d MOs, %d electrons, e_core=%.8f",
        path.name, ham.n_spatial, ham.n_electrons, ham.e_core,
    )
    return ham


def dump_fcidump(ham: SpinOrbitalHamiltonian) -> str:
    """Serialize to FCIDUMP text; parse_fcidump(dump_fcidump(h)) reproduces h."""
    n = ham.n_spatial
    h1, eri = ham.spatial_integrals()
    out = [f"&FCI NORB={n},NELEC={ham.n_electrons},MS2={ham.ms2},"]
    if ham.orbital_labels:
        names = {v: k for k, v in C2V_IRREPS.items()}
        irreps = [names[lbl.lstrip("0123456789")] for lbl in ham.orbital_labels]
        out.append(" ORBSYM=" + ",".join(str(v) for v in irreps) + ",")
    out.append(" ISYM=1,")
    out.append("&END")
    for i in range(n):
        for j in range(i + 1):
            for k in range(n):
                for l in range(k + 1):
                    if (i * (i + 1) // 2 + j) < (k * (k + 1) // 2 + l):
                        continue
                    v = eri[i, j, k, l]
                    if v != 0.0:
                        out.append(f"{v: .17e} {i + 1} {j + 1} {k + 1} {l + 1}")
    for i in range(n):
        for j in range(i + 1):
            if h1[i, j] != 0.0:
                out.append(f"{h1[i, j]: .17e} {i + 1} {j + 1} 0 0")
    out.append(f"{ham.e_core: .17e} 0 0 0 0")
    return "\n".join(out) + "\n"


def c2v_labels(irreps: Sequence[int]) -> tuple[str, ...]:
    seen: dict[int, int] = {}
    labels = []
    for irrep in irreps:
        seen[irrep] = seen.get(irrep, 0) + 1
        labels.append(f"{seen[irrep]}{C2V_IRREPS.get(irrep, f'g{irrep}')}")
    return tuple(labels)


# ---------------------------------------------------------------------------
# Reference energies
# ---------------------------------------------------------------------------


def _occupied_energy(ham: SpinOrbitalHamiltonian, occ: Sequence[int]) -> float:
    idx = np.asarray(occ, dtype=int)
    if idx.size == 0:
        return ham.e_core
    e1 = float(np.trace(ham.one_body[np.ix_(idx, idx)]))
    sub = ham.two_body[np.ix_(idx, idx, idx, idx)]
    e2 = float(np.einsum("pqqp->", sub) - np.einsum("pqpq->", sub))
    return ham.e_core + e1 + e2


def occupied(bits: int) -> list[int]:
    out = []
    while bits:
        low = bits & -bits
        out.append(low.bit_length() - 1)
        bits ^= low
    return out


def hf_energy(ham: SpinOrbitalHamiltonian, reference: int) -> float:
    """Energy of a single determinant: ⟨ref|H|ref⟩."""
    if reference.bit_count() != ham.n_electrons:
        raise ContractViolation(
            f"Reference has {reference.bit_count()} electrons, Hamiltonian has {ham.n_electrons}"
        )
    if reference >> ham.n_spin_orbitals:
        raise ContractViolation("Reference occupies spin-orbitals outside the register")
    return _occupied_energy(ham, occupied(reference))


# ---------------------------------------------------------------------------
# Jordan-Wigner
# ---------------------------------------------------------------------------


def jordan_wigner(
    ham: SpinOrbitalHamiltonian,
    qubit_map: Sequence[int] | None = None,
) -> QubitHamiltonian:
    """JW image of the Hamiltonian; spin-orbital p lands on qubit ``qubit_map[p]``."""
    n = ham.n_spin_orbitals
    pos = list(range(n)) if qubit_map is None else list(qubit_map)
    if sorted(pos) != list(range(n)):
        raise ContractViolation("qubit_map must be a permutation of the spin-orbitals")

    create = [ladder(pos[p], True, n) for p in range(n)]
    destroy = [ladder(pos[p], False, n) for p in range(n)]
    out: PauliSum = {}

    for p, q in zip(*np.nonzero(ham.one_body), strict=True):
        accumulate(out, multiply(create[p], destroy[q]), ham.one_body[p, q])

    pairs_c: dict[tuple[int, int], PauliSum] = {}
    pairs_a: dict[tuple[int, int], PauliSum] = {}
    for p, q, r, s in zip(*np.nonzero(ham.two_body), strict=True):
        if p == q or r == s:
            continue
        left = pairs_c.get((p, q))
        if left is None:
            left = pairs_c[(p, q)] = multiply(create[p], create[q])
        right = pairs_a.get((r, s))
        if right is None:
            right = pairs_a[(r, s)] = multiply(destroy[r], destroy[s])
        accumulate(out, multiply(left, right), ham.two_body[p, q, r, s])

    qh = QubitHamiltonian.from_pauli_sum(n, out, ham.e_core)
    log.debug("Jordan-Wigner: %d spin-orbitals -> %d Pauli terms", n, len(qh))
    return qh


# ---------------------------------------------------------------------------
# FCI
# ---------------------------------------------------------------------------


def determinant_space(n_spatial: int, n_alpha: int, n_beta: int) -> list[int]:
    """All determinants with the given α/β counts, ascending by bitmask."""
    alphas = [sum(1 << i for i in occ) for occ in combinations(range(n_spatial), n_alpha)]
    betas = [
        sum(1 << (i + n_spatial) for i in occ) for occ in combinations(range(n_spatial), n_beta)
    ]
    return sorted(a | b for a in alphas for b in betas)


def _excite(det: int, ops: Sequence[tuple[int, bool]]) -> tuple[int, int] | None:
    """Apply ladder ops (rightmost first); returns (sign, new_det) or None."""
    sign = 1
    for mode, dagger in reversed(ops):
        bit = 1 << mode
        if bool(det & bit) == dagger:
            return None
        if (det >> (mode + 1)).bit_count() & 1:
            sign = -sign
        det ^= bit
    return sign, det


def hamiltonian_matrix(ham: SpinOrbitalHamiltonian, dets: Sequence[int]) -> sp.csr_matrix:
    """Sparse ⟨D_i|H|D_j⟩ over ``dets``; excitations leaving the space are dropped."""
    index = {d: i for i, d in enumerate(dets)}
    n = ham.n_spin_orbitals
    h1, h2 = ham.one_body, ham.two_body

    one_by_q = [[(int(p), h1[p, q]) for p in np.nonzero(h1[:, q])[0]] for q in range(n)]
    two_by_rs: dict[tuple[int, int], list[tuple[int, int, float]]] = {}
    for p, q, r, s in zip(*np.nonzero(h2), strict=True):
        if p != q and r != s:
            two_by_rs.setdefault((int(r), int(s)), []).append((int(p), int(q), h2[p, q, r, s]))

    entries: dict[tuple[int, int], float] = {}
    for j, det in enumerate(dets):
        entries[(j, j)] = entries.get((j, j), 0.0) + ham.e_core
        occ = occupied(det)
        for q in occ:
            for p, v in one_by_q[q]:
                res = _excite(det, ((p, True), (q, False)))
                if res is None or res[1] not in index:
                    continue
                key = (index[res[1]], j)
                entries[key] = entries.get(key, 0.0) + res[0] * v
        for r in occ:
            for s in occ:
                for p, q, v in two_by_rs.get((r, s), ()):
                    res = _excite(det, ((p, True), (q, True), (r, False), (s, False)))
                    if res is None or res[1] not in index:
                        continue
                    key = (index[res[1]], j)
                    entries[key] = entries.get(key, 0.0) + res[0] * v

    keys = list(entries)
    rows = np.fromiter((k[0] for k in keys), dtype=np.int64, count=len(keys))
    cols = np.fromiter((k[1] for k in keys), dtype=np.int64, count=len(keys))
    vals = np.fromiter((entries[k] for k in keys), dtype=float, count=len(keys))
    dim = len(dets)
    return sp.csr_matrix((vals, (rows, cols)), shape=(dim, dim))


@dataclass(frozen=True)
class FciSolution:
    """Lowest eigenpair in the fixed-particle-number, fixed-S_z determinant space."""

    energy: float
    basis: tuple[int, ...]
    vector: np.ndarray
    n_spatial: int
    residual: float = 0.0

    @property
    def amplitudes(self) -> dict[int, float]:
        return {d: float(c) for d, c in zip(self.basis, self.vector, strict=True)}

    def amplitude(self, det: int) -> float:
        i = int(np.searchsorted(self.basis, det))
        if i < len(self.basis) and self.basis[i] == det:
            return float(self.vector[i])
        return 0.0


def fci_ground_state(
    ham: SpinOrbitalHamiltonian,
    *,
    tol: float = 1e-10,
    max_iter: int | None = None,
    n_roots: int = 4,
) -> FciSolution:
    """Lanczos ground state, HF-seeded; degenerate roots resolved by HF overlap."""
    if ham.n_spin_orbitals > MAX_FCI_SPIN_ORBITALS:
        raise ContractViolation(
            f"FCI supports at most {MAX_FCI_SPIN_ORBITALS} spin-orbitals, got {ham.n_spin_orbitals}"
        )
    dets = determinant_space(ham.n_spatial, ham.n_alpha, ham.n_beta)
    dim = len(dets)
    matrix = hamiltonian_matrix(ham, dets)
    ref_index = dets.index(ham.reference())
    hf = np.zeros(dim)
    hf[ref_index] = 1.0
    log.debug("FCI space: %d determinants, %d nonzeros", dim, matrix.nnz)

    if dim <= DENSE_FCI_CUTOFF:
        w, v = scipy.linalg.eigh(matrix.toarray())
        w, v = w[: min(n_roots, dim)], v[:, : min(n_roots, dim)]
    else:
        k = min(n_roots, dim - 1)
        v0 = hf + 1e-3 / np.sqrt(dim)
        try:
            w, v = eigsh(matrix, k=k, which="SA", v0=v0, tol=tol, maxiter=max_iter)
        except ArpackNoConvergence as exc:
            residual = _best_residual(matrix, exc.eigenvalues, exc.eigenvectors)
            raise ConvergenceError("FCI Lanczos iteration did not converge", residual) from exc
        order = np.argsort(w)
        w, v = w[order], v[:, order]

    degenerate = np.nonzero(w - w[0] < 1e-8)[0]
    vec = v[:, 0]
    if degenerate.size > 1:
        sub = v[:, degenerate]
        proj = sub @ (sub.T @ hf)
        norm = np.linalg.norm(proj)
        if norm > 1e-12:
            vec = proj / norm
    pivot = ref_index if abs(vec[ref_index]) > 1e-14 else int(np.argmax(np.abs(vec)))
    if vec[pivot] < 0:
        vec = -vec
    vec = vec / np.linalg.norm(vec)

    energy = float(vec @ (matrix @ vec))
    residual = float(np.linalg.norm(matrix @ vec - energy * vec))
    if residual > 1e-6:
        raise ConvergenceError("FCI eigenvector residual above tolerance", residual)
    log.info("FCI energy %.10f (dim %d, residual %.2e)", energy, dim, residual)
    return FciSolution(
        energy=energy, basis=tuple(dets), vector=vec, n_spatial=ham.n_spatial, residual=residual
    )


def _best_residual(matrix: sp.csr_matrix, values: np.ndarray, vectors: np.ndarray) -> float:
    if values is None or len(values) == 0:
        return float("nan")
    return float(
        min(np.linalg.norm(matrix @ vectors[:, i] - values[i] * vectors[:, i]) for i in range(len(values)))
    )


# ---------------------------------------------------------------------------
# Excitation ranking
# ---------------------------------------------------------------------------


class ExcitationKind(Enum):
    BOSONIC = "bosonic"
    NON_BOSONIC = "non-bosonic"


@dataclass(frozen=True, slots=True)
class RankedExcitation:
    """Double excitation c_p^† c_q^† c_r c_s from the reference (p < q, r > s)."""

    indices: tuple[int, int, int, int]
    amplitude: float
    kind: ExcitationKind
    determinant: int

    @property
    def is_bosonic(self) -> bool:
        return self.kind is ExcitationKind.BOSONIC

    def mo_pair(self, n_spatial: int) -> tuple[int, int]:
        """(occupied MO j, virtual MO k) of a bosonic excitation."""
        if not self.is_bosonic:
            raise ContractViolation(f"{self.indices} is not an electron-pair excitation")
        p, _, _, s = self.indices
        return s % n_spatial, p % n_spatial


def classify(indices: tuple[int, int, int, int], n_spatial: int) -> ExcitationKind:
    """Bosonic iff the term is d_k^† d_j = c_{kα}^† c_{kβ}^† c_{jβ} c_{jα}."""
    p, q, r, s = indices
    if p < n_spatial and q == p + n_spatial and s < n_spatial and r == s + n_spatial:
        return ExcitationKind.BOSONIC
    return ExcitationKind.NON_BOSONIC


def rank_excitations(fci: FciSolution, reference: int, limit: int) -> list[RankedExcitation]:
    """Double excitations of ``reference`` ordered by descending |FCI amplitude|."""
    ranked = []
    for det, amp in zip(fci.basis, fci.vector, strict=True):
        diff = det ^ reference
        if diff.bit_count() != 4 or abs(amp) < AMPLITUDE_CUTOFF:
            continue
        p, q = occupied(det & ~reference)
        s, r = occupied(reference & ~det)
        idx = (p, q, r, s)
        ranked.append(
            RankedExcitation(
                indices=idx, amplitude=float(amp), kind=classify(idx, fci.n_spatial), determinant=det
            )
        )
    ranked.sort(key=lambda e: (-abs(e.amplitude), e.indices))
    return ranked[: max(limit, 0)]


# ---------------------------------------------------------------------------
# Orbital selection
# ---------------------------------------------------------------------------


def select_orbitals(
    ham: SpinOrbitalHamiltonian,
    frozen: Iterable[int | str] = (),
    dropped: Iterable[int | str] = (),
) -> SpinOrbitalHamiltonian:
    """Freeze doubly occupied MOs and drop others at their reference occupation.

    Fixed occupied spin-orbitals are contracted into e_core and the one-body
    terms; fixed empty ones are deleted.
    """
    frozen_mos = ham.resolve_orbitals(frozen)
    dropped_mos = ham.resolve_orbitals(dropped)
    overlap = set(frozen_mos) & set(dropped_mos)
    if overlap:
        raise ContractViolation(f"Orbitals both frozen and dropped: {sorted(overlap)}")
    for mo in frozen_mos:
        if mo >= min(ham.n_alpha, ham.n_beta):
            raise ContractViolation(f"Frozen orbital {ham.label(mo)} is not doubly occupied")

    n = ham.n_spatial
    fixed_mos = set(frozen_mos) | set(dropped_mos)
    active = [mo for mo in range(n) if mo not in fixed_mos]
    fixed_alpha = [mo for mo in sorted(fixed_mos) if mo < ham.n_alpha]
    fixed_beta = [mo for mo in sorted(fixed_mos) if mo < ham.n_beta]
    filled = fixed_alpha + [mo + n for mo in fixed_beta]
    keep = active + [mo + n for mo in active]

    e_core = _occupied_energy(ham, filled)
    h1 = np.array(ham.one_body[np.ix_(keep, keep)])
    h2 = np.array(ham.two_body[np.ix_(keep, keep, keep, keep)])
    if filled:
        g = ham.two_body
        h1 += np.einsum("fabf->ab", g[np.ix_(filled, keep, keep, filled)])
        h1 += np.einsum("affb->ab", g[np.ix_(keep, filled, filled, keep)])
        h1 -= np.einsum("fafb->ab", g[np.ix_(filled, keep, filled, keep)])
        h1 -= np.einsum("afbf->ab", g[np.ix_(keep, filled, keep, filled)])

    n_alpha = ham.n_alpha - len(fixed_alpha)
    n_beta = ham.n_beta - len(fixed_beta)
    reduced = SpinOrbitalHamiltonian(
        n_spatial=len(active),
        e_core=e_core,
        one_body=h1,
        two_body=h2,
        n_electrons=n_alpha + n_beta,
        ms2=n_alpha - n_beta,
        orbital_labels=tuple(ham.orbital_labels[mo] for mo in active) if ham.orbital_labels else (),
    )
    log.info(
        "Orbital selection: frozen=%s dropped=%s -> %d MOs, %d electrons, e_core=%.8f",
        [ham.label(m) for m in frozen_mos], [ham.label(m) for m in dropped_mos],
        reduced.n_spatial, reduced.n_electrons, reduced.e_core,
    )
    return reduced
