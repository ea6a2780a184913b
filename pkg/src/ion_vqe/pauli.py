"""Pauli-string algebra, Jordan-Wigner ladder operators and qubit Hamiltonians.

Pauli strings are stored in symplectic form: two integer bitmasks ``x`` and
``z`` where bit q describes qubit q::

    x  z   factor
    0  0   I
    1  0   X
    0  1   Z
    1  1   Y

A *Pauli sum* is a plain ``dict[(x, z), complex]``; the helpers below multiply
and add them. :class:`QubitHamiltonian` is the immutable, real-coefficient
result handed to the simulator and the measurement code.

Jordan-Wigner convention (σz tail on higher indices)::

    c_j^†  =  σ_+^j  ⊗  Z_{j+1} … Z_{n-1},      σ_± = (X ∓ iY) / 2

so that, acting on a determinant bitmask, a ladder operator on mode j picks up
the sign ``(-1)^popcount(bits >> (j + 1))``.
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from ion_vqe.errors import ContractViolation

PauliSum = dict[tuple[int, int], complex]

COEFF_CUTOFF = 1e-12
IMAG_CUTOFF = 1e-10

_LETTER = {(0, 0): "I", (1, 0): "X", (0, 1): "Z", (1, 1): "Y"}
_BITS = {"I": (0, 0), "X": (1, 0), "Z": (0, 1), "Y": (1, 1)}
_I_POW = (1, 1j, -1, -1j)


# ---------------------------------------------------------------------------
# Symplectic primitives
# ---------------------------------------------------------------------------


def product_phase(x1: int, z1: int, x2: int, z2: int) -> int:
    """Exponent k (mod 4) such that P1·P2 = i^k · P(x1^x2, z1^z2)."""
    y1, xo1, zo1 = x1 & z1, x1 & ~z1, z1 & ~x1
    y2, xo2, zo2 = x2 & z2, x2 & ~z2, z2 & ~x2
    k = (
        (y1 & zo2).bit_count()
        - (y1 & xo2).bit_count()
        + (xo1 & y2).bit_count()
        - (xo1 & zo2).bit_count()
        + (zo1 & xo2).bit_count()
        - (zo1 & y2).bit_count()
    )
    return k % 4


def anticommutes(x1: int, z1: int, x2: int, z2: int) -> bool:
    return ((x1 & z2).bit_count() + (z1 & x2).bit_count()) % 2 == 1


def apply_to_basis(x: int, z: int, index: int) -> tuple[complex, int]:
    """P|index⟩ = phase·|index ^ x⟩."""
    phase = _I_POW[(x & z).bit_count() % 4]
    if (index & z).bit_count() % 2:
        phase = -phase
    return phase, index ^ x


def label_to_masks(factors: Mapping[int, str]) -> tuple[int, int]:
    x = z = 0
    for q, letter in factors.items():
        bx, bz = _BITS[letter.upper()]
        x |= bx << q
        z |= bz << q
    return x, z


def masks_to_factors(x: int, z: int) -> dict[int, str]:
    out: dict[int, str] = {}
    bits = x | z
    while bits:
        q = (bits & -bits).bit_length() - 1
        out[q] = _LETTER[((x >> q) & 1, (z >> q) & 1)]
        bits &= bits - 1
    return out


# ---------------------------------------------------------------------------
# Clifford conjugation (U P U†) of a signed Hermitian Pauli
# ---------------------------------------------------------------------------


def conjugate(x: int, z: int, sign: int, name: str, qubits: Sequence[int]) -> tuple[int, int, int]:
    """Push a signed Pauli through one Clifford gate: returns U P U†.

    Supported gates: ``h``, ``s``, ``sdg``, ``x``, ``cnot``.
    """
    if name == "cnot":
        c, t = qubits
        xc, zc = (x >> c) & 1, (z >> c) & 1
        xt, zt = (x >> t) & 1, (z >> t) & 1
        if xc and zt and not (xt ^ zc):
            sign = -sign
        x ^= xc << t
        z ^= zt << c
        return x, z, sign
    (q,) = qubits
    xq, zq = (x >> q) & 1, (z >> q) & 1
    if name == "h":
        if xq and zq:
            sign = -sign
        if xq != zq:
            x ^= 1 << q
            z ^= 1 << q
    elif name == "s":
        if xq and zq:
            sign = -sign
        z ^= xq << q
    elif name == "sdg":
        if xq and not zq:
            sign = -sign
        z ^= xq << q
    elif name == "x":
        if zq:
            sign = -sign
    else:
        raise ContractViolation(f"{name} is not a supported Clifford gate")
    return x, z, sign


# ---------------------------------------------------------------------------
# Pauli sums
# ---------------------------------------------------------------------------


def multiply(a: Mapping[tuple[int, int], complex], b: Mapping[tuple[int, int], complex]) -> PauliSum:
    out: PauliSum = {}
    for (x1, z1), c1 in a.items():
        for (x2, z2), c2 in b.items():
            key = (x1 ^ x2, z1 ^ z2)
            out[key] = out.get(key, 0.0) + c1 * c2 * _I_POW[product_phase(x1, z1, x2, z2)]
    return out


def accumulate(target: PauliSum, source: Mapping[tuple[int, int], complex], scale: complex = 1.0) -> None:
    for key, c in source.items():
        target[key] = target.get(key, 0.0) + scale * c


def prune(terms: Mapping[tuple[int, int], complex], cutoff: float = COEFF_CUTOFF) -> PauliSum:
    return {k: c for k, c in terms.items() if abs(c) >= cutoff}


def adjoint(terms: Mapping[tuple[int, int], complex]) -> PauliSum:
    return {k: complex(c).conjugate() for k, c in terms.items()}


def ladder(mode: int, dagger: bool, n_modes: int) -> PauliSum:
    """JW image of c_mode (or c_mode^† when ``dagger``) on ``n_modes`` qubits."""
    if not 0 <= mode < n_modes:
        raise ContractViolation(f"mode {mode} outside register of {n_modes}")
    bit = 1 << mode
    tail = ((1 << n_modes) - 1) & ~((bit << 1) - 1)
    # c^† = ½(X − iY)·Z_tail,  c = ½(X + iY)·Z_tail
    return {(bit, tail): 0.5, (bit, bit | tail): -0.5j if dagger else 0.5j}


def fermion_product(ops: Sequence[tuple[int, bool]], n_modes: int) -> PauliSum:
    """JW image of the operator product ``ops[0] ops[1] …`` of (mode, dagger) pairs."""
    out: PauliSum = {(0, 0): 1.0}
    for mode, dagger in ops:
        out = multiply(out, ladder(mode, dagger, n_modes))
    return prune(out, 1e-15)


def excitation_generator(p: int, q: int, r: int, s: int, n_modes: int) -> PauliSum:
    """JW image of c_p^† c_q^† c_r c_s − h.c. (anti-Hermitian)."""
    t = fermion_product([(p, True), (q, True), (r, False), (s, False)], n_modes)
    out = dict(t)
    accumulate(out, adjoint(t), -1.0)
    return prune(out)


# ---------------------------------------------------------------------------
# Real-coefficient Pauli strings and Hamiltonians
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class PauliString:
    """Weighted Pauli string; identity factors are implicit."""

    x: int
    z: int
    coefficient: float

    @classmethod
    def from_factors(cls, factors: Mapping[int, str], coefficient: float) -> PauliString:
        x, z = label_to_masks(factors)
        return cls(x=x, z=z, coefficient=float(coefficient))

    @property
    def factors(self) -> dict[int, str]:
        return masks_to_factors(self.x, self.z)

    @property
    def support(self) -> int:
        return self.x | self.z

    def label(self, n_qubits: int) -> str:
        """Dense label, character q is qubit q."""
        return "".join(_LETTER[((self.x >> q) & 1, (self.z >> q) & 1)] for q in range(n_qubits))


@dataclass(frozen=True)
class QubitHamiltonian:
    """Σ coefficient·PauliString + constant on ``n_qubits`` qubits."""

    n_qubits: int
    terms: tuple[PauliString, ...] = ()
    constant: float = 0.0
    _index: dict[tuple[int, int], int] = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self) -> None:
        index = {(t.x, t.z): i for i, t in enumerate(self.terms)}
        if len(index) != len(self.terms):
            raise ContractViolation("QubitHamiltonian terms must have distinct Pauli strings")
        limit = 1 << self.n_qubits
        for t in self.terms:
            if t.support >= limit:
                raise ContractViolation(f"Pauli term {t.factors} exceeds {self.n_qubits} qubits")
        self._index.update(index)

    @classmethod
    def from_pauli_sum(
        cls,
        n_qubits: int,
        terms: Mapping[tuple[int, int], complex],
        constant: float = 0.0,
    ) -> QubitHamiltonian:
        """Merge, drop imaginary residues and prune tiny coefficients."""
        const = complex(constant)
        kept: list[PauliString] = []
        for (x, z), c in sorted(terms.items()):
            c = complex(c)
            if abs(c.imag) > IMAG_CUTOFF:
                raise ContractViolation(
                    f"Non-Hermitian residue {c.imag:.3e} on {masks_to_factors(x, z)}"
                )
            if x == 0 and z == 0:
                const += c
            elif abs(c.real) >= COEFF_CUTOFF:
                kept.append(PauliString(x, z, c.real))
        return cls(n_qubits=n_qubits, terms=tuple(kept), constant=const.real)

    def coefficient(self, factors: Mapping[int, str]) -> float:
        idx = self._index.get(label_to_masks(factors))
        return 0.0 if idx is None else self.terms[idx].coefficient

    def __len__(self) -> int:
        return len(self.terms)

    # ----- matrices and expectations -----

    @cached_property
    def sparse_matrix(self) -> sp.csr_matrix:
        dim = 1 << self.n_qubits
        idx = np.arange(dim, dtype=np.int64)
        by_x: dict[int, np.ndarray] = {}
        for t in self.terms:
            parity = np.zeros(dim, dtype=np.int64)
            zbits = t.z
            while zbits:
                q = (zbits & -zbits).bit_length() - 1
                parity ^= (idx >> q) & 1
                zbits &= zbits - 1
            phase = _I_POW[(t.x & t.z).bit_count() % 4]
            diag = t.coefficient * phase * (1 - 2 * parity)
            if t.x in by_x:
                by_x[t.x] = by_x[t.x] + diag
            else:
                by_x[t.x] = diag.astype(complex)
        rows, cols, vals = [idx], [idx], [np.full(dim, self.constant, dtype=complex)]
        for x, diag in by_x.items():
            rows.append(idx ^ x)
            cols.append(idx)
            vals.append(diag)
        return sp.csr_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(dim, dim),
        )

    def to_matrix(self) -> np.ndarray:
        return self.sparse_matrix.toarray()

    def expectation(self, amplitudes: np.ndarray) -> float:
        if amplitudes.shape != (1 << self.n_qubits,):
            raise ContractViolation(
                f"State has {amplitudes.shape[0]} amplitudes, Hamiltonian acts on "
                f"{self.n_qubits} qubits"
            )
        value = np.vdot(amplitudes, self.sparse_matrix @ amplitudes)
        if abs(value.imag) > 1e-10:
            raise ContractViolation(f"Expectation has imaginary part {value.imag:.3e}")
        return float(value.real)

    # ----- reductions -----

    def project(self, fixed: Mapping[int, int], keep: Sequence[int]) -> QubitHamiltonian:
        """Restrict to the subspace where qubits in ``fixed`` hold the given bits.

        ``keep[i]`` is the old qubit that becomes qubit i. Terms flipping a fixed
        qubit vanish; Z on a fixed qubit becomes ±1.
        """
        fixed_mask = 0
        ones = 0
        for q, bit in fixed.items():
            fixed_mask |= 1 << q
            ones |= (bit & 1) << q
        covered = fixed_mask
        for q in keep:
            covered |= 1 << q
        if covered != (1 << self.n_qubits) - 1 or len(keep) + len(fixed) != self.n_qubits:
            raise ContractViolation("project() needs fixed and kept qubits to partition the register")
        out: PauliSum = {}
        for t in self.terms:
            if t.x & fixed_mask:
                continue
            c = t.coefficient
            if (t.z & fixed_mask & ones).bit_count() % 2:
                c = -c
            key = (_compact(t.x, keep), _compact(t.z, keep))
            out[key] = out.get(key, 0.0) + c
        return QubitHamiltonian.from_pauli_sum(len(keep), out, self.constant)

    def compress_pairs(self, pairs: Sequence[tuple[int, int]]) -> QubitHamiltonian:
        """Restrict to states where each qubit pair (a, b) is |00⟩ or |11⟩.

        Pair k becomes qubit k: (I,I),(Z,Z)→I; (I,Z),(Z,I)→Z; (X,X)→X;
        (Y,Y)→−X; (X,Y),(Y,X)→Y; diagonal/off-diagonal mixes vanish.
        """
        used = sorted(q for pair in pairs for q in pair)
        if used != list(range(self.n_qubits)):
            raise ContractViolation("compress_pairs() needs pairs covering every qubit once")
        out: PauliSum = {}
        for t in self.terms:
            c = t.coefficient
            x = z = 0
            for k, (a, b) in enumerate(pairs):
                pa = _LETTER[((t.x >> a) & 1, (t.z >> a) & 1)]
                pb = _LETTER[((t.x >> b) & 1, (t.z >> b) & 1)]
                res = _PAIR_RULES.get(pa + pb)
                if res is None:
                    c = 0.0
                    break
                letter, sgn = res
                c *= sgn
                bx, bz = _BITS[letter]
                x |= bx << k
                z |= bz << k
            if c:
                out[(x, z)] = out.get((x, z), 0.0) + c
        return QubitHamiltonian.from_pauli_sum(len(pairs), out, self.constant)


_PAIR_RULES: dict[str, tuple[str, int]] = {
    "II": ("I", 1),
    "ZZ": ("I", 1),
    "IZ": ("Z", 1),
    "ZI": ("Z", 1),
    "XX": ("X", 1),
    "YY": ("X", -1),
    "XY": ("Y", 1),
    "YX": ("Y", 1),
}


def _compact(mask: int, keep: Sequence[int]) -> int:
    out = 0
    for i, q in enumerate(keep):
        out |= ((mask >> q) & 1) << i
    return out


def total_support(terms: Iterable[PauliString]) -> int:
    mask = 0
    for t in terms:
        mask |= t.support
    return mask
