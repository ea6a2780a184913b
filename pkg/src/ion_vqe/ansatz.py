"""HF+N unitary coupled-cluster ansatz: term list, qubit layout, ordering, Trotterization.

Register layout
---------------
Spin-orbitals touched by at least one ansatz term are *active*. They occupy
the low register positions in ``map_qubits`` order, with the two
spin-orbitals of every bosonic MO kept adjacent; inactive spin-orbitals
follow in ascending order and stay at their reference occupation, so the
qubit Hamiltonian is projected onto them and they never reach the circuit.

While every term is an electron-pair (bosonic) excitation the circuit uses
one qubit per active MO and the Hamiltonian is compressed onto the pair
subspace. Once a non-bosonic term is present the circuit runs on the active
spin-orbitals; each bosonic MO's qubit is the first of its two spin-orbitals
and the second is its ancilla, filled by one CNOT after the bosonic block.
"""

from __future__ import annotations

import logging
from collections import Counter
from collections.abc import Sequence
from dataclasses import dataclass, field, replace
from functools import cached_property
from itertools import combinations

from ion_vqe.config import TrotterConfig
from ion_vqe.errors import ContractViolation
from ion_vqe.hamiltonian import (
    ExcitationKind,
    RankedExcitation,
    SpinOrbitalHamiltonian,
    jordan_wigner,
)
from ion_vqe.pauli import QubitHamiltonian

log = logging.getLogger("ion_vqe.ansatz")


# ---------------------------------------------------------------------------
# Terms
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class ExcitationTerm:
    """One parameterized exp[θ (c_p^† c_q^† c_r c_s − h.c.)] factor."""

    indices: tuple[int, int, int, int]
    parameter_id: int
    kind: ExcitationKind
    mos: tuple[int, int] | None = None
    xy_qubits: frozenset[int] = field(default_factory=frozenset)
    jw_support: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        if len(set(self.indices)) != 4:
            raise ContractViolation(f"Excitation {self.indices} needs four distinct spin-orbitals")
        if self.kind is ExcitationKind.BOSONIC and (self.mos is None or self.mos[0] == self.mos[1]):
            raise ContractViolation(f"Bosonic term {self.indices} needs two distinct MOs")

    @classmethod
    def from_ranked(cls, exc: RankedExcitation, parameter_id: int, n_spatial: int) -> ExcitationTerm:
        mos = exc.mo_pair(n_spatial) if exc.is_bosonic else None
        return cls(indices=exc.indices, parameter_id=parameter_id, kind=exc.kind, mos=mos)

    @property
    def is_bosonic(self) -> bool:
        return self.kind is ExcitationKind.BOSONIC

    @property
    def spin_orbitals(self) -> tuple[int, ...]:
        return tuple(sorted(self.indices))

    def placed(self, layout: Sequence[int]) -> ExcitationTerm:
        """Copy with xy_qubits/jw_support computed for a spin-orbital → position layout."""
        xy = [layout[so] for so in self.indices]
        q0, q1, q2, q3 = sorted(xy)
        z = set(range(q0 + 1, q1)) | set(range(q2 + 1, q3))
        support = frozenset(xy) if self.is_bosonic else frozenset(xy) | frozenset(z)
        return replace(self, xy_qubits=frozenset(xy), jw_support=support)


def jw_string_length(term: ExcitationTerm, layout: Sequence[int]) -> int:
    q0, q1, q2, q3 = sorted(layout[so] for so in term.indices)
    return (q1 - q0 - 1) + (q3 - q2 - 1)


# ---------------------------------------------------------------------------
# Qubit mapping and ordering
# ---------------------------------------------------------------------------


def map_qubits(terms: Sequence[ExcitationTerm], n_orbitals: int) -> tuple[int, ...]:
    """Greedy placement of frequently co-occurring spin-orbitals at adjacent positions.

    Returns ``qubit_map`` with ``qubit_map[orbital] = position``. Pairs are taken in
    order of decreasing co-occurrence count (ties lexicographic) while they extend
    a simple chain; chains and untouched orbitals are laid out by their smallest
    member. Falls back to the identity map if that has shorter total JW strings.
    """
    identity = tuple(range(n_orbitals))
    if not terms:
        return identity

    counts: Counter[tuple[int, int]] = Counter()
    for t in terms:
        for a, b in combinations(t.spin_orbitals, 2):
            counts[(a, b)] += 1

    parent = list(range(n_orbitals))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    neighbours: dict[int, list[int]] = {o: [] for o in range(n_orbitals)}
    for (a, b), _ in sorted(counts.items(), key=lambda kv: (-kv[1], kv[0])):
        if len(neighbours[a]) < 2 and len(neighbours[b]) < 2 and find(a) != find(b):
            neighbours[a].append(b)
            neighbours[b].append(a)
            parent[find(a)] = find(b)

    order: list[int] = []
    placed: set[int] = set()
    for start in range(n_orbitals):
        if start in placed:
            continue
        # walk from the smaller endpoint of the component containing `start`
        members = [o for o in range(n_orbitals) if find(o) == find(start)]
        ends = [o for o in members if len(neighbours[o]) < 2]
        node, prev = min(ends), None
        while node is not None:
            order.append(node)
            placed.add(node)
            nxt = [o for o in neighbours[node] if o != prev]
            prev, node = node, (nxt[0] if nxt else None)

    greedy = [0] * n_orbitals
    for pos, orb in enumerate(order):
        greedy[orb] = pos
    greedy_cost = sum(jw_string_length(t, greedy) for t in terms)
    identity_cost = sum(jw_string_length(t, identity) for t in terms)
    log.debug("map_qubits: greedy JW cost %d, identity %d", greedy_cost, identity_cost)
    return tuple(greedy) if greedy_cost <= identity_cost else identity


def order_terms(terms: Sequence[ExcitationTerm]) -> list[ExcitationTerm]:
    """Greedy chain maximizing shared support between neighbours.

    Two terms score the size of their shared ``jw_support`` when their X/Y qubits
    overlap, otherwise zero. The chain starts at the lowest parameter id; ties go
    to the lower parameter id.
    """
    remaining = sorted(terms, key=lambda t: t.parameter_id)
    if len(remaining) <= 1:
        return remaining
    out = [remaining.pop(0)]
    while remaining:
        last = out[-1]
        best = max(remaining, key=lambda t: (_overlap(last, t), -t.parameter_id))
        remaining.remove(best)
        out.append(best)
    return out


def _overlap(a: ExcitationTerm, b: ExcitationTerm) -> int:
    if not a.xy_qubits & b.xy_qubits:
        return 0
    return len(a.jw_support & b.jw_support)


# ---------------------------------------------------------------------------
# Ansatz
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AnsatzSpec:
    """Reference determinant plus ordered excitation terms and their qubit layout."""

    reference: int
    terms: tuple[ExcitationTerm, ...]
    n_spatial: int
    qubit_map: tuple[int, ...]
    n_parameters: int = 0

    def __post_init__(self) -> None:
        ids = sorted(t.parameter_id for t in self.terms)
        if ids != list(range(self.n_parameters)):
            raise ContractViolation(f"Parameter ids {ids} are not 0..{self.n_parameters - 1}")
        seen_non_bosonic = False
        for t in self.terms:
            if t.is_bosonic and seen_non_bosonic:
                raise ContractViolation("Bosonic terms must precede non-bosonic terms")
            seen_non_bosonic |= not t.is_bosonic

    # ----- layout -----

    @property
    def n_spin_orbitals(self) -> int:
        return 2 * self.n_spatial

    @cached_property
    def active(self) -> tuple[int, ...]:
        """Active spin-orbitals in register order; a bosonic MO's two spin-orbitals are adjacent."""
        used = {so for t in self.terms for so in t.indices}
        paired = {mo for t in self.terms if t.is_bosonic for mo in t.mos}
        n = self.n_spatial
        out: list[int] = []
        for so in sorted(used, key=lambda so: self.qubit_map[so]):
            if so in out:
                continue
            out.append(so)
            if so % n in paired:
                out.append(so + n if so < n else so - n)
        return tuple(out)

    @cached_property
    def layout(self) -> tuple[int, ...]:
        """layout[spin_orbital] = register position (inactive ones after the active block)."""
        used = set(self.active)
        order = list(self.active) + [so for so in range(self.n_spin_orbitals) if so not in used]
        out = [0] * self.n_spin_orbitals
        for pos, so in enumerate(order):
            out[so] = pos
        return tuple(out)

    @property
    def bosonic_only(self) -> bool:
        return all(t.is_bosonic for t in self.terms)

    @cached_property
    def bosonic_mos(self) -> tuple[int, ...]:
        """MOs touched by bosonic terms, ordered by their first spin-orbital position."""
        mos = {mo for t in self.terms if t.is_bosonic for mo in t.mos}
        return tuple(sorted(mos, key=self._mo_position))

    def _mo_position(self, mo: int) -> int:
        return min(self.layout[mo], self.layout[mo + self.n_spatial])

    @cached_property
    def mo_qubits(self) -> dict[int, int]:
        if self.bosonic_only:
            return {mo: k for k, mo in enumerate(self.bosonic_mos)}
        return {mo: self._mo_position(mo) for mo in self.bosonic_mos}

    @cached_property
    def ancillas(self) -> dict[int, int]:
        if self.bosonic_only:
            return {}
        n = self.n_spatial
        return {mo: max(self.layout[mo], self.layout[mo + n]) for mo in self.bosonic_mos}

    @property
    def n_qubits(self) -> int:
        return len(self.bosonic_mos) if self.bosonic_only else len(self.active)

    def register_qubits(self, term: ExcitationTerm) -> tuple[int, int, int, int]:
        """Spin-orbital register positions of (p, q, r, s)."""
        return tuple(self.layout[so] for so in term.indices)  # type: ignore[return-value]

    def pair_sign(self, term: ExcitationTerm) -> int:
        """Sign of c_p^† c_q^† c_r c_s on the reference in register ordering.

        The bosonic block synthesizes ``sign · (σ+^k σ−^j − h.c.)`` so that it agrees
        with the fermionic generator on the pair subspace.
        """
        det = 0
        for so in range(self.n_spin_orbitals):
            if self.reference >> so & 1:
                det |= 1 << self.layout[so]
        p, q, r, s = self.register_qubits(term)
        sign = 1
        for mode, create in ((s, False), (r, False), (q, True), (p, True)):
            if bool(det >> mode & 1) == create:
                raise ContractViolation(f"{term.indices} does not act on the reference")
            if (det >> (mode + 1)).bit_count() & 1:
                sign = -sign
            det ^= 1 << mode
        return sign

    def prepared_reference(self) -> int:
        """Register bits set by the reference-preparation X gates."""
        bits = 0
        if self.bosonic_only:
            for mo, k in self.mo_qubits.items():
                if self.reference >> mo & 1:
                    bits |= 1 << k
            return bits
        ancilla_set = set(self.ancillas.values())
        for so in self.active:
            pos = self.layout[so]
            if self.reference >> so & 1 and pos not in ancilla_set:
                bits |= 1 << pos
        return bits

    def encoded_reference(self) -> int:
        """Register bits of the reference state once the ancillas are filled."""
        if self.bosonic_only:
            return self.prepared_reference()
        bits = 0
        for so in self.active:
            if self.reference >> so & 1:
                bits |= 1 << self.layout[so]
        return bits

    # ----- Hamiltonian on the circuit register -----

    def qubit_hamiltonian(self, ham: SpinOrbitalHamiltonian) -> QubitHamiltonian:
        """JW Hamiltonian in this layout, projected onto inactive reference bits."""
        if ham.n_spatial != self.n_spatial:
            raise ContractViolation(
                f"Ansatz built for {self.n_spatial} MOs, Hamiltonian has {ham.n_spatial}"
            )
        full = jordan_wigner(ham, self.layout)
        n_active = len(self.active)
        fixed = {
            self.layout[so]: (self.reference >> so) & 1
            for so in range(self.n_spin_orbitals)
            if self.layout[so] >= n_active
        }
        reduced = full.project(fixed, list(range(n_active)))
        if self.bosonic_only:
            n = self.n_spatial
            pairs = [(self.layout[mo], self.layout[mo + n]) for mo in self.bosonic_mos]
            reduced = reduced.compress_pairs(pairs)
        log.debug(
            "Qubit Hamiltonian: %d qubits, %d terms (%s encoding)",
            reduced.n_qubits, len(reduced), "pair" if self.bosonic_only else "spin-orbital",
        )
        return reduced

    # ----- nesting -----

    def truncated(self, n: int) -> AnsatzSpec:
        """HF+n sub-ansatz: terms with parameter id < n, same relative order and layout."""
        if not 0 <= n <= self.n_parameters:
            raise ContractViolation(f"Cannot truncate HF+{self.n_parameters} to HF+{n}")
        terms = tuple(t for t in self.terms if t.parameter_id < n)
        return _place(self.reference, terms, self.n_spatial, self.qubit_map, n)

    def to_dict(self) -> dict:
        return {
            "reference": self.reference,
            "n_spatial": self.n_spatial,
            "n_parameters": self.n_parameters,
            "n_qubits": self.n_qubits,
            "encoding": "pair" if self.bosonic_only else "spin-orbital",
            "qubit_map": list(self.qubit_map),
            "layout": list(self.layout),
            "mo_qubits": {str(k): v for k, v in self.mo_qubits.items()},
            "ancillas": {str(k): v for k, v in self.ancillas.items()},
            "terms": [
                {
                    "indices": list(t.indices),
                    "parameter_id": t.parameter_id,
                    "kind": t.kind.value,
                    "mos": list(t.mos) if t.mos else None,
                    "jw_support": sorted(t.jw_support),
                }
                for t in self.terms
            ],
        }


def _place(
    reference: int,
    terms: Sequence[ExcitationTerm],
    n_spatial: int,
    qubit_map: tuple[int, ...],
    n_parameters: int,
) -> AnsatzSpec:
    draft = AnsatzSpec(reference, tuple(terms), n_spatial, qubit_map, n_parameters)
    placed = tuple(t.placed(draft.layout) for t in terms)
    return AnsatzSpec(reference, placed, n_spatial, qubit_map, n_parameters)


def build_ucc_ansatz(
    ranked: Sequence[RankedExcitation],
    n: int,
    reference: int,
    n_spatial: int,
    *,
    reorder: bool = True,
    remap: bool = True,
) -> AnsatzSpec:
    """HF+n ansatz from the n highest-ranked excitations, one parameter per term.

    Parameter ids follow the ranking. Bosonic terms run first; non-bosonic terms
    are reordered for support overlap when ``reorder`` is set.
    """
    if n > len(ranked):
        raise ContractViolation(f"HF+{n} requested but only {len(ranked)} excitations ranked")
    n_so = 2 * n_spatial
    terms = [ExcitationTerm.from_ranked(r, i, n_spatial) for i, r in enumerate(ranked[:n])]
    qubit_map = map_qubits(terms, n_so) if remap else tuple(range(n_so))

    draft = _place(reference, [t for t in terms if t.is_bosonic] + [t for t in terms if not t.is_bosonic],
                   n_spatial, qubit_map, n)
    bosonic = [t for t in draft.terms if t.is_bosonic]
    others = [t for t in draft.terms if not t.is_bosonic]
    if reorder:
        others = order_terms(others)
    spec = AnsatzSpec(reference, tuple(bosonic + others), n_spatial, qubit_map, n)
    log.info(
        "HF+%d ansatz: %d bosonic, %d non-bosonic terms on %d qubits",
        n, len(bosonic), len(others), spec.n_qubits,
    )
    return spec


# ---------------------------------------------------------------------------
# Product formulas
# ---------------------------------------------------------------------------


def _suzuki(terms: Sequence[ExcitationTerm], order: int, lam: float) -> list[tuple[ExcitationTerm, float]]:
    if order == 1:
        return [(t, lam) for t in terms]
    if order == 2:
        return [(t, lam / 2) for t in terms] + [(t, lam / 2) for t in reversed(terms)]
    k = order // 2
    p = 1.0 / (4.0 - 4.0 ** (1.0 / (2 * k - 1)))
    outer = _suzuki(terms, order - 2, p * lam)
    middle = _suzuki(terms, order - 2, (1.0 - 4.0 * p) * lam)
    return outer + outer + middle + outer + outer


def trotterize(spec: AnsatzSpec, cfg: TrotterConfig) -> list[tuple[ExcitationTerm, float]]:
    """Ordered (term, angle scale) exponentials; scales multiply θ at evaluation."""
    cfg.validate()
    step = _suzuki(spec.terms, cfg.order, 1.0 / cfg.steps)
    return step * cfg.steps
