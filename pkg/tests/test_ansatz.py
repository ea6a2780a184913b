"""Tests for ansatz construction, qubit layout, term ordering and Trotterization."""

import json

import numpy as np
import pytest

from ion_vqe.ansatz import (
    AnsatzSpec,
    ExcitationTerm,
    build_ucc_ansatz,
    jw_string_length,
    map_qubits,
    order_terms,
    trotterize,
)
from ion_vqe.config import TrotterConfig
from ion_vqe.errors import ContractViolation
from ion_vqe.hamiltonian import ExcitationKind, fci_ground_state, hf_energy, rank_excitations


@pytest.fixture
def h2_spec(h2):
    ranked = rank_excitations(fci_ground_state(h2), h2.reference(), 10)
    return build_ucc_ansatz(ranked, 1, h2.reference(), h2.n_spatial)


@pytest.fixture(scope="module")
def toy_ranked(toy, toy_fci):
    return rank_excitations(toy_fci, toy.reference(), 100)


@pytest.fixture(scope="module")
def toy_spec(toy, toy_ranked):
    return build_ucc_ansatz(toy_ranked, 6, toy.reference(), toy.n_spatial)


def _nb(indices, pid):
    return ExcitationTerm(indices, pid, ExcitationKind.NON_BOSONIC)


class TestExcitationTerm:
    """Term validation and placement."""

    def test_repeated_index(self):
        with pytest.raises(ContractViolation, match="distinct"):
            _nb((0, 0, 1, 2), 0)

    def test_bosonic_needs_mos(self):
        with pytest.raises(ContractViolation, match="two distinct MOs"):
            ExcitationTerm((1, 3, 2, 0), 0, ExcitationKind.BOSONIC)

    def test_placed_support(self):
        term = _nb((7, 6, 5, 3), 0).placed(tuple(range(8)))
        assert term.xy_qubits == {3, 5, 6, 7}
        assert term.jw_support == {3, 4, 5, 6, 7}
        assert jw_string_length(term, tuple(range(8))) == 1


class TestH2Ansatz:
    """The single pair excitation of H2."""

    def test_layout(self, h2_spec):
        assert h2_spec.bosonic_only
        assert h2_spec.n_qubits == 2
        assert h2_spec.n_parameters == 1
        assert h2_spec.prepared_reference() == 0b01
        assert h2_spec.encoded_reference() == 0b01
        assert h2_spec.ancillas == {}

    def test_pair_sign(self, h2_spec):
        assert h2_spec.pair_sign(h2_spec.terms[0]) in (1, -1)

    def test_qubit_hamiltonian(self, h2, h2_spec):
        qh = h2_spec.qubit_hamiltonian(h2)
        assert qh.n_qubits == 2
        matrix = qh.to_matrix()
        ref = h2_spec.encoded_reference()
        assert matrix[ref, ref].real == pytest.approx(hf_energy(h2, h2.reference()), abs=1e-10)
        # one electron pair: the states with exactly one MO qubit set
        block = matrix[np.ix_([0b01, 0b10], [0b01, 0b10])]
        assert np.linalg.eigvalsh(block)[0] == pytest.approx(fci_ground_state(h2).energy, abs=1e-9)

    def test_wrong_hamiltonian(self, h2_spec, toy):
        with pytest.raises(ContractViolation, match="MOs"):
            h2_spec.qubit_hamiltonian(toy)

    def test_too_many_terms(self, h2):
        ranked = rank_excitations(fci_ground_state(h2), h2.reference(), 10)
        with pytest.raises(ContractViolation, match="HF\\+2"):
            build_ucc_ansatz(ranked, 2, h2.reference(), h2.n_spatial)


class TestToyAnsatz:
    """Mixed bosonic and non-bosonic ansatz on the 4-MO toy molecule."""

    def test_bosonic_first(self, toy_spec):
        kinds = [t.is_bosonic for t in toy_spec.terms]
        assert kinds == sorted(kinds, reverse=True)

    def test_parameter_ids_follow_ranking(self, toy_spec, toy_ranked):
        assert sorted(t.parameter_id for t in toy_spec.terms) == list(range(6))
        by_id = {t.parameter_id: t.indices for t in toy_spec.terms}
        assert [by_id[i] for i in range(6)] == [r.indices for r in toy_ranked[:6]]

    def test_layout_is_permutation(self, toy_spec):
        assert sorted(toy_spec.layout) == list(range(toy_spec.n_spin_orbitals))
        n = toy_spec.n_spatial
        for mo in toy_spec.bosonic_mos:
            assert abs(toy_spec.layout[mo] - toy_spec.layout[mo + n]) == 1

    def test_encoded_reference_is_hf(self, toy, toy_ranked):
        spec = build_ucc_ansatz(toy_ranked, len(toy_ranked), toy.reference(), toy.n_spatial)
        qh = spec.qubit_hamiltonian(toy)
        ref = spec.encoded_reference()
        diag = qh.sparse_matrix.diagonal()
        assert diag[ref].real == pytest.approx(hf_energy(toy, toy.reference()), abs=1e-10)

    def test_truncated_nesting(self, toy_spec):
        three = toy_spec.truncated(3)
        assert three.n_parameters == 3
        assert {t.parameter_id for t in three.terms} == {0, 1, 2}
        assert three.truncated(3).terms == three.terms
        assert toy_spec.truncated(0).n_qubits == 0
        with pytest.raises(ContractViolation, match="truncate"):
            toy_spec.truncated(7)

    def test_hf_plus_zero(self, toy):
        spec = build_ucc_ansatz((), 0, toy.reference(), toy.n_spatial)
        assert spec.n_qubits == 0
        assert spec.bosonic_only

    def test_to_dict_is_json(self, toy_spec):
        data = json.loads(json.dumps(toy_spec.to_dict()))
        assert data["n_parameters"] == 6
        assert len(data["terms"]) == 6

    def test_parameter_id_gap_rejected(self, toy_spec):
        with pytest.raises(ContractViolation, match="Parameter ids"):
            AnsatzSpec(toy_spec.reference, toy_spec.terms[:2], toy_spec.n_spatial, toy_spec.qubit_map, 6)


class TestMapping:
    """Greedy qubit placement and term ordering."""

    def test_map_qubits_no_worse_than_identity(self, toy, toy_ranked):
        terms = [ExcitationTerm.from_ranked(r, i, toy.n_spatial) for i, r in enumerate(toy_ranked)]
        n_so = toy.n_spin_orbitals
        mapping = map_qubits(terms, n_so)
        assert sorted(mapping) == list(range(n_so))
        identity = tuple(range(n_so))
        assert sum(jw_string_length(t, mapping) for t in terms) <= sum(
            jw_string_length(t, identity) for t in terms
        )

    def test_map_qubits_empty(self):
        assert map_qubits([], 4) == (0, 1, 2, 3)

    def test_order_terms_prefers_shared_support(self):
        layout = tuple(range(8))
        a = _nb((3, 2, 1, 0), 0).placed(layout)
        b = _nb((7, 6, 5, 3), 1).placed(layout)
        c = _nb((2, 3, 0, 1), 2).placed(layout)
        assert [t.parameter_id for t in order_terms([b, c, a])] == [0, 2, 1]

    def test_order_terms_short(self):
        assert order_terms([]) == []


class TestTrotterize:
    """Product-formula expansions."""

    def test_first_order(self, toy_spec):
        seq = trotterize(toy_spec, TrotterConfig())
        assert [t for t, _ in seq] == list(toy_spec.terms)
        assert all(scale == 1.0 for _, scale in seq)

    def test_second_order_palindrome(self, toy_spec):
        seq = trotterize(toy_spec, TrotterConfig(order=2))
        terms = [t for t, _ in seq]
        assert terms == terms[::-1]
        assert all(scale == 0.5 for _, scale in seq)

    def test_steps(self, toy_spec):
        seq = trotterize(toy_spec, TrotterConfig(steps=3))
        assert len(seq) == 3 * len(toy_spec.terms)
        assert all(scale == pytest.approx(1 / 3) for _, scale in seq)

    @pytest.mark.parametrize("order,steps", [(2, 2), (4, 1), (4, 2)])
    def test_scales_sum_to_one(self, toy_spec, order, steps):
        totals: dict[int, float] = {}
        for term, scale in trotterize(toy_spec, TrotterConfig(order=order, steps=steps)):
            totals[term.parameter_id] = totals.get(term.parameter_id, 0.0) + scale
        assert totals == pytest.approx({i: 1.0 for i in range(6)})

    @pytest.mark.parametrize("order,steps", [(3, 1), (0, 1), (1, 0)])
    def test_invalid(self, order, steps):
        with pytest.raises(ContractViolation):
            TrotterConfig(order=order, steps=steps)
