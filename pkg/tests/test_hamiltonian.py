"""Tests for FCIDUMP I/O, reference energies, FCI, excitation ranking and orbital selection."""

import numpy as np
import pytest

from ion_vqe.config import RunConfig
from ion_vqe.errors import ContractViolation, FcidumpParseError, InputError
from ion_vqe.hamiltonian import (
    ExcitationKind,
    c2v_labels,
    classify,
    dump_fcidump,
    fci_ground_state,
    hf_energy,
    jordan_wigner,
    load_fcidump,
    parse_fcidump,
    rank_excitations,
    select_orbitals,
)
from tests.helpers import H2_E_NUC, H2_FCIDUMP, h2_fci_energy, h2_hf_energy


def _sector(n_spatial: int, n_alpha: int, n_beta: int) -> list[int]:
    low = (1 << n_spatial) - 1
    return [
        i for i in range(1 << (2 * n_spatial))
        if (i & low).bit_count() == n_alpha and (i >> n_spatial).bit_count() == n_beta
    ]


class TestParseFcidump:
    """Parsing, labels and malformed input."""

    def test_h2_header(self, h2):
        assert h2.n_spatial == 2
        assert h2.n_electrons == 2
        assert h2.ms2 == 0
        assert h2.e_core == pytest.approx(H2_E_NUC)
        assert h2.orbital_labels == ("1a1", "1b2")

    def test_fortran_exponent(self):
        text = H2_FCIDUMP.replace(f"{H2_E_NUC:.16e}", "0.5D+00")
        assert parse_fcidump(text).e_core == 0.5

    def test_round_trip(self, toy):
        again = parse_fcidump(dump_fcidump(toy))
        assert np.allclose(again.one_body, toy.one_body, atol=1e-14)
        assert np.allclose(again.two_body, toy.two_body, atol=1e-14)
        assert again.e_core == toy.e_core

    def test_missing_header(self):
        with pytest.raises(FcidumpParseError, match="line 1"):
            parse_fcidump("1.0 1 1 0 0\n")

    def test_missing_norb(self):
        with pytest.raises(FcidumpParseError, match="NORB"):
            parse_fcidump("&FCI NELEC=2,\n&END\n")

    def test_bad_line_reports_number(self):
        text = "&FCI NORB=1,NELEC=2,\n&END\n 1.0 1 1 1 1\n 0.5 1 1\n"
        with pytest.raises(FcidumpParseError) as info:
            parse_fcidump(text)
        assert info.value.line_number == 4

    def test_index_out_of_range(self):
        with pytest.raises(FcidumpParseError, match="out of range"):
            parse_fcidump("&FCI NORB=1,NELEC=2,\n&END\n 1.0 2 1 0 0\n")

    def test_orbsym_length(self):
        with pytest.raises(FcidumpParseError, match="ORBSYM"):
            parse_fcidump("&FCI NORB=2,NELEC=2,ORBSYM=1,\n&END\n")

    def test_too_many_electrons(self):
        with pytest.raises(FcidumpParseError):
            parse_fcidump("&FCI NORB=1,NELEC=4,\n&END\n")

    def test_load_missing_file(self, tmp_path):
        with pytest.raises(InputError, match="Cannot read"):
            load_fcidump(tmp_path / "nope.fcidump")

    def test_load(self, h2_path):
        assert load_fcidump(h2_path).n_spatial == 2

    def test_c2v_labels(self):
        assert c2v_labels([1, 1, 2, 1, 3, 1, 2]) == ("1a1", "2a1", "1b1", "3a1", "1b2", "4a1", "2b1")


class TestReferenceEnergies:
    """HF and FCI against closed forms and the JW matrix."""

    def test_h2_hf(self, h2):
        assert hf_energy(h2, h2.reference()) == pytest.approx(h2_hf_energy(), abs=1e-12)

    def test_h2_fci(self, h2):
        assert fci_ground_state(h2).energy == pytest.approx(h2_fci_energy(), abs=1e-10)

    def test_hf_reference_electron_count(self, h2):
        with pytest.raises(ContractViolation):
            hf_energy(h2, 0b1)

    def test_zero_term_file(self):
        ham = parse_fcidump("&FCI NORB=2,NELEC=2,\n&END\n -1.25 0 0 0 0\n")
        assert hf_energy(ham, ham.reference()) == -1.25
        assert fci_ground_state(ham).energy == pytest.approx(-1.25)

    def test_jw_diagonal_is_hf(self, toy):
        qh = jordan_wigner(toy)
        ref = toy.reference()
        assert qh.to_matrix()[ref, ref].real == pytest.approx(hf_energy(toy, ref), abs=1e-10)

    def test_fci_matches_jw_sector(self, toy, toy_fci):
        qh = jordan_wigner(toy)
        sector = _sector(toy.n_spatial, toy.n_alpha, toy.n_beta)
        block = qh.to_matrix()[np.ix_(sector, sector)]
        assert np.linalg.eigvalsh(block)[0] == pytest.approx(toy_fci.energy, abs=1e-9)

    def test_jw_spectrum_invariant_under_relabeling(self, h2):
        a = np.linalg.eigvalsh(jordan_wigner(h2).to_matrix())
        b = np.linalg.eigvalsh(jordan_wigner(h2, (2, 0, 3, 1)).to_matrix())
        assert np.allclose(a, b)

    def test_bad_qubit_map(self, h2):
        with pytest.raises(ContractViolation):
            jordan_wigner(h2, (0, 0, 1, 2))

    def test_fci_properties(self, toy, toy_fci):
        assert np.linalg.norm(toy_fci.vector) == pytest.approx(1.0)
        assert toy_fci.amplitude(toy.reference()) > 0
        assert toy_fci.residual < 1e-8
        assert toy_fci.energy <= hf_energy(toy, toy.reference())


class TestRankExcitations:
    """Ordering and classification of FCI double excitations."""

    def test_h2_single_bosonic(self, h2):
        fci = fci_ground_state(h2)
        (exc,) = rank_excitations(fci, h2.reference(), 5)
        assert exc.indices == (1, 3, 2, 0)
        assert exc.kind is ExcitationKind.BOSONIC
        assert exc.mo_pair(2) == (0, 1)
        assert exc.amplitude < 0

    def test_descending_and_limited(self, toy, toy_fci):
        ranked = rank_excitations(toy_fci, toy.reference(), 6)
        assert len(ranked) == 6
        mags = [abs(r.amplitude) for r in ranked]
        assert mags == sorted(mags, reverse=True)
        assert all((r.determinant ^ toy.reference()).bit_count() == 4 for r in ranked)

    def test_toy_has_both_kinds(self, toy, toy_fci):
        kinds = {r.kind for r in rank_excitations(toy_fci, toy.reference(), 100)}
        assert kinds == {ExcitationKind.BOSONIC, ExcitationKind.NON_BOSONIC}

    def test_classify(self):
        assert classify((2, 6, 4, 0), 4) is ExcitationKind.BOSONIC
        assert classify((2, 7, 4, 0), 4) is ExcitationKind.NON_BOSONIC
        assert classify((3, 2, 1, 0), 4) is ExcitationKind.NON_BOSONIC

    def test_mo_pair_requires_bosonic(self, toy, toy_fci):
        other = next(
            r for r in rank_excitations(toy_fci, toy.reference(), 100) if not r.is_bosonic
        )
        with pytest.raises(ContractViolation):
            other.mo_pair(4)


class TestSelectOrbitals:
    """Freezing and dropping orbitals."""

    def test_freeze_preserves_hf(self, toy):
        reduced = select_orbitals(toy, frozen=[0])
        assert reduced.n_spatial == 3
        assert reduced.n_electrons == 2
        assert hf_energy(reduced, reduced.reference()) == pytest.approx(
            hf_energy(toy, toy.reference()), abs=1e-10
        )

    def test_freeze_is_variational(self, toy, toy_fci):
        reduced = select_orbitals(toy, frozen=[0])
        assert fci_ground_state(reduced).energy >= toy_fci.energy - 1e-10

    def test_drop_empty_orbital(self, toy):
        reduced = select_orbitals(toy, dropped=[3])
        assert reduced.n_spatial == 3
        assert reduced.n_electrons == 4
        assert hf_energy(reduced, reduced.reference()) == pytest.approx(
            hf_energy(toy, toy.reference()), abs=1e-10
        )

    def test_drop_occupied_orbital_held_filled(self, toy):
        reduced = select_orbitals(toy, dropped=[1])
        assert reduced.n_electrons == 2
        assert hf_energy(reduced, reduced.reference()) == pytest.approx(
            hf_energy(toy, toy.reference()), abs=1e-10
        )

    def test_by_label(self, h2):
        reduced = select_orbitals(h2, frozen=["1a1"])
        assert reduced.orbital_labels == ("1b2",)
        assert reduced.n_electrons == 0
        assert reduced.e_core == pytest.approx(h2_hf_energy())

    def test_freeze_virtual_rejected(self, toy):
        with pytest.raises(ContractViolation, match="not doubly occupied"):
            select_orbitals(toy, frozen=[3])

    def test_overlap_rejected(self, toy):
        with pytest.raises(ContractViolation, match="both frozen and dropped"):
            select_orbitals(toy, frozen=[0], dropped=[0])

    def test_unknown_label(self, h2):
        with pytest.raises(ContractViolation, match="Unknown orbital"):
            select_orbitals(h2, frozen=["9z9"])


class TestBundledWater:
    """The shipped H2O/STO-3G integrals load without the chem extra."""

    @pytest.fixture(scope="class")
    def bundled(self):
        return load_fcidump(RunConfig().fcidump)

    def test_file_ships_with_package(self):
        assert RunConfig().fcidump.is_file()

    def test_shape(self, bundled):
        assert bundled.n_spatial == 7
        assert bundled.n_electrons == 10
        assert bundled.ms2 == 0
        assert bundled.orbital_labels == ("1a1", "2a1", "1b1", "3a1", "1b2", "4a1", "2b1")

    def test_hf_energy(self, bundled):
        assert hf_energy(bundled, bundled.reference()) == pytest.approx(-74.9624, abs=1.5e-3)

    def test_integrals_symmetric(self, bundled):
        h1, eri = bundled.spatial_integrals()
        np.testing.assert_allclose(h1, h1.T, atol=1e-12)
        np.testing.assert_allclose(eri, eri.transpose(1, 0, 2, 3), atol=1e-12)
        np.testing.assert_allclose(eri, eri.transpose(2, 3, 0, 1), atol=1e-12)

    def test_leading_excitation_is_b1_pair(self, bundled):
        fci = fci_ground_state(bundled)
        assert fci.energy == pytest.approx(-75.0116, abs=1.5e-3)
        (top,) = rank_excitations(fci, bundled.reference(), 1)
        assert top.is_bosonic
        assert tuple(bundled.label(mo) for mo in top.mo_pair(bundled.n_spatial)) == ("1b1", "2b1")
