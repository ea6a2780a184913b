"""Tests for angles, gates, circuits, serialization and gate counts."""

import math

import pytest

from ion_vqe.circuit import Angle, Circuit, Gate, GateCounts, count_gates, wrap_angle
from ion_vqe.errors import ContractViolation, ParameterCountError


class TestAngle:
    """Symbolic angle arithmetic and normalization."""

    @pytest.mark.parametrize(
        "value,expected",
        [(0.0, 0.0), (math.pi, math.pi), (-math.pi, math.pi), (2 * math.pi, 0.0)],
    )
    def test_wrap(self, value, expected):
        assert wrap_angle(value) == pytest.approx(expected)

    def test_fixed_wraps(self):
        assert Angle.fixed(2 * math.pi + 0.25).constant == pytest.approx(0.25)

    def test_resolve(self):
        a = Angle(0.5, ((0, 2.0), (2, -1.0)))
        assert a.resolve([1.0, 9.0, 0.25]) == pytest.approx(2.25)
        assert a.parameter_ids() == {0, 2}

    def test_add_cancels(self):
        a = Angle.parameter(1, 0.5) + Angle.parameter(1, -0.5)
        assert a.is_zero

    def test_neg_and_scaled(self):
        a = Angle(0.25, ((0, 1.5),))
        assert (-a).is_close(Angle(-0.25, ((0, -1.5),)))
        assert a.scaled(2.0).is_close(Angle(0.5, ((0, 3.0),)))

    def test_is_close_modulo_two_pi(self):
        assert Angle(math.pi).is_close(Angle(-math.pi + 1e-12))

    def test_text(self):
        a = Angle(0.75, ((3, -0.5),))
        assert a.to_text() == "0.75,theta3*-0.5"
        assert Angle.from_text(a.to_text()) == a
        assert Angle.from_text("theta2") == Angle.parameter(2)


class TestGate:
    """Gate validation and inverses."""

    def test_arity(self):
        with pytest.raises(ContractViolation, match="distinct"):
            Gate.cnot(1, 1)
        with pytest.raises(ContractViolation):
            Gate("h", (0, 1))

    def test_unknown(self):
        with pytest.raises(ContractViolation, match="Unknown gate"):
            Gate("swap", (0, 1))

    def test_angle_required(self):
        with pytest.raises(ContractViolation, match="angle"):
            Gate("rz", (0,))
        with pytest.raises(ContractViolation, match="angle"):
            Gate("h", (0,), Angle(1.0))

    def test_inverse(self):
        assert Gate.s(2).inverse() == Gate.sdg(2)
        assert Gate.h(0).inverse() == Gate.h(0)
        assert Gate.xx(0, 1, Angle.parameter(0)).inverse().angle.is_close(Angle.parameter(0, -1.0))

    def test_text(self):
        g = Gate.xx(3, 1, Angle.parameter(0, 0.5))
        assert g.to_text() == "xx 3 1 theta0*0.5"
        assert Gate.from_text(g.to_text()) == g

    def test_properties(self):
        assert Gate.xx(0, 1, 0.1).is_entangling
        assert Gate.rz(0, 0.1).is_diagonal
        assert not Gate.h(0).is_diagonal


class TestCircuit:
    """Construction checks, composition and serialization."""

    def _sample(self):
        return Circuit(
            3,
            (Gate.x(0), Gate.h(2), Gate.cnot(0, 1), Gate.rz(1, Angle(0.5, ((1, -1.0),))), Gate.xx(1, 2, 0.3)),
            classical_flips=frozenset({0}),
            phase_flips=frozenset({2}),
            n_parameters=2,
        )

    def test_register_bounds(self):
        with pytest.raises(ContractViolation, match="outside"):
            Circuit(2, (Gate.h(2),))

    def test_parameter_bounds(self):
        with pytest.raises(ContractViolation, match="parameter"):
            Circuit(1, (Gate.rz(0, Angle.parameter(1)),), n_parameters=1)

    def test_frame_bounds(self):
        with pytest.raises(ContractViolation):
            Circuit(1, (), classical_flips=frozenset({3}))

    def test_masks(self):
        c = self._sample()
        assert c.flip_mask == 0b001
        assert c.phase_mask == 0b100

    def test_check_parameters(self):
        with pytest.raises(ParameterCountError):
            self._sample().check_parameters([0.1])

    def test_then(self):
        a = Circuit(2, (Gate.h(0),))
        b = Circuit(2, (Gate.cnot(0, 1),), n_parameters=1)
        joined = a.then(b)
        assert joined.gates == (Gate.h(0), Gate.cnot(0, 1))
        assert joined.n_parameters == 1

    def test_then_after_frame(self):
        with pytest.raises(ContractViolation, match="Pauli frame"):
            self._sample().then(Circuit(3))

    def test_inverse(self):
        c = Circuit(2, (Gate.s(0), Gate.xx(0, 1, 0.25)))
        inv = c.inverse()
        assert inv.gates[0].angle.is_close(Angle(-0.25))
        assert inv.gates[1] == Gate.sdg(0)

    def test_text_round_trip(self):
        c = self._sample()
        text = c.to_text()
        assert text.splitlines()[:4] == ["qubits 3", "params 2", "flips 0", "phases 2"]
        assert Circuit.from_text(text) == c

    def test_text_comments_and_errors(self):
        c = Circuit.from_text("# header\nqubits 1\nh 0  # hadamard\n")
        assert c.gates == (Gate.h(0),)
        with pytest.raises(ContractViolation, match="qubits"):
            Circuit.from_text("h 0\n")
        with pytest.raises(ContractViolation, match="line 2"):
            Circuit.from_text("qubits 1\nrz 0\n")

    def test_json_round_trip(self):
        c = self._sample()
        assert Circuit.from_json(c.to_json()) == c


class TestCountGates:
    """Entangler classification."""

    def test_counts(self):
        c = Circuit(
            2,
            (
                Gate.cnot(0, 1),
                Gate.xx(0, 1, math.pi / 2),
                Gate.xx(0, 1, -math.pi / 2),
                Gate.xx(0, 1, 0.2),
                Gate.xx(0, 1, Angle.parameter(0)),
                Gate.h(0),
                Gate.rz(1, 0.1),
            ),
            n_parameters=1,
        )
        counts = count_gates(c)
        assert counts == GateCounts(cnot=3, xx_small_angle=2, single_qubit=2)
        assert counts.entangling_total == 5
        assert counts.to_dict()["entangling_total"] == 5

    def test_empty(self):
        assert count_gates(Circuit(0)).entangling_total == 0
