import itertools

import numpy as np
import pytest

from onewayqc import oracle
from onewayqc.noise import WhiteNoiseModel
from onewayqc.protocols import (
    CnotJob,
    OChoice,
    RotationJob,
    cnot_branches,
    cnot_theory,
    control_populations,
    rotation_branches,
    rotation_theory,
    run_cnot,
    run_rotation,
    sample_cnot,
    sample_rotation,
    target_fidelity,
)
from onewayqc.qstate import H, Z, StateVector, fidelity_pure, gate_rz, partial_trace
from onewayqc.reference import load_reference_table
from onewayqc.tomography import bloch_from_state

PLUS = StateVector.from_label("+")
PI = np.pi


def bloch(state):
    return bloch_from_state(state).as_array()


def test_rotation_a_example_gives_zero():
    res = run_rotation(RotationJob.postselected("a", 0.0, PI / 2))
    assert fidelity_pure(StateVector.from_label("0"), res.output_state) == pytest.approx(1.0)
    assert res.fidelity == pytest.approx(1.0, abs=1e-10)


def test_rotation_a_minus_half_pi():
    res = run_rotation(RotationJob.postselected("a", -PI / 2, 0.0))
    # 2x2 oracle: H Rz(-pi/2) |+>
    expected = H @ np.diag([np.exp(1j * PI / 4), np.exp(-1j * PI / 4)]) @ PLUS.amps
    assert np.allclose(bloch(StateVector(expected)), [0, 1, 0])
    assert np.allclose(bloch(res.output_state), [0, 1, 0], atol=1e-10)


def test_rotation_b_identity_gives_ell():
    res = run_rotation(RotationJob.postselected("b", 0.0, 0.0))
    assert res.job.output_qubit.value == "kB"
    assert fidelity_pure(StateVector.from_label("0"), res.output_state) == pytest.approx(1.0)


def test_rotation_reference_lookup():
    res = run_rotation(RotationJob.postselected("a", 0.0, PI / 2))
    (row,) = load_reference_table().lookup(res)
    assert (row.fidelity, row.sigma) == (0.908, 0.006)


@pytest.mark.parametrize(
    "args, vec",
    [
        (("a", 0, 0, 0, 0), [1, 0]),
        (("a", 0, 0, 1, 0), [0, 1]),
    ],
)
def test_rotation_theory_trivial(args, vec):
    out = rotation_theory(*args, PLUS)
    assert fidelity_pure(StateVector(np.array(vec)), out) == pytest.approx(1.0)


def test_rotation_theory_b_quarter_pi():
    out = rotation_theory("b", PI / 4, 0, 0, 0, PLUS)
    oracle_vec = Z @ H @ np.diag([np.exp(-1j * PI / 8), np.exp(1j * PI / 8)]) @ PLUS.amps
    assert np.allclose(bloch(StateVector(oracle_vec)), [0, np.sqrt(0.5), np.sqrt(0.5)])
    assert np.allclose(bloch(out), [0, np.sqrt(0.5), np.sqrt(0.5)])


def test_rotation_theory_rejects_c():
    with pytest.raises(ValueError):
        rotation_theory("c", 0, 0, 0, 0, PLUS)


@pytest.mark.parametrize("ordering", ["a", "b"])
@pytest.mark.parametrize("s2, s3", list(itertools.product((0, 1), repeat=2)))
@pytest.mark.parametrize("s1", [0, 1])
def test_rotation_branch_exact(ordering, s1, s2, s3):
    alpha, beta = 0.83, -2.1
    res = run_rotation(RotationJob.postselected(ordering, alpha, beta, s2, s3, s1))
    assert res.outcomes == {1: s1, 2: s2, 3: s3}
    assert res.probability == pytest.approx(1 / 8)
    assert res.fidelity == pytest.approx(1.0, abs=1e-10)
    assert res.corrected_fidelity == pytest.approx(1.0, abs=1e-10)
    assert (res.frame.x, res.frame.z) == (s3, s2)


@pytest.mark.parametrize("ordering", ["a", "b"])
def test_input_from_first_outcome(ordering):
    alpha, beta = 0.4, 1.3
    for s1, chi in ((0, "+"), (1, "-")):
        res = run_rotation(RotationJob.postselected(ordering, alpha, beta, 0, 0, s1))
        expected = rotation_theory(ordering, alpha, beta, 0, 0, StateVector.from_label(chi))
        assert fidelity_pure(expected, res.output_state) == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("ordering", ["a", "b"])
@pytest.mark.parametrize("s1, s2, s3", list(itertools.product((0, 1), repeat=3)))
def test_rotation_matches_oracle(ordering, s1, s2, s3):
    alpha, beta = -0.6, 2.4
    res = run_rotation(RotationJob.postselected(ordering, alpha, beta, s2, s3, s1))
    p, out = oracle.rotation_branch(ordering, alpha, beta, s1, s2, s3)
    assert res.probability == pytest.approx(p, abs=1e-12)
    assert oracle.overlap(out, res.output_state.amps) == pytest.approx(1.0, abs=1e-12)


def test_rotation_job_validation():
    with pytest.raises(ValueError):
        RotationJob.postselected("c", 0, 0)
    with pytest.raises(ValueError):
        RotationJob.postselected("a", 0, 0, s2=2)


@pytest.mark.parametrize("s1, control", [(0, 1), (1, 0)])
def test_cnot_hadamard_control_mapping(s1, control):
    res = run_cnot(CnotJob.postselected("H", PI / 2, s1, 0))
    pops = control_populations(res)
    assert pops[control] == pytest.approx(1.0, abs=1e-10)


def test_cnot_hadamard_target():
    res = run_cnot(CnotJob.postselected("H", PI / 2, 0, 0))
    target = partial_trace(res.output_state, [2])
    # Rz(pi/2)|+> points along +y
    assert np.allclose(bloch(StateVector(gate_rz(PI / 2) @ PLUS.amps)), [0, 1, 0])
    assert np.allclose(bloch(target), [0, 1, 0], atol=1e-10)
    assert target_fidelity(res) == pytest.approx(1.0, abs=1e-10)


def test_cnot_identity_is_entangling():
    res = run_cnot(CnotJob.postselected("I", PI / 2, 0, 0))
    amps = res.output_state.amps.reshape(2, 2)
    assert np.linalg.matrix_rank(amps, tol=1e-9) == 2
    with pytest.raises(ValueError):
        target_fidelity(res)
    assert target_fidelity(res, 0) == pytest.approx(1.0, abs=1e-10)
    assert target_fidelity(res, 1) == pytest.approx(1.0, abs=1e-10)


def test_cnot_identity_trivial_alpha_is_product():
    res = run_cnot(CnotJob.postselected("I", 0.0, 0, 0))
    assert np.linalg.matrix_rank(res.output_state.amps.reshape(2, 2), tol=1e-9) == 1


@pytest.mark.parametrize(
    "s1, expected",
    [(0, np.kron([0, 1], PLUS.amps)), (1, np.kron([1, 0], PLUS.amps))],
)
def test_cnot_theory_zero_alpha(s1, expected):
    out = cnot_theory("H", 0.0, s1, 0)
    assert fidelity_pure(StateVector(expected), out) == pytest.approx(1.0)


def test_cnot_theory_sigma_branch():
    out = cnot_theory("H", PI / 4, 0, 1)
    target = Z @ gate_rz(PI / 4) @ PLUS.amps
    assert fidelity_pure(StateVector(np.kron([0, 1], target)), out) == pytest.approx(1.0)


@pytest.mark.parametrize("o", ["I", "H"])
@pytest.mark.parametrize("alpha", [0.0, PI / 4, PI / 2, PI])
@pytest.mark.parametrize("s1, s4", list(itertools.product((0, 1), repeat=2)))
def test_cnot_branch_exact_and_oracle(o, alpha, s1, s4):
    res = run_cnot(CnotJob.postselected(o, alpha, s1, s4))
    assert res.probability == pytest.approx(0.25)
    assert res.fidelity == pytest.approx(1.0, abs=1e-10)
    assert res.corrected_fidelity == pytest.approx(1.0, abs=1e-10)
    p, out = oracle.cnot_branch(o, alpha, s1, s4)
    assert res.probability == pytest.approx(p, abs=1e-12)
    assert oracle.overlap(out, res.output_state.amps) == pytest.approx(1.0, abs=1e-12)


def test_cnot_frames():
    res = run_cnot(CnotJob.postselected("H", 0.3, 0, 1))
    assert (res.frames[2].z, res.frames[3].x) == (1, 1)
    with pytest.raises(AttributeError):
        res.frame


def test_ochoice_gate():
    assert np.allclose(OChoice("H").gate, H)
    assert np.allclose(OChoice.I.gate, np.eye(2))
    with pytest.raises(ValueError):
        CnotJob.postselected("X", 0)


def test_branch_enumerations():
    assert len(list(rotation_branches("a", 0, 0))) == 4
    assert len(list(cnot_branches("I", PI / 4))) == 4


def test_sampling_is_deterministic():
    a = [k for k, _ in sample_rotation("a", 0.3, 0.2, 200, 7)]
    b = [k for k, _ in sample_rotation("a", 0.3, 0.2, 200, 7)]
    c = [k for k, _ in sample_rotation("a", 0.3, 0.2, 200, 8)]
    assert a == b and a != c
    assert {len(k) for k in a} == {3}


def test_sampled_job_agrees_with_sample_rotation():
    keys = [k for k, _ in sample_rotation("b", 1.0, -0.5, 5, 42)]
    # one sampled job consumes the generator for the first shot only
    res = run_rotation(RotationJob.sampled("b", 1.0, -0.5, 42))
    assert tuple(res.outcomes[i] for i in (1, 2, 3)) == keys[0]


def test_sample_cnot_results_are_exact():
    for key, res in sample_cnot("H", PI / 4, 50, 3):
        assert res.fidelity == pytest.approx(1.0, abs=1e-10)
        assert (res.outcomes[1], res.outcomes[4]) == key


@pytest.mark.parametrize("ordering", ["a", "b"])
def test_noise_lowers_fidelity_monotonically(ordering):
    job = RotationJob.postselected(ordering, -PI / 2, -PI / 4, 1, 0)
    values = [run_rotation(job, WhiteNoiseModel(p).cluster()).fidelity for p in (0, 0.25, 0.5, 0.75, 0.872, 1)]
    assert all(b >= a - 1e-12 for a, b in zip(values, values[1:]))
    assert values[-1] == pytest.approx(1.0, abs=1e-10)
    assert values[0] == pytest.approx(0.5, abs=1e-10)


def test_rotation_requires_four_qubits():
    with pytest.raises(ValueError):
        run_rotation(RotationJob.postselected("a", 0, 0), StateVector.from_label("0"))

