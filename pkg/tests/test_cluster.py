import itertools

import numpy as np
import pytest

from onewayqc import cluster
from onewayqc.cluster import PhysicalQubit, StabilizerElement
from onewayqc.qstate import H, X, Z, StateVector, apply_cp, fidelity_pure, partial_trace

# physical register (kA, kB, piA, piB); l, H -> 0 and r, V -> 1
KA, KB, PIA, PIB = range(4)


def index(kA, kB, piA, piB):
    return (kA << 3) | (kB << 2) | (piA << 1) | piB


def test_hyperentangled_amplitudes():
    amps = cluster.build_hyperentangled().amps
    assert amps[index(0, 1, 0, 0)] == pytest.approx(0.5)
    for piA, piB in itertools.product((0, 1), repeat=2):
        assert amps[index(0, 0, piA, piB)] == 0
        assert amps[index(1, 1, piA, piB)] == 0


def test_hyperentangled_is_product_across_pol_and_path():
    # regroup as (kA kB) x (piA piB) and check Schmidt rank 1
    m = cluster.build_hyperentangled().amps.reshape(4, 4)
    assert np.linalg.matrix_rank(m, tol=1e-12) == 1


def test_hyperentangled_round_trip():
    c4 = cluster.build_c4_from_phase_plate()
    back = apply_cp(c4, KA + 1, PIA + 1)
    assert fidelity_pure(cluster.build_hyperentangled(), back) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize(
    "bits, amp",
    [
        ((0, 1, 0, 0), 0.5),  # |H l>_A |H r>_B
        ((1, 0, 0, 0), -0.5),  # |H r>_A |H l>_B
        ((1, 0, 1, 1), 0.5),  # |V r>_A |V l>_B
        ((0, 1, 1, 1), 0.5),  # |V l>_A |V r>_B
    ],
)
def test_c4_printed_terms(bits, amp):
    assert cluster.build_c4().amps[index(*bits)] == pytest.approx(amp)


def test_c4_has_only_four_terms():
    amps = cluster.build_c4().amps
    assert np.count_nonzero(np.abs(amps) > 1e-12) == 4
    assert np.linalg.norm(amps) == pytest.approx(1.0)


def test_phase_plate_construction_matches():
    assert np.allclose(cluster.build_c4_from_phase_plate().amps, cluster.build_c4().amps, atol=1e-12)


def test_linear_cluster_term():
    lin = cluster.build_linear_cluster()
    term = StateVector.from_label("-11-")
    assert np.vdot(term.amps, lin.amps) == pytest.approx(-0.5)


def test_linear_cluster_two_constructions_agree():
    # independent 16-amplitude oracle: (-1)^(sum of neighbouring bit products) / 4
    oracle = np.array(
        [(-1) ** (b[0] * b[1] + b[1] * b[2] + b[2] * b[3]) for b in itertools.product((0, 1), repeat=4)]
    ) / 4
    assert np.allclose(cluster.build_linear_cluster().amps, oracle)
    assert fidelity_pure(cluster.linear_cluster_expansion(), cluster.build_linear_cluster()) == pytest.approx(1.0)


@pytest.mark.parametrize("keep", [1, 2, 3, 4])
def test_linear_cluster_marginals_mixed(keep):
    assert np.allclose(partial_trace(cluster.build_linear_cluster(), [keep]).elems, np.eye(2) / 2)


def test_ordering_a_permutation():
    order = cluster.ordering("a")
    assert order.logical_to_physical == (PhysicalQubit.kB, PhysicalQubit.kA, PhysicalQubit.piA, PhysicalQubit.piB)


def test_ordering_b_last_unitary():
    assert np.allclose(cluster.ordering("b").unitary(4), Z @ H)


@pytest.mark.parametrize(
    "name, unitaries",
    [
        ("a", (X @ H, Z, np.eye(2), H)),
        ("b", (H, Z, X, Z @ H)),
        ("c", (Z @ H, X, np.eye(2), H)),
    ],
)
def test_ordering_unitaries(name, unitaries):
    order = cluster.ordering(name)
    for j, u in enumerate(unitaries, start=1):
        assert np.allclose(order.unitary(j), u)


@pytest.mark.parametrize("name", ["a", "b", "c"])
def test_equivalence(name):
    assert cluster.equivalence_fidelity(name) == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("name", ["a", "b", "c"])
def test_equivalence_oracle(name):
    # explicit kron + permutation, independent of Ordering.to_laboratory
    order = cluster.ordering(name)
    u = order.unitary(1)
    for j in (2, 3, 4):
        u = np.kron(u, order.unitary(j))
    logical = (u @ cluster.build_linear_cluster().amps).reshape((2,) * 4)
    axes = [order.logical(q) - 1 for q in cluster.PHYSICAL_ORDER]
    physical = np.transpose(logical, axes).reshape(-1)
    assert abs(np.vdot(cluster.build_c4().amps, physical)) ** 2 == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("name", ["a", "b", "c"])
def test_round_trip_frames(name):
    order = cluster.ordering(name)
    c4 = cluster.build_c4()
    assert np.allclose(order.to_laboratory(order.to_computational(c4)).amps, c4.amps)


def test_unknown_ordering():
    with pytest.raises(ValueError):
        cluster.ordering("d")


def test_physical_qubit_properties():
    assert PhysicalQubit.kB.photon == "B"
    assert PhysicalQubit.kB.is_momentum
    assert not PhysicalQubit.piA.is_momentum
    assert [q.position for q in cluster.PHYSICAL_ORDER] == [1, 2, 3, 4]


def test_group_has_identity_and_16_elements():
    group = cluster.stabilizer_group()
    assert len(group) == 16
    assert len({str(s) for s in group}) == 16
    assert StabilizerElement("IIII") in group


def test_group_closed_and_abelian():
    group = cluster.stabilizer_group()
    keys = {str(s) for s in group}
    for a, b in itertools.product(group, repeat=2):
        assert a.commutes_with(b)
        assert str(a * b) in keys


def test_elements_square_to_identity():
    for s in cluster.stabilizer_group():
        assert np.allclose(s.matrix() @ s.matrix(), np.eye(16))
        assert s * s == StabilizerElement("IIII")


@pytest.mark.parametrize("elem", cluster.stabilizer_group(), ids=str)
def test_cluster_is_plus_one_eigenstate(elem):
    psi = cluster.build_c4().amps
    assert np.allclose(elem.matrix() @ psi, psi, atol=1e-10)
    assert np.vdot(psi, elem.matrix() @ psi).real == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("name", ["b", "c"])
def test_group_independent_of_ordering(name):
    assert cluster._group(name) == cluster._group("a")


def test_element_validation():
    with pytest.raises(ValueError):
        StabilizerElement("IXQ")
    with pytest.raises(ValueError):
        StabilizerElement("IIII", 2)


def test_noncommuting_product_rejected():
    with pytest.raises(ValueError):
        StabilizerElement("XIII") * StabilizerElement("ZIII")
