import math

import numpy as np
import pytest

import brute
from conftest import make_instances
from quasireal.hilbert import PAULI_X, PAULI_Y, PAULI_Z, make_state, observable, random_hermitian
from quasireal.measurement import (
    MeasurementModel,
    ProbeBasis,
    joint_probabilities,
    projective_measurement,
    random_measurement,
    random_probe,
)
from quasireal.quasiprob import (
    MAX_TABLE_CELLS,
    TableTooLargeError,
    disturbance_quasiprob,
    disturbance_sq_quasiprob,
    error_sq_quasiprob,
    joint_quasiprob,
    negativity_report,
)
from quasireal.scenarios import erhart_qubit, sigma_x_projectors
from quasireal.uncertainty import ozawa_disturbance_sq, ozawa_error_sq

PLUS = make_state([1, 1])
IDENTITY_MODEL = MeasurementModel.from_kraus([np.eye(2)], labels=["I"])


def test_manifestly_complex_cell():
    dist = joint_quasiprob(IDENTITY_MODEL, PLUS, PAULI_Y, ProbeBasis.computational(2))
    # a axis ascending: index 1 is the +1 eigenvalue |i+>
    assert dist.a_values[1] == pytest.approx(1.0)
    assert abs(dist.table[1, 0, 0] - (0.25 - 0.25j)) < 1e-12
    assert negativity_report(dist).max_imag == pytest.approx(0.25, abs=1e-12)


def test_commuting_case_is_classical():
    psi = make_state([0.6, 0.8])
    model = projective_measurement(np.eye(2), readouts=[1, -1])
    dist = joint_quasiprob(model, psi, PAULI_Z, ProbeBasis.computational(2))
    expected = np.zeros((2, 2, 2))
    # a=-1 <-> |1>, m=1 <-> |1>, f=1 <-> |1>
    expected[1, 0, 0] = 0.36
    expected[0, 1, 1] = 0.64
    np.testing.assert_allclose(dist.table, expected, atol=1e-15)
    rep = negativity_report(dist)
    assert rep.negative_mass == 0.0 and rep.max_imag == 0.0 and rep.most_negative == []


@pytest.mark.parametrize("phi", [0.3, math.pi / 2, 2.9])
def test_erhart_sigma_x_axis_has_no_negativity(phi):
    # psi at the pole, m and a on the equator: each cell's phase is half a
    # geodesic triangle area of at most pi/2, so Re p >= 0 for every probe
    sc = erhart_qubit(phi)
    for probe in (sc.probe, ProbeBasis.computational(2)):
        rep = negativity_report(joint_quasiprob(sc.model, sc.psi, PAULI_X, probe))
        assert rep.negative_mass == 0.0 and rep.most_negative == []
        assert rep.max_imag > 0.01


def test_negativity_report_lists_most_negative():
    for inst in make_instances(20, seed=43):
        rep = negativity_report(joint_quasiprob(inst.model, inst.psi, inst.A, inst.probe), top=3)
        if rep.negative_mass > 0:
            assert rep.most_negative[0]["re_p"] == rep.min_real
            assert len(rep.most_negative) <= 3
            res = [c["re_p"] for c in rep.most_negative]
            assert res == sorted(res) and all(r < 0 for r in res)
            return
    pytest.fail("no negative instance found")


def test_quasiprob_totals_examples():
    sc = erhart_qubit(math.pi / 2)
    assert error_sq_quasiprob(sc.model, sc.psi, sc.A, sc.probe) == pytest.approx(2, abs=1e-12)
    sx = sigma_x_projectors()
    assert disturbance_sq_quasiprob(sx.model, sx.psi, PAULI_Y) == pytest.approx(2, abs=1e-12)
    commuting = projective_measurement(np.eye(2), readouts=[1, -1])
    assert disturbance_sq_quasiprob(commuting, PLUS, PAULI_Z) == pytest.approx(0, abs=1e-15)
    assert error_sq_quasiprob(commuting, PLUS, PAULI_Z, ProbeBasis.computational(2)) == pytest.approx(0, abs=1e-15)


def test_marginal_laws_and_identities():
    for inst in make_instances(200, seed=31):
        dist = joint_quasiprob(inst.model, inst.psi, inst.A, inst.probe)
        joint = joint_probabilities(inst.model, inst.psi, inst.probe).table
        marg = dist.joint_marginal()
        assert np.max(np.abs(marg - joint)) < 1e-10
        assert np.max(np.abs(marg.imag)) < 1e-12
        born = np.array([np.vdot(inst.psi.amplitudes, p @ inst.psi.amplitudes).real for p in inst.A.projectors])
        assert np.max(np.abs(dist.a_marginal() - born)) < 1e-10
        assert abs(dist.total - 1) < 1e-10
        e = ozawa_error_sq(inst.model, inst.psi, inst.A)
        d = ozawa_disturbance_sq(inst.model, inst.psi, inst.B)
        assert abs(error_sq_quasiprob(inst.model, inst.psi, inst.A, inst.probe) - e) < 1e-10
        assert abs(disturbance_sq_quasiprob(inst.model, inst.psi, inst.B) - d) < 1e-10
        assert abs(disturbance_quasiprob(inst.model, inst.psi, inst.B).total - 1) < 1e-10


def test_matches_loop_reference(instances):
    for inst in instances:
        _, ref = brute.quasi_table(inst.kraus, inst.psi.amplitudes, inst.A.matrix, inst.probe.vectors)
        dist = joint_quasiprob(inst.model, inst.psi, inst.A, inst.probe)
        assert np.max(np.abs(dist.table - ref)) < 1e-12


def test_negative_weights_with_matching_total():
    found = False
    for inst in make_instances(40, seed=41):
        dist = joint_quasiprob(inst.model, inst.psi, inst.A, inst.probe)
        if dist.table.real.min() < 0:
            found = True
            e = ozawa_error_sq(inst.model, inst.psi, inst.A)
            assert abs(error_sq_quasiprob(inst.model, inst.psi, inst.A, inst.probe) - e) < 1e-10
    assert found


def test_probe_basis_invariance(instances):
    for i, inst in enumerate(instances[:20]):
        a = error_sq_quasiprob(inst.model, inst.psi, inst.A, inst.probe)
        b = error_sq_quasiprob(inst.model, inst.psi, inst.A, random_probe(inst.dim, 500 + i))
        assert abs(a - b) < 1e-10


def test_classical_reduction():
    rng = np.random.default_rng(3)
    dim, k = 4, 3
    w = rng.random((k, dim))
    w /= w.sum(axis=0)
    model = MeasurementModel.from_kraus([np.diag(np.sqrt(x)) for x in w], readouts=rng.standard_normal(k))
    amps = rng.random(dim)
    psi = make_state(amps)
    a_diag = np.array([-1.0, 0.3, 2.0, 4.0])
    dist = joint_quasiprob(model, psi, np.diag(a_diag), ProbeBasis.computational(dim))
    assert np.all(dist.table.real >= 0) and np.all(dist.table.imag == 0)
    born = np.abs(psi.amplitudes) ** 2
    classical = sum(born[i] * w[m, i] * (model.readouts[m] - a_diag[i]) ** 2
                    for m in range(k) for i in range(dim))
    assert error_sq_quasiprob(model, psi, np.diag(a_diag), ProbeBasis.computational(dim)) == pytest.approx(classical)


def test_degenerate_spectrum_uses_projectors():
    h = random_hermitian(4, 5, spectrum=[1.0, 1.0, -2.0, 3.0])
    model = random_measurement(4, 2, 6).with_readouts([0.5, -1.0])
    psi = make_state(np.arange(1, 5) + 1j)
    probe = random_probe(4, 7)
    dist = joint_quasiprob(model, psi, h, probe)
    assert dist.table.shape == (3, 2, 4)
    assert abs(error_sq_quasiprob(model, psi, h, probe) - ozawa_error_sq(model, psi, h)) < 1e-10
    assert abs(disturbance_sq_quasiprob(model, psi, h) - ozawa_disturbance_sq(model, psi, h)) < 1e-10


def test_table_size_limit_and_streamed_totals():
    dim, k = 17, 16
    assert dim * k * dim > MAX_TABLE_CELLS
    model = random_measurement(dim, k, 1).with_readouts(np.linspace(-1, 1, k))
    psi = make_state(np.ones(dim))
    A = observable(random_hermitian(dim, 2))
    probe = random_probe(dim, 3)
    with pytest.raises(TableTooLargeError):
        joint_quasiprob(model, psi, A, probe)
    assert abs(error_sq_quasiprob(model, psi, A, probe) - ozawa_error_sq(model, psi, A)) < 1e-10


def test_rows_and_dict_export():
    dist = joint_quasiprob(IDENTITY_MODEL, PLUS, PAULI_Y, ProbeBasis.computational(2))
    rows = dist.rows()
    assert len(rows) == 4
    assert rows[2][0] == pytest.approx(1.0) and rows[2][1:3] == ["I", 0]
    assert rows[2][3] == pytest.approx(0.25) and rows[2][4] == pytest.approx(-0.25)
    d = dist.as_dict()
    assert d["f_values"] is None and len(d["cells"]) == 4
    assert set(d["cells"][0]) == {"a", "m", "f", "re_p", "im_p"}
    spectral = disturbance_quasiprob(IDENTITY_MODEL, PLUS, PAULI_Z)
    assert spectral.as_dict()["f_values"] == pytest.approx([-1.0, 1.0])
