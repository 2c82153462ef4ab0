import math

import numpy as np
import pytest

import brute
from conftest import make_instances
from quasireal.hilbert import PAULI_X, PAULI_Y, PAULI_Z, basis_state, make_state, observable
from quasireal.measurement import MeasurementModel, ProbeBasis, projective_measurement, random_probe
from quasireal.scenarios import anomalous_weak_value, erhart_qubit
from quasireal.uncertainty import ozawa_disturbance_sq, ozawa_error_sq
from quasireal.weak import (
    UndefinedCellError,
    conditional_error_sq,
    conditional_quasiprob,
    disturbance_sq_weak,
    error_sq_weak,
    weak_table,
    weak_value,
    weak_value_uncertainty,
)

S2 = 1 / math.sqrt(2)
ZERO = basis_state(2, 0)
PLUS = make_state([1, 1])
I_PLUS = make_state([1, 1j])
ANOMALOUS_F = make_state([1, -0.9])


def identity_model(readout=None):
    return MeasurementModel.from_kraus([np.eye(2)], labels=["I"], readouts=None if readout is None else [readout])


def probe_with(first):
    v = np.asarray(first.amplitudes)
    return ProbeBasis.from_vectors([v, [-np.conj(v[1]), np.conj(v[0])]])


def test_weak_value_eigenstate():
    rec = weak_value(ZERO, np.eye(2), PAULI_Z, ZERO)
    assert rec.defined and rec.value == 1 + 0j


def test_weak_value_anomalous():
    rec = weak_value(PLUS, np.eye(2), PAULI_Z, ANOMALOUS_F)
    assert abs(rec.value - 19) < 1e-10


def test_weak_value_purely_imaginary():
    rec = weak_value(ZERO, np.eye(2), PAULI_X, I_PLUS)
    assert abs(rec.value - (-1j)) < 1e-15


def test_weak_value_sides():
    m = np.array([[1, 0], [0, 0.5]])
    before = weak_value(PLUS, m, PAULI_X, ZERO, side="before")
    after = weak_value(PLUS, m, PAULI_X, ZERO, side="after")
    # <0|M X|+> = 1, <0|X M|+> = 0.5, <0|M|+> = 1
    assert before.value == pytest.approx(1.0)
    assert after.value == pytest.approx(0.5)
    with pytest.raises(ValueError):
        weak_value(PLUS, m, PAULI_X, ZERO, side="middle")


def test_weak_value_undefined_cell():
    rec = weak_value(ZERO, np.eye(2), PAULI_Z, basis_state(2, 1))
    assert not rec.defined and rec.prob == 0.0


def test_record_prob_matches_amplitude():
    rec = weak_value(PLUS, np.eye(2), PAULI_Z, ANOMALOUS_F)
    assert abs(rec.prob - abs(rec.amplitude) ** 2) < 1e-12


def test_error_sq_weak_examples():
    model = projective_measurement(np.eye(2), readouts=[1, -1])
    assert error_sq_weak(model, make_state([0.6, 0.8j]), PAULI_Z, random_probe(2, 0)).total < 1e-30
    sc = erhart_qubit(math.pi / 2)
    assert error_sq_weak(sc.model, sc.psi, sc.A, ProbeBasis.computational(2)).total == pytest.approx(2, abs=1e-12)


def test_disturbance_sq_weak_sigma_x_fixture():
    model = projective_measurement([[S2, S2], [S2, -S2]], readouts=[1, -1])
    total = disturbance_sq_weak(model, ZERO, PAULI_Y, ProbeBasis.computational(2)).total
    assert total == pytest.approx(2.0, abs=1e-14)
    commuting = projective_measurement(np.eye(2), readouts=[1, -1])
    assert disturbance_sq_weak(commuting, PLUS, PAULI_Z, random_probe(2, 1)).total < 1e-30


def test_zero_probability_cells_stay_finite():
    # sigma_z projectors on |0>: outcome "-1" is unreachable yet (A_m - A)|0> leaks into it
    model = projective_measurement(np.eye(2), readouts=[5, -1])
    cells = error_sq_weak(model, ZERO, PAULI_X, ProbeBasis.computational(2)).cells
    assert np.all(np.isfinite(cells))
    np.testing.assert_allclose(cells, [[25, 0], [0, 1]], atol=1e-14)
    assert cells.sum() == pytest.approx(ozawa_error_sq(model, ZERO, PAULI_X))


def test_weak_decompositions_match_operator_form(instances):
    for inst in instances:
        e = ozawa_error_sq(inst.model, inst.psi, inst.A)
        d = ozawa_disturbance_sq(inst.model, inst.psi, inst.B)
        assert abs(error_sq_weak(inst.model, inst.psi, inst.A, inst.probe).total - e) < 1e-10
        assert abs(disturbance_sq_weak(inst.model, inst.psi, inst.B, inst.probe).total - d) < 1e-10
        ref = brute.weak_error_sq(inst.kraus, inst.readouts, inst.psi.amplitudes, inst.A.matrix,
                                  inst.probe.vectors)
        assert abs(ref - e) < 1e-9


def test_probe_independence(instances):
    for i, inst in enumerate(instances[:20]):
        other = random_probe(inst.dim, 1000 + i)
        a = error_sq_weak(inst.model, inst.psi, inst.A, inst.probe).total
        b = error_sq_weak(inst.model, inst.psi, inst.A, other).total
        c = disturbance_sq_weak(inst.model, inst.psi, inst.B, inst.probe).total
        d = disturbance_sq_weak(inst.model, inst.psi, inst.B, other).total
        assert abs(a - b) < 1e-10 and abs(c - d) < 1e-10


def test_conditional_quasiprob_eigenbasis_probe_is_delta():
    cq = conditional_quasiprob(identity_model(), make_state([0.6, 0.8]), PAULI_Z, ProbeBasis.computational(2))
    # a axis sorted ascending: a=-1 is |1>, a=+1 is |0>
    np.testing.assert_allclose(cq.values[0], [[0, 1], [1, 0]], atol=1e-15)


def test_conditional_quasiprob_i_plus_cell():
    cq = conditional_quasiprob(identity_model(), PLUS, PAULI_Z, probe_with(I_PLUS))
    cell = cq.values[0, 0]
    # p(+1|i+) = <i+|0><0|+> / <i+|+> = (1+i)/2, p(-1|i+) = (1-i)/2
    assert abs(cell[1] - (1 + 1j) / 2) < 1e-12
    assert abs(cell[0] - (1 - 1j) / 2) < 1e-12
    assert abs(cell.sum() - 1) < 1e-12
    aw = weak_value(PLUS, np.eye(2), PAULI_Z, I_PLUS).value
    assert abs(cell @ cq.a_values - aw) < 1e-12


def test_conditional_laws_random(instances):
    for inst in instances:
        cq = conditional_quasiprob(inst.model, inst.psi, inst.A, inst.probe)
        tab = weak_table(inst.model, inst.psi, inst.A, inst.probe)
        d = cq.defined
        assert np.max(np.abs(cq.normalization()[d] - 1)) < 1e-10
        assert np.max(np.abs(cq.first_moment()[d] - tab.weak[d])) < 1e-10


def test_conditional_error_examples():
    sz = projective_measurement(np.eye(2), readouts=[1, -1])
    for f in range(2):
        for m in range(2):
            try:
                assert conditional_error_sq(sz, PLUS, PAULI_Z, ProbeBasis.computational(2), m, f) == 0.0
            except UndefinedCellError:
                pass
    val = conditional_error_sq(identity_model(1.0), PLUS, PAULI_Z, probe_with(ANOMALOUS_F), 0, 0)
    assert abs(val - (-36)) < 1e-9


def test_conditional_error_undefined_cell():
    with pytest.raises(UndefinedCellError):
        conditional_error_sq(identity_model(1.0), ZERO, PAULI_Z, ProbeBasis.computational(2), 0, 1)


def test_weak_value_uncertainty_examples():
    probe = probe_with(I_PLUS)
    assert weak_value_uncertainty(identity_model(), ZERO, PAULI_Z, probe, 0, 0) == pytest.approx(0, abs=1e-15)
    assert weak_value_uncertainty(identity_model(), ZERO, PAULI_X, probe, 0, 0) == pytest.approx(2, abs=1e-12)
    val = weak_value_uncertainty(identity_model(), PLUS, PAULI_Z, probe_with(ANOMALOUS_F), 0, 0)
    assert abs(val - (-360)) < 1e-8


def test_weak_value_uncertainty_via_conditional_distribution(instances):
    for inst in instances[:15]:
        cq = conditional_quasiprob(inst.model, inst.psi, inst.A, inst.probe)
        tab = weak_table(inst.model, inst.psi, inst.A, inst.probe)
        m, f = np.unravel_index(np.argmax(tab.probs), tab.probs.shape)
        direct = weak_value_uncertainty(inst.model, inst.psi, inst.A, inst.probe, m, f)
        aw = tab.weak[m, f]
        via = (cq.values[m, f] * (aw - cq.a_values) ** 2).sum().real
        assert abs(direct - via) < 1e-9


def test_statistics_laws_random():
    for inst in make_instances(200, seed=21):
        tab = weak_table(inst.model, inst.psi, inst.A, inst.probe)
        eps = ozawa_error_sq(inst.model, inst.psi, inst.A)
        assert abs(tab.conditional_error_average() - eps) < 1e-10
        assert abs(tab.modulus_variance_average()) < 1e-10
        assert abs(tab.uncertainty_average() - tab.imaginary_average()) < 1e-10


def test_uncertainty_average_fixture_equals_two():
    probe = ProbeBasis(observable(PAULI_Y).eigensystem.eigenvectors.T.copy())
    tab = weak_table(identity_model(), ZERO, PAULI_X, probe)
    assert abs(tab.uncertainty_average() - 2) < 1e-10


def test_sign_attainability_anomalous():
    sc = anomalous_weak_value(0.9)
    tab = weak_table(sc.model, sc.psi, sc.A, sc.probe)
    unc = tab.weak_uncertainty[tab.defined]
    assert unc.min() < 0 < unc.max()


def test_weak_table_rows_and_undefined():
    sc = anomalous_weak_value(0.9)
    rows = weak_table(sc.model, sc.psi, sc.A, sc.probe).rows()
    assert len(rows) == 2 and len(rows[0]) == 8
    assert rows[0][2] == pytest.approx(19.0, abs=1e-10)
    with pytest.warns(UserWarning):
        sc1 = anomalous_weak_value(1.0)
    t1 = weak_table(sc1.model, sc1.psi, sc1.A, sc1.probe)
    assert not t1.defined[0, 0] and t1.defined[0, 1]
