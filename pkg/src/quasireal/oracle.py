"""Independent checks of the analytic routes.

The sampler simulates the sequential process outcome by outcome: draw ``m``
from ``||M_m psi||^2``, collapse, then draw the final outcome from the Born
rule on the collapsed state.  It never evaluates the joint-probability or
error formulas it is compared against.  Uniform variates come from a Philox
counter-based generator, one row of two variates per sample.

``verify_identities`` evaluates every cross-formulation identity and
normalization law on seeded random instances and reports the worst deviation
of each.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, NamedTuple, Sequence

import numpy as np

from .hilbert import (
    PAULI_X,
    PAULI_Y,
    basis_state,
    observable,
    random_hermitian,
    random_state,
)
from .measurement import (
    MeasurementModel,
    ProbeBasis,
    check_completeness,
    joint_probabilities,
    outcome_probabilities,
    post_state,
    random_measurement,
    random_probe,
)
from .quasiprob import (
    disturbance_quasiprob,
    disturbance_sq_quasiprob,
    error_sq_quasiprob,
    joint_quasiprob,
)
from .scenarios import sigma_x_projectors
from .uncertainty import ozawa_disturbance_sq, ozawa_error_sq
from .weak import conditional_quasiprob, disturbance_sq_weak, error_sq_weak, weak_table

IDENTITY_TOL = 1e-10

WEAK_UNCERTAINTY_NOTE = (
    "The probability-weighted average of the weak value uncertainty "
    "Re[(A^2)_w - (A_w)^2] equals 2*sum p(m,f)*(Im A_w)^2, which is non-negative and "
    "generally non-zero; it is not zero for all m and f as a literal reading of the "
    "zero-average claim would require. The zero-average statement holds exactly for the "
    "modulus form Re(A^2)_w - |A_w|^2 and for the per-cell first moment "
    "sum_a p(a|m,f)*(A_a - A_w). Both literal identities and the average law are "
    "checked; the weak value uncertainty itself is computed as defined."
)

__all__ = [
    "SampleReport",
    "OutputErrorEstimate",
    "IdentityResult",
    "VerificationReport",
    "sample_joint",
    "sample_output_error",
    "verify_identities",
    "IDENTITY_TOL",
    "WEAK_UNCERTAINTY_NOTE",
]


def _generator(seed) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


def _inverse_cdf(probs: np.ndarray, u: np.ndarray) -> np.ndarray:
    cdf = np.cumsum(probs)
    cdf /= cdf[-1]
    return np.minimum(np.searchsorted(cdf, u, side="right"), len(probs) - 1)


def _draw_outcomes(model: MeasurementModel, psi, u: np.ndarray):
    """Kraus outcome per sample plus the post-measurement state of each drawn outcome."""
    idx = _inverse_cdf(outcome_probabilities(model, psi), u)
    posts = {m: post_state(model, psi, m).amplitudes for m in np.unique(idx)}
    return idx, posts


@dataclass(frozen=True)
class SampleReport:
    n_samples: int
    seed: int
    empirical: np.ndarray
    reference: np.ndarray
    max_abs_dev: float
    z_scores: np.ndarray
    labels: tuple = ()

    def as_dict(self) -> dict:
        z = [[None if not math.isfinite(v) else float(v) for v in row] for row in self.z_scores]
        return {
            "n_samples": self.n_samples,
            "seed": self.seed,
            "labels": list(self.labels),
            "empirical": self.empirical.tolist(),
            "reference": self.reference.tolist(),
            "max_abs_dev": self.max_abs_dev,
            "max_abs_z": self.max_abs_z,
            "z_scores": z,
        }

    @property
    def max_abs_z(self) -> float:
        return float(np.max(np.abs(self.z_scores)))


def _z_scores(empirical: np.ndarray, reference: np.ndarray, n: int) -> np.ndarray:
    var = reference * (1.0 - reference) / n
    dev = empirical - reference
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(var > 0, dev / np.sqrt(np.where(var > 0, var, 1.0)), 0.0)
    # a zero-variance cell that still deviates is infinitely unlikely
    z = np.where((var <= 0) & (np.abs(dev) > 1e-15), np.inf, z)
    return z


def sample_joint(model: MeasurementModel, psi, probe: ProbeBasis, n: int, seed) -> SampleReport:
    """Monte-Carlo frequencies of ``(m, f)`` against the analytic joint table."""
    if n < 1:
        raise ValueError("n must be >= 1")
    u = _generator(seed).random((n, 2))
    m_idx, posts = _draw_outcomes(model, psi, u[:, 0])
    counts = np.zeros((model.n_outcomes, probe.dim), dtype=np.int64)
    fconj = np.conj(probe.vectors)
    for m, post in posts.items():
        sel = m_idx == m
        born = np.abs(fconj @ post) ** 2
        f_idx = _inverse_cdf(born, u[sel, 1])
        counts[m] += np.bincount(f_idx, minlength=probe.dim)
    empirical = counts / n
    reference = joint_probabilities(model, psi, probe).table
    return SampleReport(
        n_samples=n,
        seed=int(seed),
        empirical=empirical,
        reference=reference,
        max_abs_dev=float(np.max(np.abs(empirical - reference))),
        z_scores=_z_scores(empirical, reference, n),
        labels=model.labels,
    )


class OutputErrorEstimate(NamedTuple):
    mean: float
    stderr: float
    n_samples: int


def sample_output_error(model: MeasurementModel, psi, A, n: int, seed) -> OutputErrorEstimate:
    """Average of ``(A_m - A_a)^2`` where ``a`` is a sharp measurement of ``A`` after ``m``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    readouts = model.readout_array()
    obs = observable(np.asarray(A))
    u = _generator(seed).random((n, 2))
    m_idx, posts = _draw_outcomes(model, psi, u[:, 0])
    sq = np.empty(n)
    for m, post in posts.items():
        sel = m_idx == m
        born = np.real(np.einsum("i,kij,j->k", np.conj(post), obs.projectors, post))
        born = np.clip(born, 0.0, None)
        a_idx = _inverse_cdf(born, u[sel, 1])
        sq[sel] = (readouts[m] - obs.values[a_idx]) ** 2
    mean = float(sq.mean())
    stderr = float(sq.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return OutputErrorEstimate(mean, stderr, n)


@dataclass
class IdentityResult:
    name: str
    trials: int = 0
    max_dev: float = 0.0
    tol: float = IDENTITY_TOL

    @property
    def passed(self) -> bool:
        return self.max_dev < self.tol

    def update(self, dev: float) -> None:
        self.trials += 1
        if not (dev <= self.max_dev):  # NaN counts as a failure
            self.max_dev = float(dev) if math.isfinite(dev) else math.inf

    def as_dict(self) -> dict:
        dev = self.max_dev if math.isfinite(self.max_dev) else None
        return {"name": self.name, "trials": self.trials, "max_dev": dev,
                "tol": self.tol, "pass": self.passed}


@dataclass
class VerificationReport:
    tol: float
    trials: int
    seed: int
    dims: List[int]
    kraus_counts: List[int]
    identities: Dict[str, IdentityResult] = field(default_factory=dict)
    instances_with_negative_weights: int = 0
    weak_uncertainty_fixture: float = float("nan")
    self_test_fail: bool = False

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.identities.values())

    def record(self, name: str, dev: float) -> None:
        if name not in self.identities:
            self.identities[name] = IdentityResult(name, tol=self.tol)
        self.identities[name].update(dev)

    def as_dict(self) -> dict:
        return {
            "tol": self.tol,
            "trials": self.trials,
            "seed": self.seed,
            "dims": self.dims,
            "kraus_counts": self.kraus_counts,
            "self_test_fail": self.self_test_fail,
            "pass": self.passed,
            "identities": [r.as_dict() for r in self.identities.values()],
            "instances_with_negative_weights": self.instances_with_negative_weights,
            "weak_uncertainty_average": {
                "law": "sum p*DeltaA^2_weak = 2*sum p*(Im A_w)^2",
                "fixture": "psi=|0>, A=sigma_x, M={I}, probe=sigma_y eigenbasis",
                "fixture_value": self.weak_uncertainty_fixture,
                "note": WEAK_UNCERTAINTY_NOTE,
            },
        }


def _random_instance(dim: int, n_outcomes: int, rng: np.random.Generator):
    sub = rng.integers(2**63, size=6)
    psi = random_state(dim, sub[0])
    model = random_measurement(dim, n_outcomes, sub[1])
    model = model.with_readouts(np.random.default_rng(sub[2]).standard_normal(n_outcomes))
    A = observable(random_hermitian(dim, sub[3]))
    B = observable(random_hermitian(dim, sub[4]))
    probe = random_probe(dim, sub[5])
    return psi, model, A, B, probe


def _check_instance(report: VerificationReport, psi, model, A, B, probe) -> None:
    rec = report.record
    rec("completeness", check_completeness(model))

    joint = joint_probabilities(model, psi, probe).table
    p_m = outcome_probabilities(model, psi)
    rec("joint_probability_total", abs(joint.sum() - 1.0))
    rec("joint_probability_marginal", float(np.max(np.abs(joint.sum(axis=1) - p_m))))

    eps2 = ozawa_error_sq(model, psi, A)
    eta2 = ozawa_disturbance_sq(model, psi, B)
    rec("error_operator_vs_weak", abs(eps2 - error_sq_weak(model, psi, A, probe).total))
    rec("error_operator_vs_quasiprob", abs(eps2 - error_sq_quasiprob(model, psi, A, probe)))
    rec("disturbance_operator_vs_weak", abs(eta2 - disturbance_sq_weak(model, psi, B, probe).total))
    rec("disturbance_operator_vs_quasiprob", abs(eta2 - disturbance_sq_quasiprob(model, psi, B)))

    table = weak_table(model, psi, A, probe)
    rec("error_operator_vs_conditional_average", abs(eps2 - table.conditional_error_average()))
    rec("modulus_weak_variance_zero_mean", abs(table.modulus_variance_average()))
    rec("weak_uncertainty_average_law", abs(table.uncertainty_average() - table.imaginary_average()))

    cond = conditional_quasiprob(model, psi, A, probe)
    d = cond.defined
    if d.any():
        rec("conditional_normalization", float(np.max(np.abs(cond.normalization()[d] - 1.0))))
        rec("conditional_first_moment", float(np.max(np.abs(cond.first_moment()[d] - table.weak[d]))))

    dist = joint_quasiprob(model, psi, A, probe)
    born = np.real(np.einsum("i,kij,j->k", np.conj(psi.amplitudes), A.projectors, psi.amplitudes))
    rec("quasi_marginal_joint", float(np.max(np.abs(dist.joint_marginal() - joint))))
    rec("quasi_marginal_born", float(np.max(np.abs(dist.a_marginal() - born))))
    rec("quasi_total", abs(dist.total - 1.0))
    dist_b = disturbance_quasiprob(model, psi, B)
    rec("disturbance_quasi_total", abs(dist_b.total - 1.0))
    if dist.table.real.min() < 0.0:
        report.instances_with_negative_weights += 1


def _corrupted_fixture():
    sc = sigma_x_projectors()
    kraus = np.array(sc.model.kraus)
    kraus[0, 0, 0] += 1e-6
    model = MeasurementModel(kraus, sc.model.labels, sc.model.readouts)
    return sc.psi, model, sc.A, sc.B, sc.probe


def _weak_uncertainty_fixture() -> float:
    model = MeasurementModel.from_kraus([np.eye(2)], labels=["I"])
    probe = ProbeBasis(observable(PAULI_Y).eigensystem.eigenvectors.T.copy())
    return weak_table(model, basis_state(2, 0), PAULI_X, probe).uncertainty_average()


def verify_identities(dims: Sequence[int], kraus_counts: Sequence[int], trials: int, seed,
                      tol: float = IDENTITY_TOL, self_test_fail: bool = False) -> VerificationReport:
    """Run every identity on ``trials`` random instances.

    Dimensions and outcome counts cycle through every ``(dim, count)``
    combination.  ``self_test_fail`` appends the sigma_x projector fixture
    with one Kraus entry shifted by 1e-6, which must trip completeness.
    Failures are reported, never raised.
    """
    dims = [int(d) for d in dims]
    kraus_counts = [int(k) for k in kraus_counts]
    report = VerificationReport(tol, int(trials), int(seed), dims, kraus_counts, self_test_fail=self_test_fail)
    if trials > 0:
        if not dims or not kraus_counts:
            raise ValueError("dims and kraus_counts must be non-empty")
        rng = np.random.default_rng(seed)
        for t in range(trials):
            d = dims[t % len(dims)]
            k = kraus_counts[(t // len(dims)) % len(kraus_counts)]
            _check_instance(report, *_random_instance(d, k, rng))
    report.weak_uncertainty_fixture = _weak_uncertainty_fixture()
    if self_test_fail:
        _check_instance(report, *_corrupted_fixture())
    return report
