"""Built-in physical scenarios and parameter sweeps.

The detuned qubit scenario starts in the sigma_z eigenstate ``|0>``, takes
sigma_x as the target and sigma_y as the disturbed observable, and measures
projectively along ``cos(phi) sigma_x + sin(phi) sigma_y``.  Its closed forms
are ``eps = 2|sin(phi/2)|``, ``eta = sqrt(2)|cos(phi)|``, unit standard
deviations and a unit commutator bound.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, Sequence

import numpy as np

from .hilbert import (
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    Observable,
    State,
    basis_state,
    make_state,
    observable,
    random_hermitian,
    random_state,
)
from .measurement import (
    MeasurementModel,
    ProbeBasis,
    check_completeness,
    projective_measurement,
    random_measurement,
)
from .quasiprob import disturbance_sq_quasiprob, error_sq_quasiprob
from .uncertainty import (
    UncertaintyReport,
    hall_optimal_readouts,
    output_error_sq,
    ozawa_disturbance_sq,
    ozawa_error_sq,
    ozawa_inequality,
)
from .weak import disturbance_sq_weak, error_sq_weak

__all__ = [
    "Scenario",
    "Evaluation",
    "SweepRow",
    "erhart_qubit",
    "anomalous_weak_value",
    "sigma_x_projectors",
    "discriminating_fixture",
    "search_discriminating_seed",
    "DISCRIMINATING_SEED",
    "FAMILIES",
    "BUILTINS",
    "builtin",
    "evaluate",
    "sweep",
    "SWEEP_COLUMNS_TAIL",
]

SWEEP_COLUMNS_TAIL = ("eps_out", "eps", "eta", "sigma_A", "sigma_B", "bound", "ozawa_lhs", "naive_product", "max_xdev")


@dataclass(frozen=True)
class Scenario:
    name: str
    psi: State
    A: Observable
    B: Observable
    model: MeasurementModel
    probe: ProbeBasis
    parameters: Dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        dims = {self.psi.dim, self.A.dim, self.B.dim, self.model.dim, self.probe.dim}
        if len(dims) != 1:
            raise ValueError(f"scenario components disagree on dimension: {sorted(dims)}")

    @property
    def dim(self) -> int:
        return self.psi.dim

    def with_optimal_readouts(self) -> "Scenario":
        opt = hall_optimal_readouts(self.model, self.psi, self.A)
        return replace(self, model=self.model.with_readouts(opt.values))


def _eigenbasis_probe(obs: Observable) -> ProbeBasis:
    return ProbeBasis(obs.eigensystem.eigenvectors.T.copy())


def erhart_qubit(phi: float) -> Scenario:
    """Detuned sequential spin measurement at angle ``phi`` (radians)."""
    phase = np.exp(1j * phi)
    plus = np.array([1.0, phase]) / math.sqrt(2.0)
    minus = np.array([1.0, -phase]) / math.sqrt(2.0)
    model = projective_measurement([plus, minus], readouts=[1.0, -1.0], labels=["+1", "-1"])
    probe = ProbeBasis.from_vectors([[1 / math.sqrt(2), 1j / math.sqrt(2)],
                                     [1 / math.sqrt(2), -1j / math.sqrt(2)]])
    return Scenario(
        name="erhart",
        psi=basis_state(2, 0),
        A=observable(PAULI_X),
        B=observable(PAULI_Y),
        model=model,
        probe=probe,
        parameters={"phi": float(phi)},
    )


def anomalous_weak_value(s: float) -> Scenario:
    """``|+>`` post-selected on ``|0> - s|1>``; the sigma_z weak value is ``(1+s)/(1-s)``.

    ``s = 1`` leaves the first probe cell with zero probability, so its weak
    value is undefined; a warning is issued.
    """
    if s == 1.0:
        warnings.warn("s = 1: post-selected cell f=0 has zero probability; weak value undefined",
                      stacklevel=2)
    norm = math.hypot(1.0, s)
    probe = ProbeBasis.from_vectors([[1.0 / norm, -s / norm], [s / norm, 1.0 / norm]])
    model = MeasurementModel.from_kraus([np.eye(2)], labels=["I"], readouts=[1.0])
    return Scenario(
        name="anomalous",
        psi=make_state([1.0, 1.0]),
        A=observable(PAULI_Z),
        B=observable(PAULI_X),
        model=model,
        probe=probe,
        parameters={"s": float(s)},
    )


def sigma_x_projectors() -> Scenario:
    """Sharp sigma_x measurement of ``|0>`` scored against sigma_z, probed in sigma_z."""
    inv = 1.0 / math.sqrt(2.0)
    model = projective_measurement([[inv, inv], [inv, -inv]], readouts=[1.0, -1.0], labels=["+1", "-1"])
    return Scenario(
        name="sigma-x-projectors",
        psi=basis_state(2, 0),
        A=observable(PAULI_Z),
        B=observable(PAULI_Y),
        model=model,
        probe=ProbeBasis.computational(2),
        parameters={},
    )


def _discriminating_instance(seed: int) -> Scenario:
    rng = np.random.default_rng(seed)
    sub = rng.integers(2**63, size=4)
    psi = random_state(3, sub[0])
    A = observable(random_hermitian(3, sub[1]))
    model = random_measurement(3, 2, sub[2])
    model = model.with_readouts(hall_optimal_readouts(model, psi, A).values)
    B = observable(random_hermitian(3, sub[3]))
    return Scenario("discriminating", psi, A, B, model, ProbeBasis.computational(3), {"seed": float(seed)})


def search_discriminating_seed(n_seeds: int = 256) -> int:
    """Seed in ``range(n_seeds)`` maximizing ``|output error^2 - error^2|`` at dim 3, 2 outcomes."""
    best, best_gap = 0, -1.0
    for seed in range(n_seeds):
        sc = _discriminating_instance(seed)
        gap = abs(output_error_sq(sc.model, sc.psi, sc.A) - ozawa_error_sq(sc.model, sc.psi, sc.A))
        if gap > best_gap:
            best, best_gap = seed, gap
    return best


# frozen result of search_discriminating_seed(256)
DISCRIMINATING_SEED = 57


def discriminating_fixture() -> Scenario:
    """Instance where the output error and the operator-ordered error differ widely."""
    return _discriminating_instance(DISCRIMINATING_SEED)


FAMILIES: Dict[str, tuple] = {
    "erhart": ("phi", erhart_qubit),
    "anomalous": ("s", anomalous_weak_value),
}

BUILTINS: Dict[str, Callable[[], Scenario]] = {
    "erhart-phi0": lambda: erhart_qubit(0.0),
    "erhart-phi0.2": lambda: erhart_qubit(0.2),
    "erhart-pi/2": lambda: erhart_qubit(math.pi / 2),
    "anomalous-0.9": lambda: anomalous_weak_value(0.9),
    "sigma-x-projectors": sigma_x_projectors,
    "discriminating": discriminating_fixture,
}


def builtin(name: str) -> Scenario:
    try:
        return BUILTINS[name]()
    except KeyError:
        raise KeyError(f"unknown scenario {name!r}; available: {', '.join(BUILTINS)}") from None


@dataclass(frozen=True)
class Evaluation:
    """Uncertainty report plus the squared error and disturbance from every route."""

    report: UncertaintyReport
    eps_sq: Dict[str, float]
    eta_sq: Dict[str, float]
    completeness: float

    @property
    def max_xdev(self) -> float:
        ref_e = self.eps_sq["operator"]
        ref_d = self.eta_sq["operator"]
        devs = [abs(v - ref_e) for v in self.eps_sq.values()]
        devs += [abs(v - ref_d) for v in self.eta_sq.values()]
        return max(devs)


def evaluate(scenario: Scenario) -> Evaluation:
    m, psi, A, B, probe = scenario.model, scenario.psi, scenario.A, scenario.B, scenario.probe
    report = ozawa_inequality(m, psi, A, B)
    eps_sq = {
        "operator": ozawa_error_sq(m, psi, A),
        "weak": error_sq_weak(m, psi, A, probe).total,
        "quasiprob": error_sq_quasiprob(m, psi, A, probe),
    }
    eta_sq = {
        "operator": ozawa_disturbance_sq(m, psi, B),
        "weak": disturbance_sq_weak(m, psi, B, probe).total,
        "quasiprob": disturbance_sq_quasiprob(m, psi, B),
    }
    return Evaluation(report, eps_sq, eta_sq, check_completeness(m))


@dataclass(frozen=True)
class SweepRow:
    parameter: str
    value: float
    evaluation: Evaluation

    @property
    def report(self) -> UncertaintyReport:
        return self.evaluation.report

    def row(self) -> list:
        return [self.value, *self.report.row(), self.evaluation.max_xdev]


def sweep(family, grid: Sequence[float]) -> list:
    """Evaluate a scenario family at every grid point, in order.

    ``family`` is a key of ``FAMILIES`` or a ``(parameter_name, factory)``
    pair.
    """
    if isinstance(family, str):
        if family not in FAMILIES:
            raise KeyError(f"unknown family {family!r}; available: {', '.join(FAMILIES)}")
        family = FAMILIES[family]
    name, factory = family
    return [SweepRow(name, float(x), evaluate(factory(float(x)))) for x in grid]

