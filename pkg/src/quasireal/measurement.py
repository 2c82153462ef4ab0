"""Kraus-operator measurement models and their outcome statistics."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .hilbert import State, as_vector, make_state, random_unitary

PROB_FLOOR = 1e-12
COMPLETENESS_TOL = 1e-10
ORTHONORMAL_TOL = 1e-10

__all__ = [
    "MeasurementModel",
    "ProbeBasis",
    "JointDistribution",
    "UnreachableOutcomeError",
    "MissingReadoutsError",
    "check_completeness",
    "outcome_probabilities",
    "outcome_probability",
    "post_state",
    "joint_amplitudes",
    "joint_probabilities",
    "random_measurement",
    "random_probe",
    "projective_measurement",
]


class UnreachableOutcomeError(ValueError):
    pass


class MissingReadoutsError(ValueError):
    pass


@dataclass(frozen=True)
class MeasurementModel:
    """A set of Kraus operators ``kraus[m]`` with labels and optional readouts.

    Completeness is not enforced here so that deliberately broken models can
    still be inspected; use :func:`check_completeness`.
    """

    kraus: np.ndarray
    labels: tuple
    readouts: tuple

    def __post_init__(self):
        k = self.kraus
        if k.ndim != 3 or k.shape[1] != k.shape[2]:
            raise ValueError(f"kraus must have shape (K, d, d), got {k.shape}")
        if k.shape[0] < 1:
            raise ValueError("a measurement needs at least one outcome")
        if not np.all(np.isfinite(k)):
            raise ValueError("Kraus operators must be finite")
        if len(self.labels) != k.shape[0] or len(self.readouts) != k.shape[0]:
            raise ValueError("labels and readouts must have one entry per Kraus operator")
        k.setflags(write=False)

    @classmethod
    def from_kraus(cls, kraus: Sequence, labels: Optional[Sequence[str]] = None,
                   readouts: Optional[Sequence[Optional[float]]] = None) -> "MeasurementModel":
        ops = np.array([np.asarray(m, dtype=complex) for m in kraus], dtype=complex)
        n = len(ops)
        if labels is None:
            labels = [str(i) for i in range(n)]
        if readouts is None:
            readouts = [None] * n
        readouts = tuple(None if r is None else float(r) for r in readouts)
        return cls(ops, tuple(str(x) for x in labels), readouts)

    @property
    def dim(self) -> int:
        return self.kraus.shape[1]

    @property
    def n_outcomes(self) -> int:
        return self.kraus.shape[0]

    @property
    def has_readouts(self) -> bool:
        return all(r is not None for r in self.readouts)

    def readout_array(self) -> np.ndarray:
        if not self.has_readouts:
            missing = [lab for lab, r in zip(self.labels, self.readouts) if r is None]
            raise MissingReadoutsError(f"readout values missing for outcomes {missing}")
        return np.array(self.readouts, dtype=float)

    def with_readouts(self, readouts: Sequence[float]) -> "MeasurementModel":
        if len(readouts) != self.n_outcomes:
            raise ValueError("need one readout per outcome")
        return replace(self, readouts=tuple(float(r) for r in readouts))


def projective_measurement(basis_vectors, readouts=None, labels=None) -> MeasurementModel:
    """Rank-1 projectors onto the given orthonormal vectors."""
    kraus = [np.outer(v, np.conj(v)) for v in np.asarray(basis_vectors, dtype=complex)]
    return MeasurementModel.from_kraus(kraus, labels, readouts)


@dataclass(frozen=True)
class ProbeBasis:
    """Complete orthonormal post-selection basis; ``vectors[f]`` is ``|f>``."""

    vectors: np.ndarray

    def __post_init__(self):
        v = self.vectors
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ValueError(f"probe must list dim vectors of length dim, got shape {v.shape}")
        gram = np.conj(v) @ v.T
        dev = float(np.max(np.abs(gram - np.eye(v.shape[0]))))
        if dev > ORTHONORMAL_TOL:
            raise ValueError(f"probe vectors are not orthonormal: max |G - I| = {dev:.3e}")
        v.setflags(write=False)

    @classmethod
    def from_vectors(cls, vectors) -> "ProbeBasis":
        return cls(np.array(vectors, dtype=complex))

    @classmethod
    def computational(cls, dim: int) -> "ProbeBasis":
        return cls(np.eye(dim, dtype=complex))

    @property
    def dim(self) -> int:
        return self.vectors.shape[0]

    def projectors(self) -> np.ndarray:
        v = self.vectors
        return np.einsum("fi,fj->fij", v, np.conj(v))


def random_probe(dim: int, seed) -> ProbeBasis:
    return ProbeBasis(random_unitary(dim, seed).T.copy())


@dataclass(frozen=True)
class JointDistribution:
    """Table ``table[m, f]`` of joint outcome probabilities."""

    table: np.ndarray
    labels: tuple

    @property
    def total(self) -> float:
        return float(self.table.sum())

    def marginal(self) -> np.ndarray:
        return self.table.sum(axis=1)


def _check_dim(model: MeasurementModel, *vectors_or_ops):
    for x in vectors_or_ops:
        if x is None:
            continue
        n = np.asarray(x).shape[0]
        if n != model.dim:
            raise ValueError(f"dimension mismatch: model has dim {model.dim}, got {n}")


def check_completeness(model: MeasurementModel) -> float:
    """Max-abs residual of ``sum_m M_m^dagger M_m - I``."""
    k = model.kraus
    total = np.einsum("mji,mjk->ik", np.conj(k), k)
    return float(np.max(np.abs(total - np.eye(model.dim))))


def outcome_probabilities(model: MeasurementModel, psi) -> np.ndarray:
    vec = as_vector(psi)
    _check_dim(model, vec)
    out = model.kraus @ vec
    return np.sum(np.abs(out) ** 2, axis=1)


def outcome_probability(model: MeasurementModel, psi, m: int) -> float:
    """``||M_m psi||^2``."""
    vec = as_vector(psi)
    _check_dim(model, vec)
    return float(np.linalg.norm(model.kraus[m] @ vec) ** 2)


def post_state(model: MeasurementModel, psi, m: int) -> State:
    """Normalized ``M_m psi``; raises for outcomes below ``PROB_FLOOR``."""
    vec = as_vector(psi)
    _check_dim(model, vec)
    out = model.kraus[m] @ vec
    p = float(np.vdot(out, out).real)
    if p < PROB_FLOOR:
        raise UnreachableOutcomeError(
            f"unreachable outcome {model.labels[m]!r}: probability {p:.3e} below floor"
        )
    return make_state(out)


def joint_amplitudes(model: MeasurementModel, psi, probe: ProbeBasis) -> np.ndarray:
    """``amp[m, f] = <f|M_m|psi>``."""
    vec = as_vector(psi)
    _check_dim(model, vec, probe.vectors)
    return np.einsum("fi,mi->mf", np.conj(probe.vectors), model.kraus @ vec)


def joint_probabilities(model: MeasurementModel, psi, probe: ProbeBasis) -> JointDistribution:
    """``p(m, f) = |<f|M_m|psi>|^2``."""
    p = np.abs(joint_amplitudes(model, psi, probe)) ** 2
    return JointDistribution(p, model.labels)


def random_measurement(dim: int, n_outcomes: int, seed) -> MeasurementModel:
    """Complete Kraus set from the first ``dim`` columns of a Haar unitary.

    The ``(dim * n_outcomes, dim)`` isometry is cut into ``n_outcomes``
    square blocks, so completeness holds by construction.
    """
    if n_outcomes < 1:
        raise ValueError("n_outcomes must be >= 1")
    u = random_unitary(dim * n_outcomes, seed)
    blocks = u[:, :dim].reshape(n_outcomes, dim, dim)
    return MeasurementModel.from_kraus(blocks)
