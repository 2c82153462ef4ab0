"""Complex joint quasi-probabilities over (spectral outcome, Kraus outcome, final outcome).

The initial axis always runs over spectral clusters of an observable, so a
degenerate spectrum gives gauge-independent cells.  The final axis is either
a rank-1 probe basis or the spectral clusters of a second observable.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np

from .hilbert import Observable, as_observable, as_vector
from .measurement import MeasurementModel, ProbeBasis, _check_dim

MAX_TABLE_CELLS = 4096

__all__ = [
    "QuasiDistribution",
    "NegativityReport",
    "TableTooLargeError",
    "joint_quasiprob",
    "disturbance_quasiprob",
    "error_sq_quasiprob",
    "disturbance_sq_quasiprob",
    "negativity_report",
    "QUASI_COLUMNS",
]

QUASI_COLUMNS = ("a", "m", "f", "re_p", "im_p")


class TableTooLargeError(ValueError):
    pass


@dataclass(frozen=True)
class QuasiDistribution:
    """``table[a, m, f]`` with axis metadata.

    ``f_values`` is None when the final axis is a probe basis (outcomes are
    just indices) and holds eigenvalues when it is a spectral axis.
    """

    table: np.ndarray
    a_values: np.ndarray
    m_labels: tuple
    f_values: Optional[np.ndarray] = None

    @property
    def total(self) -> complex:
        return complex(self.table.sum())

    def joint_marginal(self) -> np.ndarray:
        """Sum over ``a``: the ``(m, f)`` table, real up to round-off."""
        return self.table.sum(axis=0)

    def a_marginal(self) -> np.ndarray:
        """Sum over ``(m, f)``: Born probabilities of the spectral clusters."""
        return self.table.sum(axis=(1, 2))

    def rows(self) -> list:
        out = []
        n_a, n_m, n_f = self.table.shape
        for a in range(n_a):
            for m in range(n_m):
                for f in range(n_f):
                    p = self.table[a, m, f]
                    fv = f if self.f_values is None else float(self.f_values[f])
                    out.append([float(self.a_values[a]), self.m_labels[m], fv, float(p.real), float(p.imag)])
        return out

    def as_dict(self) -> dict:
        return {
            "a_values": [float(x) for x in self.a_values],
            "m_labels": list(self.m_labels),
            "f_values": None if self.f_values is None else [float(x) for x in self.f_values],
            "cells": [dict(zip(QUASI_COLUMNS, r)) for r in self.rows()],
        }


def _probe_slices(model: MeasurementModel, psi, obs: Observable, probe: ProbeBasis) -> Iterator[np.ndarray]:
    vec = as_vector(psi)
    _check_dim(model, vec, obs.matrix, probe.vectors)
    fconj = np.conj(probe.vectors)
    split = obs.projectors @ vec
    for k in model.kraus:
        amp = fconj @ (k @ vec)
        parts = (split @ k.T) @ fconj.T
        yield parts * np.conj(amp)[None, :]


def _spectral_slices(model: MeasurementModel, psi, obs: Observable) -> Iterator[np.ndarray]:
    vec = as_vector(psi)
    _check_dim(model, vec, obs.matrix)
    split = obs.projectors @ vec
    for k in model.kraus:
        out = k @ vec
        moved = split @ k.T
        # cell[b_i, b_f] = <M psi| P_bf M P_bi |psi>
        yield np.einsum("j,fjk,ik->if", np.conj(out), obs.projectors, moved)


def _materialize(slices, n_a, n_m, n_f) -> np.ndarray:
    if n_a * n_m * n_f > MAX_TABLE_CELLS:
        raise TableTooLargeError(
            f"{n_a * n_m * n_f} cells exceed the {MAX_TABLE_CELLS}-cell table limit; use the streamed totals"
        )
    return np.stack(list(slices), axis=1)


def joint_quasiprob(model: MeasurementModel, psi, A, probe: ProbeBasis) -> QuasiDistribution:
    """``p(a, m, f) = <f|M_m P_a|psi> <psi|M_m^dagger|f>``."""
    obs = as_observable(A)
    table = _materialize(_probe_slices(model, psi, obs, probe), len(obs.values), model.n_outcomes, probe.dim)
    return QuasiDistribution(table, obs.values, model.labels)


def disturbance_quasiprob(model: MeasurementModel, psi, B) -> QuasiDistribution:
    """``p(b_i, m, b_f)`` with both outer axes on the spectral clusters of ``B``."""
    obs = as_observable(B)
    n = len(obs.values)
    table = _materialize(_spectral_slices(model, psi, obs), n, model.n_outcomes, n)
    return QuasiDistribution(table, obs.values, model.labels, obs.values)


def error_sq_quasiprob(model: MeasurementModel, psi, A, probe: ProbeBasis) -> float:
    """``sum Re p(a, m, f) (A_m - A_a)^2``, streamed one outcome at a time."""
    obs = as_observable(A)
    readouts = model.readout_array()
    total = 0.0
    for r, cells in zip(readouts, _probe_slices(model, psi, obs, probe)):
        weights = (r - obs.values) ** 2
        total += float(np.sum(cells.real.sum(axis=1) * weights))
    return total


def disturbance_sq_quasiprob(model: MeasurementModel, psi, B) -> float:
    """``sum Re p(b_i, m, b_f) (B_f - B_i)^2``, streamed one outcome at a time."""
    obs = as_observable(B)
    weights = (obs.values[None, :] - obs.values[:, None]) ** 2
    total = 0.0
    for cells in _spectral_slices(model, psi, obs):
        total += float(np.sum(cells.real * weights))
    return total


@dataclass(frozen=True)
class NegativityReport:
    min_real: float
    negative_mass: float
    max_imag: float
    most_negative: list

    def as_dict(self) -> dict:
        return {
            "min_real": self.min_real,
            "negative_mass": self.negative_mass,
            "max_imag": self.max_imag,
            "most_negative": self.most_negative,
        }


def negativity_report(dist: QuasiDistribution, top: int = 5) -> NegativityReport:
    """Summarize how far ``dist`` is from an ordinary probability table."""
    re = dist.table.real
    flat = np.argsort(re, axis=None, kind="stable")[:top]
    cells = []
    for idx in flat:
        a, m, f = np.unravel_index(idx, re.shape)
        if re[a, m, f] >= 0.0:
            break
        fv = int(f) if dist.f_values is None else float(dist.f_values[f])
        cells.append({"a": float(dist.a_values[a]), "m": dist.m_labels[m], "f": fv,
                      "re_p": float(re[a, m, f]), "im_p": float(dist.table.imag[a, m, f])})
    return NegativityReport(
        min_real=float(re.min()),
        negative_mass=float(np.sum(np.maximum(0.0, -re))),
        max_imag=float(np.max(np.abs(dist.table.imag))),
        most_negative=cells,
    )
