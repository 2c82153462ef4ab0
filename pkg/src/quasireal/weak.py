"""Weak values and the post-selected decompositions of error and disturbance.

Every cell ``(m, f)`` pairs a measurement outcome with a final probe
outcome.  Totals are summed in amplitude form, e.g.
``|<f|M_m (A_m - A)|psi>|^2``, which equals ``p(m, f) |A_m - A_w|^2`` but
needs no division, so unreachable cells drop out without special handling.
Per-cell quotients are only reported where the cell probability is at least
``REL_FLOOR`` times the largest cell probability.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, NamedTuple

import numpy as np

from .hilbert import Observable, as_observable, as_vector
from .measurement import MeasurementModel, ProbeBasis, _check_dim

REL_FLOOR = 1e-12

__all__ = [
    "WeakValueRecord",
    "CellSum",
    "WeakTable",
    "ConditionalQuasiProb",
    "UndefinedCellError",
    "weak_value",
    "sandwich",
    "error_sq_weak",
    "disturbance_sq_weak",
    "weak_table",
    "conditional_quasiprob",
    "conditional_error_sq",
    "weak_value_uncertainty",
    "WEAK_TABLE_COLUMNS",
]

WEAK_TABLE_COLUMNS = ("m", "f", "re_weak", "im_weak", "prob", "cond_error", "weak_uncertainty", "defined")


class UndefinedCellError(ValueError):
    pass


@dataclass(frozen=True)
class WeakValueRecord:
    m: str
    f: int
    amplitude: complex
    prob: float
    value: complex
    defined: bool


def weak_value(psi, pre_op, X, f, side: str = "before", scale: float = 1.0,
               m: str = "", f_index: int = 0) -> WeakValueRecord:
    """Weak value of ``X`` for pre-selection ``psi`` and post-selection ``f``.

    ``side="before"`` gives ``<f|M X|psi> / <f|M|psi>``, ``side="after"``
    gives ``<f|X M|psi> / <f|M|psi>``.  The cell is undefined when
    ``|<f|M|psi>|^2`` is below ``REL_FLOOR * scale``; ``scale`` is normally the
    largest cell probability of the surrounding table.
    """
    vec = as_vector(psi)
    fvec = as_vector(f)
    op = np.asarray(pre_op, dtype=complex)
    x = np.asarray(X, dtype=complex)
    amp = complex(np.vdot(fvec, op @ vec))
    if side == "before":
        num = complex(np.vdot(fvec, op @ (x @ vec)))
    elif side == "after":
        num = complex(np.vdot(fvec, x @ (op @ vec)))
    else:
        raise ValueError(f"side must be 'before' or 'after', got {side!r}")
    prob = abs(amp) ** 2
    defined = prob >= REL_FLOOR * scale and prob > 0.0
    value = num / amp if defined else complex("nan")
    return WeakValueRecord(m, f_index, amp, prob, value, defined)


def sandwich(model: MeasurementModel, psi, probe: ProbeBasis, before=None, after=None) -> np.ndarray:
    """``out[m, f] = <f| after M_m before |psi>`` with omitted factors = identity."""
    vec = as_vector(psi)
    _check_dim(model, vec, probe.vectors)
    if before is not None:
        vec = np.asarray(before, dtype=complex) @ vec
    out = model.kraus @ vec
    if after is not None:
        out = out @ np.asarray(after, dtype=complex).T
    return out @ np.conj(probe.vectors).T


def _defined_mask(probs: np.ndarray) -> np.ndarray:
    top = probs.max() if probs.size else 0.0
    return (probs >= REL_FLOOR * top) & (probs > 0.0)


class CellSum(NamedTuple):
    total: float
    cells: np.ndarray


def error_sq_weak(model: MeasurementModel, psi, A, probe: ProbeBasis) -> CellSum:
    """Error as a post-selected average of ``|A_m - A_w(m, f)|^2``."""
    a = np.asarray(A, dtype=complex)
    readouts = model.readout_array()
    resid = readouts[:, None] * sandwich(model, psi, probe) - sandwich(model, psi, probe, before=a)
    cells = np.abs(resid) ** 2
    return CellSum(float(cells.sum()), cells)


def disturbance_sq_weak(model: MeasurementModel, psi, B, probe: ProbeBasis) -> CellSum:
    """Disturbance as a post-selected average of ``|B_w(after) - B_w(before)|^2``."""
    b = np.asarray(B, dtype=complex)
    _check_dim(model, b)
    resid = sandwich(model, psi, probe, after=b) - sandwich(model, psi, probe, before=b)
    cells = np.abs(resid) ** 2
    return CellSum(float(cells.sum()), cells)


@dataclass(frozen=True)
class WeakTable:
    """Per-cell weak-value statistics of observable ``A``.

    Quotient arrays hold NaN where ``defined`` is False.  ``cond_error`` is
    NaN throughout when the model carries no readouts.
    """

    labels: tuple
    amplitudes: np.ndarray
    probs: np.ndarray
    defined: np.ndarray
    weak: np.ndarray
    weak_sq: np.ndarray
    cond_error: np.ndarray
    weak_uncertainty: np.ndarray

    def records(self) -> Iterator[WeakValueRecord]:
        n_m, n_f = self.probs.shape
        for m in range(n_m):
            for f in range(n_f):
                yield WeakValueRecord(self.labels[m], f, complex(self.amplitudes[m, f]),
                                      float(self.probs[m, f]), complex(self.weak[m, f]),
                                      bool(self.defined[m, f]))

    def rows(self) -> list:
        """Rows in ``WEAK_TABLE_COLUMNS`` order; undefined quotients become None."""
        out = []
        n_m, n_f = self.probs.shape
        for m in range(n_m):
            for f in range(n_f):
                ok = bool(self.defined[m, f])
                w = self.weak[m, f]
                ce = self.cond_error[m, f]
                out.append([
                    self.labels[m], f,
                    float(w.real) if ok else None,
                    float(w.imag) if ok else None,
                    float(self.probs[m, f]),
                    float(ce) if ok and np.isfinite(ce) else None,
                    float(self.weak_uncertainty[m, f]) if ok else None,
                    ok,
                ])
        return out

    def modulus_variance_average(self) -> float:
        """``sum p (Re (A^2)_w - |A_w|^2)`` over defined cells."""
        d = self.defined
        p = self.probs[d]
        return float(np.sum(p * (self.weak_sq[d].real - np.abs(self.weak[d]) ** 2)))

    def uncertainty_average(self) -> float:
        """Probability-weighted average of the weak value uncertainty."""
        d = self.defined
        return float(np.sum(self.probs[d] * self.weak_uncertainty[d]))

    def imaginary_average(self) -> float:
        """``2 sum p (Im A_w)^2``; equals :meth:`uncertainty_average` exactly."""
        d = self.defined
        return float(2.0 * np.sum(self.probs[d] * self.weak[d].imag ** 2))

    def conditional_error_average(self) -> float:
        d = self.defined
        return float(np.sum(self.probs[d] * self.cond_error[d]))


def weak_table(model: MeasurementModel, psi, A, probe: ProbeBasis) -> WeakTable:
    a = np.asarray(A, dtype=complex)
    amp = sandwich(model, psi, probe)
    probs = np.abs(amp) ** 2
    defined = _defined_mask(probs)
    safe = np.where(defined, amp, 1.0)
    nan = complex("nan")
    weak = np.where(defined, sandwich(model, psi, probe, before=a) / safe, nan)
    weak_sq = np.where(defined, sandwich(model, psi, probe, before=a @ a) / safe, nan)
    if model.has_readouts:
        readouts = model.readout_array()
        cond = np.full(probs.shape, np.nan)
        for m, r in enumerate(readouts):
            shifted = r * np.eye(a.shape[0]) - a
            num = sandwich(model, psi, probe, before=shifted @ shifted)[m]
            cond[m] = np.where(defined[m], (num / safe[m]).real, np.nan)
    else:
        cond = np.full(probs.shape, np.nan)
    unc = np.where(defined, (weak_sq - weak * weak).real, np.nan)
    return WeakTable(model.labels, amp, probs, defined, weak, weak_sq, cond, unc)


@dataclass(frozen=True)
class ConditionalQuasiProb:
    """``values[m, f, k] = p(a_k | m, f)`` over the spectral clusters of ``A``.

    Undefined cells are NaN; ``n_undefined`` counts them.
    """

    values: np.ndarray
    defined: np.ndarray
    a_values: np.ndarray

    @property
    def n_undefined(self) -> int:
        return int(np.size(self.defined) - np.count_nonzero(self.defined))

    def normalization(self) -> np.ndarray:
        return self.values.sum(axis=2)

    def first_moment(self) -> np.ndarray:
        return self.values @ self.a_values


def conditional_quasiprob(model: MeasurementModel, psi, A, probe: ProbeBasis) -> ConditionalQuasiProb:
    """``p(a|m,f) = <f|M_m P_a|psi> / <f|M_m|psi>`` with spectral projectors ``P_a``."""
    obs: Observable = as_observable(A)
    amp = sandwich(model, psi, probe)
    defined = _defined_mask(np.abs(amp) ** 2)
    safe = np.where(defined, amp, 1.0)
    parts = [sandwich(model, psi, probe, before=proj) / safe for proj in obs.projectors]
    values = np.stack(parts, axis=2)
    values[~defined] = complex("nan")
    return ConditionalQuasiProb(values, defined, obs.values)


def _cell_quotient(model, psi, probe, op, m, f):
    amp = sandwich(model, psi, probe)
    probs = np.abs(amp) ** 2
    if not _defined_mask(probs)[m, f]:
        raise UndefinedCellError(
            f"cell (m={model.labels[m]!r}, f={f}) has probability {probs[m, f]:.3e}; weak value undefined"
        )
    return sandwich(model, psi, probe, before=op)[m, f] / amp[m, f]


def conditional_error_sq(model: MeasurementModel, psi, A, probe: ProbeBasis, m: int, f: int) -> float:
    """``Re <f|M_m (A_m - A)^2|psi> / <f|M_m|psi>``; may be negative."""
    a = np.asarray(A, dtype=complex)
    r = model.readout_array()[m]
    shifted = r * np.eye(a.shape[0]) - a
    return float(_cell_quotient(model, psi, probe, shifted @ shifted, m, f).real)


def weak_value_uncertainty(model: MeasurementModel, psi, A, probe: ProbeBasis, m: int, f: int) -> float:
    """``Re[(A^2)_w - (A_w)^2]`` for the cell ``(m, f)``."""
    a = np.asarray(A, dtype=complex)
    aw = _cell_quotient(model, psi, probe, a, m, f)
    a2w = _cell_quotient(model, psi, probe, a @ a, m, f)
    return float((a2w - aw * aw).real)
