"""Operator-ordering error and disturbance functionals.

``output_error_sq`` evaluates the readout deviation on the post-measurement
states, ``ozawa_error_sq`` puts the target observable to the right of the
Kraus operator, and ``ozawa_disturbance_sq`` compares the observable placed
before and after the measurement.  The output error is computed for any
input; it only reads as an observed error when ``M_m psi`` commutes with ``A``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import NamedTuple

import numpy as np

from .hilbert import as_vector
from .measurement import PROB_FLOOR, MeasurementModel, _check_dim

NEGATIVE_SLACK = 1e-12

__all__ = [
    "UncertaintyReport",
    "OptimalReadouts",
    "output_error_sq",
    "ozawa_error_sq",
    "ozawa_disturbance_sq",
    "std_dev",
    "commutator_bound",
    "ozawa_inequality",
    "hall_optimal_readouts",
    "REPORT_COLUMNS",
]

# CSV column order; "bound" is the commutator_bound field
REPORT_COLUMNS = ("eps_out", "eps", "eta", "sigma_A", "sigma_B", "bound", "ozawa_lhs", "naive_product")


def _matrix(x) -> np.ndarray:
    return np.asarray(x, dtype=complex)


def _nonneg(value: float, what: str) -> float:
    if value < -NEGATIVE_SLACK:
        raise ArithmeticError(f"{what} is negative beyond round-off: {value:.3e}")
    return max(value, 0.0)


def output_error_sq(model: MeasurementModel, psi, A) -> float:
    """``sum_m ||(A_m - A) M_m psi||^2``."""
    vec = as_vector(psi)
    a = _matrix(A)
    _check_dim(model, vec, a)
    readouts = model.readout_array()
    out = model.kraus @ vec
    resid = readouts[:, None] * out - out @ a.T
    return float(np.sum(np.abs(resid) ** 2))


def ozawa_error_sq(model: MeasurementModel, psi, A) -> float:
    """``sum_m ||M_m (A_m - A) psi||^2``."""
    vec = as_vector(psi)
    a = _matrix(A)
    _check_dim(model, vec, a)
    readouts = model.readout_array()
    apsi = a @ vec
    resid = readouts[:, None] * (model.kraus @ vec) - model.kraus @ apsi
    return float(np.sum(np.abs(resid) ** 2))


def ozawa_disturbance_sq(model: MeasurementModel, psi, B) -> float:
    """``sum_m ||(B M_m - M_m B) psi||^2``."""
    vec = as_vector(psi)
    b = _matrix(B)
    _check_dim(model, vec, b)
    out = model.kraus @ vec
    resid = out @ b.T - model.kraus @ (b @ vec)
    return float(np.sum(np.abs(resid) ** 2))


def std_dev(psi, X) -> float:
    """Standard deviation of observable ``X`` in the pure state ``psi``."""
    vec = as_vector(psi)
    x = _matrix(X)
    xpsi = x @ vec
    mean = np.vdot(vec, xpsi).real
    # ||(X - <X>)psi|| avoids the cancellation in <X^2> - <X>^2
    return float(np.linalg.norm(xpsi - mean * vec))


def commutator_bound(psi, A, B) -> float:
    """``|<[A, B]>| / 2``."""
    vec = as_vector(psi)
    a, b = _matrix(A), _matrix(B)
    comm = a @ b - b @ a
    return float(0.5 * abs(np.vdot(vec, comm @ vec)))


@dataclass(frozen=True)
class UncertaintyReport:
    eps_out: float
    eps: float
    eta: float
    sigma_A: float
    sigma_B: float
    commutator_bound: float
    ozawa_lhs: float
    naive_product: float

    @property
    def margin(self) -> float:
        """Ozawa left-hand side minus the commutator bound."""
        return self.ozawa_lhs - self.commutator_bound

    def as_dict(self) -> dict:
        return asdict(self)

    def row(self) -> list:
        """Values in ``REPORT_COLUMNS`` order."""
        return [self.eps_out, self.eps, self.eta, self.sigma_A, self.sigma_B,
                self.commutator_bound, self.ozawa_lhs, self.naive_product]


def ozawa_inequality(model: MeasurementModel, psi, A, B) -> UncertaintyReport:
    """Evaluate both sides of ``eps*eta + eps*sigma_B + sigma_A*eta >= |<[A,B]>|/2``.

    The bound itself comes from Ozawa's 2003 relation; it is reported next to
    the naive product ``eps*eta`` which is not bounded this way.
    """
    eps_out = math.sqrt(_nonneg(output_error_sq(model, psi, A), "output error"))
    eps = math.sqrt(_nonneg(ozawa_error_sq(model, psi, A), "error"))
    eta = math.sqrt(_nonneg(ozawa_disturbance_sq(model, psi, B), "disturbance"))
    sa = std_dev(psi, A)
    sb = std_dev(psi, B)
    return UncertaintyReport(
        eps_out=eps_out,
        eps=eps,
        eta=eta,
        sigma_A=sa,
        sigma_B=sb,
        commutator_bound=commutator_bound(psi, A, B),
        ozawa_lhs=eps * eta + eps * sb + sa * eta,
        naive_product=eps * eta,
    )


class OptimalReadouts(NamedTuple):
    values: np.ndarray
    unconstrained: np.ndarray


def hall_optimal_readouts(model: MeasurementModel, psi, A) -> OptimalReadouts:
    """Readouts minimizing ``ozawa_error_sq``.

    For each outcome the optimum is
    ``Re <psi|M^dagger M A|psi> / <psi|M^dagger M|psi>``; outcomes with
    probability below the floor get 0 and are flagged ``unconstrained``.
    """
    vec = as_vector(psi)
    a = _matrix(A)
    _check_dim(model, vec, a)
    out = model.kraus @ vec
    probs = np.sum(np.abs(out) ** 2, axis=1)
    cross = np.einsum("mi,mi->m", np.conj(out), model.kraus @ (a @ vec))
    unconstrained = probs < PROB_FLOOR
    values = np.where(unconstrained, 0.0, cross.real / np.where(unconstrained, 1.0, probs))
    return OptimalReadouts(values, unconstrained)
