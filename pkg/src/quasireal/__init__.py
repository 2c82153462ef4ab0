"""Error and disturbance of finite-dimensional quantum measurements.

Three equivalent routes are provided: operator ordering
(:mod:`quasireal.uncertainty`), post-selected weak values
(:mod:`quasireal.weak`) and complex joint quasi-probabilities
(:mod:`quasireal.quasiprob`).  :mod:`quasireal.oracle` checks them against
each other and against Monte-Carlo sampling.
"""

__version__ = "0.1.0"

from .hilbert import (  # noqa: E402
    Observable,
    State,
    adjoint,
    eigh,
    make_state,
    observable,
    random_hermitian,
    random_state,
    random_unitary,
)
from .measurement import (  # noqa: E402
    MeasurementModel,
    ProbeBasis,
    check_completeness,
    joint_probabilities,
    outcome_probability,
    post_state,
    random_measurement,
)
from .uncertainty import (  # noqa: E402
    UncertaintyReport,
    hall_optimal_readouts,
    output_error_sq,
    ozawa_disturbance_sq,
    ozawa_error_sq,
    ozawa_inequality,
    std_dev,
)

__all__ = [
    "__version__",
    "Observable",
    "State",
    "adjoint",
    "eigh",
    "make_state",
    "observable",
    "random_hermitian",
    "random_state",
    "random_unitary",
    "MeasurementModel",
    "ProbeBasis",
    "check_completeness",
    "joint_probabilities",
    "outcome_probability",
    "post_state",
    "random_measurement",
    "UncertaintyReport",
    "hall_optimal_readouts",
    "output_error_sq",
    "ozawa_disturbance_sq",
    "ozawa_error_sq",
    "ozawa_inequality",
    "std_dev",
]
