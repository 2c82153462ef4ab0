"""Dense complex linear algebra for small Hilbert spaces.

States are normalized amplitude vectors, operators are plain ``(d, d)``
complex numpy arrays.  Hermitian spectra come from a cyclic Jacobi solver so
that results are deterministic and eigenvalue clusters (degenerate
eigenspaces) are explicit.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

HERMITIAN_TOL = 1e-10
DEGENERACY_TOL = 1e-9
JACOBI_TOL = 1e-14
_MAX_SWEEPS = 100

__all__ = [
    "State",
    "Eigensystem",
    "Observable",
    "make_state",
    "as_vector",
    "adjoint",
    "hermitian_deviation",
    "eigh",
    "observable",
    "as_observable",
    "random_state",
    "random_unitary",
    "random_hermitian",
    "basis_state",
    "PAULI_X",
    "PAULI_Y",
    "PAULI_Z",
    "IDENTITY_2",
]

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY_2 = np.eye(2, dtype=complex)


@dataclass(frozen=True)
class State:
    """A normalized pure state.

    ``normalization`` is the factor that was multiplied into the raw input
    amplitudes to make them unit length.
    """

    amplitudes: np.ndarray
    normalization: float = 1.0

    def __post_init__(self):
        self.amplitudes.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.amplitudes
        return self.amplitudes.astype(dtype)

    def __len__(self):
        return self.dim


def make_state(amplitudes) -> State:
    """Normalize ``amplitudes`` into a :class:`State`.

    Raises
    ------
    ValueError
        If the vector is zero, empty, not one-dimensional or non-finite.
    """
    vec = np.array(amplitudes, dtype=complex)
    if vec.ndim != 1 or vec.size == 0:
        raise ValueError(f"state must be a non-empty 1-d vector, got shape {vec.shape}")
    if not np.all(np.isfinite(vec)):
        raise ValueError("state amplitudes must be finite")
    norm = np.linalg.norm(vec)
    if norm == 0.0:
        raise ValueError("cannot normalize a zero vector")
    if abs(norm - 1.0) <= 4 * np.finfo(float).eps:
        # already normalized; rescaling would only perturb the last bits
        return State(vec, normalization=1.0)
    return State(vec / norm, normalization=float(1.0 / norm))


def as_vector(psi) -> np.ndarray:
    """Return the amplitude array of a State or vector-like without copying."""
    if isinstance(psi, State):
        return psi.amplitudes
    return np.asarray(psi, dtype=complex)


def basis_state(dim: int, index: int) -> State:
    vec = np.zeros(dim, dtype=complex)
    vec[index] = 1.0
    return State(vec)


def adjoint(op) -> np.ndarray:
    """Conjugate transpose."""
    return np.conj(np.asarray(op)).T


def hermitian_deviation(op) -> float:
    """Max-abs entry of ``X - X^dagger``."""
    x = np.asarray(op)
    if x.size == 0:
        return 0.0
    return float(np.max(np.abs(x - adjoint(x))))


@dataclass(frozen=True)
class Eigensystem:
    """Ascending eigenvalues, orthonormal eigenvector columns and clusters.

    ``clusters`` is a tuple of index tuples into ``eigenvalues``; indices in
    one cluster belong to numerically coincident eigenvalues.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    clusters: tuple

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ adjoint(v)


def _jacobi_rotate(a: np.ndarray, v: np.ndarray, p: int, q: int) -> None:
    apq = a[p, q]
    r = abs(apq)
    if r == 0.0:
        return
    phase = apq / r
    tau = (a[q, q].real - a[p, p].real) / (2.0 * r)
    if abs(tau) > 1e150:
        t = 0.5 / tau
    else:
        t = np.copysign(1.0 / (abs(tau) + np.hypot(1.0, tau)), tau)
    c = 1.0 / np.sqrt(1.0 + t * t)
    s = t * c
    # G = diag-phase * real rotation; A <- G^dagger A G zeroes a[p, q]
    g = np.array([[c, s], [-s * np.conj(phase), c * np.conj(phase)]], dtype=complex)
    idx = [p, q]
    a[:, idx] = a[:, idx] @ g
    a[idx, :] = adjoint(g) @ a[idx, :]
    v[:, idx] = v[:, idx] @ g
    a[p, q] = 0.0
    a[q, p] = 0.0
    a[p, p] = a[p, p].real
    a[q, q] = a[q, q].real


def _off_norm(a: np.ndarray) -> float:
    off = a - np.diag(np.diag(a))
    return float(np.linalg.norm(off))


def _cluster(values: np.ndarray, tol: float) -> tuple:
    if values.size == 0:
        return ()
    spread = float(values[-1] - values[0])
    scale = max(spread, float(np.max(np.abs(values))))
    if scale == 0.0:
        scale = 1.0
    clusters = [[0]]
    for i in range(1, values.size):
        # sorted input: transitive closure reduces to adjacent gaps
        if values[i] - values[i - 1] <= tol * scale:
            clusters[-1].append(i)
        else:
            clusters.append([i])
    return tuple(tuple(c) for c in clusters)


def eigh(op, degeneracy_tol: float = DEGENERACY_TOL) -> Eigensystem:
    """Diagonalize a Hermitian matrix with cyclic Jacobi rotations.

    Parameters
    ----------
    op : array_like, shape (d, d)
        Hermitian within ``HERMITIAN_TOL`` (max-abs of ``X - X^dagger``).
    degeneracy_tol : float
        Eigenvalues whose gap is below ``degeneracy_tol`` times the spectral
        scale are merged into one cluster.

    Returns
    -------
    Eigensystem
    """
    a = np.array(op, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix entries must be finite")
    dev = hermitian_deviation(a)
    if dev > HERMITIAN_TOL:
        raise ValueError(f"matrix is not Hermitian: max |X - X^dagger| = {dev:.3e}")
    a = 0.5 * (a + adjoint(a))
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    total = float(np.linalg.norm(a))
    for _ in range(_MAX_SWEEPS):
        if _off_norm(a) <= JACOBI_TOL * total:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                _jacobi_rotate(a, v, p, q)
    evals = np.real(np.diag(a)).copy()
    order = np.argsort(evals, kind="stable")
    evals = evals[order]
    v = v[:, order]
    return Eigensystem(evals, v, _cluster(evals, degeneracy_tol))


@dataclass(frozen=True)
class Observable:
    """Hermitian operator with its spectral decomposition.

    ``values[k]`` is the eigenvalue of cluster ``k`` and ``projectors[k]``
    the orthogonal projector onto that eigenspace.
    """

    matrix: np.ndarray
    eigensystem: Eigensystem
    values: np.ndarray = field(repr=False)
    projectors: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.matrix
        return self.matrix.astype(dtype)


def observable(matrix, degeneracy_tol: float = DEGENERACY_TOL) -> Observable:
    """Build an :class:`Observable` from a Hermitian matrix."""
    mat = np.array(matrix, dtype=complex)
    es = eigh(mat, degeneracy_tol)
    mat = 0.5 * (mat + adjoint(mat))
    values = []
    projectors = []
    for cluster in es.clusters:
        idx = list(cluster)
        vecs = es.eigenvectors[:, idx]
        values.append(float(np.mean(es.eigenvalues[idx])))
        projectors.append(vecs @ adjoint(vecs))
    n = mat.shape[0]
    proj = np.array(projectors, dtype=complex).reshape(len(projectors), n, n)
    return Observable(mat, es, np.array(values), proj)


def as_observable(x) -> Observable:
    if isinstance(x, Observable):
        return x
    return observable(x)


def random_unitary(dim: int, seed) -> np.ndarray:
    """Haar-distributed unitary from a seeded complex Ginibre matrix.

    QR factorization with the phases of ``diag(R)`` pushed into ``Q``.
    """
    if dim < 1:
        raise ValueError("dim must be >= 1")
    rng = np.random.default_rng(seed)
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_state(dim: int, seed) -> State:
    """Uniformly distributed pure state (normalized complex Gaussian)."""
    if dim < 1:
        raise ValueError("dim must be >= 1")
    rng = np.random.default_rng(seed)
    z = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return make_state(z)


def random_hermitian(dim: int, seed, spectrum=None) -> np.ndarray:
    """Random Hermitian ``U diag(spectrum) U^dagger``.

    Without ``spectrum`` the eigenvalues are standard normal draws.
    """
    rng = np.random.default_rng(seed)
    if spectrum is None:
        spectrum = rng.standard_normal(dim)
    spectrum = np.asarray(spectrum, dtype=float)
    u = random_unitary(dim, rng.integers(2**63))
    h = (u * spectrum) @ adjoint(u)
    return 0.5 * (h + adjoint(h))
