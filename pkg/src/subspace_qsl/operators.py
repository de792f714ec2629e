"""Validated Hamiltonians, frames, projectors and states, plus the operator algebra on them.

All matrices are dense complex numpy arrays, units with hbar = 1. Every type is
immutable after construction: arrays are copied and marked read-only.

Random instances come from numpy's PCG64 bit generator (``numpy.random.PCG64(seed)``,
or ``PCG64([seed, attempt])`` for retries). A standard complex Gaussian matrix of
shape ``s`` is ``(g.standard_normal(s) + 1j * g.standard_normal(s)) / sqrt(2)``,
real block drawn first. Same seed, same bits.
"""
import logging
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from subspace_qsl.client import Client, default_client
from subspace_qsl.errors import (
    DimensionMismatch,
    EigensolverFailure,
    InvalidFrame,
    InvalidProjector,
    InvalidState,
    NotHermitian,
    NotSquare,
    RankDeficient,
    ValidationError,
    ZeroSubspace,
)

logger = logging.getLogger(__name__)
log_warn = lambda x: logger.warning(x)

DEFAULT_HERMITICITY_TOL = 1e-10
DEFAULT_RANK_TOL = 1e-10
EPS_FRAME = 1e-10
EPS_PROJECTOR = 1e-10
EPS_STATE = 1e-12
RANDOM_FRAME_RETRIES = 3


def eps_spec(n: int) -> float:
    """Relative tolerance accepted from the eigensolver for an n x n problem."""
    return 1e-12 * n


def _as_complex_matrix(m, name: str) -> np.ndarray:
    arr = np.array(m, dtype=complex)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise ValidationError(f"{name} must be a matrix, got an array of shape {arr.shape}.")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} has non-finite entries.")
    return arr


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


def operator_norm(m, solver: str | None = None, client: Client | None = None) -> float:
    """Largest singular value of ``m``; 0 for empty matrices."""
    m = np.asarray(m)
    if m.ndim == 1:
        m = m.reshape(-1, 1)
    if m.size == 0:
        return 0.0
    singular_values = (client or default_client()).svd.singular_values(solver, m)
    return float(singular_values[0]) if len(singular_values) else 0.0


def commutator(a, b) -> np.ndarray:
    a = np.asarray(a)
    b = np.asarray(b)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NotSquare(f"Commutator needs square matrices, got shape {a.shape}.")
    if a.shape != b.shape:
        raise DimensionMismatch(f"Cannot commute matrices of shapes {a.shape} and {b.shape}.")
    return a @ b - b @ a


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """H = V diag(E) V*, eigenvalues ascending."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def e_min(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def e_max(self) -> float:
        return float(self.eigenvalues[-1])

    @property
    def omega(self) -> float:
        """Spectral width E_max - E_min."""
        return self.e_max - self.e_min

    def phases(self, t: float) -> np.ndarray:
        return np.exp(-1j * self.eigenvalues * t)

    def propagator(self, t: float) -> np.ndarray:
        """U(t) = exp(-iHt)."""
        v = self.eigenvectors
        return (v * self.phases(t)) @ v.conj().T

    def propagate(self, t: float, x: np.ndarray) -> np.ndarray:
        """U(t) x for a vector or a block of columns, without forming U(t)."""
        v = self.eigenvectors
        coefficients = v.conj().T @ x
        if coefficients.ndim == 1:
            return v @ (self.phases(t) * coefficients)
        return v @ (self.phases(t)[:, None] * coefficients)


@dataclass(frozen=True, eq=False)
class HermitianOperator:
    """A Hamiltonian. Construction symmetrizes the matrix after checking it is Hermitian to tolerance."""

    matrix: np.ndarray
    hermiticity_tol: float = DEFAULT_HERMITICITY_TOL

    def __post_init__(self):
        m = _as_complex_matrix(self.matrix, "Hamiltonian")
        if m.shape[0] != m.shape[1] or m.shape[0] < 1:
            raise NotSquare(f"Hamiltonian must be a non-empty square matrix, got shape {m.shape}.")
        if self.hermiticity_tol < 0:
            raise ValidationError(f"Hermiticity tolerance must be nonnegative, got {self.hermiticity_tol}.")

        asymmetry = operator_norm(m - m.conj().T)
        allowed = self.hermiticity_tol * max(1.0, operator_norm(m))
        if asymmetry > allowed:
            raise NotHermitian(asymmetry, allowed)
        object.__setattr__(self, "matrix", _freeze((m + m.conj().T) / 2))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @cached_property
    def norm(self) -> float:
        return operator_norm(self.matrix)

    @cached_property
    def spectrum(self) -> SpectralDecomposition:
        """Decomposition with the default eigensolver, computed once per operator."""
        return _decompose(self, None, None)


@dataclass(frozen=True, eq=False)
class Frame:
    """Orthonormal columns spanning a subspace of C^n."""

    columns: np.ndarray
    tolerance: float = EPS_FRAME

    def __post_init__(self):
        f = _as_complex_matrix(self.columns, "Frame")
        n, k = f.shape
        if not 1 <= k <= n:
            raise InvalidFrame(f"A frame needs 1 <= rank <= ambient dimension, got {n} x {k}.")
        residual = operator_norm(f.conj().T @ f - np.eye(k))
        if residual > self.tolerance:
            raise InvalidFrame(
                f"Frame columns are not orthonormal: ||F*F - I|| = {residual:.3e} exceeds {self.tolerance:.3e}."
            )
        object.__setattr__(self, "columns", _freeze(f))

    @property
    def ambient_dim(self) -> int:
        return self.columns.shape[0]

    @property
    def rank(self) -> int:
        return self.columns.shape[1]

    def projector(self) -> "Projector":
        return projector_from_frame(self)


@dataclass(frozen=True, eq=False)
class Projector:
    """Orthogonal projector P = P* = P^2."""

    matrix: np.ndarray
    tolerance: float = EPS_PROJECTOR

    def __post_init__(self):
        p = _as_complex_matrix(self.matrix, "Projector")
        n = p.shape[0]
        if p.shape[0] != p.shape[1]:
            raise NotSquare(f"Projector must be square, got shape {p.shape}.")

        asymmetry = operator_norm(p - p.conj().T)
        if asymmetry > self.tolerance:
            raise InvalidProjector(f"Projector is not Hermitian: ||P - P*|| = {asymmetry:.3e}.")
        p = (p + p.conj().T) / 2
        idempotency = operator_norm(p @ p - p)
        if idempotency > self.tolerance:
            raise InvalidProjector(f"Projector is not idempotent: ||P^2 - P|| = {idempotency:.3e}.")
        trace = np.trace(p).real
        if abs(trace - round(trace)) > self.tolerance * max(n, 1):
            raise InvalidProjector(f"Projector trace {trace!r} is not an integer.")
        object.__setattr__(self, "matrix", _freeze(p))

    @classmethod
    def zero(cls, n: int) -> "Projector":
        return cls(np.zeros((n, n), dtype=complex))

    @classmethod
    def identity(cls, n: int) -> "Projector":
        return cls(np.eye(n, dtype=complex))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    @property
    def rank(self) -> int:
        return int(round(self.trace))


@dataclass(frozen=True, eq=False)
class StateVector:
    """A unit vector psi."""

    entries: np.ndarray
    tolerance: float = EPS_STATE

    def __post_init__(self):
        psi = np.array(self.entries, dtype=complex)
        if psi.ndim != 1 or psi.size < 1:
            raise InvalidState(f"A state must be a non-empty vector, got shape {psi.shape}.")
        if not np.all(np.isfinite(psi)):
            raise InvalidState("State has non-finite entries.")
        deviation = abs(np.linalg.norm(psi) - 1.0)
        if deviation > self.tolerance:
            raise InvalidState(f"State is not normalized: | ||psi|| - 1 | = {deviation:.3e}.")
        object.__setattr__(self, "entries", _freeze(psi))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def as_frame(self) -> Frame:
        return Frame(self.entries.reshape(-1, 1))


def validate_hermitian(m, tol: float = DEFAULT_HERMITICITY_TOL) -> HermitianOperator:
    return HermitianOperator(m, tol)


def _decompose(h: HermitianOperator, solver: str | None, client: Client | None) -> SpectralDecomposition:
    eigenvalues, eigenvectors = (client or default_client()).spectral.decompose(solver, h.matrix)
    eigenvalues = np.asarray(eigenvalues, dtype=float)
    eigenvectors = np.asarray(eigenvectors, dtype=complex)
    order = np.argsort(eigenvalues, kind="stable")
    eigenvalues = eigenvalues[order]
    eigenvectors = eigenvectors[:, order]

    tol = eps_spec(h.dim)
    reconstruction = operator_norm((eigenvectors * eigenvalues) @ eigenvectors.conj().T - h.matrix)
    if reconstruction > tol * max(h.norm, np.finfo(float).tiny):
        raise EigensolverFailure(
            f"Eigendecomposition residual {reconstruction:.3e} exceeds {tol:.1e} * ||H||."
        )
    orthogonality = operator_norm(eigenvectors.conj().T @ eigenvectors - np.eye(h.dim))
    if orthogonality > tol:
        raise EigensolverFailure(f"Eigenvectors are not orthonormal: ||V*V - I|| = {orthogonality:.3e}.")
    return SpectralDecomposition(_freeze(eigenvalues), _freeze(eigenvectors))


def spectral_decomposition(
    h: HermitianOperator, solver: str | None = None, client: Client | None = None
) -> SpectralDecomposition:
    """Eigendecomposition of ``h``; the default solver result is memoised on the operator."""
    if solver is None and client is None:
        return h.spectrum
    return _decompose(h, solver, client)


def propagator(h: HermitianOperator, t: float) -> np.ndarray:
    """U(t) = exp(-iHt) from the spectral decomposition."""
    return h.spectrum.propagator(t)


def _check_dims(h: HermitianOperator, n: int, what: str):
    if h.dim != n:
        raise DimensionMismatch(f"Hamiltonian has dimension {h.dim} but the {what} lives in C^{n}.")


def propagate_frame(h: HermitianOperator, frame: Frame, t: float) -> Frame:
    _check_dims(h, frame.ambient_dim, "frame")
    return Frame(h.spectrum.propagate(t, frame.columns))


def orthonormalize(vectors, rank_tol: float = DEFAULT_RANK_TOL) -> Frame:
    """Orthonormal frame for the span of the columns of ``vectors`` (Householder QR).

    |R_jj| is the distance of column j to the span of the columns before it.
    """
    a = _as_complex_matrix(vectors, "Vectors")
    n, k = a.shape
    if k < 1:
        raise InvalidFrame("Cannot orthonormalize an empty set of vectors.")
    if k > n:
        raise RankDeficient(n, 0.0, float(np.linalg.norm(a[:, n])))

    q, r = np.linalg.qr(a, mode="reduced")
    for j in range(k):
        column_norm = float(np.linalg.norm(a[:, j]))
        residual = float(abs(r[j, j]))
        if column_norm == 0.0 or residual < rank_tol * column_norm:
            raise RankDeficient(j, residual, column_norm)
    return Frame(q)


def projector_from_frame(frame: Frame) -> Projector:
    f = frame.columns
    return Projector(f @ f.conj().T)


def complement_projector(p: Projector) -> Projector:
    return Projector(np.eye(p.dim) - p.matrix)


def frame_from_projector(p: Projector, client: Client | None = None) -> Frame:
    """Orthonormal basis of Ran(P): eigenvectors of P with eigenvalue above 1/2."""
    if p.rank == 0:
        raise ZeroSubspace("The zero projector has no frame.")
    eigenvalues, eigenvectors = (client or default_client()).spectral.decompose(None, p.matrix)
    keep = np.asarray(eigenvalues) > 0.5
    return Frame(np.asarray(eigenvectors)[:, keep])


def seeded_generator(seed: int, attempt: int = 0) -> np.random.Generator:
    if seed < 0:
        raise ValidationError(f"Seeds must be nonnegative, got {seed}.")
    if attempt == 0:
        return np.random.Generator(np.random.PCG64(seed))
    return np.random.Generator(np.random.PCG64([seed, attempt]))


def complex_gaussian(generator: np.random.Generator, shape) -> np.ndarray:
    """Standard complex Gaussian entries, E|z|^2 = 1."""
    real = generator.standard_normal(shape)
    imag = generator.standard_normal(shape)
    return (real + 1j * imag) / np.sqrt(2.0)


def random_hermitian(n: int, seed: int) -> HermitianOperator:
    if n < 1:
        raise ValidationError(f"Dimension must be positive, got {n}.")
    g = complex_gaussian(seeded_generator(seed), (n, n))
    return HermitianOperator((g + g.conj().T) / 2)


def random_frame(n: int, k: int, seed: int) -> Frame:
    if not 1 <= k <= n:
        raise InvalidFrame(f"Need 1 <= k <= n, got n={n}, k={k}.")
    error = None
    for attempt in range(RANDOM_FRAME_RETRIES + 1):
        try:
            return orthonormalize(complex_gaussian(seeded_generator(seed, attempt), (n, k)))
        except RankDeficient as e:
            log_warn(f"Random frame (n={n}, k={k}, seed={seed}) was rank deficient on attempt {attempt}, retrying.")
            error = e
    raise error


def random_state(n: int, seed: int) -> StateVector:
    if n < 1:
        raise ValidationError(f"Dimension must be positive, got {n}.")
    g = complex_gaussian(seeded_generator(seed), n)
    return StateVector(g / np.linalg.norm(g))


def random_unitary(n: int, seed: int) -> np.ndarray:
    """Haar-distributed unitary: QR of a complex Gaussian matrix with the phases of R divided out."""
    q, r = np.linalg.qr(complex_gaussian(seeded_generator(seed), (n, n)))
    d = np.diag(r)
    return q * (d / np.abs(d))
