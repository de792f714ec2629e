"""Quantum speed limits for states and subspaces.

State level: the Mandelshtam-Tamm, Margolus-Levitin and Fleming bounds.
Subspace level: the off-diagonal speed V = ||P0 H P0^perp||, the maximal dispersion
on the subspace, the half spectral width, and the time bounds theta/V,
theta/dE_P0 and 2 theta/Omega derived from them.
"""
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from subspace_qsl.client import default_client
from subspace_qsl.errors import (
    DimensionMismatch,
    InvalidTheta,
    InvalidTime,
    NumericalInconsistency,
    OptimizerDidNotConverge,
    ValidationError,
    ZeroDispersion,
    ZeroMeanExcess,
    ZeroSpeed,
    ZeroWidth,
)
from subspace_qsl.operators import (
    Frame,
    HermitianOperator,
    Projector,
    StateVector,
    commutator,
    complement_projector,
    complex_gaussian,
    frame_from_projector,
    operator_norm,
    projector_from_frame,
    seeded_generator,
)

logger = logging.getLogger(__name__)
log_warn = lambda x: logger.warning(x)

# Speeds, dispersions and widths at or below this are treated as zero.
SPEED_FLOOR = 1e-14
IDENTITY_TOL = 1e-10
CHAIN_SLACK = 1e-9


@dataclass(frozen=True)
class DispersionOptions:
    num_starts: int = 32
    relative_tol: float = 1e-12
    max_iterations: int = 10_000
    seed: int = 0
    strict: bool = False


def check_theta(theta: float) -> float:
    if not (0.0 < theta <= math.pi / 2):
        raise InvalidTheta(theta)
    return float(theta)


def as_frame(subspace: Frame | Projector | StateVector) -> Frame:
    if isinstance(subspace, Frame):
        return subspace
    if isinstance(subspace, StateVector):
        return subspace.as_frame()
    return frame_from_projector(subspace)


def _check_dims(h: HermitianOperator, n: int):
    if h.dim != n:
        raise DimensionMismatch(f"Hamiltonian has dimension {h.dim}, the subspace lives in C^{n}.")


def _scale(h: HermitianOperator) -> float:
    return max(1.0, h.norm)


def state_angle(psi0: StateVector, psi: StateVector) -> float:
    """arccos |<psi0, psi>|, evaluated as atan2 of the orthogonal and parallel parts."""
    if psi0.dim != psi.dim:
        raise DimensionMismatch(f"States live in C^{psi0.dim} and C^{psi.dim}.")
    overlap = np.vdot(psi0.entries, psi.entries)
    orthogonal = np.linalg.norm(psi.entries - overlap * psi0.entries)
    return math.atan2(float(orthogonal), float(abs(overlap)))


def off_diagonal_speed(h: HermitianOperator, subspace: Frame | Projector) -> float:
    """V = ||P0 H P0^perp||, computed from the frame as ||(I - P0) H F||.

    The sandwich forms ||P0 H P0^perp||, ||P0^perp H P0|| and the commutator norm
    ||[P0, H]|| are checked against it.
    """
    if isinstance(subspace, Projector):
        _check_dims(h, subspace.dim)
        if subspace.rank in (0, subspace.dim):
            return 0.0
    f = as_frame(subspace)
    _check_dims(h, f.ambient_dim)

    hf = h.matrix @ f.columns
    v = operator_norm(hf - f.columns @ (f.columns.conj().T @ hf))

    p = projector_from_frame(f).matrix
    p_perp = np.eye(h.dim) - p
    upper = operator_norm(p @ h.matrix @ p_perp)
    lower = operator_norm(p_perp @ h.matrix @ p)
    commuted = operator_norm(commutator(p, h.matrix))
    allowed = IDENTITY_TOL * _scale(h)
    if max(abs(upper - v), abs(lower - v), abs(commuted - v)) > allowed:
        raise NumericalInconsistency(
            f"Off-diagonal blocks disagree: frame {v!r}, P0 H P0perp {upper!r}, "
            f"P0perp H P0 {lower!r}, [P0, H] {commuted!r}."
        )
    return v


def mean_energy(h: HermitianOperator, psi: StateVector) -> float:
    _check_dims(h, psi.dim)
    mean = np.vdot(psi.entries, h.matrix @ psi.entries)
    if abs(mean.imag) > IDENTITY_TOL * _scale(h):
        raise NumericalInconsistency(f"Mean energy has imaginary part {mean.imag!r}.")
    return float(mean.real)


def state_dispersion(h: HermitianOperator, psi: StateVector) -> float:
    """Delta E = sqrt(||H psi||^2 - <H psi, psi>^2), returned as ||(H - mu) psi||.

    The shifted form equals the raw moments for a unit vector and does not cancel
    for near-stationary states.
    """
    mu = mean_energy(h, psi)
    h_psi = h.matrix @ psi.entries
    raw = float(np.vdot(h_psi, h_psi).real) - mu * mu
    if raw < -1e-12 * _scale(h) ** 2:
        raise NumericalInconsistency(f"Energy variance {raw!r} is negative beyond round-off.")
    return float(np.linalg.norm(h_psi - mu * psi.entries))


def mean_excess_energy(h: HermitianOperator, psi: StateVector) -> float:
    """delta E = <H psi, psi> - E_min."""
    excess = mean_energy(h, psi) - h.spectrum.e_min
    if excess < -IDENTITY_TOL * _scale(h):
        raise NumericalInconsistency(f"Mean energy lies {-excess!r} below the spectrum.")
    return max(0.0, excess)


def fleming_bound(h: HermitianOperator, psi0: StateVector, theta: float) -> float:
    """T_theta >= theta / Delta E."""
    check_theta(theta)
    dispersion = state_dispersion(h, psi0)
    if dispersion <= SPEED_FLOOR * _scale(h):
        raise ZeroDispersion("The state is stationary, its angle never grows.")
    return theta / dispersion


def mandelshtam_tamm_bound(h: HermitianOperator, psi0: StateVector) -> float:
    """T_perp >= pi / (2 Delta E): the Fleming bound at theta = pi/2."""
    return fleming_bound(h, psi0, math.pi / 2)


def margolus_levitin_bound(h: HermitianOperator, psi0: StateVector) -> float:
    """T_perp >= pi / (2 delta E)."""
    excess = mean_excess_energy(h, psi0)
    if excess <= SPEED_FLOOR * _scale(h):
        raise ZeroMeanExcess("The state sits at the bottom of the spectrum.")
    return math.pi / (2 * excess)


@dataclass(frozen=True)
class AscentPath:
    coefficients: np.ndarray
    value: float
    converged: bool
    iterations: int
    history: tuple[float, ...]


def _variance(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> tuple[float, float]:
    mean = float(np.vdot(c, a @ c).real)
    return float(np.vdot(c, b @ c).real) - mean * mean, mean


def ascend_variance(
    a: np.ndarray, b: np.ndarray, start: np.ndarray, options: DispersionOptions = DispersionOptions()
) -> AscentPath:
    """Maximize f(c) = <Bc, c> - <Ac, c>^2 over the unit sphere of C^k from one start.

    Projected gradient ascent: the gradient 2Bc - 4<Ac, c>Ac is projected on the
    tangent space, the step is backtracked until the Armijo condition holds and the
    iterate is renormalized. f never decreases along the path.
    """
    c = np.asarray(start, dtype=complex)
    c = c / np.linalg.norm(c)
    value, mean = _variance(a, b, c)
    history = [value]

    scale = max(operator_norm(b), operator_norm(a) ** 2, np.finfo(float).tiny)
    step = 1.0 / scale
    converged = False
    iterations = 0
    for iterations in range(1, options.max_iterations + 1):
        gradient = 2 * (b @ c) - 4 * mean * (a @ c)
        gradient = gradient - np.vdot(c, gradient).real * c
        slope = float(np.vdot(gradient, gradient).real)
        if math.sqrt(slope) <= 1e-14 * scale:
            converged = True
            break

        eta = step
        while True:
            candidate = c + eta * gradient
            candidate = candidate / np.linalg.norm(candidate)
            candidate_value, candidate_mean = _variance(a, b, candidate)
            if candidate_value >= value + 1e-4 * eta * slope:
                break
            eta /= 2
            if eta < 1e-30 * step:
                candidate = None
                break
        if candidate is None:
            # no ascent left at working precision
            converged = True
            break

        change = candidate_value - value
        c, value, mean = candidate, candidate_value, candidate_mean
        history.append(value)
        step = 2 * eta
        if change <= options.relative_tol * max(abs(value), np.finfo(float).tiny):
            converged = True
            break

    return AscentPath(c, value, converged, iterations, tuple(history))


@dataclass(frozen=True)
class DispersionResult:
    value: float
    maximizer: StateVector
    mean_at_maximizer: float
    starts_used: int
    converged: bool


def _dispersion_starts(f: Frame, hf: np.ndarray, a: np.ndarray, options: DispersionOptions) -> list[np.ndarray]:
    k = f.rank
    spectral = default_client().spectral
    # top right singular vector of (I - P0) H F, the top eigenvector of its Gram matrix
    coupling = hf - f.columns @ a
    gram = coupling.conj().T @ coupling
    values, vectors = spectral.decompose(None, (gram + gram.conj().T) / 2)
    starts = [np.asarray(vectors)[:, int(np.argmax(values))]]

    _, vectors = spectral.decompose(None, a)
    starts.extend(vectors[:, i] for i in range(k))
    starts.extend(
        (vectors[:, i] + vectors[:, j]) / math.sqrt(2.0) for i in range(k) for j in range(i + 1, k)
    )
    starts = starts[: max(options.num_starts, 1)]

    generator = seeded_generator(options.seed)
    while len(starts) < options.num_starts:
        starts.append(complex_gaussian(generator, k))
    return starts


def subspace_dispersion(
    h: HermitianOperator, subspace: Frame | Projector, options: DispersionOptions | None = None
) -> DispersionResult:
    """dE_P0 = sup over unit psi in P0 of the energy dispersion, by multi-start ascent.

    Works on the compressions A = F*HF and B = F*H^2F. The value returned is the
    dispersion of an actual unit vector of the subspace, so it never overshoots the sup.
    """
    options = options or DispersionOptions()
    f = as_frame(subspace)
    _check_dims(h, f.ambient_dim)

    hf = h.matrix @ f.columns
    a = f.columns.conj().T @ hf
    a = (a + a.conj().T) / 2
    b = hf.conj().T @ hf
    b = (b + b.conj().T) / 2

    starts = _dispersion_starts(f, hf, a, options)
    best = None
    converged = False
    for start in starts:
        path = ascend_variance(a, b, start, options)
        converged = converged or path.converged
        # strict comparison keeps the lowest start index on ties
        if best is None or path.value > best.value:
            best = path

    psi = StateVector(f.columns @ best.coefficients, tolerance=1e-10)
    result = DispersionResult(
        value=state_dispersion(h, psi),
        maximizer=psi,
        mean_at_maximizer=mean_energy(h, psi),
        starts_used=len(starts),
        converged=converged,
    )
    if not converged:
        log_warn(f"Dispersion ascent: none of {len(starts)} starts met the tolerance, keeping the best found.")
        if options.strict:
            raise OptimizerDidNotConverge("No ascent start converged.", result)
    return result


def subspace_angle_bound(v_speed: float, t: float) -> float:
    """theta(P0, P(t)) <= V t, not capped at pi/2."""
    if t < 0:
        raise InvalidTime(f"Time must be nonnegative, got {t}.")
    if v_speed < 0:
        raise ValidationError(f"Speed must be nonnegative, got {v_speed}.")
    return v_speed * t


def subspace_time_bound_v(v_speed: float, theta: float) -> float:
    """T_theta >= theta / V."""
    check_theta(theta)
    if v_speed <= SPEED_FLOOR:
        raise ZeroSpeed("The subspace is invariant, it never reaches a positive angle.")
    return theta / v_speed


def subspace_time_bound_dispersion(dispersion: float, theta: float) -> float:
    """T_theta >= theta / dE_P0."""
    check_theta(theta)
    if dispersion <= SPEED_FLOOR:
        raise ZeroDispersion("Zero dispersion on the subspace, no finite bound.")
    return theta / dispersion


def spectral_halfwidth_bound(h: HermitianOperator) -> float:
    """dE_P0 <= (E_max - E_min) / 2 for every subspace."""
    return h.spectrum.omega / 2


def brachistochrone_time(theta: float, omega: float) -> float:
    """2 theta / Omega: the least T_theta over Hamiltonians of spectral width Omega."""
    check_theta(theta)
    if omega <= SPEED_FLOOR:
        raise ZeroWidth("Degenerate spectrum: no subspace evolves at all.")
    return 2 * theta / omega


def optimal_hamiltonian(subspace: Frame | Projector, omega: float) -> HermitianOperator:
    """H = (Omega/2)(u w* + w u*) with unit u in P0 and unit w orthogonal to P0.

    It rotates u towards w at angular speed Omega/2 and leaves the rest of P0 fixed,
    so V = dE_P0 = Omega/2 and T_theta = 2 theta/Omega: the infimum is attained.
    """
    if omega <= 0:
        raise ZeroWidth(f"Spectral width must be positive, got {omega}.")
    f = as_frame(subspace)
    if f.rank == f.ambient_dim:
        raise ValidationError("The whole space cannot move; need a proper subspace.")
    u = f.columns[:, 0]
    w = frame_from_projector(complement_projector(projector_from_frame(f))).columns[:, 0]
    return HermitianOperator((omega / 2) * (np.outer(u, w.conj()) + np.outer(w, u.conj())))


def _json_time(value: float | None):
    return "never" if value is None else value


@dataclass(frozen=True)
class ThetaBounds:
    """Time bounds for one target angle; None marks a bound that is infinite (never reached)."""

    theta: float
    t_bound_v: float | None
    t_bound_dispersion: float | None
    t_brachistochrone: float | None

    def to_dict(self) -> dict:
        return {
            "theta": self.theta,
            "t_bound_v": _json_time(self.t_bound_v),
            "t_bound_dispersion": _json_time(self.t_bound_dispersion),
            "t_brachistochrone": _json_time(self.t_brachistochrone),
        }


@dataclass(frozen=True)
class BoundsReport:
    v_speed: float
    subspace_dispersion: float
    spectral_halfwidth: float
    e_min: float
    e_max: float
    omega: float
    per_theta: tuple[ThetaBounds, ...]
    dispersion_converged: bool = True
    dispersion_mean: float = 0.0

    def to_dict(self) -> dict:
        return {
            "v_speed": self.v_speed,
            "subspace_dispersion": self.subspace_dispersion,
            "spectral_halfwidth": self.spectral_halfwidth,
            "e_min": self.e_min,
            "e_max": self.e_max,
            "omega": self.omega,
            "dispersion_converged": self.dispersion_converged,
            "dispersion_mean": self.dispersion_mean,
            "per_theta": [entry.to_dict() for entry in self.per_theta],
        }


def _time_or_never(bound, *args) -> float | None:
    try:
        return bound(*args)
    except (ZeroSpeed, ZeroDispersion, ZeroWidth):
        return None


def bounds_report(
    h: HermitianOperator,
    subspace: Frame | Projector,
    thetas,
    options: DispersionOptions | None = None,
) -> BoundsReport:
    """Every subspace speed-limit quantity for one (H, P0) instance.

    Raises NumericalInconsistency if 0 <= V <= dE_P0 <= (E_max - E_min)/2 fails beyond slack.
    """
    thetas = [check_theta(theta) for theta in thetas]
    f = as_frame(subspace)
    v = off_diagonal_speed(h, f)
    dispersion = subspace_dispersion(h, f, options)
    halfwidth = spectral_halfwidth_bound(h)
    spectrum = h.spectrum

    slack = CHAIN_SLACK * _scale(h)
    if v > dispersion.value + slack or dispersion.value > halfwidth + slack:
        raise NumericalInconsistency(
            f"Speed chain violated: V = {v!r}, dE = {dispersion.value!r}, halfwidth = {halfwidth!r}."
        )
    # the sup over the subspace is at least V; this removes round-off in the ordering
    # of the time bounds
    d_e = max(dispersion.value, v)
    moving_speed = v if v > SPEED_FLOOR * _scale(h) else 0.0

    per_theta = tuple(
        ThetaBounds(
            theta=theta,
            t_bound_v=_time_or_never(subspace_time_bound_v, moving_speed, theta),
            t_bound_dispersion=_time_or_never(subspace_time_bound_dispersion, d_e, theta),
            t_brachistochrone=_time_or_never(brachistochrone_time, theta, spectrum.omega),
        )
        for theta in thetas
    )
    return BoundsReport(
        v_speed=v,
        subspace_dispersion=d_e,
        spectral_halfwidth=halfwidth,
        e_min=spectrum.e_min,
        e_max=spectrum.e_max,
        omega=spectrum.omega,
        per_theta=per_theta,
        dispersion_converged=dispersion.converged,
        dispersion_mean=dispersion.mean_at_maximizer,
    )


@dataclass(frozen=True)
class StateBoundsReport:
    dispersion: float
    mean_excess: float
    mandelshtam_tamm: float | None
    margolus_levitin: float | None
    fleming: tuple[tuple[float, float | None], ...] = field(default_factory=tuple)

    def to_dict(self) -> dict:
        return {
            "dispersion": self.dispersion,
            "mean_excess": self.mean_excess,
            "mandelshtam_tamm": _json_time(self.mandelshtam_tamm),
            "margolus_levitin": _json_time(self.margolus_levitin),
            "fleming": [{"theta": theta, "t_bound": _json_time(bound)} for theta, bound in self.fleming],
        }


def state_bounds_report(h: HermitianOperator, psi0: StateVector, thetas) -> StateBoundsReport:
    thetas = [check_theta(theta) for theta in thetas]

    def _or_never(bound, *args):
        try:
            return bound(*args)
        except (ZeroDispersion, ZeroMeanExcess):
            return None

    return StateBoundsReport(
        dispersion=state_dispersion(h, psi0),
        mean_excess=mean_excess_energy(h, psi0),
        mandelshtam_tamm=_or_never(mandelshtam_tamm_bound, h, psi0),
        margolus_levitin=_or_never(margolus_levitin_bound, h, psi0),
        fleming=tuple((theta, _or_never(fleming_bound, h, psi0, theta)) for theta in thetas),
    )
