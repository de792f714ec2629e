"""Schrodinger evolution of states and subspaces.

P(t) = U(t) P0 U(t)* solves dP/dt = i [P, H], P(0) = P0. Subspaces are carried as
frames F(t) = U(t) F0 and every time point is computed directly from the spectral
decomposition of H, so trajectory points do not depend on each other.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np

from subspace_qsl.bounds import (
    as_frame,
    check_theta,
    off_diagonal_speed,
    state_angle,
    state_dispersion,
    subspace_dispersion,
)
from subspace_qsl.errors import (
    DimensionMismatch,
    InvalidTime,
    NonpositiveHorizon,
    ValidationError,
)
from subspace_qsl.geometry import frame_maximal_angle
from subspace_qsl.operators import (
    Frame,
    HermitianOperator,
    Projector,
    StateVector,
    commutator,
    operator_norm,
)

logger = logging.getLogger(__name__)
log_warn = lambda x: logger.warning(x)

DEFAULT_CROSSING_TOL = 1e-9
# Below this off-diagonal speed the subspace is taken as invariant and not scanned.
INVARIANT_SPEED = 1e-14
MAX_SCAN_EVALUATIONS = 200_000


def _check_dims(h: HermitianOperator, n: int, what: str):
    if h.dim != n:
        raise DimensionMismatch(f"Hamiltonian has dimension {h.dim} but the {what} lives in C^{n}.")


def evolve_state(h: HermitianOperator, psi0: StateVector, t: float) -> StateVector:
    """psi(t) = exp(-iHt) psi0."""
    _check_dims(h, psi0.dim, "state")
    return StateVector(h.spectrum.propagate(t, psi0.entries), tolerance=1e-10)


def evolve_projector(h: HermitianOperator, p0: Projector, t: float) -> Projector:
    """P(t) = exp(-iHt) P0 exp(iHt)."""
    _check_dims(h, p0.dim, "projector")
    u = h.spectrum.propagator(t)
    return Projector(u @ p0.matrix @ u.conj().T)


class SchrodingerPath:
    """The path t -> Ran P(t) for one Hamiltonian and one initial subspace."""

    def __init__(self, h: HermitianOperator, subspace: Frame | Projector | StateVector):
        self.hamiltonian = h
        self.initial = as_frame(subspace)
        _check_dims(h, self.initial.ambient_dim, "subspace")
        spectrum = h.spectrum
        self._eigenvectors = spectrum.eigenvectors
        self._eigenvalues = spectrum.eigenvalues
        self._coefficients = spectrum.eigenvectors.conj().T @ self.initial.columns

    def frame_at(self, t: float) -> Frame:
        phases = np.exp(-1j * self._eigenvalues * t)
        return Frame(self._eigenvectors @ (phases[:, None] * self._coefficients))

    def projector_at(self, t: float) -> Projector:
        return self.frame_at(t).projector()

    def angle_at(self, t: float) -> tuple[float, float]:
        """theta(P0, P(t)) and ||P(t) - P0||."""
        return frame_maximal_angle(self.initial, self.frame_at(t))


@dataclass(frozen=True, eq=False)
class AngleTrajectory:
    times: np.ndarray
    norm_diff: np.ndarray
    theta: np.ndarray
    v_bound: np.ndarray
    dispersion_bound: np.ndarray

    def __len__(self):
        return len(self.times)

    def rows(self):
        return zip(self.times, self.norm_diff, self.theta, self.v_bound, self.dispersion_bound)


def angle_trajectory(
    h: HermitianOperator,
    subspace: Frame | Projector,
    t_max: float,
    num_points: int,
    v_speed: float | None = None,
    dispersion: float | None = None,
) -> AngleTrajectory:
    """theta(P0, P(t)) on a uniform grid of [0, t_max] next to V t and dE_P0 t.

    ``v_speed`` and ``dispersion`` are computed here when not supplied.
    """
    if not t_max > 0:
        raise InvalidTime(f"t_max must be positive, got {t_max}.")
    if num_points < 2:
        raise ValidationError(f"A trajectory needs at least 2 points, got {num_points}.")
    path = SchrodingerPath(h, subspace)
    if v_speed is None:
        v_speed = off_diagonal_speed(h, path.initial)
    if dispersion is None:
        dispersion = subspace_dispersion(h, path.initial).value
    if v_speed < 0 or dispersion < 0:
        raise ValidationError("Speed and dispersion must be nonnegative.")

    times = np.linspace(0.0, t_max, num_points)
    angles = np.array([path.angle_at(t) for t in times])
    return AngleTrajectory(
        times=times,
        norm_diff=angles[:, 1],
        theta=angles[:, 0],
        v_bound=v_speed * times,
        dispersion_bound=dispersion * times,
    )


@dataclass(frozen=True, eq=False)
class StateTrajectory:
    times: np.ndarray
    angle: np.ndarray
    fleming_bound: np.ndarray


def state_angle_trajectory(h: HermitianOperator, psi0: StateVector, t_max: float, num_points: int) -> StateTrajectory:
    """arccos |<psi0, psi(t)>| on a uniform grid next to Delta E t."""
    if not t_max > 0:
        raise InvalidTime(f"t_max must be positive, got {t_max}.")
    if num_points < 2:
        raise ValidationError(f"A trajectory needs at least 2 points, got {num_points}.")
    times = np.linspace(0.0, t_max, num_points)
    angles = np.array([state_angle(psi0, evolve_state(h, psi0, t)) for t in times])
    return StateTrajectory(times=times, angle=angles, fleming_bound=state_dispersion(h, psi0) * times)


@dataclass(frozen=True)
class CrossingResult:
    attained: bool
    t_theta: float | None
    theta_target: float
    sup_angle_observed: float
    horizon: float
    evaluations: int = 0

    def to_dict(self) -> dict:
        return {
            "attained": self.attained,
            "t_theta": self.t_theta,
            "theta_target": self.theta_target,
            "sup_angle_observed": self.sup_angle_observed,
            "horizon": self.horizon,
            "evaluations": self.evaluations,
        }


def default_horizon(h: HermitianOperator, v_speed: float) -> float:
    """Four times the fastest admissible orthogonalization time, capped at 1e3/||H||."""
    window = 4 * math.pi / (2 * max(v_speed, INVARIANT_SPEED))
    if h.norm > 0:
        window = min(window, 1e3 / h.norm)
    return window


def first_crossing_time(
    h: HermitianOperator,
    subspace: Frame | Projector | StateVector,
    theta_target: float,
    horizon: float | None = None,
    crossing_tol: float = DEFAULT_CROSSING_TOL,
    v_speed: float | None = None,
) -> CrossingResult:
    """First time T_theta at which theta(P0, P(t)) reaches ``theta_target``.

    theta(t) is V-Lipschitz, so from a time t with angle theta(t) < target no crossing
    can happen before t + (target - theta(t))/V. The scan steps by exactly that
    amount, which is never below the grid step crossing_tol/V, until the angle gap
    drops below crossing_tol; a bracketing sign change of ||P(t) - P0|| - sin(target)
    is then bisected.
    """
    theta_target = check_theta(theta_target)
    if horizon is not None and not horizon > 0:
        raise NonpositiveHorizon(f"Horizon must be positive, got {horizon}.")
    if not crossing_tol > 0:
        raise ValidationError(f"Crossing tolerance must be positive, got {crossing_tol}.")

    path = SchrodingerPath(h, subspace)
    if v_speed is None:
        v_speed = off_diagonal_speed(h, path.initial)
    if horizon is None:
        horizon = default_horizon(h, v_speed)

    if v_speed <= INVARIANT_SPEED:
        log_warn(f"Off-diagonal speed {v_speed:.3e} is zero to working precision, the subspace is invariant.")
        sup = max(path.angle_at(0.0)[0], path.angle_at(horizon)[0])
        return CrossingResult(False, None, theta_target, sup, horizon, evaluations=2)

    speed = v_speed * (1 + 1e-12)
    t = 0.0
    theta_t = path.angle_at(t)[0]
    sup = theta_t
    evaluations = 1
    while True:
        gap = theta_target - theta_t
        if gap <= crossing_tol:
            t_hit, extra = _refine_crossing(path, t, theta_target, speed, crossing_tol)
            return CrossingResult(True, t_hit, theta_target, max(sup, theta_t), horizon, evaluations + extra)

        t_next = t + gap / speed
        if t_next > horizon:
            theta_h = path.angle_at(horizon)[0]
            sup = max(sup, theta_h)
            evaluations += 1
            if theta_target - theta_h <= crossing_tol:
                return CrossingResult(True, horizon, theta_target, sup, horizon, evaluations)
            return CrossingResult(False, None, theta_target, sup, horizon, evaluations)

        if evaluations >= MAX_SCAN_EVALUATIONS:
            log_warn(
                f"Crossing scan for theta={theta_target!r} stopped after {evaluations} evaluations at t={t!r}."
            )
            return CrossingResult(False, None, theta_target, sup, t, evaluations)

        t = t_next
        theta_t = path.angle_at(t)[0]
        sup = max(sup, theta_t)
        evaluations += 1


def _refine_crossing(
    path: SchrodingerPath, t: float, theta_target: float, speed: float, crossing_tol: float
) -> tuple[float, int]:
    target_sine = math.sin(theta_target)
    left = t
    right = t + 2 * crossing_tol / speed
    evaluations = 1
    if path.angle_at(right)[0] < theta_target:
        # touches the target without crossing inside the bracket
        return t, evaluations

    width = crossing_tol * min(1.0, 1.0 / speed)
    while right - left > width:
        middle = 0.5 * (left + right)
        evaluations += 1
        if path.angle_at(middle)[1] >= target_sine:
            right = middle
        else:
            left = middle
    return right, evaluations


def first_state_crossing_time(
    h: HermitianOperator,
    psi0: StateVector,
    theta_target: float,
    horizon: float | None = None,
    crossing_tol: float = DEFAULT_CROSSING_TOL,
) -> CrossingResult:
    """First time arccos |<psi0, psi(t)>| reaches ``theta_target``; T_perp for pi/2."""
    return first_crossing_time(h, psi0.as_frame(), theta_target, horizon, crossing_tol)


def projector_derivative_residual(
    h: HermitianOperator, p0: Projector, t: float, step: float | None = None
) -> float:
    """||(P(t+step) - P(t-step)) / (2 step) - i [P(t), H]||, second order in step.

    The differences are taken in the eigenbasis of H, where P(t) only picks up the phases
    exp(-i (E_j - E_k) t) entrywise, so blocks that do not move cancel exactly.
    """
    if step is None:
        step = 1e-4 / h.norm if h.norm > 0 else 1e-4
    if not step > 0:
        raise ValidationError(f"Difference step must be positive, got {step}.")
    _check_dims(h, p0.dim, "projector")
    spectrum = h.spectrum
    v = spectrum.eigenvectors
    energies = spectrum.eigenvalues
    rotated = v.conj().T @ p0.matrix @ v
    gaps = energies[:, None] - energies[None, :]

    def at(s: float) -> np.ndarray:
        return rotated * np.exp(-1j * gaps * s)

    derivative = (at(t + step) - at(t - step)) / (2 * step)
    return operator_norm(derivative - 1j * commutator(at(t), np.diag(energies)))


def path_length(h: HermitianOperator, p0: Projector | Frame, t: float) -> float:
    """Length of s -> P(s) on [0, t]: ||[P0, H]|| t, since ||[P(s), H]|| does not depend on s."""
    if t < 0:
        raise InvalidTime(f"Time must be nonnegative, got {t}.")
    p = p0 if isinstance(p0, Projector) else p0.projector()
    _check_dims(h, p.dim, "projector")
    return operator_norm(commutator(p.matrix, h.matrix)) * t
