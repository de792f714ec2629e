"""Randomized property suite over seeded instances.

Every trial draws its own instance from ``SeedSequence([seed, trial])``, so a trial's
outcome depends only on the master seed and its index. Trials may run on a thread
pool (``SUBSPACE_QSL_THREADS``); results are collected in trial order.
"""
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from subspace_qsl.bounds import (
    brachistochrone_time,
    off_diagonal_speed,
    optimal_hamiltonian,
    spectral_halfwidth_bound,
    mandelshtam_tamm_bound,
    margolus_levitin_bound,
    state_angle,
    state_dispersion,
    subspace_dispersion,
)
from subspace_qsl.config import InstanceConfig, Tolerances
from subspace_qsl.dynamics import (
    SchrodingerPath,
    evolve_state,
    first_crossing_time,
    first_state_crossing_time,
)
from subspace_qsl.errors import UndefinedBound, ValidationError
from subspace_qsl.geometry import directional_min_probability, maximal_angle, relative_maximal_angle
from subspace_qsl.operators import (
    Frame,
    HermitianOperator,
    StateVector,
    complex_gaussian,
    random_frame,
    random_hermitian,
    random_state,
    seeded_generator,
)

logger = logging.getLogger(__name__)
log_info = lambda x: logger.info(x)
log_warn = lambda x: logger.warning(x)

THREADS_ENV = "SUBSPACE_QSL_THREADS"

BOUND_SLACK = 1e-8
METRIC_SLACK = 1e-10
AXIOM_SLACK = 1e-12
PROBABILITY_SLACK = 1e-9
BRACHISTOCHRONE_SLACK = 1e-6
CROSSING_TOL = 1e-9
CROSSING_THETAS = (math.pi / 6, math.pi / 4, math.pi / 2)
TIME_POINTS = 25
PROBABILITY_SAMPLES = 200

PROPERTIES = (
    "subspace_speed_limit",
    "speed_chain",
    "crossing_time_bounds",
    "brachistochrone",
    "metric_axioms",
    "state_speed_limits",
    "min_transition_probability",
)

InstanceHook = Callable[[np.ndarray], np.ndarray]


def thread_count() -> int:
    """Worker threads for verification; 0 or unset picks a default."""
    try:
        requested = int(os.getenv(THREADS_ENV, "0") or 0)
    except ValueError:
        raise ValidationError(f"{THREADS_ENV} must be an integer, got {os.getenv(THREADS_ENV)!r}.")
    if requested < 0:
        raise ValidationError(f"{THREADS_ENV} must be nonnegative, got {requested}.")
    return requested or min(8, os.cpu_count() or 1)


def trial_seed(seed: int, trial: int) -> int:
    return int(np.random.SeedSequence([seed, trial]).generate_state(1)[0])


@dataclass(frozen=True, eq=False)
class TrialInstance:
    trial: int
    seed: int
    hamiltonian: HermitianOperator
    frame: Frame
    state: StateVector
    second_frame: Frame
    third_frame: Frame

    def to_document(self) -> dict:
        config = InstanceConfig(self.hamiltonian, self.frame, None, Tolerances(), f"trial {self.trial}")
        document = config.to_document()
        document["trial"] = self.trial
        document["seed"] = self.seed
        return document


def make_instance(n_max: int, k_max: int, seed: int, trial: int, instance_hook: InstanceHook | None = None):
    """Random H normalized to spectral width 1, a proper subspace, a state and two more subspaces."""
    s = trial_seed(seed, trial)
    generator = seeded_generator(s)
    n = int(generator.integers(2, n_max + 1))
    k = int(generator.integers(1, min(k_max, n - 1) + 1))

    matrix = random_hermitian(n, s).matrix
    if instance_hook is not None:
        matrix = instance_hook(np.array(matrix))
    h = HermitianOperator(matrix)
    h = HermitianOperator(h.matrix / h.spectrum.omega)

    return TrialInstance(
        trial=trial,
        seed=s,
        hamiltonian=h,
        frame=random_frame(n, k, s + 1),
        state=random_state(n, s + 2),
        second_frame=random_frame(n, int(generator.integers(1, n + 1)), s + 3),
        third_frame=random_frame(n, int(generator.integers(1, n + 1)), s + 4),
    )


@dataclass
class TrialResult:
    trial: int
    seed: int
    margins: dict[str, float]
    instance: TrialInstance

    def violations(self) -> list[str]:
        return [name for name, margin in self.margins.items() if margin < 0]


def _speed_limit_margin(instance: TrialInstance, v: float) -> float:
    h = instance.hamiltonian
    path = SchrodingerPath(h, instance.frame)
    times = np.linspace(0.0, 10.0 / h.norm, TIME_POINTS)
    return min(v * t + BOUND_SLACK - path.angle_at(t)[0] for t in times)


def _crossing_margin(instance: TrialInstance, v: float, dispersion: float) -> float:
    h = instance.hamiltonian
    margin = math.inf
    for theta in CROSSING_THETAS:
        crossing = first_crossing_time(h, instance.frame, theta, crossing_tol=CROSSING_TOL, v_speed=v)
        if not crossing.attained:
            continue
        lower = theta / v
        if dispersion > 0:
            lower = max(lower, theta / dispersion)
        lower = max(lower, brachistochrone_time(theta, h.spectrum.omega))
        margin = min(margin, crossing.t_theta - lower + CROSSING_TOL)
    return margin


def _brachistochrone_margin(instance: TrialInstance) -> float:
    h = optimal_hamiltonian(instance.frame, 1.0)
    margin = math.inf
    for theta in CROSSING_THETAS:
        crossing = first_crossing_time(h, instance.frame, theta, crossing_tol=CROSSING_TOL)
        if not crossing.attained:
            return -math.inf
        margin = min(margin, BRACHISTOCHRONE_SLACK - abs(crossing.t_theta - brachistochrone_time(theta, 1.0)))
    return margin


def _metric_margin(instance: TrialInstance) -> float:
    p1 = instance.frame.projector()
    p2 = instance.second_frame.projector()
    p3 = instance.third_frame.projector()
    triangle = maximal_angle(p1, p2) + maximal_angle(p2, p3) - maximal_angle(p1, p3) + METRIC_SLACK
    symmetry = AXIOM_SLACK - abs(maximal_angle(p1, p2) - maximal_angle(p2, p1))
    identity = AXIOM_SLACK - maximal_angle(p1, p1)
    return min(triangle, symmetry, identity)


def _state_margin(instance: TrialInstance) -> float:
    h = instance.hamiltonian
    psi0 = instance.state
    dispersion = state_dispersion(h, psi0)
    times = np.linspace(0.0, 10.0 / h.norm, TIME_POINTS)
    margin = min(dispersion * t + BOUND_SLACK - state_angle(psi0, evolve_state(h, psi0, t)) for t in times)

    crossing = first_state_crossing_time(h, psi0, math.pi / 2, crossing_tol=CROSSING_TOL)
    if crossing.attained:
        for bound in (mandelshtam_tamm_bound, margolus_levitin_bound):
            try:
                margin = min(margin, crossing.t_theta - bound(h, psi0) + CROSSING_TOL)
            except UndefinedBound:
                pass
    return margin


def _probability_margin(instance: TrialInstance) -> float:
    p1 = instance.frame.projector()
    p2 = instance.second_frame.projector()
    exact = directional_min_probability(p1, p2)
    identity = PROBABILITY_SLACK - abs(exact - math.cos(relative_maximal_angle(p1, p2)) ** 2)

    f1 = instance.frame.columns
    generator = seeded_generator(instance.seed, attempt=1)
    coefficients = complex_gaussian(generator, (f1.shape[1], PROBABILITY_SAMPLES))
    x = f1 @ (coefficients / np.linalg.norm(coefficients, axis=0))
    sampled = float(np.min(np.linalg.norm(p2.matrix @ x, axis=0) ** 2))
    return min(identity, sampled - exact + PROBABILITY_SLACK)


def run_trial(n_max: int, k_max: int, seed: int, trial: int, instance_hook: InstanceHook | None = None) -> TrialResult:
    instance = make_instance(n_max, k_max, seed, trial, instance_hook)
    h = instance.hamiltonian
    v = off_diagonal_speed(h, instance.frame)
    raw_dispersion = subspace_dispersion(h, instance.frame).value
    dispersion = max(raw_dispersion, v)
    halfwidth = spectral_halfwidth_bound(h)

    margins = {
        "subspace_speed_limit": _speed_limit_margin(instance, v),
        "speed_chain": min(raw_dispersion - v, halfwidth - raw_dispersion) + BOUND_SLACK,
        "crossing_time_bounds": _crossing_margin(instance, v, dispersion),
        "brachistochrone": _brachistochrone_margin(instance),
        "metric_axioms": _metric_margin(instance),
        "state_speed_limits": _state_margin(instance),
        "min_transition_probability": _probability_margin(instance),
    }
    return TrialResult(trial, instance.seed, margins, instance)


@dataclass
class PropertySummary:
    checks: int = 0
    passed: int = 0
    min_margin: float = math.inf
    worst_seed: int | None = None
    worst_trial: int | None = None

    def record(self, result: TrialResult, margin: float):
        if margin == math.inf:
            # nothing to check on this instance, e.g. no crossing inside the horizon
            return
        self.checks += 1
        if margin >= 0:
            self.passed += 1
        if margin < self.min_margin:
            self.min_margin = margin
            self.worst_seed = result.seed
            self.worst_trial = result.trial

    def to_dict(self) -> dict:
        return {
            "checks": self.checks,
            "passed": self.passed,
            "min_margin": None if self.min_margin == math.inf else self.min_margin,
            "worst_seed": self.worst_seed,
            "worst_trial": self.worst_trial,
        }


@dataclass
class VerificationSummary:
    seed: int
    trials: int
    n_max: int
    k_max: int
    properties: dict[str, PropertySummary] = field(default_factory=dict)
    violations: list[dict] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "trials": self.trials,
            "n_max": self.n_max,
            "k_max": self.k_max,
            "passed": self.passed,
            "violation_count": len(self.violations),
            "properties": {name: summary.to_dict() for name, summary in self.properties.items()},
        }

    def report(self) -> dict:
        """Summary plus the serialized violating instances."""
        return {**self.to_dict(), "violations": self.violations}


def verify(
    n_max: int,
    k_max: int,
    trials: int,
    seed: int,
    threads: int | None = None,
    instance_hook: InstanceHook | None = None,
) -> VerificationSummary:
    if trials < 1:
        raise ValidationError(f"Need at least one trial, got {trials}.")
    if n_max < 2:
        raise ValidationError(f"n_max must be at least 2, got {n_max}.")
    if k_max < 1:
        raise ValidationError(f"k_max must be at least 1, got {k_max}.")
    if seed < 0:
        raise ValidationError(f"Seeds must be nonnegative, got {seed}.")

    threads = threads or thread_count()
    log_info(f"Verifying {trials} trials (n <= {n_max}, k <= {k_max}, seed {seed}) on {threads} threads")

    def _run(trial: int) -> TrialResult:
        return run_trial(n_max, k_max, seed, trial, instance_hook)

    if threads == 1:
        results = [_run(trial) for trial in range(trials)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_run, range(trials)))

    summary = VerificationSummary(seed, trials, n_max, k_max, {name: PropertySummary() for name in PROPERTIES})
    for result in results:
        for name in PROPERTIES:
            summary.properties[name].record(result, result.margins[name])
        for name in result.violations():
            log_warn(f"Property {name} violated on trial {result.trial} (seed {result.seed}).")
            summary.violations.append(
                {
                    "property": name,
                    "trial": result.trial,
                    "seed": result.seed,
                    "margin": result.margins[name],
                    "instance": result.instance.to_document(),
                }
            )
    return summary
