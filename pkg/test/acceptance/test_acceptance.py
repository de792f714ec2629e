"""End-to-end checks of the speed limits on fixed seeds."""
import math
import os
from unittest.mock import patch

import numpy as np
import pytest

from subspace_qsl.bounds import (
    bounds_report,
    mandelshtam_tamm_bound,
    margolus_levitin_bound,
    off_diagonal_speed,
    optimal_hamiltonian,
    spectral_halfwidth_bound,
    state_angle,
    state_dispersion,
    subspace_dispersion,
)
from subspace_qsl.cli import main
from subspace_qsl.dynamics import (
    SchrodingerPath,
    angle_trajectory,
    evolve_state,
    first_crossing_time,
    first_state_crossing_time,
    projector_derivative_residual,
)
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
from subspace_qsl.verification import THREADS_ENV

CROSSING_TOL = 1e-9
FAIR = StateVector(np.array([1.0, 1.0]) / math.sqrt(2))
QUBIT = HermitianOperator(np.diag([0.0, 1.0]))


def random_instances(count: int, n_max: int, k_max: int, seed: int):
    generator = seeded_generator(seed)
    for index in range(count):
        n = int(generator.integers(2, n_max + 1))
        k = int(generator.integers(1, min(k_max, n - 1) + 1))
        yield random_hermitian(n, 10 * index + seed), random_frame(n, k, 10 * index + seed + 1)


def test_two_level_instance_is_tight():
    frame = FAIR.as_frame()
    report = bounds_report(QUBIT, frame, [math.pi / 2])
    assert report.v_speed == pytest.approx(0.5, abs=1e-10)
    assert report.subspace_dispersion == pytest.approx(0.5, abs=1e-10)
    assert report.spectral_halfwidth == pytest.approx(0.5, abs=1e-10)

    crossing = first_crossing_time(QUBIT, frame, math.pi / 2, crossing_tol=CROSSING_TOL)
    assert crossing.t_theta == pytest.approx(math.pi, abs=1e-9)
    assert crossing.t_theta * report.v_speed == pytest.approx(math.pi / 2, abs=1e-9)

    trajectory = angle_trajectory(QUBIT, frame, 2 * math.pi, 1000)
    np.testing.assert_allclose(trajectory.theta, np.arcsin(np.abs(np.sin(trajectory.times / 2))), atol=1e-9)


def test_state_limits_are_sharp_on_the_two_level_instance():
    crossing = first_state_crossing_time(QUBIT, FAIR, math.pi / 2, crossing_tol=CROSSING_TOL)
    assert crossing.t_theta == pytest.approx(math.pi, abs=1e-9)
    assert mandelshtam_tamm_bound(QUBIT, FAIR) == pytest.approx(crossing.t_theta, abs=1e-9)
    assert margolus_levitin_bound(QUBIT, FAIR) == pytest.approx(crossing.t_theta, abs=1e-9)


def test_subspace_speed_limit_and_chain():
    for h, frame in random_instances(200, 8, 4, seed=3):
        v = off_diagonal_speed(h, frame)
        path = SchrodingerPath(h, frame)
        for t in np.linspace(0.0, 10.0 / h.norm, 100):
            assert path.angle_at(t)[0] <= v * t + 1e-8

        dispersion = subspace_dispersion(h, frame).value
        assert v <= dispersion + 1e-8
        assert dispersion <= spectral_halfwidth_bound(h) + 1e-8


def test_full_space_dispersion_is_the_half_width():
    for seed in range(10):
        n = 2 + seed % 6
        h = random_hermitian(n, seed)
        assert subspace_dispersion(h, Frame(np.eye(n))).value == pytest.approx(spectral_halfwidth_bound(h), abs=1e-8)


def test_dispersion_optimizer_against_sampling():
    for index, (h, frame) in enumerate(random_instances(50, 6, 3, seed=5)):
        value = subspace_dispersion(h, frame).value
        hf = h.matrix @ frame.columns
        a = frame.columns.conj().T @ hf
        b = hf.conj().T @ hf
        c = complex_gaussian(seeded_generator(index), (frame.rank, 100_000))
        c = c / np.linalg.norm(c, axis=0)
        means = np.einsum("ij,ij->j", c.conj(), a @ c).real
        seconds = np.einsum("ij,ij->j", c.conj(), b @ c).real
        sampled = math.sqrt(max(0.0, float(np.max(seconds - means**2))))
        assert value >= sampled - 1e-9
        assert value <= spectral_halfwidth_bound(h) + 1e-8


def test_maximal_angle_is_a_metric():
    generator = seeded_generator(6)
    for trial in range(1000):
        n = int(generator.integers(2, 9))
        ranks = generator.integers(1, n + 1, size=3)
        p1, p2, p3 = (random_frame(n, int(k), 3 * trial + i + 7).projector() for i, k in enumerate(ranks))
        assert maximal_angle(p1, p3) <= maximal_angle(p1, p2) + maximal_angle(p2, p3) + 1e-10
        assert abs(maximal_angle(p1, p2) - maximal_angle(p2, p1)) <= 1e-12
        assert maximal_angle(p1, p1) <= 1e-12


def test_projector_path_solves_the_cauchy_problem():
    for seed in range(20):
        h = random_hermitian(5, seed + 500)
        p0 = random_frame(5, 2, seed + 600).projector()
        t = 0.5 / h.norm
        coarse = projector_derivative_residual(h, p0, t, 1e-3 / h.norm)
        fine = projector_derivative_residual(h, p0, t, 5e-4 / h.norm)
        assert 3.5 <= coarse / fine <= 4.5


def test_fleming_bound_along_state_paths():
    for seed in range(100):
        n = 2 + seed % 7
        h = random_hermitian(n, seed + 700)
        psi0 = random_state(n, seed + 800)
        dispersion = state_dispersion(h, psi0)
        for t in np.linspace(0.0, 10.0 / h.norm, 100):
            assert state_angle(psi0, evolve_state(h, psi0, t)) <= dispersion * t + 1e-8


def test_brachistochrone_is_a_lower_bound_and_attained():
    thetas = (math.pi / 6, math.pi / 4, math.pi / 2)
    for h, frame in random_instances(100, 6, 3, seed=9):
        h = HermitianOperator(h.matrix / h.spectrum.omega)
        v = off_diagonal_speed(h, frame)
        for theta in thetas:
            crossing = first_crossing_time(h, frame, theta, crossing_tol=CROSSING_TOL, v_speed=v)
            if crossing.attained:
                assert crossing.t_theta >= 2 * theta - CROSSING_TOL

    frame = FAIR.as_frame()
    for theta in thetas:
        crossing = first_crossing_time(QUBIT, frame, theta, crossing_tol=CROSSING_TOL)
        assert crossing.t_theta == pytest.approx(2 * theta, abs=1e-6)

    frame = random_frame(6, 2, 11)
    optimal = optimal_hamiltonian(frame, 1.0)
    for theta in thetas:
        crossing = first_crossing_time(optimal, frame, theta, crossing_tol=CROSSING_TOL)
        assert crossing.t_theta == pytest.approx(2 * theta, abs=1e-6)


def test_minimum_transition_probability():
    generator = seeded_generator(12)
    for pair in range(50):
        n = int(generator.integers(2, 5))
        k1 = int(generator.integers(1, min(2, n) + 1))
        k2 = int(generator.integers(1, n + 1))
        f1 = random_frame(n, k1, 2 * pair + 1000)
        p1 = f1.projector()
        p2 = random_frame(n, k2, 2 * pair + 1001).projector()
        exact = math.cos(relative_maximal_angle(p1, p2)) ** 2
        assert directional_min_probability(p1, p2) == pytest.approx(exact, abs=1e-9)

        c = complex_gaussian(seeded_generator(pair, attempt=2), (k1, 10_000))
        x = f1.columns @ (c / np.linalg.norm(c, axis=0))
        sampled = np.linalg.norm(p2.matrix @ x, axis=0) ** 2
        assert sampled.min() >= exact - 1e-9
        assert sampled.min() <= exact + 1e-3


def test_verify_output_is_byte_identical(capsys):
    argv = ["verify", "--n-max", "5", "--k-max", "2", "--trials", "10", "--seed", "1"]
    outputs = []
    for threads in ("1", "4", "4"):
        with patch.dict(os.environ, {THREADS_ENV: threads}):
            assert main(argv) == 0
        outputs.append(capsys.readouterr().out)
    assert outputs[0] == outputs[1] == outputs[2]
