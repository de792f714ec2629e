"""Distances and angles between subspaces.

rho(Q1, Q2) = ||Q1 - Q2|| and the maximal angle arcsin ||Q1 - Q2|| are both metrics
on orthogonal projectors. The relative maximal angle phi(Q1, Q2) is the arcsine of
the largest distance from a unit vector of Ran(Q1) to Ran(Q2); it is not symmetric.

Angles are computed as atan2 of a sine and a cosine on frames of the ranges, and
subspaces of different rank sit at exactly pi/2. Norms and cosines that leave [0, 1]
by at most CLAMP_SLACK are clamped, larger excursions raise NumericalInconsistency.
"""
import math
from dataclasses import dataclass

import numpy as np

from subspace_qsl.client import Client, default_client
from subspace_qsl.errors import DimensionMismatch, NumericalInconsistency, ZeroSubspace
from subspace_qsl.operators import Frame, Projector, frame_from_projector, operator_norm

CLAMP_SLACK = 1e-9


def _clamp_unit(value: float, what: str) -> float:
    if value > 1.0 + CLAMP_SLACK or value < -CLAMP_SLACK:
        raise NumericalInconsistency(f"{what} = {value!r} is outside [0, 1] beyond round-off.")
    return min(max(float(value), 0.0), 1.0)


def _check_same_dim(p1: Projector, p2: Projector):
    if p1.dim != p2.dim:
        raise DimensionMismatch(f"Projectors act on C^{p1.dim} and C^{p2.dim}.")


def _check_nonzero(*projectors: Projector):
    for p in projectors:
        if p.rank == 0:
            raise ZeroSubspace("Relative angles are defined only for nonzero subspaces.")


def projector_distance(p1: Projector, p2: Projector) -> float:
    """rho(Q1, Q2) = ||Q1 - Q2||, in [0, 1]; exactly 1 when the ranks differ."""
    _check_same_dim(p1, p2)
    if p1.rank != p2.rank:
        return 1.0
    return _clamp_unit(operator_norm(p1.matrix - p2.matrix), "||P1 - P2||")


def maximal_angle(p1: Projector, p2: Projector, client: Client | None = None) -> float:
    """theta(Q1, Q2) = arcsin ||Q1 - Q2||, in [0, pi/2].

    Evaluated on frames of both ranges with the atan2 form of ``frame_maximal_angle``,
    which keeps full accuracy next to pi/2 where arcsin of the norm does not.
    """
    _check_same_dim(p1, p2)
    if p1.rank != p2.rank:
        return math.pi / 2
    if p1.rank == 0:
        return 0.0
    theta, _ = frame_maximal_angle(frame_from_projector(p1, client), frame_from_projector(p2, client), client)
    return theta


def _relative_angle(f1: Frame, f2: Frame, client: Client | None = None) -> float:
    # sine ||(I - F2F2*) F1||, cosine the smallest of the k1 singular values of F2* F1
    overlap = f2.columns.conj().T @ f1.columns
    if f1.rank > f2.rank:
        cosine = 0.0
    else:
        cosine = float(np.min((client or default_client()).svd.singular_values(None, overlap)))
    sine = operator_norm(f1.columns - f2.columns @ overlap)
    return math.atan2(sine, cosine)


def relative_maximal_angle(p1: Projector, p2: Projector, client: Client | None = None) -> float:
    """phi(Q1, Q2) with sin phi = sup over unit x in Ran(Q1) of dist(x, Ran(Q2))."""
    _check_same_dim(p1, p2)
    _check_nonzero(p1)
    if p2.rank == 0:
        return math.pi / 2
    return _relative_angle(frame_from_projector(p1, client), frame_from_projector(p2, client), client)


@dataclass(frozen=True)
class AnglePair:
    phi_12: float
    phi_21: float
    theta: float


def angle_pair(p1: Projector, p2: Projector, client: Client | None = None) -> AnglePair:
    """Both relative angles and the maximal angle, theta = max(phi_12, phi_21)."""
    _check_same_dim(p1, p2)
    _check_nonzero(p1, p2)
    f1 = frame_from_projector(p1, client)
    f2 = frame_from_projector(p2, client)
    phi_12 = _relative_angle(f1, f2, client)
    phi_21 = _relative_angle(f2, f1, client)
    return AnglePair(phi_12=phi_12, phi_21=phi_21, theta=max(phi_12, phi_21))


def principal_angles(
    f1: Frame, f2: Frame, solver: str | None = None, client: Client | None = None
) -> np.ndarray:
    """Ascending principal angles, arccos of the singular values of F1* F2.

    Cosines are used throughout, so angles below about 1e-8 are not resolved.
    """
    if f1.ambient_dim != f2.ambient_dim:
        raise DimensionMismatch(f"Frames live in C^{f1.ambient_dim} and C^{f2.ambient_dim}.")
    cosines = (client or default_client()).svd.singular_values(solver, f1.columns.conj().T @ f2.columns)
    cosines = np.array([_clamp_unit(c, "principal cosine") for c in cosines])
    return np.sort(np.arccos(cosines))


def frame_maximal_angle(f1: Frame, f2: Frame, client: Client | None = None) -> tuple[float, float]:
    """Maximal angle between the spans of two frames, and its sine.

    For equal ranks the largest principal angle has sine ||(I - F1F1*) F2|| and cosine
    sigma_min(F1* F2); combining both with atan2 stays accurate near 0 and near pi/2,
    where arcsin and arccos respectively lose digits. Unequal ranks are at distance 1.
    """
    if f1.ambient_dim != f2.ambient_dim:
        raise DimensionMismatch(f"Frames live in C^{f1.ambient_dim} and C^{f2.ambient_dim}.")
    if f1.rank != f2.rank:
        return math.pi / 2, 1.0

    overlap = f1.columns.conj().T @ f2.columns
    cosine = float(np.min((client or default_client()).svd.singular_values(None, overlap)))
    sine = operator_norm(f2.columns - f1.columns @ overlap)
    theta = math.atan2(sine, cosine)
    return theta, math.sin(theta)


def min_transition_probability(p1: Projector, p2: Projector) -> float:
    """cos^2 of the maximal angle: the least probability that a Q1-state is found in Q2, or vice versa."""
    _check_same_dim(p1, p2)
    _check_nonzero(p1, p2)
    distance = projector_distance(p1, p2)
    return 1.0 - distance * distance


def directional_min_probability(p1: Projector, p2: Projector, client: Client | None = None) -> float:
    """min over unit x in Ran(P1) of ||P2 x||^2, the smallest eigenvalue of F1* P2 F1.

    Equals cos^2 phi(Q1, Q2).
    """
    _check_same_dim(p1, p2)
    _check_nonzero(p1)
    f1 = frame_from_projector(p1, client).columns
    compressed = f1.conj().T @ p2.matrix @ f1
    compressed = (compressed + compressed.conj().T) / 2
    eigenvalues, _ = (client or default_client()).spectral.decompose(None, compressed)
    return _clamp_unit(float(np.min(eigenvalues)), "min ||P2 x||^2")
