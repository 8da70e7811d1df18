"""Sureness scores: distance from the additive (Bradley-Terry-style) manifold.

A pairwise matrix built from a single posterior lies exactly on the manifold;
matrices assembled from independent binary classifiers generally do not, and
the size of the discrepancy measures how unsure the coupled model is.  Each
coupling method has a natural distance: the residual objective value for the
quadratic minimizer, and the projection residual norm for the log-odds method.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import CouplingConfig, Method, PairwiseLikelihoodMatrix, Posterior
from .coupling import (
    bc_potentials,
    couple,
    couple_wlw,
    delta2_value,
    stabilize_clip,
    theta_of,
)


@dataclass(frozen=True)
class SurenessScore:
    sample_id: str
    method: Method
    distance: float

    def __post_init__(self):
        if self.distance < 0.0:
            raise ValueError("distance must be non-negative")


@dataclass(frozen=True)
class Abstain:
    """Marker returned instead of a posterior when distance exceeds the threshold."""

    distance: float


def distance_wlw(matrix: PairwiseLikelihoodMatrix) -> float:
    """Residual objective value at the quadratic coupling's minimizer."""
    return delta2_value(matrix, couple_wlw(matrix))


def distance_bc(matrix: PairwiseLikelihoodMatrix, tau: float = 1e-3) -> float:
    """Norm of the log-odds residual after projecting onto the additive subspace.

    Entries are clipped into [tau, 1 - tau] first, mirroring how the log-odds
    coupling is run in practice.
    """
    theta = theta_of(stabilize_clip(matrix, tau))
    v = bc_potentials(theta)
    resid = theta.entries - (v[None, :] - v[:, None])
    iu = np.triu_indices(matrix.c, k=1)
    return float(np.linalg.norm(resid[iu]))


def sureness(matrix: PairwiseLikelihoodMatrix, config: CouplingConfig) -> float:
    """Distance appropriate to the configured coupling method."""
    if config.method is Method.WU_LIN_WENG:
        return distance_wlw(matrix)
    return distance_bc(matrix, tau=config.tau)


def calibrate_threshold(in_distribution: list[float], quantile: float) -> float:
    """Nearest-rank empirical quantile of in-distribution distances.

    The abstention rule is ``distance > threshold``, so a quantile of e.g.
    0.95 lets through 95% of in-distribution traffic.
    """
    if not in_distribution:
        raise ValueError("need at least one in-distribution distance")
    if not (0.0 < quantile < 1.0):
        raise ValueError(f"quantile must be in (0, 1), got {quantile}")
    ordered = sorted(in_distribution)
    rank = math.ceil(quantile * len(ordered))
    return ordered[rank - 1]


def abstaining_predict(
    matrix: PairwiseLikelihoodMatrix, config: CouplingConfig, threshold: float
) -> Posterior | Abstain:
    """Couple the matrix, or abstain when its manifold distance exceeds the threshold."""
    if not math.isfinite(threshold):
        raise ValueError("threshold must be finite")
    d = sureness(matrix, config)
    if d > threshold:
        return Abstain(distance=d)
    return couple(matrix, config)
