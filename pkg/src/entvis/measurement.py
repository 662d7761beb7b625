"""Joint-outcome statistics: distributions, the corrected joint probability,
the real-coefficient closed form, shot sampling and plug-in estimation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InsufficientShots, NotNormalized
from .protocol import FinalCoefficients, ProtocolAngles
from .qstate import NORM_TOL

# Probabilities derived from unitary coefficients are exact to rounding, so
# distribution checks use a much tighter tolerance than state-input checks.
COEFF_TOL = 1e-12


@dataclass(frozen=True)
class OutcomeDistribution:
    """Probabilities of the four joint atomic detection outcomes."""

    p_gg: float
    p_ge: float
    p_eg: float
    p_ee: float

    def __post_init__(self):
        for name in ("p_gg", "p_ge", "p_eg", "p_ee"):
            p = float(getattr(self, name))
            if not math.isfinite(p) or p < 0.0 or p > 1.0 + COEFF_TOL:
                raise ValueError(f"{name}={p!r} is not a probability")
            object.__setattr__(self, name, p)
        total = self.p_gg + self.p_ge + self.p_eg + self.p_ee
        if abs(total - 1.0) > COEFF_TOL:
            raise ValueError(f"outcome probabilities sum to {total!r}, not 1")

    @property
    def probs(self) -> tuple[float, float, float, float]:
        return (self.p_gg, self.p_ge, self.p_eg, self.p_ee)


@dataclass(frozen=True)
class ShotCounts:
    """Tally of joint detection outcomes over repeated runs."""

    n_gg: int
    n_ge: int
    n_eg: int
    n_ee: int
    n_total: int

    def __post_init__(self):
        counts = (self.n_gg, self.n_ge, self.n_eg, self.n_ee)
        if any(c < 0 for c in counts) or self.n_total <= 0:
            raise ValueError("counts must be nonnegative with a positive total")
        if sum(counts) != self.n_total:
            raise ValueError("outcome counts must sum to n_total")

    @property
    def frequencies(self) -> tuple[float, float, float, float]:
        n = self.n_total
        return (self.n_gg / n, self.n_ge / n, self.n_eg / n, self.n_ee / n)


@dataclass(frozen=True)
class PbarEstimate:
    """Plug-in corrected joint probability with its propagated standard error."""

    value: float
    std_error: float
    n_total: int


def distribution_from_coefficients(coeffs: FinalCoefficients) -> OutcomeDistribution:
    """Squared moduli of the joint amplitudes, in (gg, ge, eg, ee) order."""
    if abs(coeffs.norm_sq - 1.0) > COEFF_TOL:
        raise NotNormalized(
            f"coefficients have squared norm {coeffs.norm_sq!r}; expected 1"
        )
    return OutcomeDistribution(*(abs(z) ** 2 for z in coeffs.amps))


def corrected_joint_probability(dist: OutcomeDistribution) -> float:
    """Joint excitation probability with the single-atom product removed.

    p_ee - p(atom 1 excited) * p(atom 2 excited) + 1/4; for unitary
    coefficients this equals |gg|^2 |ee|^2 - |ge|^2 |eg|^2 + 1/4 and is
    confined to [(1 - C)/4, (1 + C)/4] where C is the concurrence of the
    input state.
    """
    p_e1 = dist.p_eg + dist.p_ee
    p_e2 = dist.p_ge + dist.p_ee
    return dist.p_ee - p_e1 * p_e2 + 0.25


def real_coefficient_pbar(
    a: float, b: float, c: float, d: float, angles: ProtocolAngles
) -> float:
    """Closed form of the corrected joint probability for real amplitudes.

    Equals the full pipeline value whenever (a, b, c, d) are real; the
    extrema (1 +/- 2|ad - bc|)/4 sit at half-pulse settings
    theta1 = theta2 = pi/4 with phi1 = -/+ phi2 = pi/2.
    """
    norm_sq = a * a + b * b + c * c + d * d
    if abs(norm_sq - 1.0) > NORM_TOL:
        raise NotNormalized(f"coefficients have squared norm {norm_sq!r}; expected 1")
    t1, t2 = 2.0 * angles.theta1, 2.0 * angles.theta2
    f1, f2 = angles.phi1, angles.phi2
    cross = (
        2.0 * (a * d + b * c) * math.cos(t1) * math.cos(t2)
        + 2.0 * (a * c - b * d) * math.cos(f2) * math.cos(t1) * math.sin(t2)
        + 2.0 * (a * b - c * d) * math.cos(f1) * math.sin(t1) * math.cos(t2)
        + (
            (a * a + d * d) * math.cos(f1 + f2)
            - (b * b + c * c) * math.cos(f1 - f2)
        )
        * math.sin(t1)
        * math.sin(t2)
    )
    return (cross * 2.0 * (a * d - b * c) + 1.0) / 4.0


def sample_shots(dist: OutcomeDistribution, n: int, seed: int) -> ShotCounts:
    """Tally n independent categorical draws from the outcome distribution.

    Inverse-CDF draws from a PCG64 stream, so results are reproducible for a
    fixed (dist, n, seed) and stable across releases.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = np.random.Generator(np.random.PCG64(seed))
    edges = np.cumsum(dist.probs)
    idx = np.searchsorted(edges, rng.random(n), side="right")
    counts = np.bincount(np.minimum(idx, 3), minlength=4)
    return ShotCounts(*(int(c) for c in counts), n_total=n)


def estimate_pbar(counts: ShotCounts) -> PbarEstimate:
    """Plug-in corrected joint probability from empirical frequencies.

    The standard error comes from first-order propagation of the multinomial
    covariance through the estimator (delta method).  The product term gives
    the plug-in value an O(1/n) bias, which is negligible against the
    statistical error at the shot counts this package targets.
    """
    if counts.n_total < 2:
        raise InsufficientShots("need at least 2 shots to estimate")
    f_gg, f_ge, f_eg, f_ee = counts.frequencies
    p_e1 = f_eg + f_ee
    p_e2 = f_ge + f_ee
    value = f_ee - p_e1 * p_e2 + 0.25
    grad = (0.0, -p_e1, -p_e2, 1.0 - p_e1 - p_e2)
    freqs = (f_gg, f_ge, f_eg, f_ee)
    mean_grad = sum(g * f for g, f in zip(grad, freqs))
    variance = (
        sum(g * g * f for g, f in zip(grad, freqs)) - mean_grad * mean_grad
    ) / counts.n_total
    return PbarEstimate(value, math.sqrt(max(variance, 0.0)), counts.n_total)
