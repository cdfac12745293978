"""Per-satellite authentication test on the estimated NPSDS.

The slot estimate is the sample mean of T exponential spectrum samples,
so it follows a Gamma law with shape T and scale theta/T. Deviation of
the estimate from the legitimate reference beyond lambda = alpha * theta_ref
raises the spoofing bit; detection and false-alarm probabilities have
closed forms in the regularized incomplete gamma functions, and the
threshold coefficient is tuned by golden-section search on the combined
miss + false-alarm objective.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .gammainc import regularized_gamma_p, regularized_gamma_q

#: Clamp for the open threshold-coefficient interval (0, 1).
ALPHA_EDGE = 1e-9

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def _check_slot_length(slot_length) -> int:
    T = int(slot_length)
    if T != slot_length or T < 1:
        raise ValueError(f"slot_length must be a positive integer, got {slot_length}")
    return T


def _check_alpha(alpha: float) -> None:
    if not (0.0 < alpha < 1.0):
        raise ValueError(f"alpha must lie in the open interval (0, 1), got {alpha}")


def _check_beta(beta: float) -> None:
    if not (beta > 0 and math.isfinite(beta)):
        raise ValueError(f"beta must be positive and finite, got {beta}")


@dataclass(frozen=True)
class DetectorConfig:
    """Reference NPSDS, threshold coefficient, and slot length of one detector."""

    theta_ref: float
    alpha: float
    slot_length: int

    def __post_init__(self):
        if not (self.theta_ref > 0 and math.isfinite(self.theta_ref)):
            raise ValueError(f"theta_ref must be positive, got {self.theta_ref}")
        _check_alpha(self.alpha)
        object.__setattr__(self, "slot_length", _check_slot_length(self.slot_length))


def estimate_npsds(obs) -> float:
    """ML estimate of the NPSDS: the sample mean of the slot's power samples."""
    arr = np.asarray(obs, dtype=float)
    if arr.size == 0:
        raise ValueError("observation is empty")
    return float(arr.mean())


def estimate_pdf(theta_hat: float, theta: float, slot_length: int) -> float:
    """Density of the NPSDS estimate: Gamma with shape T and scale theta/T."""
    if not (theta > 0 and math.isfinite(theta)):
        raise ValueError(f"theta must be positive, got {theta}")
    if not theta_hat >= 0:
        raise ValueError(f"theta_hat must be non-negative, got {theta_hat}")
    T = _check_slot_length(slot_length)
    if theta_hat == 0.0:
        return 1.0 / theta if T == 1 else 0.0
    log_pdf = (
        (T - 1) * math.log(theta_hat)
        - theta_hat * T / theta
        + T * math.log(T / theta)
        - math.lgamma(T)
    )
    return math.exp(log_pdf)


def decide(theta_hat: float, cfg: DetectorConfig) -> int:
    """Spoofing bit: 1 iff the estimate deviates from the reference by more
    than lambda = alpha * theta_ref (the boundary itself accepts)."""
    return int(abs(theta_hat - cfg.theta_ref) > cfg.alpha * cfg.theta_ref)


def p_detect(alpha: float, beta: float, slot_length: int) -> float:
    """Probability the spoofing bit fires when the attacker transmits.

    beta is the attacker-to-reference NPSDS ratio; beta = 1 makes the
    hypotheses identical and this reduces to the false-alarm probability.
    """
    _check_alpha(alpha)
    _check_beta(beta)
    T = _check_slot_length(slot_length)
    return (
        regularized_gamma_p(T, T * (1.0 - alpha) / beta)
        + regularized_gamma_q(T, T * (1.0 + alpha) / beta)
    )


def p_false_alarm(alpha: float, slot_length: int) -> float:
    """Probability the spoofing bit fires when the legitimate node transmits."""
    _check_alpha(alpha)
    T = _check_slot_length(slot_length)
    return (
        regularized_gamma_p(T, T * (1.0 - alpha))
        + regularized_gamma_q(T, T * (1.0 + alpha))
    )


def threshold_objective(alpha: float, beta: float, slot_length: int) -> float:
    """Combined error probability P_f + (1 - P_d) minimized by the tuner."""
    return p_false_alarm(alpha, slot_length) + 1.0 - p_detect(alpha, beta, slot_length)


@dataclass(frozen=True)
class ThresholdResult:
    """Tuned threshold coefficient and the objective value attained there."""

    alpha: float
    objective: float


@dataclass(frozen=True)
class OperatingPoint:
    """Per-satellite operating point at a tuned threshold."""

    alpha: float
    p_detect: float
    p_false_alarm: float
    objective: float


def optimize_threshold(beta: float, slot_length: int, tol: float = 1e-6) -> ThresholdResult:
    """Golden-section search for the threshold coefficient minimizing
    P_f + (1 - P_d) over the clamped open interval (0, 1).

    The search assumes a unimodal objective; a 64-point coarse scan
    guards that assumption and warns when it finds a strictly better
    value than the converged search.
    """
    _check_beta(beta)
    T = _check_slot_length(slot_length)
    if not (0.0 < tol < 1.0):
        raise ValueError(f"tol must lie in (0, 1), got {tol}")

    lo0, hi0 = ALPHA_EDGE, 1.0 - ALPHA_EDGE
    lo, hi = lo0, hi0
    x1 = hi - _INVPHI * (hi - lo)
    x2 = lo + _INVPHI * (hi - lo)
    f1 = threshold_objective(x1, beta, T)
    f2 = threshold_objective(x2, beta, T)
    while hi - lo > tol:
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - _INVPHI * (hi - lo)
            f1 = threshold_objective(x1, beta, T)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + _INVPHI * (hi - lo)
            f2 = threshold_objective(x2, beta, T)
    alpha, objective = (x1, f1) if f1 <= f2 else (x2, f2)

    grid_best = min(
        threshold_objective(a, beta, T) for a in np.linspace(lo0, hi0, 64)
    )
    if grid_best < objective - tol:
        warnings.warn(
            f"threshold objective looks multimodal for beta={beta}, T={T}: "
            f"coarse scan found {grid_best}, search returned {objective}",
            RuntimeWarning,
        )
    return ThresholdResult(float(alpha), float(objective))


def optimal_operating_point(beta: float, slot_length: int, tol: float = 1e-6) -> OperatingPoint:
    """Tune the threshold and report the probabilities attained there."""
    res = optimize_threshold(beta, slot_length, tol)
    return OperatingPoint(
        alpha=res.alpha,
        p_detect=p_detect(res.alpha, beta, slot_length),
        p_false_alarm=p_false_alarm(res.alpha, slot_length),
        objective=res.objective,
    )
