"""Constellation geometry: nominal Doppler observations and identifiability.

The nominal Doppler observation used throughout is a range rate in m/s:
the projection of the transmitter/receiver relative velocity onto their
line of sight. Positions are meters, velocities m/s; the shift in Hz at a
given carrier follows by scaling with carrier_hz / SPEED_OF_LIGHT.

A transmitter's kinematic state (3 position + 3 velocity unknowns) is
identifiable from a constellation when some 6 observers produce a
well-conditioned observation Jacobian, so no second state can reproduce
the whole Doppler fingerprint.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0  # m/s, exact

#: Condition-number ceiling below which the 6x6 observation Jacobian is
#: treated as numerically invertible.
DEFAULT_COND_THRESHOLD = 1e8


def _as_vec3(value, name: str) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if arr.shape != (3,):
        raise ValueError(f"{name} must be a 3-vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must have finite components")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class SatelliteState:
    """Position (m) and velocity (m/s) of one satellite in Cartesian 3-space."""

    position: np.ndarray
    velocity: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "position", _as_vec3(self.position, "position"))
        object.__setattr__(self, "velocity", _as_vec3(self.velocity, "velocity"))


@dataclass(frozen=True)
class DopplerObservation:
    """Nominal Doppler (range rate, m/s) and the matching shift (Hz)."""

    nominal_doppler: float
    doppler_shift: float


def nominal_doppler(tx: SatelliteState, rx: SatelliteState) -> float:
    """Range rate (v_t - v_r)^T (p_t - p_r) / ||p_t - p_r|| in m/s."""
    d = tx.position - rx.position
    dist = float(np.linalg.norm(d))
    if dist == 0.0:
        raise ValueError("transmitter and receiver positions coincide")
    return float((tx.velocity - rx.velocity) @ d / dist)


def to_doppler_shift(nominal: float, carrier_hz: float) -> float:
    """Convert a range rate (m/s) into the Doppler shift (Hz) at a carrier."""
    if not carrier_hz > 0:
        raise ValueError(f"carrier frequency must be positive, got {carrier_hz}")
    return nominal * carrier_hz / SPEED_OF_LIGHT


def observe(tx: SatelliteState, rx: SatelliteState, carrier_hz: float) -> DopplerObservation:
    """Nominal Doppler and shift for one transmitter/receiver pair."""
    f = nominal_doppler(tx, rx)
    return DopplerObservation(f, to_doppler_shift(f, carrier_hz))


def doppler_jacobian(tx: SatelliteState, rxs) -> np.ndarray:
    """6x6 Jacobian of six nominal Doppler observations wrt transmitter state.

    Row i differentiates receiver i's observation; columns are the
    transmitter unknowns in the order (p1, p2, p3, v1, v2, v3). Receiver
    states are constants of the map, so the relative velocity enters the
    position partials and the velocity partials reduce to the unit
    line-of-sight vector from receiver to transmitter.
    """
    rxs = list(rxs)
    if len(rxs) != 6:
        raise ValueError(f"exactly 6 receivers required, got {len(rxs)}")
    jac = np.empty((6, 6))
    for i, rx in enumerate(rxs):
        d = tx.position - rx.position
        dist = float(np.linalg.norm(d))
        if dist == 0.0:
            raise ValueError(f"receiver {i} position coincides with the transmitter")
        u = tx.velocity - rx.velocity
        for c in range(3):
            o1, o2 = (c + 1) % 3, (c + 2) % 3
            cross = (u[o1] * d[o1] + u[o2] * d[o2]) * (-d[c])
            comp_sq = d[o1] ** 2 + d[o2] ** 2  # squared distance in the other axes
            jac[i, c] = (cross + u[c] * comp_sq) / dist**3
        jac[i, 3:] = d / dist
    return jac


@dataclass(frozen=True)
class IdentifiabilityResult:
    """Outcome of an identifiability test plus its diagnostics.

    ``condition_number`` and ``best_subset`` describe the best-conditioned
    6-receiver subset examined. ``reason`` is set when a precondition
    ruled the test out before any matrix work.
    """

    identifiable: bool
    condition_number: float
    best_subset: tuple[int, ...]
    reason: str | None = None


def is_identifiable(
    tx: SatelliteState,
    rxs,
    cond_threshold: float = DEFAULT_COND_THRESHOLD,
    max_random_subsets: int = 200,
    subset_seed: int = 0,
) -> IdentifiabilityResult:
    """Test whether the constellation pins down the transmitter state.

    All C(N, 6) receiver subsets are examined for N <= 10; beyond that a
    fixed number of seeded random subsets keeps the cost bounded. The
    transmitter is identifiable when the best subset's Jacobian condition
    number falls below ``cond_threshold``.
    """
    rxs = list(rxs)
    if len(rxs) < 6:
        raise ValueError(
            f"identifiability requires at least 6 receivers, got {len(rxs)}"
        )
    if not cond_threshold > 1:
        raise ValueError(f"cond_threshold must exceed 1, got {cond_threshold}")
    if float(np.linalg.norm(tx.velocity)) == 0.0:
        # A motionless transmitter makes every velocity-direction unknown
        # unobservable; flagged before any matrix work.
        return IdentifiabilityResult(
            False, float("inf"), (), reason="transmitter velocity is zero"
        )

    n = len(rxs)
    if n <= 10:
        subsets = list(itertools.combinations(range(n), 6))
    else:
        rng = np.random.default_rng(subset_seed)
        seen = set()
        for _ in range(max_random_subsets):
            seen.add(tuple(sorted(rng.choice(n, size=6, replace=False).tolist())))
        subsets = sorted(seen)

    best_cond = float("inf")
    best_subset: tuple[int, ...] = ()
    for subset in subsets:
        jac = doppler_jacobian(tx, [rxs[j] for j in subset])
        s = np.linalg.svd(jac, compute_uv=False)
        cond = float("inf") if s[-1] == 0.0 else float(s[0] / s[-1])
        if cond < best_cond:
            best_cond = cond
            best_subset = tuple(subset)
    return IdentifiabilityResult(best_cond < cond_threshold, best_cond, best_subset)
