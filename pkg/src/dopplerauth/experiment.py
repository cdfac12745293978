"""Experiment engine: slot simulation, threshold tuning, sweeps, reports.

A slot under either hypothesis is simulated on the statistical path: each
receiver's T power-spectrum samples are exponential with mean equal to
the true NPSDS (the legitimate reference under H0, the attacker's
beta-scaled value under H1). Per-slot seeds are ``base_seed XOR
slot_index`` and each slot draws its receivers receiver-major from one
generator, so serial and parallel execution produce identical results.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np

from .detection import optimal_operating_point
from .fusion import FusionRule, fuse, fused_probability
from .geometry import is_identifiable, nominal_doppler, to_doppler_shift
from .scenario import SCHEMA_VERSION, ConfigError, Scenario
from .spectrum import npsds_theoretical

HYPOTHESES = ("h0", "h1")

_ALL_RULES = ("or", "and", "majority")


def _check_hypothesis(hypothesis: str) -> str:
    h = str(hypothesis).lower()
    if h not in HYPOTHESES:
        raise ValueError(f"hypothesis must be one of {HYPOTHESES}, got {hypothesis!r}")
    return h


@dataclass(frozen=True)
class PreparedScenario:
    """Per-receiver quantities derived once per experiment."""

    theta_ref: np.ndarray       # legitimate NPSDS reference per receiver
    beta: np.ndarray            # attacker-to-reference NPSDS ratio
    alpha: np.ndarray           # tuned threshold coefficients
    p_detect: np.ndarray
    p_false_alarm: np.ndarray
    slot_length: int
    majority_quorum: int


def prepare(scenario: Scenario, tol: float = 1e-6) -> PreparedScenario:
    """Derive references and tuned operating points for every receiver."""
    n = scenario.num_receivers
    shifts_alice = np.array([
        to_doppler_shift(nominal_doppler(scenario.alice, rx), scenario.carrier_hz)
        for rx in scenario.receivers
    ])
    theta_ref = np.array([npsds_theoretical(scenario.psd, w) for w in shifts_alice])
    if np.any(theta_ref <= 0):
        raise ValueError("legitimate NPSDS reference must be positive; "
                         "raise the PSD noise floor or adjust the shape")

    if scenario.beta_from_geometry:
        shifts_eve = np.array([
            to_doppler_shift(nominal_doppler(scenario.eve, rx), scenario.carrier_hz)
            for rx in scenario.receivers
        ])
        theta_spoof = np.array([npsds_theoretical(scenario.psd, w) for w in shifts_eve])
        if np.any(theta_spoof <= 0):
            raise ValueError("attacker NPSDS must be positive under the configured PSD")
        beta = theta_spoof / theta_ref
    else:
        beta = np.asarray(scenario.beta, dtype=float)

    # homogeneous constellations share one optimization per distinct beta
    points = {}
    for b in beta:
        if b not in points:
            points[b] = optimal_operating_point(float(b), scenario.slot_length, tol)
    alpha = np.array([points[b].alpha for b in beta])
    pd = np.array([points[b].p_detect for b in beta])
    pf = np.array([points[b].p_false_alarm for b in beta])

    quorum_rule = FusionRule(
        "majority",
        scenario.fusion.quorum if scenario.fusion.kind == "majority" else None,
    )
    return PreparedScenario(
        theta_ref=theta_ref,
        beta=beta,
        alpha=alpha,
        p_detect=pd,
        p_false_alarm=pf,
        slot_length=scenario.slot_length,
        majority_quorum=quorum_rule.effective_quorum(n),
    )


def _slot_bits(theta_ref, theta_true, lam, slot_length, slot_seed) -> np.ndarray:
    rng = np.random.default_rng(slot_seed)
    z = rng.standard_exponential((theta_ref.size, slot_length), method="inv")
    theta_hat = (theta_true[:, None] * z).mean(axis=1)
    return (np.abs(theta_hat - theta_ref) > lam).astype(np.int8)


def run_slot(scenario: Scenario, hypothesis: str, slot_seed,
             prepared: PreparedScenario | None = None):
    """Simulate one slot and return (per-receiver bits, fused bit).

    The fused bit follows the scenario's own rule. ``prepared`` skips the
    per-call threshold optimization when supplied.
    """
    h = _check_hypothesis(hypothesis)
    prep = prepare(scenario) if prepared is None else prepared
    theta_true = prep.theta_ref if h == "h0" else prep.beta * prep.theta_ref
    bits = _slot_bits(prep.theta_ref, theta_true, prep.alpha * prep.theta_ref,
                      prep.slot_length, slot_seed)
    return bits, fuse(bits, scenario.fusion)


def _count_slots(args):
    # worker for the empirical loop; counts fused positives per rule
    theta_ref, theta_true, lam, slot_length, quorum, base_seed, start, stop = args
    n = theta_ref.size
    counts = np.zeros(3, dtype=np.int64)
    for s in range(start, stop):
        bits = _slot_bits(theta_ref, theta_true, lam, slot_length, base_seed ^ s)
        ones = int(bits.sum())
        counts[0] += ones > 0
        counts[1] += ones == n
        counts[2] += ones >= quorum
    return counts


def empirical_joint_rates(theta_ref, beta, alpha, slot_length: int, quorum: int,
                          trials: int, base_seed: int, hypothesis: str,
                          workers: int = 1) -> dict:
    """Monte Carlo rates of the fused bit per rule over ``trials`` slots.

    Counts are reduced by slot index, so the worker count never changes
    the result.
    """
    h = _check_hypothesis(hypothesis)
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    theta_ref = np.asarray(theta_ref, dtype=float)
    beta = np.asarray(beta, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    theta_true = theta_ref if h == "h0" else beta * theta_ref
    lam = alpha * theta_ref

    if workers <= 1:
        counts = _count_slots(
            (theta_ref, theta_true, lam, slot_length, quorum, base_seed, 0, trials)
        )
    else:
        bounds = np.linspace(0, trials, workers * 4 + 1, dtype=int)
        jobs = [
            (theta_ref, theta_true, lam, slot_length, quorum, base_seed, int(a), int(b))
            for a, b in zip(bounds[:-1], bounds[1:])
            if b > a
        ]
        counts = np.zeros(3, dtype=np.int64)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for part in pool.map(_count_slots, jobs):
                counts += part
    return {rule: float(c) / trials for rule, c in zip(_ALL_RULES, counts)}


@dataclass
class ExperimentResult:
    """Everything one experiment produced, JSON-serializable.

    ``created_at`` is wall-clock provenance and is excluded from the
    serialized document so rerunning a scenario reproduces result files
    byte for byte.
    """

    seed: int
    trials: int
    config_hash: str
    fusion_rule: dict
    per_satellite: list
    joint_analytic: dict
    joint_empirical: dict
    schema_version: int = SCHEMA_VERSION
    created_at: str | None = field(default=None, compare=False)

    def to_dict(self, include_timestamp: bool = False) -> dict:
        doc = {
            "schema_version": self.schema_version,
            "seed": self.seed,
            "trials": self.trials,
            "config_hash": self.config_hash,
            "fusion_rule": self.fusion_rule,
            "per_satellite": self.per_satellite,
            "joint_analytic": self.joint_analytic,
            "joint_empirical": self.joint_empirical,
        }
        if include_timestamp and self.created_at is not None:
            doc["created_at"] = self.created_at
        return doc

    def to_json(self, include_timestamp: bool = False) -> str:
        return json.dumps(self.to_dict(include_timestamp), indent=2, sort_keys=True)


def run_experiment(scenario: Scenario, trials: int | None = None,
                   seed: int | None = None, workers: int = 1) -> ExperimentResult:
    """Tune thresholds, evaluate joint probabilities, and measure them.

    Analytic joint probabilities are reported for all three rules; the
    empirical rates come from ``trials`` slots under each hypothesis with
    per-slot seeds derived from ``seed``. Rerunning with the same
    scenario and seed reproduces every number bitwise.
    """
    trials = scenario.trials if trials is None else trials
    seed = scenario.seed if seed is None else seed
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    if not 0 <= seed < 2**64:
        raise ValueError(f"seed must fit in an unsigned 64-bit integer, got {seed}")

    prep = prepare(scenario)
    n = scenario.num_receivers

    joint_analytic = {}
    for kind in _ALL_RULES:
        rule = FusionRule(
            kind, prep.majority_quorum if kind == "majority" else None
        )
        joint_analytic[kind] = {
            "p_detect": fused_probability(prep.p_detect, rule),
            "p_false_alarm": fused_probability(prep.p_false_alarm, rule),
        }

    rates_h0 = empirical_joint_rates(
        prep.theta_ref, prep.beta, prep.alpha, prep.slot_length,
        prep.majority_quorum, trials, seed, "h0", workers,
    )
    rates_h1 = empirical_joint_rates(
        prep.theta_ref, prep.beta, prep.alpha, prep.slot_length,
        prep.majority_quorum, trials, seed, "h1", workers,
    )
    joint_empirical = {
        kind: {
            "p_detect": rates_h1[kind],
            "p_false_alarm": rates_h0[kind],
            "trials": trials,
        }
        for kind in _ALL_RULES
    }

    per_satellite = [
        {
            "index": i,
            "theta_ref": float(prep.theta_ref[i]),
            "beta": float(prep.beta[i]),
            "alpha": float(prep.alpha[i]),
            "p_detect": float(prep.p_detect[i]),
            "p_false_alarm": float(prep.p_false_alarm[i]),
        }
        for i in range(n)
    ]

    fusion_rule = {"rule": scenario.fusion.kind}
    if scenario.fusion.kind == "majority":
        fusion_rule["quorum"] = prep.majority_quorum

    return ExperimentResult(
        seed=seed,
        trials=trials,
        config_hash=scenario.config_hash(),
        fusion_rule=fusion_rule,
        per_satellite=per_satellite,
        joint_analytic=joint_analytic,
        joint_empirical=joint_empirical,
        created_at=datetime.now(timezone.utc).isoformat(),
    )


def roc_sweep(beta: float, slot_length: int, grid: int) -> np.ndarray:
    """Closed-form ROC table: rows (alpha, p_false_alarm, p_detect).

    The alpha grid is uniform over the clamped open interval and the
    rows come back sorted by alpha.
    """
    from .detection import ALPHA_EDGE, p_detect, p_false_alarm

    if int(grid) != grid or grid < 2:
        raise ValueError(f"grid must be an integer >= 2, got {grid}")
    alphas = np.linspace(ALPHA_EDGE, 1.0 - ALPHA_EDGE, int(grid))
    out = np.empty((len(alphas), 3))
    for i, a in enumerate(alphas):
        out[i, 0] = a
        out[i, 1] = p_false_alarm(float(a), slot_length)
        out[i, 2] = p_detect(float(a), beta, slot_length)
    return out


def identifiability_report(scenario: Scenario, cond_threshold: float = 1e8) -> dict:
    """Identifiability of both claimed transmitters plus per-receiver Doppler.

    Needs at least 6 receivers; with fewer, no subset can pin down the
    six kinematic unknowns and the report refuses to run.
    """
    n = scenario.num_receivers
    if n < 6:
        raise ConfigError(
            "satellites.receivers",
            f"identifiability requires at least 6 receivers, got {n}",
        )

    def _result_dict(state):
        res = is_identifiable(state, scenario.receivers, cond_threshold)
        return {
            "identifiable": res.identifiable,
            "condition_number": res.condition_number,
            "best_subset": list(res.best_subset),
            "reason": res.reason,
        }

    per_receiver = []
    for i, rx in enumerate(scenario.receivers):
        f_a = nominal_doppler(scenario.alice, rx)
        f_e = nominal_doppler(scenario.eve, rx)
        w_a = to_doppler_shift(f_a, scenario.carrier_hz)
        w_e = to_doppler_shift(f_e, scenario.carrier_hz)
        per_receiver.append({
            "index": i,
            "alice_nominal_doppler": f_a,
            "alice_doppler_shift": w_a,
            "eve_nominal_doppler": f_e,
            "eve_doppler_shift": w_e,
            "abs_shift_difference": abs(w_a - w_e),
        })

    return {
        "schema_version": SCHEMA_VERSION,
        "carrier_hz": scenario.carrier_hz,
        "cond_threshold": cond_threshold,
        "alice": _result_dict(scenario.alice),
        "eve": _result_dict(scenario.eve),
        "per_receiver": per_receiver,
        "max_abs_shift_difference": max(
            r["abs_shift_difference"] for r in per_receiver
        ),
    }
