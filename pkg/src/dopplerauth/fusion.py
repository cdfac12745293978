"""Joint authentication decision from per-satellite spoofing bits.

OR and AND have closed-form joint probabilities. The majority rule's
probability is the tail of a Poisson-binomial success count, computed
exactly by the O(N^2) count recursion so constellations far beyond the
2^N enumeration range stay tractable; the enumeration is kept as the
exact reference oracle for small N.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

RULE_KINDS = ("or", "and", "majority")

_ENUM_CAP = 20


@dataclass(frozen=True)
class FusionRule:
    """Fusion rule kind plus the majority quorum.

    ``quorum`` applies to the majority rule only; when left unset it
    defaults to max(1, floor(N/2)) at evaluation time.
    """

    kind: str
    quorum: int | None = None

    def __post_init__(self):
        if self.kind not in RULE_KINDS:
            raise ValueError(f"rule kind must be one of {RULE_KINDS}, got {self.kind!r}")
        if self.quorum is not None:
            if self.kind != "majority":
                raise ValueError("quorum only applies to the majority rule")
            if int(self.quorum) != self.quorum or self.quorum < 1:
                raise ValueError(f"quorum must be a positive integer, got {self.quorum}")
            object.__setattr__(self, "quorum", int(self.quorum))

    @classmethod
    def parse(cls, text: str, quorum: int | None = None) -> "FusionRule":
        return cls(text.strip().lower(), quorum)

    def effective_quorum(self, n: int) -> int:
        """Majority quorum for a constellation of n voters."""
        if self.kind != "majority":
            raise ValueError(f"{self.kind!r} rule has no quorum")
        q = max(1, n // 2) if self.quorum is None else self.quorum
        if not 1 <= q <= n:
            raise ValueError(f"quorum {q} out of range for {n} voters")
        return q


@dataclass(frozen=True)
class JointProbabilities:
    """Joint spoofing-detection and false-alarm probabilities of one rule."""

    p_detect_joint: float
    p_false_alarm_joint: float


def _check_bits(bits) -> np.ndarray:
    arr = np.asarray(bits)
    if arr.size == 0:
        raise ValueError("decision vector is empty")
    if not np.all((arr == 0) | (arr == 1)):
        raise ValueError("decision vector entries must be 0 or 1")
    return arr


def _check_probs(probabilities) -> np.ndarray:
    p = np.asarray(probabilities, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise ValueError("probability list must be non-empty and 1-d")
    if not np.all(np.isfinite(p)) or np.any(p < 0) or np.any(p > 1):
        raise ValueError("probabilities must lie in [0, 1]")
    return p


def fuse(bits, rule: FusionRule) -> int:
    """Joint bit from per-satellite bits under the rule."""
    arr = _check_bits(bits)
    ones = int(arr.sum())
    if rule.kind == "or":
        return int(ones > 0)
    if rule.kind == "and":
        return int(ones == arr.size)
    return int(ones >= rule.effective_quorum(arr.size))


def poisson_binomial_tail(probabilities, quorum: int) -> float:
    """P[at least ``quorum`` of the independent bits are 1], exact O(N^2).

    The success-count pmf is built by the standard one-bit-at-a-time
    recursion; the tail is its upper sum.
    """
    p = _check_probs(probabilities)
    n = p.size
    if quorum <= 0:
        return 1.0
    if quorum > n:
        return 0.0
    pmf = np.zeros(n + 1)
    pmf[0] = 1.0
    for i, pi in enumerate(p):
        pmf[1 : i + 2] = pmf[1 : i + 2] * (1.0 - pi) + pmf[: i + 1] * pi
        pmf[0] *= 1.0 - pi
    return float(min(1.0, max(0.0, pmf[quorum:].sum())))


def fused_probability(probabilities, rule: FusionRule) -> float:
    """Probability the fused bit is 1 given independent per-satellite rates."""
    p = _check_probs(probabilities)
    if rule.kind == "or":
        return float(1.0 - np.prod(1.0 - p))
    if rule.kind == "and":
        return float(np.prod(p))
    return poisson_binomial_tail(p, rule.effective_quorum(p.size))


def joint_probabilities(p_detect, p_false_alarm, rule: FusionRule) -> JointProbabilities:
    """Joint detection/false-alarm pair for per-satellite probability lists."""
    pd = _check_probs(p_detect)
    pf = _check_probs(p_false_alarm)
    if pd.size != pf.size:
        raise ValueError(
            f"probability lists differ in length: {pd.size} vs {pf.size}"
        )
    return JointProbabilities(
        p_detect_joint=fused_probability(pd, rule),
        p_false_alarm_joint=fused_probability(pf, rule),
    )


def enumerate_joint(probabilities, rule: FusionRule) -> float:
    """Exact joint probability by summing all 2^N decision vectors.

    Reference oracle for ``fused_probability``; refuses N > 20 where the
    enumeration cost explodes.
    """
    p = _check_probs(probabilities)
    n = p.size
    if n > _ENUM_CAP:
        raise ValueError(f"enumeration is capped at N={_ENUM_CAP}, got N={n}")
    quorum = rule.effective_quorum(n) if rule.kind == "majority" else None

    total = 0.0
    chunk = 1 << 16
    shifts = np.arange(n, dtype=np.int64)
    for start in range(0, 1 << n, chunk):
        idx = np.arange(start, min(start + chunk, 1 << n), dtype=np.int64)
        bits = (idx[:, None] >> shifts) & 1
        ones = bits.sum(axis=1)
        if rule.kind == "or":
            mask = ones > 0
        elif rule.kind == "and":
            mask = ones == n
        else:
            mask = ones >= quorum
        weights = np.where(bits == 1, p, 1.0 - p).prod(axis=1)
        total += float(weights[mask].sum())
    return min(1.0, max(0.0, total))
