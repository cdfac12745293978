"""Scenario files: JSON schema, validation with field paths, content hashing.

A scenario bundles the constellation (legitimate transmitter, attacker,
receivers), the nominal PSD model, the detector slot length, the
attacker's NPSDS ratio (given directly or derived from geometry), the
fusion rule, and the Monte Carlo budget. Every run is reproducible from
(scenario content, seed); the content hash identifies the scenario in
result files.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from dataclasses import dataclass

import numpy as np

from .fusion import RULE_KINDS, FusionRule
from .geometry import SatelliteState
from .spectrum import NominalPsd

SCHEMA_VERSION = 1

BETA_FROM_GEOMETRY = "from-geometry"

_MAX_SEED = 2**64 - 1


class ConfigError(ValueError):
    """Invalid scenario configuration; names the offending field path."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


def _get(d: dict, key: str, path: str, required: bool = True, default=None):
    if key not in d:
        if required:
            raise ConfigError(f"{path}.{key}" if path else key, "missing required field")
        return default
    return d[key]


def _number(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(path, f"expected a number, got {value!r}")
    if not math.isfinite(value):
        raise ConfigError(path, f"must be finite, got {value!r}")
    return float(value)


def _integer(value, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(path, f"expected an integer, got {value!r}")
    return value


def _state(value, path: str) -> SatelliteState:
    if not isinstance(value, dict):
        raise ConfigError(path, "expected an object with position and velocity")
    pos = _get(value, "position", path)
    vel = _get(value, "velocity", path)
    for name, vec in (("position", pos), ("velocity", vel)):
        if not isinstance(vec, list) or len(vec) != 3:
            raise ConfigError(f"{path}.{name}", "expected a list of 3 numbers")
        for j, comp in enumerate(vec):
            _number(comp, f"{path}.{name}[{j}]")
    try:
        return SatelliteState(position=pos, velocity=vel)
    except ValueError as exc:
        raise ConfigError(path, str(exc)) from exc


def _psd(value, path: str, base_dir: str) -> NominalPsd:
    if not isinstance(value, dict):
        raise ConfigError(path, "expected an object")
    shape = _get(value, "shape", path, required=False, default="flat")
    noise_floor = _number(_get(value, "noise_floor", path, required=False, default=1.0), f"{path}.noise_floor")
    period = _number(_get(value, "period", path, required=False, default=1.0), f"{path}.period")
    channel_power = _number(_get(value, "channel_power", path, required=False, default=1.0), f"{path}.channel_power")
    try:
        if shape in ("flat", "triangular"):
            signal_variance = _number(
                _get(value, "signal_variance", path, required=False, default=1.0),
                f"{path}.signal_variance",
            )
            if shape == "flat":
                return NominalPsd.flat(signal_variance, noise_floor, period, channel_power)
            points = _integer(
                _get(value, "points", path, required=False, default=64), f"{path}.points"
            )
            return NominalPsd.triangular(
                signal_variance, noise_floor, period, channel_power, points
            )
        if isinstance(shape, dict) and "csv" in shape:
            csv_path = shape["csv"]
            if not os.path.isabs(csv_path):
                csv_path = os.path.join(base_dir, csv_path)
            return NominalPsd.from_csv(csv_path, period, noise_floor, channel_power)
    except OSError as exc:
        raise ConfigError(f"{path}.shape.csv", str(exc)) from exc
    except ValueError as exc:
        raise ConfigError(path, str(exc)) from exc
    raise ConfigError(
        f"{path}.shape", f"expected 'flat', 'triangular', or {{'csv': path}}, got {shape!r}"
    )


@dataclass(frozen=True)
class Scenario:
    """Validated experiment configuration."""

    alice: SatelliteState
    eve: SatelliteState
    receivers: tuple[SatelliteState, ...]
    carrier_hz: float
    psd: NominalPsd
    noise_variance: tuple[float, ...]
    slot_length: int
    beta: tuple[float, ...] | None  # None means derive from geometry
    fusion: FusionRule
    trials: int
    seed: int

    @property
    def num_receivers(self) -> int:
        return len(self.receivers)

    @property
    def beta_from_geometry(self) -> bool:
        return self.beta is None

    def to_dict(self) -> dict:
        """Canonical JSON-ready content; the basis of the config hash."""
        return {
            "schema_version": SCHEMA_VERSION,
            "carrier_hz": self.carrier_hz,
            "slot_length": self.slot_length,
            "trials": self.trials,
            "seed": self.seed,
            "noise_variance": list(self.noise_variance),
            "fusion": {
                "rule": self.fusion.kind,
                **({"quorum": self.fusion.quorum} if self.fusion.quorum is not None else {}),
            },
            "psd": {
                "offsets": self.psd.offsets.tolist(),
                "values": self.psd.values.tolist(),
                "noise_floor": self.psd.noise_floor,
                "period": self.psd.period,
                "signal_variance": self.psd.signal_variance,
                "channel_power": self.psd.channel_power,
            },
            "attacker_beta": BETA_FROM_GEOMETRY if self.beta is None else list(self.beta),
            "satellites": {
                "alice": _state_dict(self.alice),
                "eve": _state_dict(self.eve),
                "receivers": [_state_dict(s) for s in self.receivers],
            },
        }

    def config_hash(self) -> str:
        canon = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()

    @classmethod
    def from_dict(cls, data: dict, base_dir: str = ".") -> "Scenario":
        if not isinstance(data, dict):
            raise ConfigError("", "scenario must be a JSON object")
        version = _get(data, "schema_version", "", required=False, default=SCHEMA_VERSION)
        if version != SCHEMA_VERSION:
            raise ConfigError("schema_version", f"unsupported version {version!r}")

        sats = _get(data, "satellites", "")
        if not isinstance(sats, dict):
            raise ConfigError("satellites", "expected an object")
        alice = _state(_get(sats, "alice", "satellites"), "satellites.alice")
        eve = _state(_get(sats, "eve", "satellites"), "satellites.eve")
        rx_raw = _get(sats, "receivers", "satellites")
        if not isinstance(rx_raw, list) or not rx_raw:
            raise ConfigError("satellites.receivers", "expected a non-empty list")
        receivers = tuple(
            _state(rx, f"satellites.receivers[{i}]") for i, rx in enumerate(rx_raw)
        )
        n = len(receivers)

        carrier_hz = _number(_get(data, "carrier_hz", ""), "carrier_hz")
        if carrier_hz <= 0:
            raise ConfigError("carrier_hz", f"must be positive, got {carrier_hz}")

        slot_length = _integer(_get(data, "slot_length", ""), "slot_length")
        if slot_length < 1:
            raise ConfigError("slot_length", f"must be >= 1, got {slot_length}")

        trials = _integer(_get(data, "trials", ""), "trials")
        if trials < 1:
            raise ConfigError("trials", f"must be >= 1, got {trials}")

        seed = _integer(_get(data, "seed", "", required=False, default=0), "seed")
        if not 0 <= seed <= _MAX_SEED:
            raise ConfigError("seed", f"must fit in an unsigned 64-bit integer, got {seed}")

        psd = _psd(_get(data, "psd", "", required=False, default={}), "psd", base_dir)

        nv_raw = _get(data, "noise_variance", "", required=False, default=psd.noise_floor)
        if isinstance(nv_raw, list):
            if len(nv_raw) != n:
                raise ConfigError(
                    "noise_variance", f"expected {n} per-receiver values, got {len(nv_raw)}"
                )
            noise_variance = tuple(
                _number(v, f"noise_variance[{i}]") for i, v in enumerate(nv_raw)
            )
        else:
            noise_variance = (_number(nv_raw, "noise_variance"),) * n
        for i, v in enumerate(noise_variance):
            if v <= 0:
                raise ConfigError(f"noise_variance[{i}]", f"must be positive, got {v}")

        beta_raw = _get(data, "attacker_beta", "")
        if beta_raw == BETA_FROM_GEOMETRY:
            beta = None
        elif isinstance(beta_raw, list):
            if len(beta_raw) != n:
                raise ConfigError(
                    "attacker_beta", f"expected {n} per-receiver values, got {len(beta_raw)}"
                )
            beta = tuple(_number(b, f"attacker_beta[{i}]") for i, b in enumerate(beta_raw))
        else:
            beta = (_number(beta_raw, "attacker_beta"),) * n
        if beta is not None:
            for i, b in enumerate(beta):
                if b <= 0:
                    raise ConfigError(f"attacker_beta[{i}]", f"must be positive, got {b}")

        fusion_raw = _get(data, "fusion", "", required=False, default={"rule": "majority"})
        if isinstance(fusion_raw, str):
            fusion_raw = {"rule": fusion_raw}
        if not isinstance(fusion_raw, dict):
            raise ConfigError("fusion", "expected an object or rule name")
        kind = _get(fusion_raw, "rule", "fusion")
        if kind not in RULE_KINDS:
            raise ConfigError("fusion.rule", f"must be one of {RULE_KINDS}, got {kind!r}")
        quorum = _get(fusion_raw, "quorum", "fusion", required=False)
        if quorum is not None:
            quorum = _integer(quorum, "fusion.quorum")
        try:
            fusion = FusionRule(kind, quorum)
            if fusion.kind == "majority":
                fusion.effective_quorum(n)
        except ValueError as exc:
            raise ConfigError("fusion.quorum", str(exc)) from exc

        return cls(
            alice=alice,
            eve=eve,
            receivers=receivers,
            carrier_hz=carrier_hz,
            psd=psd,
            noise_variance=noise_variance,
            slot_length=slot_length,
            beta=beta,
            fusion=fusion,
            trials=trials,
            seed=seed,
        )

    @classmethod
    def from_file(cls, path) -> "Scenario":
        with open(path) as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(str(path), f"invalid JSON: {exc}") from exc
        return cls.from_dict(data, base_dir=os.path.dirname(os.path.abspath(path)))


def _state_dict(state: SatelliteState) -> dict:
    return {"position": state.position.tolist(), "velocity": state.velocity.tolist()}
