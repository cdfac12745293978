"""Spectral observations of the received link signal under either identity.

Two simulation paths produce a slot's T power-spectrum samples:

* the statistical path draws them i.i.d. exponential with mean equal to
  the nominal power spectral density sample (NPSDS) -- the normative
  model that every closed-form detection result assumes;
* the waveform path builds a Doppler-shifted, faded Gaussian message plus
  AWGN in the time domain and takes squared DFT magnitudes -- kept as a
  cross-check of the statistical path, not used by the detector math.

The nominal PSD shape is tabulated over one period and evaluated with
periodic wrap-around. Treating a PSD as periodic is a modeling
idealization; it is what makes the NPSDS a single scalar per Doppler
shift instead of a per-bin vector.

Concurrency: all simulators are pure functions of (inputs, seed). For
parallel slot simulation derive one seed per slot as
``base_seed XOR slot_index``; within a slot, receivers consume draws from
the slot's generator in receiver-major order.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

_TWO_PI = 2.0 * math.pi


def _periodic_mean(offsets: np.ndarray, values: np.ndarray, period: float) -> float:
    # Mean of the periodic linear interpolant over one period (trapezoid
    # with the wrap segment back to the first point).
    xs = np.append(offsets, offsets[0] + period)
    ys = np.append(values, values[0])
    return float(np.trapz(ys, xs) / period)


@dataclass(frozen=True)
class NominalPsd:
    """Tabulated periodic nominal PSD of the message plus a noise floor.

    ``offsets``/``values`` give one period of the shape; the first offset
    must be 0 and evaluation interpolates linearly with wrap-around. The
    shape's mean over one period must equal ``signal_variance`` (checked
    at construction), so the channel-scaled mean power is
    ``channel_power * signal_variance``.
    """

    offsets: np.ndarray
    values: np.ndarray
    noise_floor: float
    period: float
    signal_variance: float
    channel_power: float = 1.0

    def __post_init__(self):
        offsets = np.asarray(self.offsets, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if offsets.ndim != 1 or offsets.shape != values.shape or offsets.size == 0:
            raise ValueError("offsets and values must be matching non-empty 1-d tables")
        if not (self.period > 0 and math.isfinite(self.period)):
            raise ValueError(f"period must be positive and finite, got {self.period}")
        if offsets[0] != 0.0:
            raise ValueError("shape table must start at offset 0")
        if np.any(np.diff(offsets) <= 0):
            raise ValueError("shape offsets must be strictly increasing")
        if offsets[-1] >= self.period:
            raise ValueError("shape offsets must lie inside [0, period)")
        if not np.all(np.isfinite(values)) or np.any(values < 0):
            raise ValueError("shape values must be finite and non-negative")
        if not (self.noise_floor >= 0 and math.isfinite(self.noise_floor)):
            raise ValueError(f"noise_floor must be non-negative, got {self.noise_floor}")
        if not (self.channel_power > 0 and math.isfinite(self.channel_power)):
            raise ValueError(f"channel_power must be positive, got {self.channel_power}")
        if not (self.signal_variance >= 0 and math.isfinite(self.signal_variance)):
            raise ValueError(f"signal_variance must be non-negative, got {self.signal_variance}")
        offsets.flags.writeable = False
        values.flags.writeable = False
        object.__setattr__(self, "offsets", offsets)
        object.__setattr__(self, "values", values)
        mean = _periodic_mean(offsets, values, self.period)
        if abs(mean - self.signal_variance) > 1e-9 * max(1.0, self.signal_variance):
            raise ValueError(
                f"shape mean {mean} does not match signal_variance {self.signal_variance}"
            )

    def evaluate(self, f):
        """Shape value A^x(f) with periodic wrap-around; accepts arrays."""
        fm = np.mod(f, self.period)
        xs = np.append(self.offsets, self.offsets[0] + self.period)
        ys = np.append(self.values, self.values[0])
        out = np.interp(fm, xs, ys)
        return float(out) if np.isscalar(f) else out

    def mean_power(self) -> float:
        """Mean of the shape over one period (equals signal_variance)."""
        return _periodic_mean(self.offsets, self.values, self.period)

    @classmethod
    def flat(cls, signal_variance: float, noise_floor: float, period: float = 1.0,
             channel_power: float = 1.0) -> "NominalPsd":
        """Shift-insensitive shape: constant at signal_variance."""
        return cls(
            offsets=np.array([0.0]),
            values=np.array([float(signal_variance)]),
            noise_floor=noise_floor,
            period=period,
            signal_variance=signal_variance,
            channel_power=channel_power,
        )

    @classmethod
    def triangular(cls, signal_variance: float, noise_floor: float, period: float = 1.0,
                   channel_power: float = 1.0, points: int = 64) -> "NominalPsd":
        """Tent shape peaking at offset 0, zero at half period, mean signal_variance."""
        if points < 4 or points % 2:
            raise ValueError("points must be an even integer >= 4 so the tent kink lands on the grid")
        f = np.linspace(0.0, period, points, endpoint=False)
        dist = np.minimum(f, period - f)
        values = 2.0 * signal_variance * (1.0 - 2.0 * dist / period)
        return cls(
            offsets=f,
            values=values,
            noise_floor=noise_floor,
            period=period,
            signal_variance=signal_variance,
            channel_power=channel_power,
        )

    @classmethod
    def from_csv(cls, path, period: float, noise_floor: float,
                 channel_power: float = 1.0, signal_variance: float | None = None) -> "NominalPsd":
        """Load a shape table from CSV rows of (frequency offset, power).

        When ``signal_variance`` is omitted it is taken as the table mean,
        which makes the construction-time normalization check pass by
        definition.
        """
        rows = []
        with open(path, newline="") as fh:
            for line in csv.reader(fh):
                if not line or line[0].lstrip().startswith("#"):
                    continue
                if len(line) < 2:
                    raise ValueError(f"{path}: expected two columns, got {line!r}")
                rows.append((float(line[0]), float(line[1])))
        if not rows:
            raise ValueError(f"{path}: no table rows found")
        rows.sort()
        offsets = np.array([r[0] for r in rows])
        values = np.array([r[1] for r in rows])
        if signal_variance is None:
            signal_variance = _periodic_mean(offsets, values, period)
        return cls(
            offsets=offsets,
            values=values,
            noise_floor=noise_floor,
            period=period,
            signal_variance=signal_variance,
            channel_power=channel_power,
        )


@dataclass(frozen=True)
class ChannelParams:
    """Line-of-sight channel: gain, Doppler shift, arrival angle, phase."""

    channel_power: float = 1.0
    doppler_shift: float = 0.0
    aoa_cos: float = 1.0
    phase: float = 0.0

    def __post_init__(self):
        if not (self.channel_power > 0 and math.isfinite(self.channel_power)):
            raise ValueError(f"channel_power must be positive, got {self.channel_power}")
        if not math.isfinite(self.doppler_shift):
            raise ValueError("doppler_shift must be finite")
        if not -1.0 <= self.aoa_cos <= 1.0:
            raise ValueError(f"aoa_cos must lie in [-1, 1], got {self.aoa_cos}")
        if not math.isfinite(self.phase):
            raise ValueError("phase must be finite")
        object.__setattr__(self, "phase", float(self.phase) % _TWO_PI)


def npsds_theoretical(psd: NominalPsd, omega: float) -> float:
    """NPSDS for a Doppler shift omega: channel_power * A^x(-omega mod period) + noise floor."""
    return float(psd.channel_power * psd.evaluate(-float(omega)) + psd.noise_floor)


def simulate_observation_statistical(theta: float, slot_length: int, rng_seed) -> np.ndarray:
    """Draw a slot's T power-spectrum samples i.i.d. Exponential(mean=theta).

    Inverse-CDF sampling makes the draw an exact scale family: the same
    seed at 2*theta yields exactly doubled samples.
    """
    if not (theta > 0 and math.isfinite(theta)):
        raise ValueError(f"theta must be positive and finite, got {theta}")
    if slot_length < 1:
        raise ValueError(f"slot_length must be >= 1, got {slot_length}")
    rng = np.random.default_rng(rng_seed)
    return theta * rng.standard_exponential(int(slot_length), method="inv")


def simulate_observation_waveform(
    msg_variance: float,
    shaping: NominalPsd,
    ch: ChannelParams,
    noise_variance: float,
    slot_length: int,
    rng_seed,
    bin_spacing_hz: float | None = None,
) -> np.ndarray:
    """Simulate a slot through the time-domain path and return |DFT|^2.

    A circularly-symmetric Gaussian message of variance ``msg_variance``
    is spectrally shaped toward the PSD table, multiplied by the fading
    term sqrt(l) * exp(j * 2*pi * omega * cos(delta) * t / f_s), and
    buried in complex AWGN before the unitary length-T DFT. The DFT bin
    spacing defaults to the shape period (one period per bin); the slot
    then spans f_s = T * bin_spacing in bandwidth.

    The channel's LoS phase rotates the whole received vector by a unit
    factor that cancels exactly in the squared magnitudes (rotating the
    noise with it leaves its distribution unchanged), so it is dropped
    rather than applied: outputs are bit-identical across phases.
    """
    T = int(slot_length)
    if T < 2:
        raise ValueError(f"slot_length must be >= 2, got {slot_length}")
    if not (noise_variance > 0 and math.isfinite(noise_variance)):
        raise ValueError(f"noise_variance must be positive, got {noise_variance}")
    if not (msg_variance >= 0 and math.isfinite(msg_variance)):
        raise ValueError(f"msg_variance must be non-negative, got {msg_variance}")
    spacing = shaping.period if bin_spacing_hz is None else float(bin_spacing_hz)
    if not spacing > 0:
        raise ValueError(f"bin_spacing_hz must be positive, got {spacing}")

    rng = np.random.default_rng(rng_seed)
    if msg_variance > 0:
        g = (rng.standard_normal(T) + 1j * rng.standard_normal(T)) / math.sqrt(2.0)
        msg = math.sqrt(msg_variance) * g
        spec = np.fft.fft(msg, norm="ortho")
        gain = np.sqrt(shaping.evaluate(np.arange(T) * spacing) / msg_variance)
        signal = np.fft.ifft(spec * gain, norm="ortho")
    else:
        signal = np.zeros(T, dtype=complex)

    t = np.arange(1, T + 1, dtype=float)
    sample_rate = T * spacing
    ramp = np.exp(1j * _TWO_PI * ch.doppler_shift * ch.aoa_cos * t / sample_rate)
    faded = math.sqrt(ch.channel_power) * ramp * signal

    noise = math.sqrt(noise_variance) * (
        rng.standard_normal(T) + 1j * rng.standard_normal(T)
    ) / math.sqrt(2.0)
    received = np.fft.fft(faded + noise, norm="ortho")
    return np.abs(received) ** 2
