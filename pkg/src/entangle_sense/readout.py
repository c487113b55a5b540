"""Optical readout statistics and repetitive-readout SNR accounting.

Photon counts are Poissonian with a mean that interpolates between the
bright and dark levels according to the NV population.  Repeated
readouts of the same stored spin state are combined with inverse-
variance weights on their per-readout amplitudes, which yields the
quadrature-sum SNR gain.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import brentq, fsolve


@dataclass(frozen=True)
class ReadoutModel:
    """Poisson photon statistics of a single optical readout window."""

    n0: float  # mean bright-state photon number
    contrast: float  # relative bright/dark count difference

    def __post_init__(self) -> None:
        if self.n0 <= 0:
            raise ValueError("mean photon number must be positive")
        if not 0.0 < self.contrast <= 1.0:
            raise ValueError("optical contrast must be in (0, 1]")

    def mean_counts(self, p_bright: float | np.ndarray) -> float | np.ndarray:
        """Mean photon number for bright-state population p_bright."""
        return self.n0 * (1.0 - self.contrast * (1.0 - p_bright))

    def simulate_counts(
        self,
        p_bright: np.ndarray,
        rng: np.random.Generator,
    ) -> np.ndarray:
        p = np.asarray(p_bright, dtype=float)
        if np.any(p < -1e-12) or np.any(p > 1.0 + 1e-12):
            raise ValueError("populations must lie in [0, 1]")
        return rng.poisson(self.mean_counts(np.clip(p, 0.0, 1.0)))


def readout_noise(model: ReadoutModel, p_bright: float = 0.5) -> float:
    """Photon shot-noise standard deviation at the working point."""
    return float(np.sqrt(model.mean_counts(p_bright)))


def optimal_weights(amplitudes: Sequence[float], sigmas: Sequence[float]) -> np.ndarray:
    """Inverse-variance weights w_k proportional to a_k / sigma_k^2."""
    a = np.asarray(amplitudes, dtype=float)
    s = np.asarray(sigmas, dtype=float)
    if a.shape != s.shape:
        raise ValueError("amplitudes and sigmas must have matching shapes")
    if np.any(s <= 0):
        raise ValueError("noise levels must be positive")
    w = a / s**2
    total = np.sum(np.abs(w))
    if total == 0:
        raise ValueError("all amplitudes vanish; weights undefined")
    return w / total


def combined_snr(amplitudes: Sequence[float], sigmas: Sequence[float]) -> float:
    """SNR of the optimally weighted sum: sqrt(sum (a_k / sigma_k)^2)."""
    a = np.asarray(amplitudes, dtype=float)
    s = np.asarray(sigmas, dtype=float)
    return float(np.sqrt(np.sum((a / s) ** 2)))


def snr_gain(amplitudes: Sequence[float], sigmas: Sequence[float] | None = None) -> np.ndarray:
    """Cumulative SNR gain over readouts 0..m, normalized to readout 0.

    Equal per-readout noise is assumed when sigmas is omitted, so the
    gain reduces to sqrt(sum a_k^2) / a_0.
    """
    a = np.asarray(amplitudes, dtype=float)
    if a.ndim != 1 or len(a) == 0:
        raise ValueError("amplitude ladder must be a non-empty 1-D sequence")
    if a[0] <= 0:
        raise ValueError("first readout amplitude must be positive")
    s = np.ones_like(a) if sigmas is None else np.asarray(sigmas, dtype=float)
    terms = (a / s) ** 2
    return np.sqrt(np.cumsum(terms) / terms[0])


def cumulative_snr(amplitudes: Sequence[float], sigmas: Sequence[float] | None = None) -> np.ndarray:
    """SNR(m) = sqrt(sum_{k<=m} (a_k/sigma_k)^2), normalized to SNR(0) = 1."""
    return snr_gain(amplitudes, sigmas)


@dataclass(frozen=True)
class WeightedReadout:
    """Amplitude ladder with per-readout noise and its optimal weights."""

    amplitudes: tuple[float, ...]
    sigmas: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.amplitudes) != len(self.sigmas):
            raise ValueError("one sigma per amplitude required")
        if any(s <= 0 for s in self.sigmas):
            raise ValueError("noise levels must be positive")

    @property
    def weights(self) -> np.ndarray:
        return optimal_weights(self.amplitudes, self.sigmas)

    @property
    def snr(self) -> float:
        return combined_snr(self.amplitudes, self.sigmas)


def stretched_ladder(k0: float, s: float, m: int) -> np.ndarray:
    """Amplitude ladder a_k = exp(-(k/k0)^s), k = 0..m."""
    k = np.arange(m + 1, dtype=float)
    return np.exp(-((k / k0) ** s))


def calibrate_ladder(
    amplitude_sum: float,
    snr_at_m: float,
    m: int,
) -> tuple[float, float]:
    """Solve (k0, s) of a stretched ladder matching a measured working point.

    Matches sum_k a_k = amplitude_sum and the cumulative SNR gain at the
    last readout simultaneously (2-D root find with bracketing refinement).
    """
    if amplitude_sum <= 1.0 or amplitude_sum > m + 1:
        raise ValueError("amplitude sum must lie in (1, m + 1]")

    def equations(x: np.ndarray) -> np.ndarray:
        k0, s = x
        if k0 <= 0 or s <= 0:
            return np.array([1e3, 1e3])
        a = stretched_ladder(k0, s, m)
        g = np.sqrt(np.sum(a**2))
        return np.array([np.sum(a) - amplitude_sum, g - snr_at_m])

    sol, info, ier, msg = fsolve(equations, x0=np.array([m / 2.0, 2.0]), full_output=True)
    if ier != 1 or np.max(np.abs(info["fvec"])) > 1e-9:
        raise RuntimeError(f"ladder calibration failed: {msg}")
    k0, s = float(sol[0]), float(sol[1])
    return k0, s


def geometric_ratio_for_gain(target_gain: float, m: int) -> float:
    """Decay ratio r of a_k = r^k whose cumulative gain at readout m matches."""
    if target_gain <= 1.0 or target_gain >= np.sqrt(m + 1):
        raise ValueError("target gain must lie in (1, sqrt(m + 1))")

    def gain(r: float) -> float:
        a = r ** np.arange(m + 1)
        return float(np.sqrt(np.sum(a**2)))

    return float(brentq(lambda r: gain(r) - target_gain, 1e-6, 1.0 - 1e-9, xtol=1e-12))
