"""Moment estimation and pentanomial lattice calibration.

A five-state step distribution can match mean, variance, skewness and
excess kurtosis of observed log returns exactly.  With log amplitudes
placed symmetrically at mu + (3-i) h, i = 1..5, and spacing
h = sigma sqrt(1 + k/3), the moment equations have the closed-form solution

    p1 + p5 = 1 / (2 (3+k))          p1 - p5 = s c^3 / 6
    p2 + p4 = 1 / (3+k)              p2 - p4 = -2 (p1 - p5)
    p3      = 1 - 3 / (2 (3+k))      c = sqrt(3 / (3+k))

where s is the skewness and k the excess kurtosis of the horizon.  Under
iid aggregation over T periods the moments scale as mean T, variance T,
skewness / sqrt(T), excess kurtosis / T.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (CalibrationDegenerate, InsufficientData,
                     ProbabilityOutOfRange)
from .lattice import LatticeSpec
from .polytope import Pmf, SupportGrid

MOMENT_TOL = 1e-9   # round-trip tolerance of the matched moments


@dataclass(frozen=True)
class ReturnMoments:
    """First four moments of log returns at some sampling frequency."""

    mean: float
    variance: float
    skewness: float
    excess_kurtosis: float
    periods_per_year: int

    def __post_init__(self):
        if self.variance < 0.0:
            raise ValueError("variance must be >= 0")
        if self.excess_kurtosis <= -2.0:
            raise ValueError("excess kurtosis must exceed -2")
        if int(self.periods_per_year) != self.periods_per_year or \
                self.periods_per_year < 1:
            raise ValueError("periods_per_year must be a positive integer")


def estimate_moments(log_returns, periods_per_year: int) -> ReturnMoments:
    """Sample moments of a series of log returns.

    The variance uses the n-1 denominator; skewness and excess kurtosis are
    the bias-uncorrected standardized central moments m3 / m2^(3/2) and
    m4 / m2^2 - 3 with n denominators.
    """
    x = np.asarray(log_returns, dtype=np.float64).ravel()
    if x.size < 5:
        raise InsufficientData(f"need at least 5 observations, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise ValueError("log returns must be finite")
    if np.ptp(x) == 0.0:
        raise CalibrationDegenerate("constant return series has zero variance")
    mean = float(x.mean())
    centered = x - mean
    m2 = float(np.mean(centered ** 2))
    if m2 == 0.0:
        raise CalibrationDegenerate("return series has zero variance")
    m3 = float(np.mean(centered ** 3))
    m4 = float(np.mean(centered ** 4))
    variance = float(centered @ centered) / (x.size - 1)
    return ReturnMoments(mean=mean, variance=variance,
                         skewness=m3 / m2 ** 1.5,
                         excess_kurtosis=m4 / m2 ** 2 - 3.0,
                         periods_per_year=int(periods_per_year))


def annualize(moments: ReturnMoments, horizon_periods: int) -> ReturnMoments:
    """Aggregate iid per-period moments over ``horizon_periods`` periods:
    mean and variance scale with T, skewness with 1/sqrt(T) and excess
    kurtosis with 1/T."""
    t = int(horizon_periods)
    if t < 1:
        raise ValueError("horizon must be at least one period")
    return ReturnMoments(
        mean=moments.mean * t,
        variance=moments.variance * t,
        skewness=moments.skewness / math.sqrt(t),
        excess_kurtosis=moments.excess_kurtosis / t,
        periods_per_year=max(1, round(moments.periods_per_year / t)),
    )


@dataclass(frozen=True, eq=False)
class PentanomialCalibration:
    """Matched five-state step distribution.

    ``amplitudes`` is descending (a_1 > ... > a_5), ``probs`` the matching
    pmf on the ascending amplitude grid, ``location`` the mean log amplitude
    and ``spacing`` the log-amplitude step h.
    """

    amplitudes: np.ndarray
    probs: Pmf
    location: float
    spacing: float
    horizon_moments: ReturnMoments

    @property
    def probs_desc(self) -> np.ndarray:
        return self.probs.probs[::-1].copy()

    def to_lattice_spec(self, R: float, S0: float, N: int) -> LatticeSpec:
        """The calibrated amplitudes form a recombining lattice with
        u = exp(location/4 + spacing/2) and d = exp(location/4 - spacing/2)."""
        u = math.exp(self.location / 4.0 + self.spacing / 2.0)
        d = math.exp(self.location / 4.0 - self.spacing / 2.0)
        return LatticeSpec(u=u, d=d, L=5, R=R, S0=S0, N=N)

    def implied_moments(self) -> ReturnMoments:
        """Moments of the calibrated step (for the round-trip check)."""
        logs = np.log(self.probs.grid.points)
        p = self.probs.probs
        mean = float(p @ logs)
        c = logs - mean
        var = float(p @ c ** 2)
        return ReturnMoments(
            mean=mean, variance=var,
            skewness=float(p @ c ** 3) / var ** 1.5,
            excess_kurtosis=float(p @ c ** 4) / var ** 2 - 3.0,
            periods_per_year=self.horizon_moments.periods_per_year)


def calibrate_pentanomial(moments: ReturnMoments) -> PentanomialCalibration:
    """Five-state step distribution matching the given horizon moments.

    Raises
    ------
    CalibrationDegenerate
        If the variance is zero (amplitudes would coincide).
    ProbabilityOutOfRange
        If the skewness/kurtosis combination pushes any probability
        outside [0, 1].
    """
    if moments.variance <= 0.0:
        raise CalibrationDegenerate("zero variance cannot spread amplitudes")
    sigma = math.sqrt(moments.variance)
    k = moments.excess_kurtosis
    s = moments.skewness
    if 1.0 + k / 3.0 <= 0.0:
        raise ProbabilityOutOfRange(f"excess kurtosis {k} below -3")
    h = sigma * math.sqrt(1.0 + k / 3.0)

    tail = 1.0 / (2.0 * (3.0 + k))           # p1 + p5
    mid = 1.0 / (3.0 + k)                    # p2 + p4
    p3 = 1.0 - 3.0 / (2.0 * (3.0 + k))
    c = math.sqrt(3.0 / (3.0 + k))
    dlt = s * c ** 3 / 6.0                   # p1 - p5
    probs_desc = np.array([
        (tail + dlt) / 2.0,
        (mid - 2.0 * dlt) / 2.0,
        p3,
        (mid + 2.0 * dlt) / 2.0,
        (tail - dlt) / 2.0,
    ])
    if np.any(probs_desc < -1e-12) or np.any(probs_desc > 1.0 + 1e-12):
        raise ProbabilityOutOfRange(
            f"moment combination needs probabilities {probs_desc}")
    probs_desc = np.clip(probs_desc, 0.0, 1.0)

    i = np.arange(1, 6)
    amplitudes = np.exp(moments.mean + (3 - i) * h)
    grid = SupportGrid(amplitudes[::-1])
    calib = PentanomialCalibration(
        amplitudes=amplitudes, probs=Pmf(grid, probs_desc[::-1]),
        location=moments.mean, spacing=h, horizon_moments=moments)

    implied = calib.implied_moments()
    for got, want in ((implied.mean, moments.mean),
                      (implied.variance, moments.variance),
                      (implied.skewness, moments.skewness),
                      (implied.excess_kurtosis, moments.excess_kurtosis)):
        if abs(got - want) > MOMENT_TOL * max(1.0, abs(want)):
            raise CalibrationDegenerate(
                f"moment round-trip failed: {got} vs {want}")
    return calib
