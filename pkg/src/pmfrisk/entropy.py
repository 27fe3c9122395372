"""Relative entropy, the minimal-entropy martingale measure and entropy balls.

Relative entropy I(Q, P) = sum q_i ln(q_i / p_i) is measured in nats with
0 ln 0 = 0 and is +inf whenever the supports of Q and P differ in either
direction (strict support rule, so q_i = 0 where p_i > 0 also gives +inf).

Among all measures in the polytope equivalent to a fully supported prior P,
the entropy minimizer subject to the mean constraint is the exponentially
tilted measure q_i ~ p_i exp(-tau y_i); the scalar tilt solves a monotone
one-dimensional equation and is found by sign-change bracketing plus
bisection, with the largest exponent shifted out for numerical stability.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import (ArbitrageViolation, BracketNotFound, ConvergenceFailure,
                     GridMismatch)
from .polytope import Pmf
from .sampler import SampleBatch

RESIDUAL_TOL = 1e-12    # |tilted mean - target| after normalization
BRACKET_WIDTH = 1e-14   # bisection stops at this bracket width
MAX_BISECT = 200
MAX_EXPAND = 60


def relative_entropy(q: Pmf, p: Pmf) -> float:
    """I(Q, P) in nats; +inf when the supports differ."""
    if q.grid != p.grid:
        raise GridMismatch("pmfs live on different grids")
    qa, pa = q.probs, p.probs
    if not np.array_equal(qa > 0.0, pa > 0.0):
        return math.inf
    mask = qa > 0.0
    return float(np.sum(qa[mask] * np.log(qa[mask] / pa[mask])))


@dataclass(frozen=True)
class MemmSolution:
    """Tilted measure with its tilt parameter and solve residual."""

    q_tilde: Pmf
    tau: float
    residual: float
    prior: Pmf

    @property
    def entropy(self) -> float:
        """I(q_tilde, prior); finite since both have full support."""
        return relative_entropy(self.q_tilde, self.prior)


def _tilted_gap(tau: float, values: np.ndarray, probs: np.ndarray,
                target: float) -> float:
    """Sign of (tilted mean - target), stabilized by shifting the largest
    exponent; strictly decreasing in tau through the tilted mean."""
    z = -tau * values
    w = probs * np.exp(z - z.max())
    return float(w @ (values - target))


def solve_memm(prior: Pmf, gross_rate: float) -> MemmSolution:
    """Minimal-entropy measure in D(grid, gross_rate) equivalent to ``prior``.

    Parameters
    ----------
    prior : Pmf
        Fully supported reference measure.
    gross_rate : float
        Mean constraint; must lie strictly inside the support range.

    Raises
    ------
    ArbitrageViolation
        If ``gross_rate`` is not strictly between the smallest and largest
        support point (no equivalent measure can have that mean).
    BracketNotFound
        If doubling the initial bracket [-1, 1] never produces a sign change.
    ConvergenceFailure
        If the final residual exceeds ``RESIDUAL_TOL``.
    """
    if not prior.full_support():
        raise ValueError("prior must have full support")
    y = prior.grid.points
    p = prior.probs
    if not (y[0] < gross_rate < y[-1]):
        raise ArbitrageViolation(
            f"gross rate {gross_rate} outside open range ({y[0]}, {y[-1]})")

    lo, hi = -1.0, 1.0
    for _ in range(MAX_EXPAND):
        g_lo = _tilted_gap(lo, y, p, gross_rate)
        g_hi = _tilted_gap(hi, y, p, gross_rate)
        if g_lo >= 0.0 and g_hi <= 0.0:
            break
        lo *= 2.0
        hi *= 2.0
    else:
        raise BracketNotFound("no sign change while expanding the tilt bracket")

    for _ in range(MAX_BISECT):
        if hi - lo <= BRACKET_WIDTH:
            break
        mid = 0.5 * (lo + hi)
        if _tilted_gap(mid, y, p, gross_rate) >= 0.0:
            lo = mid
        else:
            hi = mid

    tau = 0.5 * (lo + hi)
    z = -tau * y
    w = p * np.exp(z - z.max())
    q = w / w.sum()
    residual = abs(float(q @ y) - gross_rate)
    if residual > RESIDUAL_TOL:
        raise ConvergenceFailure(
            f"tilt solve residual {residual:.3e} above {RESIDUAL_TOL:g}")
    return MemmSolution(Pmf(prior.grid, q), tau, residual, prior)


@dataclass(frozen=True)
class EntropyBall:
    """Entropy ball around a center measure: {Q : I(center, Q) <= epsilon}."""

    center: Pmf
    epsilon: float

    def __post_init__(self):
        if self.epsilon < 0.0:
            raise ValueError("epsilon must be >= 0")


def _pair_entropies(batch: SampleBatch, reference: Pmf, order: str) -> np.ndarray:
    if batch.grid != reference.grid:
        raise GridMismatch("batch and reference live on different grids")
    if order == "center-first":
        return kernels.relative_entropy_pairs(reference.probs, batch.matrix)
    if order == "sample-first":
        return kernels.relative_entropy_pairs(batch.matrix, reference.probs)
    raise ValueError("order must be 'center-first' or 'sample-first'")


def in_ball(ball: EntropyBall, q: Pmf, order: str = "center-first") -> bool:
    """Ball membership; 'center-first' evaluates I(center, q)."""
    if order == "center-first":
        val = relative_entropy(ball.center, q)
    elif order == "sample-first":
        val = relative_entropy(q, ball.center)
    else:
        raise ValueError("order must be 'center-first' or 'sample-first'")
    return val <= ball.epsilon


def ball_mask(batch: SampleBatch, ball: EntropyBall,
              order: str = "center-first") -> np.ndarray:
    """Boolean membership vector for a whole batch."""
    return _pair_entropies(batch, ball.center, order) <= ball.epsilon


def entropy_distribution(batch: SampleBatch, reference: Pmf,
                         order: str = "center-first") -> np.ndarray:
    """Per-sample relative entropy against a reference measure.

    'center-first' returns I(reference, sample_i) (the ball convention),
    'sample-first' returns I(sample_i, reference).  Entries may be +inf.
    """
    return _pair_entropies(batch, reference, order)
