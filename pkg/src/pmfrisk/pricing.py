"""Option pricing on the lattice and price distributions over measure classes.

European prices come from the terminal distribution: with iid steps the
total down count after n steps is the n-fold convolution of the one-step
down-count pmf, and the price is the discounted expected payoff.  American
prices use backward induction with early exercise.  For convex payoffs the
price is monotone in the convex order of the step measure, so the extreme
vertices of the risk-neutral polytope (the pair bracketing 1+R and the
outermost pair) give closed-form lower and upper bounds attained inside the
class; the model-independent envelope only uses no-arbitrage.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from . import kernels
from .entropy import EntropyBall, ball_mask, entropy_distribution
from .errors import GridMismatch
from .lattice import AmplitudeGrid, LatticeSpec, NodeGrid
from .polytope import Pmf, convex_order_extremes
from .sampler import SampleBatch

BOUND_SLACK = 1e-9   # tolerance when asserting sampled prices inside bounds


@dataclass(frozen=True)
class OptionSpec:
    """Vanilla option: kind 'call' or 'put', style 'european' or 'american',
    strike > 0 and maturity in lattice steps."""

    kind: str
    strike: float
    maturity: int
    style: str = "european"

    def __post_init__(self):
        if self.kind not in ("call", "put"):
            raise ValueError(f"kind must be 'call' or 'put', got {self.kind!r}")
        if self.style not in ("european", "american"):
            raise ValueError(
                f"style must be 'european' or 'american', got {self.style!r}")
        if self.strike <= 0.0:
            raise ValueError("strike must be positive")
        if int(self.maturity) != self.maturity or self.maturity < 1:
            raise ValueError("maturity must be an integer >= 1 (steps)")

    def payoff(self, prices: np.ndarray) -> np.ndarray:
        if self.kind == "call":
            return np.maximum(np.asarray(prices) - self.strike, 0.0)
        return np.maximum(self.strike - np.asarray(prices), 0.0)


@dataclass(frozen=True)
class PriceQuote:
    """A price together with the label of the measure that produced it."""

    price: float
    label: str


@dataclass(frozen=True)
class TerminalDistribution:
    """Distribution of the total down count after ``steps`` steps.

    ``probs[y]`` is the probability of y total down moves and ``prices[y]``
    the matching terminal price S0 u^(steps*(L-1)-y) d^y (descending).
    """

    probs: np.ndarray
    prices: np.ndarray
    steps: int


def _check_measure(measure: Pmf, amps: AmplitudeGrid) -> None:
    if measure.grid != amps.grid:
        raise GridMismatch("step measure is not on the lattice amplitude grid")


def _down_count_pmf(measure: Pmf) -> np.ndarray:
    """Ascending-grid probs reversed: index y = down count = L - 1 - j."""
    return measure.probs[::-1].copy()


def _maturity(spec: LatticeSpec, option: OptionSpec) -> int:
    if option.maturity > spec.N:
        raise ValueError(
            f"option maturity {option.maturity} exceeds lattice steps {spec.N}")
    return option.maturity


def terminal_distribution(measure: Pmf, spec: LatticeSpec,
                          steps: Optional[int] = None) -> TerminalDistribution:
    """Terminal down-count distribution under iid steps of ``measure``."""
    amps = AmplitudeGrid.from_spec(spec)
    _check_measure(measure, amps)
    n = spec.N if steps is None else int(steps)
    if not 1 <= n <= spec.N:
        raise ValueError(f"steps must be in 1..{spec.N}")
    probs = kernels.self_convolve(_down_count_pmf(measure), n)[0]
    y = np.arange(probs.size)
    prices = spec.S0 * spec.u ** (n * (spec.L - 1) - y) * spec.d ** y
    return TerminalDistribution(probs, prices, n)


def price_european(measure: Pmf, spec: LatticeSpec, option: OptionSpec,
                   label: str = "custom") -> PriceQuote:
    """Discounted expected payoff at maturity under iid steps."""
    n = _maturity(spec, option)
    term = terminal_distribution(measure, spec, n)
    value = float(term.probs @ option.payoff(term.prices)) / spec.gross ** n
    return PriceQuote(value, label)


def price_american(measure: Pmf, spec: LatticeSpec, option: OptionSpec,
                   label: str = "custom") -> PriceQuote:
    """Backward induction with early exercise under iid steps."""
    n = _maturity(spec, option)
    amps = AmplitudeGrid.from_spec(spec)
    _check_measure(measure, amps)
    nodes = NodeGrid(spec)
    weights = measure.probs[::-1]        # child offset l-1 has prob of label l
    values = option.payoff(nodes.prices(n))
    for step in range(n - 1, -1, -1):
        cont = np.convolve(values, weights[::-1], mode="valid") / spec.gross
        values = np.maximum(option.payoff(nodes.prices(step)), cont)
    return PriceQuote(float(values[0]), label)


def price_option(measure: Pmf, spec: LatticeSpec, option: OptionSpec,
                 label: str = "custom") -> PriceQuote:
    if option.style == "american":
        return price_american(measure, spec, option, label)
    return price_european(measure, spec, option, label)


class AnalyticalBounds(NamedTuple):
    lower: PriceQuote
    upper: PriceQuote


def analytical_bounds(spec: LatticeSpec, option: OptionSpec) -> AnalyticalBounds:
    """Price bounds over the whole risk-neutral class for a convex payoff.

    The lower bound is attained by the two-point measure on the amplitude
    pair bracketing 1+R (the point mass when 1+R is itself an amplitude),
    the upper bound by the two-point measure on the outermost pair (1, L).
    """
    amps = AmplitudeGrid.from_spec(spec)
    low, up = convex_order_extremes(amps.grid, spec.gross)

    def _label(pmf: Pmf) -> str:
        support = np.flatnonzero(pmf.probs > 0.0)
        labels = sorted(amps.to_desc_label(int(j)) for j in support)
        if len(labels) == 1:
            return f"point-mass(l={labels[0]})"
        return f"Q({labels[0]},{labels[1]})"

    lower = price_option(low, spec, option, _label(low))
    upper = price_option(up, spec, option, _label(up))
    return AnalyticalBounds(lower, upper)


def no_arbitrage_envelope(spec: LatticeSpec, option: OptionSpec) -> tuple[float, float]:
    """Model-free envelope for the european call:
    ((S0 (1+R)^T - K)^+ / (1+R)^T, S0)."""
    if option.kind != "call" or option.style != "european":
        raise ValueError("envelope applies to the european call")
    n = _maturity(spec, option)
    disc = spec.gross ** n
    lower = max(spec.S0 * disc - option.strike, 0.0) / disc
    return (lower, spec.S0)


@dataclass(frozen=True, eq=False)
class SampleReport:
    """Per-sample prices over a batch of step measures, with optional
    entropies/ball flags and the analytical context."""

    prices: np.ndarray
    option: OptionSpec
    seed: int
    analytical_lower: float
    analytical_upper: float
    envelope: Optional[tuple[float, float]] = None
    entropies: Optional[np.ndarray] = None
    in_ball: Optional[np.ndarray] = None

    def __len__(self) -> int:
        return int(self.prices.size)

    def summary(self) -> dict:
        """Summary statistics plus the analytical and envelope bounds."""
        out: dict = {"count": len(self)}
        if len(self) > 0:
            qs = np.quantile(self.prices, [0.05, 0.5, 0.95])
            out.update(min=float(self.prices.min()),
                       max=float(self.prices.max()),
                       mean=float(self.prices.mean()),
                       q05=float(qs[0]), q50=float(qs[1]), q95=float(qs[2]))
        else:
            out.update(min=None, max=None, mean=None,
                       q05=None, q50=None, q95=None)
        out["analytical_lower"] = self.analytical_lower
        out["analytical_upper"] = self.analytical_upper
        out["envelope_lower"] = self.envelope[0] if self.envelope else None
        out["envelope_upper"] = self.envelope[1] if self.envelope else None
        return out

    def write_csv(self, path) -> None:
        """Rows (sample_id, price, entropy, in_ball); entropy may be 'inf'
        and both optional columns are empty when not computed."""
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("sample_id,price,entropy,in_ball\n")
            for i in range(len(self)):
                ent = ""
                if self.entropies is not None:
                    v = self.entropies[i]
                    ent = "inf" if np.isinf(v) else format(float(v), ".17g")
                flag = "" if self.in_ball is None else str(int(self.in_ball[i]))
                fh.write(f"{i},{format(float(self.prices[i]), '.17g')},{ent},{flag}\n")


def price_distribution(batch: SampleBatch, spec: LatticeSpec, option: OptionSpec,
                       ball: Optional[EntropyBall] = None,
                       reference: Optional[Pmf] = None,
                       order: str = "center-first") -> SampleReport:
    """Price every sampled measure and assemble a report.

    ``reference`` attaches per-sample entropies against the reference
    measure in the given ``order`` ('center-first' means I(reference,
    sample)); ``ball`` additionally attaches membership flags in the same
    order (its center is used as the reference when none is given).
    Sampled prices are checked against the analytical bounds, which must
    contain them for convex payoffs.
    """
    amps = AmplitudeGrid.from_spec(spec)
    if batch.grid != amps.grid:
        raise GridMismatch("batch is not on the lattice amplitude grid")
    n = _maturity(spec, option)

    if option.style == "american":
        prices = _batch_american(batch.matrix, spec, option, n)
    else:
        downs = batch.matrix[:, ::-1]
        if len(batch) == 0:
            prices = np.empty(0)
        else:
            payoff = option.payoff(NodeGrid(spec).prices(n))
            terminal = kernels.self_convolve(downs, n)
            prices = (terminal @ payoff) / spec.gross ** n

    bounds = analytical_bounds(spec, option)
    if prices.size:
        if prices.min() < bounds.lower.price - BOUND_SLACK or \
           prices.max() > bounds.upper.price + BOUND_SLACK:
            raise AssertionError("sampled price escaped the analytical bounds")

    envelope = None
    if option.kind == "call" and option.style == "european":
        envelope = no_arbitrage_envelope(spec, option)

    entropies = None
    flags = None
    if ball is not None and reference is None:
        reference = ball.center
    if reference is not None:
        entropies = entropy_distribution(batch, reference, order)
    if ball is not None:
        flags = ball_mask(batch, ball, order)

    return SampleReport(prices=prices, option=option, seed=batch.seed,
                        analytical_lower=bounds.lower.price,
                        analytical_upper=bounds.upper.price,
                        envelope=envelope, entropies=entropies, in_ball=flags)


def _batch_american(matrix: np.ndarray, spec: LatticeSpec, option: OptionSpec,
                    n: int) -> np.ndarray:
    """Backward induction for every row measure at once."""
    if matrix.shape[0] == 0:
        return np.empty(0)
    nodes = NodeGrid(spec)
    L = spec.L
    weights = matrix[:, ::-1]                      # (m, L), offset l-1 probs
    values = np.tile(option.payoff(nodes.prices(n)), (matrix.shape[0], 1))
    for step in range(n - 1, -1, -1):
        width = nodes.n_nodes(step)
        cont = np.zeros((matrix.shape[0], width))
        for l in range(L):
            cont += weights[:, l:l + 1] * values[:, l:l + width]
        exercise = option.payoff(nodes.prices(step))
        values = np.maximum(exercise[None, :], cont / spec.gross)
    return values[:, 0]
