"""Recombining multinomial lattice and its risk-neutral measure polytope.

One step multiplies the price by one of L amplitudes a_l = u^(L-l) d^(l-1),
l = 1..L (descending, the market convention used by every serialized
artifact).  After n steps the node prices are S0 u^(n(L-1)+1-k) d^(k-1),
k = 1..n(L-1)+1, and taking amplitude a_l from node (n, k) leads to node
(n+1, k+l-1).  Risk-neutral one-step measures are exactly the pmfs on the
amplitude grid with mean 1+R, i.e. the polytope D(amplitudes, 1+R); the
in-memory grid is ascending per the core convention and this module maps
between the two orders.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ArbitrageViolation, GridMismatch, InvalidFactors
from .polytope import GeneratorSet, Pmf, SupportGrid, enumerate_generators
from .sampler import SampleBatch


@dataclass(frozen=True)
class LatticeSpec:
    """Lattice parameters: factors u > d > 0, L >= 2 branches per step,
    per-step rate R, spot S0 > 0 and N >= 1 steps."""

    u: float
    d: float
    L: int
    R: float
    S0: float
    N: int

    def __post_init__(self):
        if not (0.0 < self.d < self.u):
            raise InvalidFactors(f"need 0 < d < u, got d={self.d}, u={self.u}")
        if int(self.L) != self.L or self.L < 2:
            raise InvalidFactors(f"need an integer L >= 2, got {self.L}")
        if int(self.N) != self.N or self.N < 1:
            raise ValueError(f"need an integer N >= 1, got {self.N}")
        if self.S0 <= 0.0:
            raise ValueError(f"need S0 > 0, got {self.S0}")
        if self.R <= -1.0:
            raise ValueError(f"need R > -1, got {self.R}")
        lo = self.d ** (self.L - 1)
        hi = self.u ** (self.L - 1)
        gross = 1.0 + self.R
        if gross < lo or gross > hi:
            raise ArbitrageViolation(
                f"1+R={gross} outside amplitude range [{lo}, {hi}]")
        if gross == lo or gross == hi:
            warnings.warn("1+R sits on the no-arbitrage boundary; the only "
                          "risk-neutral measure is a point mass")

    @property
    def gross(self) -> float:
        return 1.0 + self.R


@dataclass(frozen=True, eq=False)
class AmplitudeGrid:
    """One-step amplitudes in both orders.

    ``desc`` follows the market convention a_1 > ... > a_L; ``grid`` is the
    same set ascending for the polytope core.  Index helpers translate
    1-based descending labels l to 0-based ascending indices j = L - l.
    """

    desc: np.ndarray
    grid: SupportGrid

    @classmethod
    def from_spec(cls, spec: LatticeSpec) -> "AmplitudeGrid":
        ell = np.arange(1, spec.L + 1)
        desc = spec.u ** (spec.L - ell) * spec.d ** (ell - 1)
        desc = desc.astype(np.float64)
        desc.setflags(write=False)
        return cls(desc=desc, grid=SupportGrid(desc[::-1]))

    @property
    def L(self) -> int:
        return int(self.desc.size)

    def to_asc_index(self, l: int) -> int:
        """1-based descending label -> 0-based ascending index."""
        if not 1 <= l <= self.L:
            raise IndexError(f"label {l} outside 1..{self.L}")
        return self.L - l

    def to_desc_label(self, j: int) -> int:
        """0-based ascending index -> 1-based descending label."""
        if not 0 <= j < self.L:
            raise IndexError(f"index {j} outside 0..{self.L - 1}")
        return self.L - j

    def pair_to_desc(self, pair: tuple[int, int]) -> tuple[int, int]:
        """Ascending index pair (j1 < j2) -> descending label pair (l1 < l2),
        so the high amplitude keeps the small label."""
        j1, j2 = pair
        return (self.to_desc_label(j2), self.to_desc_label(j1))

    def probs_desc(self, pmf: Pmf) -> np.ndarray:
        if pmf.grid != self.grid:
            raise GridMismatch("pmf lives on a different amplitude grid")
        return pmf.probs[::-1].copy()

    def pmf_from_desc(self, probs_desc) -> Pmf:
        return Pmf(self.grid, np.asarray(probs_desc, dtype=np.float64)[::-1])


@dataclass(frozen=True)
class NodeGrid:
    """Node prices per step: level n holds n(L-1)+1 prices, descending."""

    spec: LatticeSpec

    def n_nodes(self, n: int) -> int:
        return n * (self.spec.L - 1) + 1

    def prices(self, n: int) -> np.ndarray:
        """Prices S0 u^(n(L-1)+1-k) d^(k-1) for k = 1..n(L-1)+1."""
        k = np.arange(1, self.n_nodes(n) + 1)
        top = n * (self.spec.L - 1) + 1
        return self.spec.S0 * self.spec.u ** (top - k) * self.spec.d ** (k - 1)

    def child(self, k: int, l: int) -> int:
        """1-based node index reached from node k by amplitude label l."""
        return k + l - 1


def build_lattice(spec: LatticeSpec) -> tuple[AmplitudeGrid, NodeGrid]:
    """Amplitude and node grids for a spec, with recombination verified:
    the child of node (n, k) under amplitude a_l is node (n+1, k+l-1)."""
    amps = AmplitudeGrid.from_spec(spec)
    nodes = NodeGrid(spec)
    for n in range(min(spec.N, 25)):
        cur = nodes.prices(n)
        nxt = nodes.prices(n + 1)
        for l in range(1, spec.L + 1):
            reached = cur * amps.desc[l - 1]
            expected = nxt[np.arange(cur.size) + l - 1]
            if not np.allclose(reached, expected, rtol=1e-9, atol=0.0):
                raise AssertionError("lattice does not recombine")
    return amps, nodes


def risk_neutral_generators(amps: AmplitudeGrid, gross_rate: float) -> GeneratorSet:
    """Extreme points of the risk-neutral polytope D(amplitudes, 1+R)."""
    return enumerate_generators(amps.grid, gross_rate)


def equivalent_filter(batch: SampleBatch, reference: Pmf) -> SampleBatch:
    """Keep the samples equivalent to a fully supported reference measure.

    Equivalence on a finite grid is support equality, so with a fully
    supported reference this retains the samples with all entries positive.
    Uniform samples from the polytope interior survive almost surely; only
    boundary elements such as the generators themselves are removed.
    """
    if batch.grid != reference.grid:
        raise GridMismatch("batch and reference live on different grids")
    if not reference.full_support():
        raise ValueError("reference measure must have full support")
    mask = np.all(batch.matrix > 0.0, axis=1)
    return SampleBatch(batch.grid, batch.matrix[mask], batch.seed)


def lattice_json_dict(spec: LatticeSpec, amps: AmplitudeGrid,
                      gens: GeneratorSet) -> dict:
    """JSON-ready description of the lattice and its generators, all in the
    descending 1-based convention; generator probs are keyed by label l."""
    generators = []
    for g in gens.generators:
        l1, l2 = amps.pair_to_desc(g.pair)
        probs = amps.probs_desc(g.pmf)
        generators.append({
            "pair": [l1, l2],
            "probs": {str(l1): float(probs[l1 - 1]),
                      str(l2): float(probs[l2 - 1])},
        })
    if gens.degenerate is not None:
        probs = amps.probs_desc(gens.degenerate)
        l = int(np.flatnonzero(probs)[0]) + 1
        generators.append({"pair": [l, l], "probs": {str(l): 1.0}})
    return {
        "u": spec.u, "d": spec.d, "L": spec.L, "R": spec.R,
        "S0": spec.S0, "N": spec.N,
        "amplitudes": [float(a) for a in amps.desc],
        "generators": generators,
    }
