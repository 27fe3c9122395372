"""Convex polytope of pmfs with a fixed support grid and a fixed mean.

The feasible set D(Y, mu) collects all probability vectors supported on an
ordered grid Y = {y_1 < ... < y_d} whose mean equals mu.  It is a compact
convex polytope whose extreme points are two-point measures, one for every
pair of grid points straddling mu, plus the point mass at mu whenever mu
coincides with a grid point.  Expectations of a payoff are linear in the
probabilities, so their extremes over the polytope are attained at those
vertices; for convex payoffs the minimizer and maximizer are the two-point
measures on the pair bracketing mu and on the outermost pair respectively.

All grids in this module are ascending with 0-based indices.  Lattice code
reorders to the descending market convention at its own boundary.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Optional, Sequence

import numpy as np

from .errors import DimensionMismatch, EmptyPolytope, GridMismatch

SUM_TOL = 1e-12       # construction-time tolerance on sum(probs) == 1
MEMBER_TOL = 1e-10    # default membership tolerance for external candidates
MIN_GAP = 1e-12       # minimal spacing between grid points


def _fmt17(x: float) -> str:
    """Format a double with 17 significant digits (exact round-trip)."""
    return format(float(x), ".17g")


@dataclass(frozen=True, eq=False)
class SupportGrid:
    """Strictly increasing support points y_1 < ... < y_d, d >= 2."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 1 or pts.size < 2:
            raise ValueError("support grid needs at least two points")
        if not np.all(np.isfinite(pts)):
            raise ValueError("support grid must be finite")
        if np.any(np.diff(pts) <= MIN_GAP):
            raise ValueError("support grid must be strictly increasing "
                             f"with gaps above {MIN_GAP:g}")
        pts = pts.copy()
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return int(self.points.size)

    def __eq__(self, other) -> bool:
        return isinstance(other, SupportGrid) and np.array_equal(
            self.points, other.points)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class Pmf:
    """Probability vector on a :class:`SupportGrid`.

    Probabilities must be nonnegative and sum to 1 within ``SUM_TOL``.
    Instances are immutable; the backing array is read-only.
    """

    grid: SupportGrid
    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=np.float64)
        if p.shape != (len(self.grid),):
            raise DimensionMismatch(
                f"probs shape {p.shape} does not match grid size {len(self.grid)}")
        if np.any(p < 0.0):
            raise ValueError("probabilities must be nonnegative")
        if abs(p.sum() - 1.0) > SUM_TOL:
            raise ValueError(f"probabilities must sum to 1 within {SUM_TOL:g}")
        p = p.copy()
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    def mean(self) -> float:
        return float(self.probs @ self.grid.points)

    def expectation(self, values: Sequence[float]) -> float:
        """Expected value of a payoff given by its values on the grid."""
        v = np.asarray(values, dtype=np.float64)
        if v.shape != self.probs.shape:
            raise DimensionMismatch("payoff values must match the grid size")
        return float(self.probs @ v)

    def support_indices(self) -> np.ndarray:
        return np.flatnonzero(self.probs > 0.0)

    def full_support(self) -> bool:
        return bool(np.all(self.probs > 0.0))

    def to_json(self) -> str:
        """Serialize as {"support": [...], "probs": [...]}, 17 significant
        digits per number so values round-trip exactly."""
        sup = ", ".join(_fmt17(x) for x in self.grid.points)
        pr = ", ".join(_fmt17(x) for x in self.probs)
        return '{"support": [%s], "probs": [%s]}' % (sup, pr)

    @classmethod
    def from_json(cls, text: str) -> "Pmf":
        obj = json.loads(text)
        if not isinstance(obj, dict) or "support" not in obj or "probs" not in obj:
            raise ValueError("pmf JSON needs 'support' and 'probs' arrays")
        return cls(SupportGrid(np.asarray(obj["support"], dtype=np.float64)),
                   np.asarray(obj["probs"], dtype=np.float64))

    def __eq__(self, other) -> bool:
        return (isinstance(other, Pmf) and self.grid == other.grid
                and np.array_equal(self.probs, other.probs))

    __hash__ = None


@dataclass(frozen=True)
class Generator:
    """Two-point extremal measure on the grid-index pair ``pair``."""

    pair: tuple[int, int]
    pmf: Pmf


@dataclass(frozen=True, eq=False)
class GeneratorSet:
    """All extreme points of D(grid, mean).

    ``generators`` holds the two-point measures in lexicographic pair order;
    ``degenerate`` is the point mass at ``mean`` when the mean coincides with
    a grid point, else ``None``.
    """

    grid: SupportGrid
    mean: float
    generators: tuple[Generator, ...]
    degenerate: Optional[Pmf] = None

    @property
    def vertices(self) -> tuple[Pmf, ...]:
        """Every extreme point: two-point measures, then the point mass."""
        vs = tuple(g.pmf for g in self.generators)
        if self.degenerate is not None:
            vs = vs + (self.degenerate,)
        return vs

    def vertex_matrix(self) -> np.ndarray:
        """(n_vertices, d) matrix stacking the vertex probability vectors."""
        return np.array([v.probs for v in self.vertices])

    def __len__(self) -> int:
        return len(self.generators)


def _two_point_probs(points: np.ndarray, mean: float, j1: int, j2: int) -> np.ndarray:
    y1, y2 = points[j1], points[j2]
    p = np.zeros(points.size)
    p[j1] = (y2 - mean) / (y2 - y1)
    p[j2] = 1.0 - p[j1]
    return p


def enumerate_generators(grid: SupportGrid, mean: float) -> GeneratorSet:
    """Enumerate the extreme points of D(grid, mean).

    For every index pair (j1, j2) with y_j1 < mean < y_j2 the two-point
    measure putting mass (y_j2 - mean)/(y_j2 - y_j1) on y_j1 is a vertex.
    When mean equals a grid point exactly, the point mass there is a vertex
    as well.

    Raises
    ------
    EmptyPolytope
        If ``mean`` lies outside [y_1, y_d].
    """
    pts = grid.points
    if not np.isfinite(mean):
        raise ValueError("mean must be finite")
    if mean < pts[0] or mean > pts[-1]:
        raise EmptyPolytope(
            f"mean {mean} outside support range [{pts[0]}, {pts[-1]}]")

    exact = np.flatnonzero(pts == mean)
    degenerate = None
    if exact.size:
        probs = np.zeros(pts.size)
        probs[exact[0]] = 1.0
        degenerate = Pmf(grid, probs)

    lo = np.flatnonzero(pts < mean)
    hi = np.flatnonzero(pts > mean)
    gens = []
    mean_tol = 1e-12 * max(1.0, abs(mean))
    for j1 in lo:
        for j2 in hi:
            pmf = Pmf(grid, _two_point_probs(pts, mean, j1, j2))
            assert abs(pmf.mean() - mean) <= mean_tol
            gens.append(Generator((int(j1), int(j2)), pmf))
    return GeneratorSet(grid, float(mean), tuple(gens), degenerate)


def combine(gens: GeneratorSet, weights: Sequence[float]) -> Pmf:
    """Convex combination of the polytope vertices.

    ``weights`` runs over ``gens.vertices`` (two-point measures first, the
    point mass last when present), must be nonnegative and sum to 1 within
    ``SUM_TOL``.
    """
    w = np.asarray(weights, dtype=np.float64)
    verts = gens.vertex_matrix()
    if w.shape != (verts.shape[0],):
        raise DimensionMismatch(
            f"{verts.shape[0]} vertex weights expected, got shape {w.shape}")
    if np.any(w < 0.0):
        raise ValueError("weights must be nonnegative")
    if abs(w.sum() - 1.0) > SUM_TOL:
        raise ValueError(f"weights must sum to 1 within {SUM_TOL:g}")
    return Pmf(gens.grid, w @ verts)


def contains(grid: SupportGrid, mean: float, candidate: Pmf,
             tol: float = MEMBER_TOL) -> bool:
    """Membership test for D(grid, mean) with absolute tolerance ``tol``."""
    if candidate.grid != grid:
        raise GridMismatch("candidate pmf lives on a different grid")
    p = candidate.probs
    if np.any(p < -tol):
        return False
    if abs(p.sum() - 1.0) > tol:
        return False
    return abs(float(p @ (grid.points - mean))) <= tol


class ExpectationBounds(NamedTuple):
    lower: float
    upper: float
    minimizer: Pmf
    maximizer: Pmf


def expectation_bounds(grid: SupportGrid, mean: float,
                       phi_values: Sequence[float]) -> ExpectationBounds:
    """Range of E[phi] over D(grid, mean) with the attaining vertices.

    The expectation is linear in the probabilities, so both extremes are
    attained at vertices; this evaluates every vertex and keeps the argmin
    and argmax (first hit on exact ties).
    """
    phi = np.asarray(phi_values, dtype=np.float64)
    if phi.shape != (len(grid),):
        raise DimensionMismatch("phi values must match the grid size")
    gens = enumerate_generators(grid, mean)
    verts = gens.vertices
    vals = gens.vertex_matrix() @ phi
    i_min = int(np.argmin(vals))
    i_max = int(np.argmax(vals))
    return ExpectationBounds(float(vals[i_min]), float(vals[i_max]),
                             verts[i_min], verts[i_max])


def convex_order_extremes(grid: SupportGrid, mean: float) -> tuple[Pmf, Pmf]:
    """Least and most dispersed vertices in the convex order.

    Returns ``(low, up)``: ``low`` is the two-point measure on the grid pair
    bracketing the mean (the point mass when the mean is a grid point) and
    ``up`` the two-point measure on the outermost pair.  For every convex
    phi and every Q in the polytope, E^low[phi] <= E^Q[phi] <= E^up[phi].
    """
    pts = grid.points
    gens = enumerate_generators(grid, mean)  # validates the mean range
    if gens.degenerate is not None:
        low = gens.degenerate
        if mean == pts[0] or mean == pts[-1]:
            return low, low
    else:
        j2 = int(np.searchsorted(pts, mean))
        low = Pmf(grid, _two_point_probs(pts, mean, j2 - 1, j2))
    up = Pmf(grid, _two_point_probs(pts, mean, 0, len(grid) - 1))
    return low, up


def model_risk(grid: SupportGrid, mean: float, phi_values: Sequence[float],
               measures: Optional[Iterable[Pmf]] = None) -> float:
    """Price spread sup E[phi] - inf E[phi] over a class of measures.

    With ``measures=None`` the class is the whole polytope D(grid, mean) and
    the spread comes from :func:`expectation_bounds`.  Otherwise the spread
    is taken over the given measures (all on ``grid``).
    """
    if measures is None:
        b = expectation_bounds(grid, mean, phi_values)
        return b.upper - b.lower
    phi = np.asarray(phi_values, dtype=np.float64)
    vals = []
    for q in measures:
        if q.grid != grid:
            raise GridMismatch("measure lives on a different grid")
        vals.append(q.expectation(phi))
    if not vals:
        raise ValueError("measure class is empty")
    return float(max(vals) - min(vals))
