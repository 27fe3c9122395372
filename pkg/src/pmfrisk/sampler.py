"""Uniform sampling from the pmf polytope.

The polytope D(Y, mu) is embedded in an orthonormal affine chart of its
hull (dimension d-2 when the mean is strictly between two grid points) and
split into simplices.  Sampling draws a simplex with probability
proportional to its volume, then a uniform barycentric point via normalized
exponential spacings; a seeded numpy Generator makes batches reproducible.

The triangulation uses the structure of the vertex set instead of a
computational-geometry library.  Vertices are the two-point measures on
pairs (low point, high point) from Lo x Hi, the grid points below and above
the mean.  Rescaling the mass deviations q |-> ((mu-y_l) q_l, (y_h-mu) q_h)
divided by their common total maps the polytope projectively onto the
product of the Lo- and Hi-simplices, carrying vertices to vertices; the
staircase triangulation of that product (one simplex per monotone lattice
path through the pair indices) therefore pulls back to a triangulation of
the polytope.  When the mean sits exactly on a grid point, the point mass
there is the apex of a pyramid over the product part and joins every
simplex.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .errors import DegeneratePolytope, DimensionMismatch, EmptyBatch
from .polytope import GeneratorSet, Pmf, SupportGrid

RANK_TOL = 1e-10   # relative singular-value cutoff for the hull dimension


@dataclass(frozen=True)
class AffineChart:
    """Orthonormal chart of the polytope's affine hull.

    ``origin`` is one vertex, ``basis`` holds k orthonormal direction
    vectors (rows), and ``vertex_coords`` the chart coordinates of every
    polytope vertex in :class:`GeneratorSet` order.
    """

    origin: np.ndarray
    basis: np.ndarray
    vertex_coords: np.ndarray

    @property
    def dim(self) -> int:
        return int(self.basis.shape[0])

    def to_chart(self, probs: np.ndarray) -> np.ndarray:
        return (np.asarray(probs) - self.origin) @ self.basis.T

    def from_chart(self, coords: np.ndarray) -> np.ndarray:
        return self.origin + np.asarray(coords) @ self.basis


def build_chart(gens: GeneratorSet) -> AffineChart:
    """Chart of the hull of the polytope's vertices.

    Raises
    ------
    DegeneratePolytope
        If the vertex set is a single point (complete-market case), so the
        hull has dimension zero.
    """
    verts = gens.vertex_matrix()
    if verts.shape[0] < 2:
        raise DegeneratePolytope("polytope is a single pmf; nothing to chart")
    diffs = verts[1:] - verts[0]
    _, svals, vh = np.linalg.svd(diffs, full_matrices=False)
    rank = int(np.sum(svals > RANK_TOL * svals[0])) if svals[0] > 0 else 0
    if rank == 0:
        raise DegeneratePolytope("polytope vertices coincide; nothing to chart")
    basis = vh[:rank]
    coords = (verts - verts[0]) @ basis.T
    return AffineChart(origin=verts[0], basis=basis, vertex_coords=coords)


@dataclass(frozen=True)
class SimplexPartition:
    """Simplicial partition of the polytope.

    ``simplices`` lists vertex-index tuples into ``gens.vertices`` (so an
    index equal to the generator count refers to the degenerate point mass),
    each of size chart-dim + 1; ``volumes`` holds the chart-space volumes.
    """

    gens: GeneratorSet
    chart: AffineChart
    simplices: tuple[tuple[int, ...], ...]
    volumes: np.ndarray

    @property
    def total_volume(self) -> float:
        return float(self.volumes.sum())

    def vertex_pmf_matrix(self) -> np.ndarray:
        return self.gens.vertex_matrix()


def _monotone_paths(m: int, n: int) -> list[tuple[tuple[int, int], ...]]:
    """All monotone lattice paths from (0, 0) to (m-1, n-1)."""
    paths: list[tuple[tuple[int, int], ...]] = []
    stack: list[tuple[tuple[int, int], ...]] = [((0, 0),)]
    while stack:
        path = stack.pop()
        l, h = path[-1]
        if l == m - 1 and h == n - 1:
            paths.append(path)
            continue
        if l < m - 1:
            stack.append(path + ((l + 1, h),))
        if h < n - 1:
            stack.append(path + ((l, h + 1),))
    paths.sort()
    return paths


def _simplex_volume(coords: np.ndarray) -> float:
    """Volume of the simplex spanned by (k+1, k) chart coordinates."""
    edges = coords[1:] - coords[0]
    k = edges.shape[0]
    det = np.linalg.det(edges)
    return abs(det) / float(math.factorial(k))


def triangulate(gens: GeneratorSet, chart: AffineChart) -> SimplexPartition:
    """Split the polytope into simplices on its own vertices.

    One simplex per monotone path through the (low, high) pair indices;
    the degenerate point mass, when present, is appended to every simplex
    as the pyramid apex.
    """
    pairs = [g.pair for g in gens.generators]
    if not pairs:
        raise DegeneratePolytope("no two-point vertices; nothing to triangulate")
    lo = sorted({p[0] for p in pairs})
    hi = sorted({p[1] for p in pairs})
    index = {(j1, j2): i for i, (j1, j2) in enumerate(pairs)}
    if len(index) != len(lo) * len(hi):
        raise ValueError("generator set does not cover all straddling pairs")

    apex = (len(pairs),) if gens.degenerate is not None else ()
    simplices = []
    for path in _monotone_paths(len(lo), len(hi)):
        ids = tuple(index[(lo[l], hi[h])] for l, h in path) + apex
        simplices.append(ids)

    k = chart.dim
    vols = np.empty(len(simplices))
    for i, ids in enumerate(simplices):
        if len(ids) != k + 1:
            raise DegeneratePolytope(
                f"simplex size {len(ids)} does not match chart dimension {k}")
        vols[i] = _simplex_volume(chart.vertex_coords[list(ids)])
    if np.any(vols <= 0.0):
        raise DegeneratePolytope("triangulation produced a flat simplex")
    return SimplexPartition(gens, chart, tuple(simplices), vols)


@dataclass(frozen=True, eq=False)
class SampleBatch:
    """Batch of sampled pmfs stored as a (count, d) matrix."""

    grid: SupportGrid
    matrix: np.ndarray
    seed: int

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.float64)
        if m.ndim != 2 or m.shape[1] != len(self.grid):
            raise DimensionMismatch("matrix must be (count, grid size)")
        object.__setattr__(self, "matrix", m)

    def __len__(self) -> int:
        return int(self.matrix.shape[0])

    def pmf(self, i: int) -> Pmf:
        return Pmf(self.grid, self.matrix[i])

    def to_csv(self, path, stats: Optional[dict] = None,
               descending: bool = False) -> None:
        """Write one row per pmf: probability columns q1..qd plus one
        column per attached statistic.  ``descending`` reverses the
        probability columns to the market (descending-state) order."""
        stats = stats or {}
        for name, vals in stats.items():
            if len(vals) != len(self):
                raise DimensionMismatch(f"statistic {name!r} length mismatch")
        d = len(self.grid)
        header = [f"q{j + 1}" for j in range(d)] + list(stats)
        mat = self.matrix[:, ::-1] if descending else self.matrix
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(",".join(header) + "\n")
            for i in range(len(self)):
                row = [format(x, ".17g") for x in mat[i]]
                row += [format(float(stats[name][i]), ".17g") for name in stats]
                fh.write(",".join(row) + "\n")


def sample_uniform(partition: SimplexPartition, count: int, seed: int) -> SampleBatch:
    """Uniform iid draws from the polytope.

    Volume-weighted simplex selection, then uniform barycentric weights
    from normalized exponential spacings, mapped straight to probability
    space (barycentric weights are chart-independent).
    """
    if count < 0:
        raise ValueError("count must be >= 0")
    rng = np.random.default_rng(seed)
    vols = partition.volumes
    cum = np.cumsum(vols)
    if cum[-1] <= 0.0:
        raise DegeneratePolytope("partition has zero total volume")

    verts = partition.vertex_pmf_matrix()
    simp_verts = verts[np.array([list(s) for s in partition.simplices])]
    sel = np.searchsorted(cum, rng.random(count) * cum[-1], side="right")
    sel = np.minimum(sel, len(vols) - 1)
    spacings = rng.standard_exponential((count, simp_verts.shape[1]))
    matrix = kernels.barycentric_points(simp_verts, sel, spacings)
    return SampleBatch(partition.gens.grid, matrix, int(seed))


def sample_polytope(gens: GeneratorSet, count: int, seed: int) -> SampleBatch:
    """Sample the polytope of a generator set, handling the degenerate case.

    A single-vertex set (complete market, d = 2) has volume zero; the batch
    is then ``count`` copies of the unique pmf.
    """
    verts = gens.vertices
    if len(verts) == 1:
        matrix = np.tile(verts[0].probs, (max(count, 0), 1))
        return SampleBatch(gens.grid, matrix, int(seed))
    chart = build_chart(gens)
    partition = triangulate(gens, chart)
    return sample_uniform(partition, count, seed)


class EmpiricalCdf:
    """Right-continuous empirical distribution function of a statistic."""

    def __init__(self, values: Sequence[float]):
        vals = np.sort(np.asarray(values, dtype=np.float64))
        if vals.size == 0:
            raise EmptyBatch("empirical cdf needs at least one value")
        self._values = vals

    def __call__(self, t) -> np.ndarray | float:
        idx = np.searchsorted(self._values, t, side="right")
        out = idx / self._values.size
        return float(out) if np.isscalar(t) else out

    def quantile(self, q) -> np.ndarray | float:
        return np.quantile(self._values, q)

    @property
    def values(self) -> np.ndarray:
        return self._values.copy()


def empirical_cdf(batch: SampleBatch, statistic: Sequence[float]) -> EmpiricalCdf:
    """Empirical cdf of a per-sample statistic attached to a batch."""
    if len(batch) == 0:
        raise EmptyBatch("batch has no samples")
    stat = np.asarray(statistic, dtype=np.float64)
    if stat.shape != (len(batch),):
        raise DimensionMismatch("statistic length must equal the batch size")
    return EmpiricalCdf(stat)
