"""Sections: manifold-valued-free chart families of sampled fields.

A section stores one sampled field per chart, on the chart's witness
window, with values agreeing across overlaps.  Gluing realizes the global
object through the atlas partition of unity; the Hilbert inner product
sums per-chart quotient-space surrogates built from minimum-norm
extensions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .atlas import Atlas
from .errors import (
    CoverageError,
    ChartDomainError,
    IncompatibleSectionError,
    InputError,
    ShapeMismatchError,
)
from .fields import GridDomain, SampledField, same_grid
from .sobolev import check_convention, check_order, min_norm_extension, hs_inner

DEFAULT_TOLERANCE = 1e-9

# Node budgets for the quotient-norm surrogate inner product; the
# extension cutoff is twice the per-axis node count.
EXTENSION_NODES_1D = 24
EXTENSION_NODES_2D = 12


def _same_atlas(a: Atlas, b: Atlas) -> bool:
    if a is b:
        return True
    return (
        a.name == b.name
        and a.m == b.m
        and a.lattice_resolution == b.lattice_resolution
        and a.chart_count == b.chart_count
        and all(
            np.array_equal(x.offset, y.offset)
            and x.half_width == y.half_width
            and x.window_half == y.window_half
            for x, y in zip(a.charts, b.charts)
        )
    )


def compatibility_defect(
    pieces,
    atlas: Atlas,
    per_axis: int = 24,
    return_worst: bool = False,
):
    """Largest disagreement between chart pieces over sampled overlaps.

    Pieces are evaluated at shared manifold points through their own chart
    coordinates by interpolation; the defect is the max over points and
    chart pairs of the value difference (sup over components).
    """
    pieces = tuple(pieces)
    if len(pieces) != atlas.chart_count:
        raise ShapeMismatchError("one piece per chart required")
    worst = 0.0
    worst_point = None
    for i in range(atlas.chart_count):
        for j in range(i + 1, atlas.chart_count):
            pts = atlas.overlap_samples(i, j, per_axis)
            if pts.size == 0:
                continue
            vi = pieces[i].interpolate(atlas.to_chart(i, pts))
            vj = pieces[j].interpolate(atlas.to_chart(j, pts))
            diff = np.max(np.abs(vi - vj), axis=1)
            k = int(np.argmax(diff))
            if diff[k] > worst:
                worst = float(diff[k])
                worst_point = (i, j, pts[k].tolist())
    if return_worst:
        return worst, worst_point
    return worst


@dataclass(frozen=True, eq=False)
class Section:
    """Compatible chart family of sampled fields over an atlas."""

    atlas: Atlas
    pieces: tuple[SampledField, ...]
    tolerance: float = DEFAULT_TOLERANCE
    interpolation: str = "local-poly-10"

    def __post_init__(self):
        object.__setattr__(self, "pieces", tuple(self.pieces))
        if len(self.pieces) != self.atlas.chart_count:
            raise ShapeMismatchError("one piece per chart required")
        n = self.pieces[0].components
        for c, p in zip(self.atlas.charts, self.pieces):
            if p.components != n:
                raise ShapeMismatchError("pieces disagree on component count")
            if not same_grid(p.domain, c.window):
                raise InputError(
                    f"piece for chart {c.index} is not sampled on its window"
                )
        if self.tolerance <= 0:
            raise InputError("tolerance must be positive")
        defect, where = compatibility_defect(
            self.pieces, self.atlas, return_worst=True
        )
        if defect > self.tolerance:
            raise IncompatibleSectionError(
                f"overlap defect {defect:.3e} exceeds tolerance "
                f"{self.tolerance:.1e} near charts {where[0]}/{where[1]} at "
                f"point {where[2]}"
            )

    @property
    def components(self) -> int:
        return self.pieces[0].components

    def _binary(self, other: "Section", op) -> "Section":
        if not _same_atlas(self.atlas, other.atlas):
            raise InputError("sections live on different atlases")
        new = tuple(op(a, b) for a, b in zip(self.pieces, other.pieces))
        return Section(self.atlas, new, max(self.tolerance, other.tolerance))

    def __add__(self, other):
        return self._binary(other, lambda a, b: a + b)

    def __sub__(self, other):
        return self._binary(other, lambda a, b: a - b)

    def scaled(self, factor: float) -> "Section":
        return Section(
            self.atlas, tuple(p.scaled(factor) for p in self.pieces), self.tolerance
        )

    def sup_norm(self) -> float:
        """Largest Euclidean value norm over all stored nodes."""
        return max(
            float(np.linalg.norm(p.values, axis=1).max()) for p in self.pieces
        )


def section_from_function(
    atlas: Atlas, fn, tolerance: float = DEFAULT_TOLERANCE
) -> Section:
    """Sample a global function of manifold points into chart pieces.

    ``fn`` maps angle arrays (Q, m) to value arrays (Q, n).
    """
    pieces = []
    for c in atlas.charts:
        theta = c.from_chart(c.window.nodes())
        vals = np.asarray(fn(theta), dtype=float)
        if vals.ndim == 1:
            vals = vals[:, None]
        pieces.append(SampledField(c.window, vals))
    return Section(atlas, tuple(pieces), tolerance)


def random_section(
    atlas: Atlas,
    components: int,
    rng: np.random.Generator,
    order: int = 3,
    decay: float = 2.0,
    amplitude: float = 1.0,
) -> Section:
    """Random smooth section from a low-order trigonometric polynomial."""
    m = atlas.m
    width = 2 * order + 1
    shape = (components,) + (width,) * m
    coef = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    k = np.arange(-order, order + 1, dtype=float)
    k2 = k**2 if m == 1 else k[:, None] ** 2 + k[None, :] ** 2
    coef *= amplitude * (1.0 + k2) ** (-decay / 2.0)

    def fn(theta):
        kk = np.arange(-order, order + 1)
        if m == 1:
            phase = np.exp(1j * np.outer(theta[:, 0], kk))
            return (phase @ coef.T).real
        p0 = np.exp(1j * np.outer(theta[:, 0], kk))
        p1 = np.exp(1j * np.outer(theta[:, 1], kk))
        tmp = np.einsum("qa,nab->qnb", p0, coef)
        return np.einsum("qb,qnb->qn", p1, tmp).real

    return section_from_function(atlas, fn)


def theta_embed(section: Section) -> tuple[SampledField, ...]:
    """Chart pieces of a section (the embedding into the product space)."""
    return section.pieces


def glue(pieces, atlas: Atlas, tolerance: float = DEFAULT_TOLERANCE) -> Section:
    """Assemble compatible chart pieces into a section.

    The value on chart j's window is the partition-of-unity combination
    ``sum_i h_i(p) * piece_i(phi_i(p))`` over the manifold point p of each
    node, which is linear in the pieces and reproduces compatible input
    at the nodes.
    """
    pieces = tuple(pieces)
    if len(pieces) != atlas.chart_count:
        raise ShapeMismatchError("one piece per chart required")
    defect, where = compatibility_defect(pieces, atlas, return_worst=True)
    if defect > tolerance:
        raise IncompatibleSectionError(
            f"cannot glue: overlap defect {defect:.3e} exceeds "
            f"{tolerance:.1e} near charts {where[0]}/{where[1]} at point "
            f"{where[2]}"
        )
    n = pieces[0].components
    out = []
    for c in atlas.charts:
        theta = c.from_chart(c.window.nodes())
        weights = atlas.partition_weights(theta)
        vals = np.zeros((theta.shape[0], n))
        for i, piece in enumerate(pieces):
            w = weights[:, i]
            hit = w > 0.0
            if not np.any(hit):
                continue
            vals[hit] += w[hit, None] * piece.interpolate(
                atlas.to_chart(i, theta[hit])
            )
        out.append(SampledField(c.window, vals))
    return Section(atlas, tuple(out), tolerance)


def point_eval(section: Section, theta: np.ndarray) -> np.ndarray:
    """Evaluate a section at manifold points through the deepest chart."""
    pts = np.atleast_2d(np.asarray(theta, dtype=float))
    depths = np.column_stack(
        [c.window_depth(pts) for c in section.atlas.charts]
    )
    best = depths.argmax(axis=1)
    if depths[np.arange(pts.shape[0]), best].min() <= 0.0:
        bad = pts[int(np.argmin(depths.max(axis=1)))]
        raise CoverageError(f"point {bad} not inside any witness window")
    out = np.empty((pts.shape[0], section.components))
    for j in np.unique(best):
        sel = best == j
        x = section.atlas.to_chart(j, pts[sel])
        out[sel] = section.pieces[j].interpolate(x)
    return out


def hilbert_inner(
    a: Section,
    b: Section,
    s,
    convention: str = "paper",
    max_nodes_per_axis: int | None = None,
    return_detail: bool = False,
):
    """Sum of per-chart quotient inner products of two sections.

    Each chart piece is (sub)sampled to at most ``max_nodes_per_axis``
    nodes per axis (default EXTENSION_NODES_1D on curves, smaller on
    surfaces), extended to the band-limited field of minimal Sobolev norm
    matching those nodes, and the extensions are paired with
    :func:`hs_inner`.  The extension cutoff doubles the node count per
    axis, which keeps the systems well conditioned; it is reported in the
    detail dictionary.
    """
    s = check_order(s)
    check_convention(convention)
    if not _same_atlas(a.atlas, b.atlas):
        raise InputError("sections live on different atlases")
    if a.components != b.components:
        raise ShapeMismatchError("component counts differ")
    if max_nodes_per_axis is None:
        max_nodes_per_axis = (
            EXTENSION_NODES_1D if a.atlas.m == 1 else EXTENSION_NODES_2D
        )
    total = 0.0
    detail = []
    for j, (pa, pb) in enumerate(zip(a.pieces, b.pieces)):
        ga, modes = _thin_for_extension(pa, max_nodes_per_axis)
        gb, _ = _thin_for_extension(pb, max_nodes_per_axis)
        ea = min_norm_extension(ga, s, modes, convention)
        eb = min_norm_extension(gb, s, modes, convention)
        term = hs_inner(ea, eb, s, convention)
        total += term
        detail.append({"chart": j, "modes": modes, "term": term})
    if return_detail:
        return total, detail
    return total


def _thin_for_extension(piece: SampledField, max_nodes_per_axis: int):
    """Stride-subsample a window piece so the extension system is square."""
    grid = piece.domain
    lat = piece.lattice_values()
    take = []
    for d in range(grid.m):
        count = grid.axis_counts[d]
        stride = max(1, int(np.ceil(count / max_nodes_per_axis)))
        take.append(np.arange(0, count, stride))
    if grid.m == 1:
        sub = lat[take[0]]
    else:
        sub = lat[np.ix_(take[0], take[1])]
    counts = [t.size for t in take]
    # Cutoff equal to the node count doubles the coefficients per axis.
    # A square system on a window arc is catastrophically ill-conditioned
    # (~1e9 already at 24 nodes), while this 2x margin keeps the condition
    # number in the tens, so the surrogate inner product stays bilinear
    # to rounding accuracy.
    modes = max(counts)
    idx = tuple(grid.axis_indices[d][take[d]] for d in range(grid.m))
    thin = GridDomain(grid.m, grid.resolution, grid.window, idx)
    vals = sub.reshape(thin.node_count, piece.components)
    return SampledField(thin, np.ascontiguousarray(vals)), modes


class OpenBall:
    """Open Euclidean ball in value space."""

    def __init__(self, center, radius: float):
        self.center = np.atleast_1d(np.asarray(center, dtype=float))
        self.radius = float(radius)
        if self.radius <= 0:
            raise InputError("ball radius must be positive")

    def distance_to_complement(self, values: np.ndarray) -> np.ndarray:
        d = self.radius - np.linalg.norm(values - self.center, axis=1)
        return np.maximum(d, 0.0)


class OpenBox:
    """Open axis-aligned box in value space."""

    def __init__(self, lo, hi):
        self.lo = np.atleast_1d(np.asarray(lo, dtype=float))
        self.hi = np.atleast_1d(np.asarray(hi, dtype=float))
        if np.any(self.hi <= self.lo):
            raise InputError("box upper bounds must exceed lower bounds")

    def distance_to_complement(self, values: np.ndarray) -> np.ndarray:
        d = np.minimum(values - self.lo, self.hi - values).min(axis=1)
        return np.maximum(d, 0.0)


class BallComplement:
    """Open complement of a closed Euclidean ball."""

    def __init__(self, center, radius: float):
        self.center = np.atleast_1d(np.asarray(center, dtype=float))
        self.radius = float(radius)
        if self.radius <= 0:
            raise InputError("ball radius must be positive")

    def distance_to_complement(self, values: np.ndarray) -> np.ndarray:
        d = np.linalg.norm(values - self.center, axis=1) - self.radius
        return np.maximum(d, 0.0)


@dataclass(frozen=True)
class OpennessMargin:
    """Worst-case distance of section values to the complement of a set."""

    margin: float

    @property
    def inside(self) -> bool:
        return self.margin > 0.0


def open_margin(section: Section, target) -> OpennessMargin:
    worst = np.inf
    for p in section.pieces:
        d = target.distance_to_complement(p.values)
        worst = min(worst, float(d.min()))
    return OpennessMargin(max(worst, 0.0))


def pushforward(f, section: Section, target=None) -> Section:
    """Apply a smooth map fiberwise: node values f(p, gamma(p)).

    ``f`` receives manifold points (K, m) and values (K, n), returning
    (K, p).  If ``target`` is given, the section values must sit strictly
    inside it (positive openness margin).
    """
    if target is not None:
        om = open_margin(section, target)
        if not om.inside:
            raise ChartDomainError(
                "section values touch the complement of the target set"
            )
    out = []
    for c, piece in zip(section.atlas.charts, section.pieces):
        theta = c.from_chart(c.window.nodes())
        vals = np.asarray(f(theta, piece.values), dtype=float)
        if vals.ndim == 1:
            vals = vals[:, None]
        out.append(SampledField(c.window, vals))
    return Section(section.atlas, tuple(out), section.tolerance)


def pushforward_derivative(d2f, gamma: Section, eta: Section) -> Section:
    """Fiber derivative of a pushforward along a direction section.

    ``d2f`` receives (points, gamma values, eta values) and returns the
    derivative values; the result is the section
    ``p -> d2f(p, gamma(p), eta(p))``.
    """
    if not _same_atlas(gamma.atlas, eta.atlas):
        raise InputError("sections live on different atlases")
    out = []
    for c, pg, pe in zip(gamma.atlas.charts, gamma.pieces, eta.pieces):
        theta = c.from_chart(c.window.nodes())
        vals = np.asarray(d2f(theta, pg.values, pe.values), dtype=float)
        if vals.ndim == 1:
            vals = vals[:, None]
        out.append(SampledField(c.window, vals))
    return Section(gamma.atlas, tuple(out), gamma.tolerance)


def split_components(section: Section, first: int):
    """Split a section of a product target into its two factors, exactly."""
    if not 0 < first < section.components:
        raise InputError("split index must be interior")
    left = tuple(
        SampledField(p.domain, np.ascontiguousarray(p.values[:, :first]))
        for p in section.pieces
    )
    right = tuple(
        SampledField(p.domain, np.ascontiguousarray(p.values[:, first:]))
        for p in section.pieces
    )
    return (
        Section(section.atlas, left, section.tolerance),
        Section(section.atlas, right, section.tolerance),
    )


def merge_components(a: Section, b: Section) -> Section:
    """Inverse of :func:`split_components` (exact concatenation)."""
    if not _same_atlas(a.atlas, b.atlas):
        raise InputError("sections live on different atlases")
    pieces = tuple(
        SampledField(pa.domain, np.ascontiguousarray(np.hstack([pa.values, pb.values])))
        for pa, pb in zip(a.pieces, b.pieces)
    )
    return Section(a.atlas, pieces, max(a.tolerance, b.tolerance))
