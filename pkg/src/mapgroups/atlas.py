"""Finite atlases with witness windows on the circle and the 2-torus.

Manifold points are canonical angles in [0, 2*pi)^m.  Chart j centers the
arc (or box) around its offset: chart coordinates are
``x = pi + wrap(theta - offset_j)`` with ``wrap`` the principal value in
(-pi, pi], so every codomain is the box (pi - half_width, pi + half_width)^m
inside the fundamental domain of the coordinate torus.  All transitions are
(piecewise) translations with unit Jacobian.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cutoffs import bump_profile
from .errors import ChartDomainError, CoverageError, InputError
from .fields import TWO_PI, GridDomain
from .maps import Diffeo

PI = np.pi


def wrap_angle(theta: np.ndarray) -> np.ndarray:
    """Principal value in (-pi, pi]."""
    return PI - np.mod(PI - np.asarray(theta, dtype=float), TWO_PI)


@dataclass(frozen=True, eq=False)
class Chart:
    """One chart: an offset arc/box with a strictly smaller witness window."""

    index: int
    offset: np.ndarray
    half_width: float
    window_half: float
    window: GridDomain

    def __post_init__(self):
        off = np.atleast_1d(np.asarray(self.offset, dtype=float))
        object.__setattr__(self, "offset", off)
        if not 0.0 < self.window_half < self.half_width < PI:
            raise InputError(
                "need 0 < window_half < half_width < pi for a proper chart"
            )
        want = tuple(
            (PI - self.window_half, PI + self.window_half) for _ in range(off.size)
        )
        if self.window.window != want:
            raise InputError("witness window box does not match window_half")

    @property
    def m(self) -> int:
        return self.offset.size

    def to_chart(self, theta: np.ndarray) -> np.ndarray:
        th = np.atleast_2d(np.asarray(theta, dtype=float))
        return PI + wrap_angle(th - self.offset)

    def from_chart(self, x: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(x, dtype=float))
        return np.mod(pts - PI + self.offset, TWO_PI)

    def codomain(self) -> tuple[tuple[float, float], ...]:
        return tuple((PI - self.half_width, PI + self.half_width) for _ in range(self.m))

    def in_codomain(self, x: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(x, dtype=float))
        return np.all(np.abs(pts - PI) < self.half_width, axis=1)

    def window_depth(self, theta: np.ndarray) -> np.ndarray:
        """Distance of phi_j(theta) to the witness window boundary (signed)."""
        x = self.to_chart(theta)
        return self.window_half - np.max(np.abs(x - PI), axis=1)


@dataclass(frozen=True, eq=False)
class Atlas:
    """Finite chart collection with partition bumps subordinate to windows."""

    name: str
    m: int
    charts: tuple[Chart, ...]
    plateau: float = 0.5
    lattice_resolution: int = 257

    def __post_init__(self):
        if self.m not in (1, 2):
            raise InputError("atlas dimension must be 1 or 2")
        if len(self.charts) < 2:
            raise InputError("an atlas needs at least two charts")
        for c in self.charts:
            if c.m != self.m:
                raise InputError("chart dimension mismatch")

    @property
    def chart_count(self) -> int:
        return len(self.charts)

    def to_chart(self, j: int, theta: np.ndarray) -> np.ndarray:
        return self.charts[j].to_chart(theta)

    def from_chart(self, j: int, x: np.ndarray) -> np.ndarray:
        return self.charts[j].from_chart(x)

    def transition_point(self, i: int, j: int, x: np.ndarray) -> np.ndarray:
        """Transition phi_i o phi_j^(-1) at chart-j coordinates x."""
        pts = np.atleast_2d(np.asarray(x, dtype=float))
        cj, ci = self.charts[j], self.charts[i]
        ok_j = cj.in_codomain(pts)
        if not np.all(ok_j):
            bad = pts[int(np.argmin(ok_j))]
            raise ChartDomainError(f"point {bad} outside chart {j} codomain")
        out = ci.to_chart(cj.from_chart(pts))
        ok_i = ci.in_codomain(out)
        if not np.all(ok_i):
            bad = pts[int(np.argmin(ok_i))]
            raise ChartDomainError(
                f"point {bad} in chart {j} does not meet chart {i}"
            )
        return out

    def bump_values(self, theta: np.ndarray) -> np.ndarray:
        """Unnormalized chart bumps at manifold points, shape (Q, charts).

        Bump j is the tensor bump in chart-j coordinates supported exactly
        on the witness window, so subordination is structural.
        """
        th = np.atleast_2d(np.asarray(theta, dtype=float))
        cols = []
        for c in self.charts:
            x = c.to_chart(th)
            r = np.abs(x - PI) / c.window_half
            vals = np.ones(th.shape[0])
            for d in range(self.m):
                vals *= bump_profile(r[:, d], self.plateau)
            cols.append(vals)
        return np.column_stack(cols)

    def partition_weights(self, theta: np.ndarray) -> np.ndarray:
        """Partition of unity subordinate to the witness windows."""
        b = self.bump_values(theta)
        total = b.sum(axis=1)
        if np.any(total <= 0.0):
            th = np.atleast_2d(np.asarray(theta, dtype=float))
            bad = th[int(np.argmin(total))]
            raise CoverageError(f"point {bad} not covered by any witness window")
        return b / total[:, None]

    def manifold_grid(self, per_axis: int) -> np.ndarray:
        """Deterministic dense sample of the manifold, shape (Q, m)."""
        ax = TWO_PI * (np.arange(per_axis) + 0.5) / per_axis
        if self.m == 1:
            return ax[:, None]
        xx, yy = np.meshgrid(ax, ax, indexing="ij")
        return np.column_stack([xx.ravel(), yy.ravel()])

    def _axis_overlap_arcs(self, i: int, j: int, d: int):
        """Intersection arcs of two witness arcs on coordinate axis d.

        Arcs of equal half-width intersect in up to two arcs: one around
        the midpoint of the centers and one around its antipode.  Returns
        (center, half_width) pairs for the nonempty ones.
        """
        ci, cj = self.charts[i], self.charts[j]
        h = min(ci.window_half, cj.window_half)
        delta = abs(float(wrap_angle(cj.offset[d] - ci.offset[d])))
        mid = float(ci.offset[d]) + 0.5 * delta
        arcs = []
        if h - 0.5 * delta > 0:
            arcs.append((mid, h - 0.5 * delta))
        if h - PI + 0.5 * delta > 0:
            arcs.append((mid + PI, h - PI + 0.5 * delta))
        return arcs

    def overlap_samples(
        self, i: int, j: int, per_axis: int = 33, margin: float | None = None
    ) -> np.ndarray:
        """Manifold points lying inside both witness windows.

        The pairwise overlap is a product of per-axis arc intersections,
        each sampled uniformly.  ``margin`` keeps the samples away from
        the window edges (defaulting to two lattice cells) but is reduced
        on bands too thin for it, so genuine overlaps always yield points.
        """
        if margin is None:
            margin = 2.0 * TWO_PI / self.lattice_resolution
        per_arc = []
        for d in range(self.m):
            arcs = self._axis_overlap_arcs(i, j, d)
            if not arcs:
                return np.empty((0, self.m))
            pts = []
            for center, half in arcs:
                inset = min(margin, 0.45 * half)
                pts.append(np.linspace(center - half + inset,
                                       center + half - inset, per_axis))
            per_arc.append(np.mod(np.concatenate(pts), TWO_PI))
        if self.m == 1:
            return per_arc[0][:, None]
        xx, yy = np.meshgrid(per_arc[0], per_arc[1], indexing="ij")
        return np.column_stack([xx.ravel(), yy.ravel()])


def transition(a: Atlas, i: int, j: int) -> Diffeo:
    """Transition map as a Diffeo (piecewise translation, unit Jacobian)."""
    ci, cj = a.charts[i], a.charts[j]
    eye = np.eye(a.m)

    def fwd(p):
        return a.transition_point(i, j, p)

    def inv(p):
        return a.transition_point(j, i, p)

    def jac(p):
        return np.broadcast_to(eye, (np.atleast_2d(p).shape[0], a.m, a.m)).copy()

    return Diffeo(fwd, inv, jac, cj.codomain(), ci.codomain())


def _make_chart(index, offset, half_width, window_half, resolution, m) -> Chart:
    window = GridDomain.box(
        tuple((PI - window_half, PI + window_half) for _ in range(m)), resolution
    )
    return Chart(index, np.asarray(offset, dtype=float), half_width, window_half, window)


def circle_two_charts(
    resolution: int = 257,
    half_width: float = 2.0,
    window_half: float = 1.7,
    plateau: float = 0.5,
) -> Atlas:
    """Two arcs offset by pi; transitions are translations by +-pi."""
    if window_half <= PI / 2:
        raise InputError("window_half must exceed pi/2 so two arcs cover the circle")
    charts = tuple(
        _make_chart(k, [off], half_width, window_half, resolution, 1)
        for k, off in enumerate((0.0, PI))
    )
    return Atlas("circle2", 1, charts, plateau, resolution)


def torus_four_charts(
    resolution: int = 129,
    half_width: float = 2.0,
    window_half: float = 1.7,
    plateau: float = 0.5,
) -> Atlas:
    """Product of two 2-chart circles: offsets (0,0), (pi,0), (0,pi), (pi,pi)."""
    if window_half <= PI / 2:
        raise InputError("window_half must exceed pi/2 for a four-chart cover")
    offsets = ((0.0, 0.0), (PI, 0.0), (0.0, PI), (PI, PI))
    charts = tuple(
        _make_chart(k, off, half_width, window_half, resolution, 2)
        for k, off in enumerate(offsets)
    )
    return Atlas("torus4", 2, charts, plateau, resolution)


BUILTIN_ATLASES = {"circle2": circle_two_charts, "torus4": torus_four_charts}


def builtin_atlas(name: str, **kwargs) -> Atlas:
    if name not in BUILTIN_ATLASES:
        raise InputError(
            f"unknown atlas {name!r}; available: {sorted(BUILTIN_ATLASES)}"
        )
    return BUILTIN_ATLASES[name](**kwargs)


@dataclass(frozen=True)
class AtlasReport:
    cover_margin: float
    inverse_residual: float
    cocycle_residual: float
    partition_residual: float
    enlarged_window_ok: bool
    passed: bool


def enlarged_window(a: Atlas, j: int) -> GridDomain:
    """A strictly larger witness box still inside the chart codomain."""
    c = a.charts[j]
    half = c.window_half + 0.5 * (c.half_width - c.window_half)
    return GridDomain.box(
        tuple((PI - half, PI + half) for _ in range(a.m)), a.lattice_resolution
    )


def validate_atlas(
    a: Atlas,
    tol: float = 1e-9,
    cover_per_axis: int = 1024,
    overlap_per_axis: int = 64,
) -> AtlasReport:
    """Covering, inverse, cocycle, and partition checks on dense samples."""
    pts = a.manifold_grid(cover_per_axis if a.m == 1 else max(cover_per_axis // 8, 96))
    depths = np.column_stack([c.window_depth(pts) for c in a.charts])
    cover_margin = float(depths.max(axis=1).min())

    inverse_residual = 0.0
    cocycle_residual = 0.0
    for i in range(a.chart_count):
        for j in range(a.chart_count):
            if i == j:
                continue
            ov = a.overlap_samples(i, j, overlap_per_axis)
            if ov.size == 0:
                continue
            x = a.to_chart(j, ov)
            y = a.transition_point(i, j, x)
            back = a.transition_point(j, i, y)
            inverse_residual = max(inverse_residual, float(np.abs(back - x).max()))
            for k in range(a.chart_count):
                if k in (i, j):
                    continue
                deep = ov[a.charts[k].window_depth(ov) > 0.05]
                if deep.size == 0:
                    continue
                xk = a.to_chart(k, deep)
                direct = a.transition_point(i, k, xk)
                via = a.transition_point(i, j, a.transition_point(j, k, xk))
                cocycle_residual = max(
                    cocycle_residual, float(np.abs(direct - via).max())
                )

    part = a.partition_weights(pts).sum(axis=1)
    partition_residual = float(np.abs(part - 1.0).max())

    enlarged_ok = True
    try:
        for j in range(a.chart_count):
            enlarged_window(a, j)
    except InputError:
        enlarged_ok = False

    passed = (
        cover_margin > 0.0
        and inverse_residual <= tol
        and cocycle_residual <= tol
        and partition_residual <= tol
        and enlarged_ok
    )
    return AtlasReport(
        cover_margin,
        inverse_residual,
        cocycle_residual,
        partition_residual,
        enlarged_ok,
        passed,
    )


def transition_eval(a: Atlas, i: int, j: int, x: np.ndarray) -> np.ndarray:
    """Convenience wrapper mirroring ``Atlas.transition_point``."""
    return a.transition_point(i, j, x)
