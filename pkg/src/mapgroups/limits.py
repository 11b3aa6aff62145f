"""Exponent ladders, borderline decay fields, and the evolution ODE.

The ladder ``s_j = s0 + 1/j`` decreases strictly toward ``s0``; inclusions
between adjacent rungs are compact with an explicitly known spectrum.  The
decay family ``c_k = (1 + |k|^2)^(-alpha/2)`` sits in order ``s`` exactly
for ``s < 2*alpha - 1`` (one dimension, s/2-exponent weights), which gives
a sharp target for the divergence-based estimator here.

``evolve`` integrates the right-translation equation
``eta'(t) = eta(t) @ gamma(t)``, ``eta(0) = identity`` node-wise with the
classical fixed-step fourth-order scheme, interpolating the curve linearly
between its time samples.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError, NumericError, ShapeMismatchError
from .fields import BandlimitedField, hermitian_part
from .groups import (
    LOGGER,
    RELATION_DEFECT_LIMIT,
    AlgebraSection,
    GroupSection,
    _require_same_group,
)
from .sections import _same_atlas
from .sobolev import check_convention, rellich_spectrum, weight_exponent


@dataclass(frozen=True)
class SobolevLadder:
    """Strictly decreasing exponent ladder s0 + 1/j, j = 1..count."""

    s0: float
    rungs: tuple[float, ...]

    @property
    def count(self) -> int:
        return len(self.rungs)


def ladder(s0: float, count: int, m: int = 1) -> SobolevLadder:
    s0 = float(s0)
    if s0 < m / 2.0:
        raise InputError(f"ladder base must be >= m/2 = {m / 2.0}, got {s0}")
    if count < 2:
        raise InputError("a ladder needs at least two rungs")
    rungs = tuple(s0 + 1.0 / j for j in range(1, count + 1))
    return SobolevLadder(s0, rungs)


def decay_field(alpha: float, modes: int, m: int = 1) -> BandlimitedField:
    """Field with coefficients (1 + |k|^2)^(-alpha/2) (real, one component)."""
    alpha = float(alpha)
    if alpha <= 0:
        raise InputError("decay exponent must be positive")
    k = np.arange(-modes, modes + 1, dtype=float)
    k2 = k**2 if m == 1 else k[:, None] ** 2 + k[None, :] ** 2
    coeffs = ((1.0 + k2) ** (-alpha / 2.0)).astype(complex)[None]
    return BandlimitedField(m, modes, hermitian_part(coeffs), real=True)


def decay_partial_norm_sq(
    alpha: float, s: float, modes: int, convention: str = "paper"
) -> float:
    """Squared order-s norm of the decay field truncated at ``modes`` (m=1)."""
    check_convention(convention)
    k = np.arange(-modes, modes + 1, dtype=float)
    expo = weight_exponent(s, convention) - float(alpha)
    return float(np.sum((1.0 + k**2) ** expo))


def _increment_ratio(
    alpha: float,
    s: float,
    n_start: int,
    window: int,
    convention: str,
) -> float:
    """Tail growth ratio of partial sums over a geometric cutoff sequence.

    Increments of a convergent series decay geometrically along doubling
    cutoffs; for a divergent one they grow (or stall, at the borderline).
    The ratio of the last increment to the one ``window`` doublings earlier
    is < 1 exactly on the convergent side, with sharp sensitivity in s.
    """
    cuts = n_start * 2 ** np.arange(window + 1)
    sums = np.array(
        [decay_partial_norm_sq(alpha, s, int(n), convention) for n in cuts]
    )
    inc = np.diff(sums)
    if inc[0] <= 0.0:
        return 0.0
    return float(inc[-1] / inc[0])


def critical_order_estimate(
    alpha: float,
    n_start: int = 32,
    window: int = 10,
    step: float = 0.01,
    s_max: float = 8.0,
    convention: str = "paper",
) -> float:
    """Largest order whose partial norms stay bounded, located by bisection.

    The boundedness predicate is the partial-sum growth ratio over a
    doubling cutoff sequence (window ``window``): ratios below one mean
    the increments decay geometrically.  Bisection over s refines to
    ``step``.  A return of 0.0 means even order zero diverges (the field
    lies on no nonnegative rung).
    """
    alpha = float(alpha)
    if alpha <= 0:
        raise InputError("decay exponent must be positive")

    def divergent(s: float) -> bool:
        return _increment_ratio(alpha, s, n_start, window, convention) >= 1.0

    lo, hi = 0.0, float(s_max)
    if divergent(lo):
        return 0.0
    if not divergent(hi):
        return hi
    while hi - lo > step:
        mid = 0.5 * (lo + hi)
        if divergent(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class RungCompactnessReport:
    """Spectrum summary for the inclusion between adjacent rungs."""

    s_fine: float
    s_coarse: float
    modes: int
    sigma_max: float
    sigma_min: float
    decreasing: bool
    index_below_threshold: int | None
    threshold: float
    spectrum: np.ndarray


def rung_compactness_probe(
    lad: SobolevLadder,
    j: int,
    modes: int,
    m: int = 1,
    convention: str = "paper",
    threshold: float = 1e-3,
) -> RungCompactnessReport:
    """Inclusion spectrum from rung j into rung j+1 (1-based, j < count).

    The inclusion goes from the smaller exponent index to the larger one
    in the ladder order, i.e. from s_j down to s_{j+1} < s_j.
    """
    if not 1 <= j < lad.count:
        raise InputError(
            f"rung index must satisfy 1 <= j < {lad.count}, got {j}"
        )
    s_fine = lad.rungs[j - 1]
    s_coarse = lad.rungs[j]
    sig = rellich_spectrum(s_fine, s_coarse, modes, m=m, convention=convention)
    uniq = np.unique(sig)[::-1]
    below = np.nonzero(sig < threshold)[0]
    return RungCompactnessReport(
        s_fine,
        s_coarse,
        modes,
        float(sig[0]),
        float(sig[-1]),
        bool(np.all(np.diff(uniq) < 0.0)),
        int(below[0]) if below.size else None,
        threshold,
        sig,
    )


@dataclass(frozen=True, eq=False)
class TimeSampledCurve:
    """Uniformly time-sampled curve of algebra sections on [0, 1]."""

    times: np.ndarray
    sections: tuple[AlgebraSection, ...]

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "sections", tuple(self.sections))
        if t.ndim != 1 or t.size < 2:
            raise InputError("a curve needs at least two time samples")
        if t[0] != 0.0 or t[-1] != 1.0:
            raise InputError("curve must be sampled on [0, 1]")
        dt = np.diff(t)
        if np.any(dt <= 0) or not np.allclose(dt, dt[0], rtol=1e-12, atol=1e-12):
            raise InputError("time samples must be uniform and increasing")
        if len(self.sections) != t.size:
            raise ShapeMismatchError("one section per time sample required")
        first = self.sections[0]
        for sec in self.sections[1:]:
            _require_same_group(first, sec)
            if not _same_atlas(first.atlas, sec.atlas):
                raise InputError("curve sections live on different atlases")

    @property
    def group(self):
        return self.sections[0].group

    @property
    def atlas(self):
        return self.sections[0].atlas

    @property
    def resolution(self) -> int:
        return self.times.size - 1

    def shifted(self, direction: AlgebraSection, eps: float) -> "TimeSampledCurve":
        """Curve with every time sample moved by eps * direction."""
        moved = tuple(sec + direction.scaled(eps) for sec in self.sections)
        return TimeSampledCurve(self.times, moved)


def constant_curve(xi: AlgebraSection) -> TimeSampledCurve:
    return TimeSampledCurve(np.array([0.0, 1.0]), (xi, xi))


def _chart_curve_matrices(curve: TimeSampledCurve, j: int) -> np.ndarray:
    """Stack of per-time matrices for one chart, shape (T, K, d, d)."""
    return np.stack([sec.chart_matrices(j) for sec in curve.sections])


def _interp_matrices(stack: np.ndarray, times: np.ndarray, t: float) -> np.ndarray:
    """Linear-in-time interpolation of a (T, K, d, d) matrix stack."""
    t = min(max(t, 0.0), 1.0)
    pos = np.searchsorted(times, t, side="right") - 1
    pos = min(pos, times.size - 2)
    w = (t - times[pos]) / (times[pos + 1] - times[pos])
    return (1.0 - w) * stack[pos] + w * stack[pos + 1]


def evolve(
    curve: TimeSampledCurve,
    steps: int,
    defect_tol: float = 1e-8,
) -> GroupSection:
    """Integrate eta' = eta * gamma(t) from the identity over [0, 1].

    Classical fixed-step fourth-order integration, node by node; the step
    count must be at least the curve's time resolution.  Final matrices
    whose relation defect exceeds the GroupSection construction limit are
    re-projected with a log message; the returned section always satisfies
    the group relations within ``defect_tol``.
    """
    if steps < curve.resolution:
        raise InputError(
            f"need at least {curve.resolution} steps for this time grid"
        )
    group = curve.group
    h = 1.0 / steps
    pieces = []
    for j in range(curve.atlas.chart_count):
        stack = _chart_curve_matrices(curve, j)
        k_nodes = stack.shape[1]
        eta = np.broadcast_to(group.identity(), (k_nodes, group.dim, group.dim)).copy()
        for i in range(steps):
            t = i * h
            a1 = _interp_matrices(stack, curve.times, t)
            a2 = _interp_matrices(stack, curve.times, t + 0.5 * h)
            a4 = _interp_matrices(stack, curve.times, t + h)
            k1 = eta @ a1
            k2 = (eta + 0.5 * h * k1) @ a2
            k3 = (eta + 0.5 * h * k2) @ a2
            k4 = (eta + h * k3) @ a4
            eta = eta + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        defect = float(group.relation_defect(eta).max())
        if defect > RELATION_DEFECT_LIMIT:
            eta = group.project(eta)
            LOGGER.info(
                "chart %d: time-1 value drifted %.3e off %s; re-projected",
                j, defect, group.name,
            )
            defect = float(group.relation_defect(eta).max())
        if defect > defect_tol:
            raise NumericError(
                f"chart {j}: final relation defect {defect:.3e} exceeds "
                f"{defect_tol:.1e} even after projection"
            )
        pieces.append(eta)
    return GroupSection(curve.atlas, group, tuple(pieces))


def _sup_entry_gap(pieces_a, pieces_b) -> float:
    return max(
        float(np.abs(a - b).max()) for a, b in zip(pieces_a, pieces_b)
    )


def evolution_smoothness_probe(
    curve: TimeSampledCurve,
    direction: AlgebraSection,
    eps_grid=(0.04, 0.02, 0.01),
    steps: int = 64,
) -> float:
    """Log-log slope of central-difference convergence for the time-1 map.

    Central differences of ``evolve`` along a fixed direction converge at
    second order in the offset; the slope is fit against a reference
    difference at a much smaller offset.
    """
    eps = np.asarray(sorted(eps_grid, reverse=True), dtype=float)
    if eps.size < 2 or np.any(eps <= 0):
        raise InputError("need at least two positive offsets")

    def central(e: float):
        up = evolve(curve.shifted(direction, e), steps)
        dn = evolve(curve.shifted(direction, -e), steps)
        return tuple((a - b) / (2.0 * e) for a, b in zip(up.pieces, dn.pieces))

    ref = central(float(eps[-1]) / 8.0)
    gaps = np.array([_sup_entry_gap(central(float(e)), ref) for e in eps])
    if np.any(gaps <= 0):
        raise InputError("differences degenerate; offsets too small")
    slope, _ = np.polyfit(np.log(eps), np.log(gaps), 1)
    return float(slope)
