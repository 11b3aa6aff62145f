"""Matrix Lie groups with closed-form exp/log and group-valued sections.

Three groups are built in:

* ``SO3`` -- rotations of R^3, exp by the Rodrigues formula, log from the
  rotation angle; valid strictly below angle pi.
* ``SU2`` -- special unitary 2x2 matrices realified as 4x4 real matrices
  (block form [[X, -Y], [Y, X]] for X + iY).
* ``UT2`` -- invertible upper-triangular 2x2 matrices with positive
  diagonal; exp/log in closed form via divided differences.

Every group states a chart ball: ``log`` is trusted only inside radius
``q_radius`` (measured in algebra coordinates), and ``v_radius`` is small
enough that products of two exponentials stay inside the chart ball.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .atlas import Atlas
from .errors import ChartDomainError, InputError, ShapeMismatchError
from .fields import SampledField
from .sections import Section, _same_atlas, random_section

LOGGER = logging.getLogger("mapgroups.groups")

# Drift threshold above which products are re-projected onto the group.
PROJECTION_THRESHOLD = 1e-12

# Largest relation defect a GroupSection will accept at construction.
RELATION_DEFECT_LIMIT = 1e-10


@dataclass(frozen=True, eq=False)
class MatrixGroup:
    """A matrix group with a fixed algebra basis and closed-form charts."""

    name: str
    dim: int
    basis: np.ndarray
    q_radius: float
    v_radius: float
    exp_fn: Callable[[np.ndarray], np.ndarray]
    log_fn: Callable[[np.ndarray], np.ndarray]
    log_valid_fn: Callable[[np.ndarray], np.ndarray]
    invert_fn: Callable[[np.ndarray], np.ndarray]
    project_fn: Callable[[np.ndarray], np.ndarray]
    defect_fn: Callable[[np.ndarray], np.ndarray]

    @property
    def algebra_dim(self) -> int:
        return self.basis.shape[0]

    def to_matrix(self, coords: np.ndarray) -> np.ndarray:
        v = np.asarray(coords, dtype=float)
        return np.einsum("...a,aij->...ij", v, self.basis)

    def from_matrix(self, mats: np.ndarray) -> np.ndarray:
        flat = np.asarray(mats, dtype=float).reshape(mats.shape[:-2] + (-1,))
        pinv = np.linalg.pinv(self.basis.reshape(self.algebra_dim, -1).T)
        return np.einsum("ab,...b->...a", pinv, flat)

    def coord_norm(self, coords: np.ndarray) -> np.ndarray:
        return np.linalg.norm(np.asarray(coords, dtype=float), axis=-1)

    def exp(self, coords: np.ndarray) -> np.ndarray:
        return self.exp_fn(np.asarray(coords, dtype=float))

    def log(self, mats: np.ndarray) -> np.ndarray:
        return self.log_fn(np.asarray(mats, dtype=float))

    def log_valid(self, mats: np.ndarray) -> np.ndarray:
        return self.log_valid_fn(np.asarray(mats, dtype=float))

    def invert(self, mats: np.ndarray) -> np.ndarray:
        return self.invert_fn(np.asarray(mats, dtype=float))

    def project(self, mats: np.ndarray) -> np.ndarray:
        return self.project_fn(np.asarray(mats, dtype=float))

    def relation_defect(self, mats: np.ndarray) -> np.ndarray:
        return self.defect_fn(np.asarray(mats, dtype=float))

    def identity(self) -> np.ndarray:
        return np.eye(self.dim)

    def adjoint(self, g: np.ndarray, coords: np.ndarray) -> np.ndarray:
        """Ad_g in algebra coordinates: g X g^{-1} pushed back to coords."""
        x = self.to_matrix(coords)
        return self.from_matrix(g @ x @ self.invert(g))

    def bracket_coords(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        xu, xv = self.to_matrix(u), self.to_matrix(v)
        return self.from_matrix(xu @ xv - xv @ xu)


def _hat3(v: np.ndarray) -> np.ndarray:
    out = np.zeros(v.shape[:-1] + (3, 3))
    out[..., 0, 1] = -v[..., 2]
    out[..., 0, 2] = v[..., 1]
    out[..., 1, 0] = v[..., 2]
    out[..., 1, 2] = -v[..., 0]
    out[..., 2, 0] = -v[..., 1]
    out[..., 2, 1] = v[..., 0]
    return out


def _vee3(mats: np.ndarray) -> np.ndarray:
    return np.stack(
        [mats[..., 2, 1], mats[..., 0, 2], mats[..., 1, 0]], axis=-1
    )


def so3() -> MatrixGroup:
    basis = _hat3(np.eye(3))
    q_radius = np.pi - 0.1

    def exp_fn(v):
        theta = np.linalg.norm(v, axis=-1)
        k = _hat3(v)
        small = theta < 1e-8
        th = np.where(small, 1.0, theta)
        a = np.where(small, 1.0 - theta**2 / 6.0, np.sin(th) / th)
        b = np.where(small, 0.5 - theta**2 / 24.0, (1.0 - np.cos(th)) / th**2)
        eye = np.broadcast_to(np.eye(3), k.shape)
        return eye + a[..., None, None] * k + b[..., None, None] * (k @ k)

    def _angle(g):
        tr = np.trace(g, axis1=-2, axis2=-1)
        return np.arccos(np.clip((tr - 1.0) / 2.0, -1.0, 1.0))

    def log_fn(g):
        theta = _angle(g)
        small = theta < 1e-8
        th = np.where(small, 1.0, theta)
        factor = np.where(small, 0.5 + theta**2 / 12.0, th / (2.0 * np.sin(th)))
        return factor[..., None] * _vee3(g - np.swapaxes(g, -1, -2))

    def log_valid_fn(g):
        return _angle(g) < q_radius

    def invert_fn(g):
        return np.swapaxes(g, -1, -2).copy()

    def project_fn(g):
        u, _, vt = np.linalg.svd(g)
        r = u @ vt
        det = np.linalg.det(r)
        u = u.copy()
        u[..., :, -1] *= np.sign(det)[..., None]
        return u @ vt

    def defect_fn(g):
        gtg = np.swapaxes(g, -1, -2) @ g
        eye = np.broadcast_to(np.eye(3), g.shape)
        orth = np.abs(gtg - eye).max(axis=(-2, -1))
        det = np.abs(np.linalg.det(g) - 1.0)
        return np.maximum(orth, det)

    return MatrixGroup(
        "SO3", 3, basis, q_radius, q_radius / 2.0,
        exp_fn, log_fn, log_valid_fn, invert_fn, project_fn, defect_fn,
    )


def _realify(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Real 4x4 block form [[X, -Y], [Y, X]] of X + iY."""
    top = np.concatenate([x, -y], axis=-1)
    bot = np.concatenate([y, x], axis=-1)
    return np.concatenate([top, bot], axis=-2)


_SIGMA = np.array(
    [
        [[0.0, 1.0], [1.0, 0.0]],
        [[0.0, -1.0j], [1.0j, 0.0]],
        [[1.0, 0.0], [0.0, -1.0]],
    ]
)


def su2_real() -> MatrixGroup:
    mats = -0.5j * _SIGMA
    basis = _realify(mats.real, mats.imag)
    q_radius = np.pi - 0.1

    def exp_fn(v):
        theta = np.linalg.norm(v, axis=-1)
        half = 0.5 * theta
        small = theta < 1e-8
        hs = np.where(small, 1.0, half)
        sinc_half = np.where(small, 1.0 - half**2 / 6.0, np.sin(hs) / hs)
        xi = np.einsum("...a,aij->...ij", v, basis)
        eye = np.broadcast_to(np.eye(4), xi.shape)
        return np.cos(half)[..., None, None] * eye + sinc_half[..., None, None] * xi

    def _half_angle(g):
        tr = np.trace(g, axis1=-2, axis2=-1)
        return np.arccos(np.clip(tr / 4.0, -1.0, 1.0))

    def log_fn(g):
        half = _half_angle(g)
        small = half < 1e-8
        hs = np.where(small, 1.0, half)
        inv_sinc = np.where(small, 1.0 + half**2 / 6.0, hs / np.sin(hs))
        anti = 0.5 * (g - np.swapaxes(g, -1, -2))
        xi = inv_sinc[..., None, None] * anti
        flat = xi.reshape(xi.shape[:-2] + (16,))
        bflat = basis.reshape(3, 16)
        return np.einsum("ab,...b->...a", np.linalg.pinv(bflat.T), flat)

    def log_valid_fn(g):
        return 2.0 * _half_angle(g) < q_radius

    def invert_fn(g):
        return np.swapaxes(g, -1, -2).copy()

    def _blocks(g):
        return g[..., :2, :2], g[..., 2:, :2]

    def project_fn(g):
        x, y = _blocks(g)
        u = x + 1j * y
        uu, _, vt = np.linalg.svd(u)
        w = uu @ vt
        det = np.linalg.det(w)
        # Divide out the residual phase so the determinant is exactly one.
        phase = det ** (-0.5)
        w = w * phase[..., None, None]
        return _realify(w.real, w.imag)

    def defect_fn(g):
        x1 = g[..., :2, :2]
        x2 = g[..., 2:, 2:]
        y1 = g[..., 2:, :2]
        y2 = -g[..., :2, 2:]
        struct = np.maximum(
            np.abs(x1 - x2).max(axis=(-2, -1)), np.abs(y1 - y2).max(axis=(-2, -1))
        )
        u = x1 + 1j * y1
        uhu = np.conj(np.swapaxes(u, -1, -2)) @ u
        eye = np.broadcast_to(np.eye(2), u.shape)
        unit = np.abs(uhu - eye).max(axis=(-2, -1))
        det = np.abs(np.linalg.det(u) - 1.0)
        return np.maximum(np.maximum(struct, unit), det)

    return MatrixGroup(
        "SU2", 4, basis, q_radius, q_radius / 2.0,
        exp_fn, log_fn, log_valid_fn, invert_fn, project_fn, defect_fn,
    )


def upper_triangular2() -> MatrixGroup:
    basis = np.zeros((3, 2, 2))
    basis[0, 0, 0] = 1.0  # E11
    basis[1, 0, 1] = 1.0  # E12
    basis[2, 1, 1] = 1.0  # E22

    def _phi(x, z):
        """Divided difference (e^x - e^z)/(x - z), stable near x = z."""
        mid = 0.5 * (x + z)
        d = 0.5 * (x - z)
        small = np.abs(d) < 1e-8
        ds = np.where(small, 1.0, d)
        ratio = np.where(small, 1.0 + d**2 / 6.0, np.sinh(ds) / ds)
        return np.exp(mid) * ratio

    def exp_fn(v):
        x, y, z = v[..., 0], v[..., 1], v[..., 2]
        out = np.zeros(v.shape[:-1] + (2, 2))
        out[..., 0, 0] = np.exp(x)
        out[..., 1, 1] = np.exp(z)
        out[..., 0, 1] = y * _phi(x, z)
        return out

    def log_fn(g):
        a = g[..., 0, 0]
        c = g[..., 1, 1]
        x = np.log(a)
        z = np.log(c)
        y = g[..., 0, 1] / _phi(x, z)
        return np.stack([x, y, z], axis=-1)

    def log_valid_fn(g):
        a = g[..., 0, 0]
        c = g[..., 1, 1]
        ok = (a > 1e-12) & (c > 1e-12)
        x = np.log(np.where(ok, a, 1.0))
        z = np.log(np.where(ok, c, 1.0))
        y = g[..., 0, 1] / _phi(x, z)
        norm = np.sqrt(x * x + y * y + z * z)
        return ok & (norm < 5.0)

    def invert_fn(g):
        a = g[..., 0, 0]
        b = g[..., 0, 1]
        c = g[..., 1, 1]
        out = np.zeros_like(g)
        out[..., 0, 0] = 1.0 / a
        out[..., 1, 1] = 1.0 / c
        out[..., 0, 1] = -b / (a * c)
        return out

    def project_fn(g):
        out = g.copy()
        out[..., 1, 0] = 0.0
        out[..., 0, 0] = np.abs(out[..., 0, 0])
        out[..., 1, 1] = np.abs(out[..., 1, 1])
        return out

    def defect_fn(g):
        lower = np.abs(g[..., 1, 0])
        diag = np.minimum(g[..., 0, 0], g[..., 1, 1])
        return np.maximum(lower, np.maximum(-diag, 0.0))

    return MatrixGroup(
        "UT2", 2, basis, 5.0, 1.0,
        exp_fn, log_fn, log_valid_fn, invert_fn, project_fn, defect_fn,
    )


GROUP_BUILDERS = {"SO3": so3, "SU2": su2_real, "UT2": upper_triangular2}


def group_by_name(name: str) -> MatrixGroup:
    if name not in GROUP_BUILDERS:
        raise InputError(
            f"unknown group {name!r}; available: {sorted(GROUP_BUILDERS)}"
        )
    return GROUP_BUILDERS[name]()


def _same_group(a: MatrixGroup, b: MatrixGroup) -> bool:
    return a is b or a.name == b.name


@dataclass(frozen=True, eq=False)
class GroupSection:
    """Chart family of node-wise group elements over an atlas."""

    atlas: Atlas
    group: MatrixGroup
    pieces: tuple[np.ndarray, ...]
    tolerance: float = 1e-9

    def __post_init__(self):
        object.__setattr__(self, "pieces", tuple(self.pieces))
        if len(self.pieces) != self.atlas.chart_count:
            raise ShapeMismatchError("one piece per chart required")
        d = self.group.dim
        for c, p in zip(self.atlas.charts, self.pieces):
            if p.shape != (c.window.node_count, d, d):
                raise ShapeMismatchError(
                    f"chart {c.index} matrices must have shape "
                    f"({c.window.node_count}, {d}, {d}), got {p.shape}"
                )
            defect = float(self.group.relation_defect(p).max())
            if defect > RELATION_DEFECT_LIMIT:
                raise InputError(
                    f"chart {c.index}: node matrices violate the group "
                    f"relations by {defect:.3e}"
                )
        worst, where = _group_compatibility(self, return_worst=True)
        if worst > self.tolerance:
            raise InputError(
                f"group section overlap defect {worst:.3e} exceeds "
                f"{self.tolerance:.1e} near charts {where[0]}/{where[1]}"
            )


def _group_compatibility(gs: GroupSection, per_axis: int = 24, return_worst=False):
    """Overlap agreement of matrix entries, via entrywise interpolation."""
    d = gs.group.dim
    flat = tuple(
        SampledField(c.window, p.reshape(p.shape[0], d * d))
        for c, p in zip(gs.atlas.charts, gs.pieces)
    )
    worst = 0.0
    worst_pair = (0, 0)
    for i in range(gs.atlas.chart_count):
        for j in range(i + 1, gs.atlas.chart_count):
            pts = gs.atlas.overlap_samples(i, j, per_axis)
            if pts.size == 0:
                continue
            vi = flat[i].interpolate(gs.atlas.to_chart(i, pts))
            vj = flat[j].interpolate(gs.atlas.to_chart(j, pts))
            diff = float(np.abs(vi - vj).max())
            if diff > worst:
                worst = diff
                worst_pair = (i, j)
    if return_worst:
        return worst, worst_pair
    return worst


@dataclass(frozen=True, eq=False)
class AlgebraSection:
    """Section with values in algebra coordinates of a fixed group."""

    group: MatrixGroup
    section: Section

    def __post_init__(self):
        if self.section.components != self.group.algebra_dim:
            raise ShapeMismatchError(
                f"algebra sections of {self.group.name} need "
                f"{self.group.algebra_dim} components"
            )

    @property
    def atlas(self) -> Atlas:
        return self.section.atlas

    def chart_coords(self, j: int) -> np.ndarray:
        return self.section.pieces[j].values

    def chart_matrices(self, j: int) -> np.ndarray:
        return self.group.to_matrix(self.chart_coords(j))

    def __add__(self, other: "AlgebraSection") -> "AlgebraSection":
        _require_same_group(self, other)
        return AlgebraSection(self.group, self.section + other.section)

    def __sub__(self, other: "AlgebraSection") -> "AlgebraSection":
        _require_same_group(self, other)
        return AlgebraSection(self.group, self.section - other.section)

    def scaled(self, factor: float) -> "AlgebraSection":
        return AlgebraSection(self.group, self.section.scaled(factor))

    def sup_coord_norm(self) -> float:
        return max(
            float(np.linalg.norm(p.values, axis=1).max())
            for p in self.section.pieces
        )


def _require_same_group(a, b):
    if not _same_group(a.group, b.group):
        raise InputError("operands belong to different groups")


def identity_group_section(atlas: Atlas, group: MatrixGroup) -> GroupSection:
    pieces = tuple(
        np.broadcast_to(group.identity(), (c.window.node_count,) + (group.dim,) * 2).copy()
        for c in atlas.charts
    )
    return GroupSection(atlas, group, pieces)


def group_multiply(a: GroupSection, b: GroupSection) -> GroupSection:
    """Node-wise product; re-projects and logs only if drift exceeds 1e-12."""
    if not _same_atlas(a.atlas, b.atlas):
        raise InputError("group sections live on different atlases")
    _require_same_group(a, b)
    out = []
    for j, (pa, pb) in enumerate(zip(a.pieces, b.pieces)):
        prod = pa @ pb
        drift = float(a.group.relation_defect(prod).max())
        if drift > PROJECTION_THRESHOLD:
            prod = a.group.project(prod)
            LOGGER.info(
                "chart %d: product drifted %.3e off %s; re-projected",
                j, drift, a.group.name,
            )
        out.append(prod)
    return GroupSection(a.atlas, a.group, tuple(out), max(a.tolerance, b.tolerance))


def group_invert(a: GroupSection) -> GroupSection:
    return GroupSection(
        a.atlas, a.group, tuple(a.group.invert(p) for p in a.pieces), a.tolerance
    )


def exp_section(xi: AlgebraSection, tolerance: float = 1e-9) -> GroupSection:
    """Node-wise group exponential of an algebra section."""
    pieces = tuple(
        xi.group.exp(xi.chart_coords(j)) for j in range(xi.atlas.chart_count)
    )
    return GroupSection(xi.atlas, xi.group, pieces, tolerance)


def log_section(gamma: GroupSection) -> AlgebraSection:
    """Node-wise group logarithm; rejects nodes outside the chart ball."""
    pieces = []
    for j, (c, p) in enumerate(zip(gamma.atlas.charts, gamma.pieces)):
        ok = gamma.group.log_valid(p)
        if not np.all(ok):
            bad = int(np.argmin(ok))
            node = c.window.nodes()[bad]
            raise ChartDomainError(
                f"chart {j}, node {bad} (x = {node}): matrix outside the "
                f"log domain of {gamma.group.name}"
            )
        coords = gamma.group.log(p)
        pieces.append(SampledField(c.window, np.ascontiguousarray(coords)))
    sec = Section(gamma.atlas, tuple(pieces), gamma.tolerance)
    return AlgebraSection(gamma.group, sec)


def adjoint_operator(gamma: GroupSection, eta: AlgebraSection) -> AlgebraSection:
    """Node-wise adjoint action of a group section on an algebra section."""
    if not _same_atlas(gamma.atlas, eta.atlas):
        raise InputError("sections live on different atlases")
    _require_same_group(gamma, eta)
    pieces = []
    for c, g, j in zip(
        gamma.atlas.charts, gamma.pieces, range(gamma.atlas.chart_count)
    ):
        coords = gamma.group.adjoint(g, eta.chart_coords(j))
        pieces.append(SampledField(c.window, np.ascontiguousarray(coords)))
    sec = Section(gamma.atlas, tuple(pieces), eta.section.tolerance)
    return AlgebraSection(gamma.group, sec)


def bracket(xi: AlgebraSection, eta: AlgebraSection) -> AlgebraSection:
    """Node-wise Lie bracket in algebra coordinates."""
    if not _same_atlas(xi.atlas, eta.atlas):
        raise InputError("sections live on different atlases")
    _require_same_group(xi, eta)
    pieces = []
    for c, j in zip(xi.atlas.charts, range(xi.atlas.chart_count)):
        coords = xi.group.bracket_coords(xi.chart_coords(j), eta.chart_coords(j))
        pieces.append(SampledField(c.window, np.ascontiguousarray(coords)))
    sec = Section(xi.atlas, tuple(pieces), xi.section.tolerance)
    return AlgebraSection(xi.group, sec)


def random_algebra_section(
    atlas: Atlas,
    group: MatrixGroup,
    rng: np.random.Generator,
    amplitude: float | None = None,
    order: int = 2,
) -> AlgebraSection:
    """Random smooth algebra section scaled inside the product-safe ball."""
    if amplitude is None:
        amplitude = 0.9 * group.v_radius
    sec = random_section(atlas, group.algebra_dim, rng, order=order)
    sup = max(
        float(np.linalg.norm(p.values, axis=1).max()) for p in sec.pieces
    )
    scale = amplitude / max(sup, 1e-12)
    return AlgebraSection(group, sec.scaled(scale))


def bch_residual(xi: AlgebraSection, eta: AlgebraSection, t: float) -> float:
    """Sup-node defect of the order-2 product expansion at parameter t.

    Compares log(exp(t xi) exp(t eta)) against
    t (xi + eta) + t^2/2 [xi, eta]; the remainder is cubic in t.
    """
    g = group_multiply(exp_section(xi.scaled(t)), exp_section(eta.scaled(t)))
    lg = log_section(g)
    model = (xi + eta).scaled(t) + bracket(xi, eta).scaled(0.5 * t * t)
    return (lg - model).sup_coord_norm()


def bch_order2_probe(
    xi: AlgebraSection,
    eta: AlgebraSection,
    t_grid=(0.1, 0.05, 0.025),
) -> float:
    """Log-log slope of the order-2 product expansion remainder (about 3)."""
    ts = np.asarray(sorted(t_grid, reverse=True), dtype=float)
    if ts.size < 2 or np.any(ts <= 0):
        raise InputError("need at least two positive probe parameters")
    res = np.array([bch_residual(xi, eta, float(t)) for t in ts])
    if np.any(res <= 0):
        raise InputError("remainder vanished; probe parameters too small")
    slope, _ = np.polyfit(np.log(ts), np.log(res), 1)
    return float(slope)


def bracket_from_products(
    xi: AlgebraSection, eta: AlgebraSection, t: float = 1e-3
) -> AlgebraSection:
    """Extract the bracket from small products:
    (log(exp(t xi) exp(t eta)) - log(exp(t eta) exp(t xi))) / t^2,
    accurate to O(t^2) because the cubic product terms are symmetric."""
    ab = log_section(group_multiply(exp_section(xi.scaled(t)), exp_section(eta.scaled(t))))
    ba = log_section(group_multiply(exp_section(eta.scaled(t)), exp_section(xi.scaled(t))))
    return (ab - ba).scaled(1.0 / (t * t))
