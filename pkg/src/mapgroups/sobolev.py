"""Fractional Sobolev inner products and minimum-norm interpolation.

Inner products are mode-weighted sums over band-limited coefficients with

    weight(k) = (1 + |k|^2)^(s/2)     ("paper" convention, default)
    weight(k) = (1 + |k|^2)^s         ("standard" convention)

Both conventions are supported everywhere; file formats tag which one a
stored quantity used.  All reductions run in fixed C order so identical
inputs give bitwise identical results.
"""

from __future__ import annotations

import numpy as np

from .errors import InputError, ShapeMismatchError, SolverError
from .fields import (
    BandlimitedField,
    GridDomain,
    SampledField,
    random_field,
    restrict,
)

CONVENTIONS = ("paper", "standard")

# Tags written into files alongside any Sobolev-weighted quantity.
CONVENTION_TAGS = {"paper": "paper-s/2", "standard": "standard-s"}

# Relative singular-value floor for the interpolation pseudoinverse.
PINV_RCOND = 1e-10


def check_order(s) -> float:
    s = float(s)
    if not np.isfinite(s) or s < 0.0:
        raise InputError(f"Sobolev order must be finite and >= 0, got {s}")
    return s


def check_convention(convention: str) -> str:
    if convention not in CONVENTIONS:
        raise InputError(
            f"unknown weight convention {convention!r}; expected one of {CONVENTIONS}"
        )
    return convention


def weight_exponent(s: float, convention: str = "paper") -> float:
    check_convention(convention)
    return 0.5 * s if convention == "paper" else float(s)


def mode_weights(m: int, modes: int, s, convention: str = "paper") -> np.ndarray:
    """Weight lattice (1 + |k|^2)^e over all |k_d| <= modes."""
    s = check_order(s)
    k = np.arange(-modes, modes + 1, dtype=float)
    if m == 1:
        k2 = k**2
    elif m == 2:
        k2 = k[:, None] ** 2 + k[None, :] ** 2
    else:
        raise InputError(f"dimension m must be 1 or 2, got {m}")
    return (1.0 + k2) ** weight_exponent(s, convention)


def _check_pair(a: BandlimitedField, b: BandlimitedField):
    if a.m != b.m or a.modes != b.modes or a.components != b.components:
        raise ShapeMismatchError(
            "fields differ in dimension, cutoff, or component count"
        )


def hs_inner(
    a: BandlimitedField,
    b: BandlimitedField,
    s,
    convention: str = "paper",
) -> float:
    """Sobolev inner product of two real band-limited fields."""
    _check_pair(a, b)
    if not (a.real and b.real):
        raise InputError("hs_inner expects real-flagged fields")
    w = mode_weights(a.m, a.modes, s, convention)
    total = np.sum(w * a.coeffs * np.conj(b.coeffs))
    return float(total.real)


def hs_norm(a: BandlimitedField, s, convention: str = "paper") -> float:
    return float(np.sqrt(max(hs_inner(a, a, s, convention), 0.0)))


def _evaluation_matrix(grid: GridDomain, modes: int) -> np.ndarray:
    """Complex matrix taking flat coefficient vectors to masked node values.

    Column order matches the C-order flattening of the coefficient lattice.
    """
    k = np.arange(-modes, modes + 1)
    phases = [np.exp(1j * np.outer(grid.axis_nodes(d), k)) for d in range(grid.m)]
    if grid.m == 1:
        return phases[0]
    a = np.einsum("ia,jb->ijab", phases[0], phases[1])
    width = 2 * modes + 1
    return a.reshape(grid.node_count, width * width)


def _pair_split(ncoef: int):
    """Conjugate-mirror index pairs of the flattened coefficient lattice.

    Reversing every lattice axis reverses the flat C order, so the mirror
    partner of flat index j is ncoef - 1 - j; the center (zero mode) is
    the only self-paired index.
    """
    npairs = (ncoef - 1) // 2
    p_idx = np.arange(npairs)
    return npairs, p_idx, ncoef - 1 - p_idx


def _weighted_real_system(grid: GridDomain, modes: int, s, convention: str):
    """Real node-evaluation matrix in weighted cosine/sine coordinates.

    Hermitian-symmetric coefficient vectors are parametrized by real
    coordinates r ordered [zero mode, cosine pairs, sine pairs]; the
    matrix maps r to node values, and the Euclidean norm of r equals the
    order-s norm of the corresponding field.  Returns the complex
    evaluation matrix, the real matrix, and the inverse square-root
    weights used to map coordinates back to coefficients.
    """
    ncoef = (2 * modes + 1) ** grid.m
    a = _evaluation_matrix(grid, modes)
    w = mode_weights(grid.m, modes, s, convention).reshape(ncoef)
    half = w**-0.5
    aw = a * half[None, :]
    npairs, p_idx, q_idx = _pair_split(ncoef)
    inv_sqrt2 = 1.0 / np.sqrt(2.0)
    b = np.empty((a.shape[0], ncoef))
    b[:, 0] = aw[:, npairs].real
    b[:, 1 : 1 + npairs] = ((aw[:, p_idx] + aw[:, q_idx]) * inv_sqrt2).real
    b[:, 1 + npairs :] = ((aw[:, p_idx] - aw[:, q_idx]) * (1j * inv_sqrt2)).real
    return a, b, half


def _real_coords_to_coeffs(rows: np.ndarray, half: np.ndarray) -> np.ndarray:
    """Map real pair coordinates (..., ncoef) to complex coefficients.

    The p and q entries are built from the same cosine/sine numbers, so
    the result is Hermitian-symmetric bit for bit.
    """
    ncoef = half.size
    npairs, p_idx, q_idx = _pair_split(ncoef)
    inv_sqrt2 = 1.0 / np.sqrt(2.0)
    d = np.zeros(rows.shape, dtype=complex)
    d[..., npairs] = rows[..., 0]
    cos_part = rows[..., 1 : 1 + npairs] * inv_sqrt2
    sin_part = rows[..., 1 + npairs :] * inv_sqrt2
    d[..., p_idx] = cos_part + 1j * sin_part
    d[..., q_idx] = cos_part - 1j * sin_part
    return half * d


def min_norm_extension(
    v: SampledField,
    s,
    modes: int,
    convention: str = "paper",
    rcond: float = PINV_RCOND,
    residual_tol: float = 1e-8,
) -> BandlimitedField:
    """Band-limited interpolant of node data with minimal Sobolev norm.

    Solves ``A c = values`` in the weighted least-norm sense: in the real
    pair coordinates of ``_weighted_real_system`` the order-s norm is
    Euclidean, so the truncated pseudoinverse solution is the minimizer
    and is orthogonal to every band-limited field vanishing on the nodes
    (the kernel returned by ``restriction_kernel_basis``, which cuts the
    same decomposition at the same singular-value floor).  The achieved
    node residual is checked and reported on failure.

    Parameters
    ----------
    v : SampledField
        Node data on a grid window; the node count must not exceed the
        coefficient count (2*modes+1)^m.
    s : float
        Sobolev order of the norm being minimized.
    modes : int
        Cutoff of the extension.
    """
    s = check_order(s)
    check_convention(convention)
    grid = v.domain
    ncoef = (2 * modes + 1) ** grid.m
    if grid.node_count > ncoef:
        raise InputError(
            f"{grid.node_count} nodes exceed {ncoef} coefficients; "
            "raise the cutoff or thin the mask"
        )
    a, b, half = _weighted_real_system(grid, modes, s, convention)
    u, sig, vt = np.linalg.svd(b, full_matrices=False)
    if sig.size == 0 or sig[0] == 0.0:
        raise SolverError("evaluation matrix is identically zero")
    keep = sig > rcond * sig[0]
    coef = (u[:, keep].T @ v.values) / sig[keep][:, None]
    r = vt[keep].T @ coef  # (ncoef, n) real coordinates
    cflat = _real_coords_to_coeffs(r.T, half)  # (n, ncoef)
    residual = float(np.max(np.abs(cflat @ a.T - v.values.T)))
    scale = max(1.0, float(np.max(np.abs(v.values))))
    if residual > residual_tol * scale:
        raise SolverError(
            f"interpolation residual {residual:.3e} exceeds "
            f"{residual_tol:.1e} * {scale:.3e}; the system is inconsistent "
            "for this cutoff",
            residual=residual,
        )
    width = 2 * modes + 1
    coeffs = cflat.reshape((v.components,) + (width,) * grid.m)
    return BandlimitedField(grid.m, modes, coeffs, real=True)


def restriction_kernel_basis(
    grid: GridDomain,
    s,
    modes: int,
    convention: str = "paper",
    max_count: int | None = None,
) -> list[BandlimitedField]:
    """Real band-limited fields vanishing at every masked node.

    The Hermitian-symmetric coefficient subspace is parametrized by real
    cosine/sine pair coordinates, so the null space comes from one real
    SVD and every basis field is exactly symmetric.  The returned fields
    are orthonormal in the order-s inner product.
    """
    s = check_order(s)
    check_convention(convention)
    _, b, half = _weighted_real_system(grid, modes, s, convention)
    _, sig, vt = np.linalg.svd(b, full_matrices=True)
    tol = PINV_RCOND * (sig[0] if sig.size else 1.0)
    rank = int(np.sum(sig > tol))
    rows = vt[rank:]
    if max_count is not None:
        rows = rows[:max_count]
    width = 2 * modes + 1
    lattice = (width,) * grid.m
    return [
        BandlimitedField(
            grid.m,
            modes,
            _real_coords_to_coeffs(r, half).reshape((1,) + lattice),
            real=True,
        )
        for r in rows
    ]


def rellich_spectrum(
    s,
    t,
    modes: int,
    m: int = 1,
    convention: str = "paper",
) -> np.ndarray:
    """Singular values of the inclusion of order-s fields into order t.

    For s > t the inclusion is compact on band-limited fields and its
    singular values are the weight ratios
    ``(1 + |k|^2)^((t - s) * e / 2)`` with e the convention exponent,
    returned sorted in decreasing order (one entry per lattice mode).
    """
    s = check_order(s)
    t = check_order(t)
    if not s > t:
        raise InputError(f"need s > t >= 0, got s={s}, t={t}")
    ws = mode_weights(m, modes, s, convention)
    wt = mode_weights(m, modes, t, convention)
    sig = np.sqrt(wt / ws).ravel()
    return np.sort(sig)[::-1]


def extension_probe(
    rng: np.random.Generator,
    instances: int = 20,
    competitors: int = 50,
    modes: int = 32,
    resolution: int = 129,
    convention: str = "paper",
) -> dict:
    """Randomized audit of the minimum-norm extension contract.

    Each instance draws a random field, a random sub-box of the circle and
    a random order s, extends the restricted samples, and measures three
    things: the worst node interpolation residual, the worst overlap with
    the restriction kernel (both absolute, against max(1, data norm)), and
    the minimality margin against competitors of the form extension plus a
    random kernel combination.  A positive margin means every competitor
    had a larger norm.
    """
    if instances < 1 or competitors < 1:
        raise InputError("instances and competitors must be positive")
    worst_residual = 0.0
    worst_overlap = 0.0
    min_margin = np.inf
    # Window width is capped so the node count stays below the number of
    # coefficients; otherwise the interpolation system is overdetermined.
    width_hi = min(3.0, 0.85 * 2.0 * np.pi * (2 * modes + 1) / resolution)
    for _ in range(instances):
        s = float(rng.uniform(0.5, 3.0))
        lo = float(rng.uniform(0.1, 2.5))
        width = float(rng.uniform(0.5 * width_hi, width_hi))
        grid = GridDomain.box(((lo, lo + width),), resolution)
        gamma = random_field(1, modes, 2, rng)
        data = restrict(gamma, grid)
        ext = min_norm_extension(data, s, modes, convention=convention)
        nodes = grid.nodes()
        resid = float(np.abs(ext.evaluate(nodes) - data.values).max())
        scale = max(1.0, float(np.abs(data.values).max()))
        worst_residual = max(worst_residual, resid / scale)

        kernel = restriction_kernel_basis(grid, s, modes, convention=convention)
        norm_ext = hs_norm(ext, s, convention)
        components = [
            BandlimitedField(1, modes, ext.coeffs[i : i + 1], real=True)
            for i in range(ext.components)
        ]
        for kb in kernel:
            kn = hs_norm(kb, s, convention)
            if kn < 1e-14:
                continue
            for comp in components:
                overlap = abs(hs_inner(comp, kb, s, convention)) / (
                    kn * max(1.0, norm_ext)
                )
                worst_overlap = max(worst_overlap, overlap)
        if not kernel:
            continue
        kernel_coeffs = np.stack([kb.coeffs[0] for kb in kernel])
        for _ in range(competitors):
            mix = rng.standard_normal((ext.components, len(kernel)))
            pert = np.tensordot(mix, kernel_coeffs, axes=1)
            rival = BandlimitedField(1, modes, ext.coeffs + pert, real=True)
            margin = hs_norm(rival, s, convention) - norm_ext
            min_margin = min(min_margin, margin)
    return {
        "instances": instances,
        "competitors": competitors,
        "max_interp_residual": worst_residual,
        "max_kernel_overlap": worst_overlap,
        "min_minimality_margin": float(min_margin),
    }
