"""Matrix groups and node-wise group sections over an atlas."""

import numpy as np
import pytest

from mapgroups.atlas import circle_two_charts
from mapgroups.errors import ChartDomainError, InputError
from mapgroups.groups import (
    GROUP_BUILDERS,
    AlgebraSection,
    GroupSection,
    adjoint_operator,
    bch_order2_probe,
    bch_residual,
    bracket,
    bracket_from_products,
    exp_section,
    group_by_name,
    group_invert,
    group_multiply,
    identity_group_section,
    log_section,
    random_algebra_section,
    so3,
    su2_real,
    upper_triangular2,
)

ALL_GROUPS = [so3(), su2_real(), upper_triangular2()]


# ---------------------------------------------------------------------------
# matrix level


def test_builders_and_lookup():
    assert sorted(GROUP_BUILDERS) == ["SO3", "SU2", "UT2"]
    assert group_by_name("SO3").name == "SO3"
    with pytest.raises(InputError):
        group_by_name("E8")


def test_exp_of_zero_is_identity():
    for g in ALL_GROUPS:
        out = g.exp(np.zeros((4, g.algebra_dim)))
        eye = np.broadcast_to(g.identity(), out.shape)
        assert np.abs(out - eye).max() < 1e-15, g.name


def test_so3_quarter_turn_about_z():
    g = so3()
    r = g.exp(np.array([0.0, 0.0, np.pi / 2]))
    want = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
    assert np.abs(r - want).max() < 1e-15


def test_log_inverts_exp_inside_the_ball():
    rng = np.random.default_rng(3)
    for g in ALL_GROUPS:
        for trial in range(20):
            v = rng.uniform(-1.0, 1.0, size=g.algebra_dim)
            v *= 0.8 * g.q_radius / max(np.linalg.norm(v), 1e-12)
            back = g.log(g.exp(v))
            assert np.abs(back - v).max() < 1e-10, f"{g.name} trial {trial}"


def test_log_domain_guards():
    g = so3()
    # rotation by pi about the x axis sits outside the log ball
    half_turn = np.diag([1.0, -1.0, -1.0])
    assert not g.log_valid(half_turn[None])[0]
    assert g.log_valid(g.identity()[None])[0]
    ut = upper_triangular2()
    assert not ut.log_valid(np.array([[[-1.0, 0.0], [0.0, 1.0]]]))[0]


def test_inverse_multiplies_to_identity():
    rng = np.random.default_rng(5)
    for g in ALL_GROUPS:
        v = rng.uniform(-0.4, 0.4, size=(6, g.algebra_dim))
        mats = g.exp(v)
        prod = mats @ g.invert(mats)
        eye = np.broadcast_to(g.identity(), prod.shape)
        assert np.abs(prod - eye).max() < 1e-14, g.name


def test_projection_repairs_small_drift():
    rng = np.random.default_rng(7)
    for g in ALL_GROUPS:
        v = rng.uniform(-0.4, 0.4, size=(5, g.algebra_dim))
        mats = g.exp(v) + 1e-6 * rng.standard_normal((5, g.dim, g.dim))
        fixed = g.project(mats)
        assert g.relation_defect(fixed).max() < 1e-12, g.name
        assert np.abs(fixed - mats).max() < 1e-4, g.name


def test_adjoint_matches_conjugation():
    rng = np.random.default_rng(9)
    for g in ALL_GROUPS:
        h = g.exp(rng.uniform(-0.5, 0.5, size=(8, g.algebra_dim)))
        x = rng.uniform(-1.0, 1.0, size=(8, g.algebra_dim))
        ad = g.to_matrix(g.adjoint(h, x))
        conj = h @ g.to_matrix(x) @ g.invert(h)
        assert np.abs(ad - conj).max() < 1e-10, g.name


def test_so3_adjoint_is_an_isometry():
    rng = np.random.default_rng(11)
    g = so3()
    h = g.exp(rng.uniform(-1.0, 1.0, size=(50, 3)))
    x = rng.uniform(-1.0, 1.0, size=(50, 3))
    gap = np.abs(g.coord_norm(g.adjoint(h, x)) - g.coord_norm(x)).max()
    assert gap < 1e-12, f"norm drift {gap:.3e}"


def test_bracket_structure_constants():
    g = so3()
    e = np.eye(3)
    assert np.abs(g.bracket_coords(e[0], e[1]) - e[2]).max() < 1e-14
    assert np.abs(g.bracket_coords(e[1], e[2]) - e[0]).max() < 1e-14
    assert np.abs(g.bracket_coords(e[0], e[0])).max() == 0.0


def test_bracket_jacobi_identity():
    rng = np.random.default_rng(13)
    for g in ALL_GROUPS:
        for trial in range(10):
            u, v, w = rng.uniform(-1.0, 1.0, size=(3, g.algebra_dim))
            total = (
                g.bracket_coords(u, g.bracket_coords(v, w))
                + g.bracket_coords(v, g.bracket_coords(w, u))
                + g.bracket_coords(w, g.bracket_coords(u, v))
            )
            assert np.abs(total).max() < 1e-12, f"{g.name} trial {trial}"


# ---------------------------------------------------------------------------
# sections


@pytest.fixture(scope="module")
def atlas():
    return circle_two_charts()


def test_identity_section_and_inverse(atlas):
    rng = np.random.default_rng(17)
    g = so3()
    e = identity_group_section(atlas, g)
    gamma = exp_section(random_algebra_section(atlas, g, rng))
    left = group_multiply(gamma, e)
    for p, q in zip(left.pieces, gamma.pieces):
        assert np.abs(p - q).max() < 1e-14
    cancel = group_multiply(gamma, group_invert(gamma))
    for p, q in zip(cancel.pieces, e.pieces):
        assert np.abs(p - q).max() < 1e-14


def test_multiplication_associative(atlas):
    rng = np.random.default_rng(19)
    g = su2_real()
    a = exp_section(random_algebra_section(atlas, g, rng))
    b = exp_section(random_algebra_section(atlas, g, rng))
    c = exp_section(random_algebra_section(atlas, g, rng))
    lhs = group_multiply(group_multiply(a, b), c)
    rhs = group_multiply(a, group_multiply(b, c))
    for p, q in zip(lhs.pieces, rhs.pieces):
        assert np.abs(p - q).max() < 1e-12


def test_exp_of_zero_section_is_identity(atlas):
    g = upper_triangular2()
    from mapgroups.sections import section_from_function

    zero = AlgebraSection(
        g, section_from_function(atlas, lambda th: np.zeros((th.shape[0], 3)))
    )
    out = exp_section(zero)
    e = identity_group_section(atlas, g)
    for p, q in zip(out.pieces, e.pieces):
        assert np.abs(p - q).max() < 1e-15


def test_exp_one_parameter_homomorphism(atlas):
    rng = np.random.default_rng(23)
    g = so3()
    xi = random_algebra_section(atlas, g, rng)
    s, t = 0.3, 0.3
    joint = exp_section(xi.scaled(s + t))
    split = group_multiply(exp_section(xi.scaled(s)), exp_section(xi.scaled(t)))
    for p, q in zip(joint.pieces, split.pieces):
        assert np.abs(p - q).max() < 1e-10


def test_log_section_round_trip(atlas):
    rng = np.random.default_rng(29)
    for g in ALL_GROUPS:
        xi = random_algebra_section(atlas, g, rng)
        back = log_section(exp_section(xi))
        gap = (back - xi).sup_coord_norm()
        assert gap < 1e-9, f"{g.name}: log round trip {gap:.3e}"


def test_log_of_identity_is_zero(atlas):
    g = so3()
    out = log_section(identity_group_section(atlas, g))
    assert out.sup_coord_norm() < 1e-14


def test_log_rejects_far_rotations(atlas):
    g = so3()
    coords = np.array([np.pi - 0.05, 0.0, 0.0])
    pieces = tuple(
        np.broadcast_to(g.exp(coords), (c.window.node_count, 3, 3)).copy()
        for c in atlas.charts
    )
    gamma = GroupSection(atlas, g, pieces)
    with pytest.raises(ChartDomainError):
        log_section(gamma)


def test_group_section_rejects_non_members(atlas):
    g = so3()
    pieces = tuple(
        np.full((c.window.node_count, 3, 3), 0.5) for c in atlas.charts
    )
    with pytest.raises(InputError):
        GroupSection(atlas, g, pieces)


def test_adjoint_by_identity_fixes_direction(atlas):
    rng = np.random.default_rng(31)
    g = su2_real()
    eta = random_algebra_section(atlas, g, rng)
    out = adjoint_operator(identity_group_section(atlas, g), eta)
    assert (out - eta).sup_coord_norm() < 1e-12


def test_random_sections_stay_in_the_safe_ball(atlas):
    rng = np.random.default_rng(37)
    for g in ALL_GROUPS:
        xi = random_algebra_section(atlas, g, rng)
        assert xi.sup_coord_norm() <= 0.9 * g.v_radius + 1e-12


# ---------------------------------------------------------------------------
# product expansion


def test_product_expansion_residual_tiny_for_commuting(atlas):
    rng = np.random.default_rng(41)
    g = so3()
    xi = random_algebra_section(atlas, g, rng)
    assert bch_residual(xi, xi, 0.1) < 1e-12


def test_product_expansion_third_order(atlas):
    rng = np.random.default_rng(43)
    g = so3()
    xi = random_algebra_section(atlas, g, rng)
    eta = random_algebra_section(atlas, g, rng)
    slope = bch_order2_probe(xi, eta)
    assert abs(slope - 3.0) < 0.4, f"remainder slope {slope:.3f}"


def test_bracket_section_matches_small_products(atlas):
    rng = np.random.default_rng(47)
    for g in ALL_GROUPS:
        xi = random_algebra_section(atlas, g, rng)
        eta = random_algebra_section(atlas, g, rng)
        direct = bracket(xi, eta)
        probed = bracket_from_products(xi, eta)
        gap = (direct - probed).sup_coord_norm()
        assert gap < 1e-5, f"{g.name}: bracket gap {gap:.3e}"


def test_bracket_antisymmetric_sectionwise(atlas):
    rng = np.random.default_rng(53)
    g = su2_real()
    xi = random_algebra_section(atlas, g, rng)
    eta = random_algebra_section(atlas, g, rng)
    lhs = bracket(xi, eta)
    rhs = bracket(eta, xi).scaled(-1.0)
    assert (lhs - rhs).sup_coord_norm() < 1e-12
