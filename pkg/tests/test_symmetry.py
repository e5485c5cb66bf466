from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bargmann import symmetry as sy
from oracles import (
    exact_cocycle,
    exact_compose,
    exact_invert,
    flatten_exact,
    signed_permutations,
    to_exact,
)

I3 = np.eye(3)


def G(v=None, a=None, b=0.0, R=None):
    d = len(v) if v is not None else len(a) if a is not None else 3
    v = np.zeros(d) if v is None else np.array(v, float)
    a = np.zeros(d) if a is None else np.array(a, float)
    return sy.GalileiElement.make(R=R, v=v, a=a, b=b, d=d)


def assert_elem(g, R, v, a, b):
    np.testing.assert_array_equal(g.R, R)
    np.testing.assert_array_equal(g.v, v)
    np.testing.assert_array_equal(g.a, a)
    assert g.b == b


# --- hand-checked values -------------------------------------------------------


def test_compose_substitution_example():
    g = sy.compose(G((1, 0, 0), (0, 0, 0), 2), G((0, 1, 0), (3, 0, 0), 1))
    assert_elem(g, I3, (1, 1, 0), (4, 0, 0), 3)


def test_compose_identity():
    g = G((1, 2, 3), (4, 5, 6), 7)
    assert_elem(sy.compose(sy.GalileiElement.identity(3), g), I3, g.v, g.a, g.b)


def test_boosts_and_translations_commute():
    vp, a = (0.5, -1, 2), (3, 1, -0.25)
    left = sy.compose(G(vp), G(a=a))
    right = sy.compose(G(a=a), G(vp))
    assert_elem(left, I3, vp, a, 0.0)
    assert_elem(right, I3, vp, a, 0.0)


def test_invert_example_uses_minus_b():
    gi = sy.invert(G((1, 0, 0), (2, 0, 0), 3))
    assert_elem(gi, I3, (-1, 0, 0), (1, 0, 0), -3)
    e = sy.compose(gi, G((1, 0, 0), (2, 0, 0), 3))
    assert_elem(e, I3, (0, 0, 0), (0, 0, 0), 0)


def test_act_spacetime_example():
    c = sy.act_spacetime(G((1, 0)), sy.SpacetimeConfig([[0.0, 0.0]], 2.0))
    np.testing.assert_array_equal(c.positions, [[2.0, 0.0]])
    assert c.t == 2.0


def test_cocycle_examples():
    g = G((0.3, 1, 2), (1, -1, 4), 2)
    assert sy.cocycle(sy.GalileiElement.identity(3), g) == 0.0
    assert sy.cocycle(G((1, 0, 0), (5, 5, 5), 9), G((7, 7, 7), (2, 0, 0), 2)) == 3.0
    # boost then translation, and the reverse order
    assert sy.cocycle(G(a=(1, 0, 0)), G((1, 0, 0))) == 0.0
    assert sy.cocycle(G((1, 0, 0)), G(a=(1, 0, 0))) == 1.0


def test_cocycle_on_subgroup_is_vp_dot_a():
    gp, g = G((1, 2, 3), (-1, 0, 2)), G((4, -1, 0), (0.5, 0.25, -2))
    assert sy.cocycle(gp, g) == pytest.approx(1 * 0.5 + 2 * 0.25 + 3 * -2)


def test_antisymmetric_defect_examples():
    gp, g = G((1, 0, 0)), G(a=(2, 0, 0))
    assert sy.antisymmetric_defect(gp, g) == 2.0
    assert sy.antisymmetric_defect(gp, gp) == 0.0


def test_antisymmetric_defect_rejects_rotations_and_time_shifts():
    with pytest.raises(ValueError):
        sy.antisymmetric_defect(G(b=1.0), G())
    with pytest.raises(ValueError):
        sy.antisymmetric_defect(G(R=sy.Rotation.from_rotvec([0, 0, 0.3])), G())


def test_compose_ext_examples():
    g = sy.ExtendedElement(2.5, G((1, 2, 3), (4, 5, 6), 7))
    same = sy.compose_ext(sy.ExtendedElement.identity(3), g)
    assert same.theta == 2.5
    prod = sy.compose_ext(sy.ExtendedElement(0, G((1, 2, 0))), sy.ExtendedElement(0, G(a=(3, 1, 5))))
    assert prod.theta == 5.0
    assert_elem(prod.g, I3, (1, 2, 0), (3, 1, 5), 0.0)


def test_invert_ext_example():
    gi = sy.invert_ext(sy.ExtendedElement(1.0, G((1, 0, 0), (2, 0, 0), 0.0)))
    assert gi.theta == 1.0
    e = sy.invert_ext(sy.ExtendedElement.identity(3))
    assert e.theta == 0.0


def test_pure_theta_shift_lowers_zetas():
    c = sy.ExtendedConfig([[1.0, 2.0, 3.0], [0, 0, 1]], [0.5, -1.0], 4.0)
    out = sy.act_extended(sy.ExtendedElement(0.75, sy.GalileiElement.identity(3)), c)
    np.testing.assert_array_equal(out.positions, c.positions)
    np.testing.assert_array_equal(out.zetas, [-0.25, -1.75])


def test_integration_constant_is_a_coboundary_choice():
    rng = np.random.default_rng(0)
    for _ in range(50):
        gp, g = sy.random_element(rng), sy.random_element(rng)
        xi = sy.shifted_cocycle(sy.integration_constant, gp, g)
        expected = (
            sy.cocycle(gp, g)
            - sy.integration_constant(sy.compose(gp, g))
            + sy.integration_constant(gp)
            + sy.integration_constant(g)
        )
        assert xi == pytest.approx(expected, rel=1e-12, abs=1e-9)
    assert sy.shifted_cocycle(lambda g: 0.0, gp, g) == sy.cocycle(gp, g)


def test_dimension_mismatch_rejected():
    with pytest.raises(sy.DimensionError):
        sy.compose(G((1, 0)), G((1, 0, 0)))
    with pytest.raises(sy.DimensionError):
        sy.act_spacetime(G((1, 0)), sy.SpacetimeConfig([[0.0, 0.0, 0.0]], 0.0))


def test_rotation_invariants():
    with pytest.raises(ValueError):
        sy.Rotation(np.diag([1.0, 1.0, -1.0]))
    with pytest.raises(ValueError):
        sy.Rotation(np.array([[1.0, 0.1], [0.0, 1.0]]))
    q = np.array([0.3, -0.2, 0.9, 0.1])
    R = sy.Rotation.from_quaternion(q / np.linalg.norm(q))
    np.testing.assert_allclose(R.matrix.T @ R.matrix, np.eye(3), atol=1e-12)
    # double cover: q and -q give the same rotation
    R2 = sy.Rotation.from_quaternion(-q / np.linalg.norm(q))
    np.testing.assert_allclose(R.matrix, R2.matrix, atol=1e-15)


def test_d1_rotation_is_trivial():
    assert sy.Rotation.identity(1).matrix.tolist() == [[1.0]]
    with pytest.raises(ValueError):
        sy.Rotation(np.array([[-1.0]]))


# --- exact rational oracle --------------------------------------------------------

dyadic = st.integers(-64, 64).map(lambda k: k / 8)
ROTS = signed_permutations(3)


@st.composite
def lattice_elements(draw):
    R = ROTS[draw(st.integers(0, len(ROTS) - 1))]
    v = [draw(dyadic) for _ in range(3)]
    a = [draw(dyadic) for _ in range(3)]
    b = draw(dyadic)
    return R, v, a, b


def _float_elem(R, v, a, b):
    return sy.GalileiElement(sy.Rotation(R.astype(float)), np.array(v), np.array(a), b)


@settings(max_examples=200, deadline=None)
@given(lattice_elements(), lattice_elements())
def test_compose_matches_exact_oracle(x, y):
    got = sy.compose(_float_elem(*x), _float_elem(*y))
    want = exact_compose(to_exact(*x), to_exact(*y))
    assert got.components().tolist() == flatten_exact(want)


@settings(max_examples=200, deadline=None)
@given(lattice_elements())
def test_invert_matches_exact_oracle(x):
    assert sy.invert(_float_elem(*x)).components().tolist() == flatten_exact(exact_invert(to_exact(*x)))


@settings(max_examples=200, deadline=None)
@given(lattice_elements(), lattice_elements())
def test_cocycle_matches_exact_oracle(x, y):
    assert sy.cocycle(_float_elem(*x), _float_elem(*y)) == float(exact_cocycle(to_exact(*x), to_exact(*y)))


@settings(max_examples=100, deadline=None)
@given(lattice_elements(), lattice_elements(), lattice_elements())
def test_cocycle_condition_exact_in_rationals(x, y, z):
    gpp, gp, g = (to_exact(*e) for e in (x, y, z))
    res = (
        exact_cocycle(exact_compose(gpp, gp), g)
        - exact_cocycle(gpp, exact_compose(gp, g))
        + exact_cocycle(gpp, gp)
        - exact_cocycle(gp, g)
    )
    assert res == Fraction(0)
    assert sy.cocycle_condition_residual(*(_float_elem(*e) for e in (x, y, z))) == 0.0


# --- random floating-point properties -------------------------------------------

seeds = st.integers(0, 2**32 - 1)
dims = st.sampled_from([1, 2, 3])


def _rel(x, y):
    return np.max(np.abs(x - y)) / max(1.0, np.max(np.abs(x)), np.max(np.abs(y)))


@settings(max_examples=200, deadline=None)
@given(seeds, dims)
def test_associativity_and_inverses(seed, d):
    rng = np.random.default_rng(seed)
    g3, g2, g1 = (sy.random_element(rng, d) for _ in range(3))
    assert _rel(sy.compose(sy.compose(g3, g2), g1).components(), sy.compose(g3, sy.compose(g2, g1)).components()) < 1e-12
    e = sy.GalileiElement.identity(d).components()
    scale = max(1.0, np.max(np.abs(g1.components())))
    assert np.max(np.abs(sy.compose(sy.invert(g1), g1).components() - e)) / scale < 1e-12
    assert np.max(np.abs(sy.compose(g1, sy.invert(g1)).components() - e)) / scale < 1e-12


@settings(max_examples=200, deadline=None)
@given(seeds, dims)
def test_extended_group_laws(seed, d):
    rng = np.random.default_rng(seed)
    x3, x2, x1 = (sy.random_ext_element(rng, d) for _ in range(3))
    lhs = sy.compose_ext(sy.compose_ext(x3, x2), x1).components()
    rhs = sy.compose_ext(x3, sy.compose_ext(x2, x1)).components()
    assert _rel(lhs, rhs) < 1e-12
    e = sy.compose_ext(sy.invert_ext(x1), x1)
    scale = max(1.0, np.max(np.abs(x1.components())))
    assert np.max(np.abs(e.components() - sy.ExtendedElement.identity(d).components())) / scale ** 2 < 1e-12


@settings(max_examples=200, deadline=None)
@given(seeds, dims)
def test_actions_are_group_actions(seed, d):
    rng = np.random.default_rng(seed)
    x2, x1 = sy.random_ext_element(rng, d), sy.random_ext_element(rng, d)
    pos, zeta, t = rng.uniform(-10, 10, (3, d)), rng.uniform(-10, 10, 3), rng.uniform(-10, 10)
    c = sy.SpacetimeConfig(pos, t)
    a = sy.act_spacetime(x2.g, sy.act_spacetime(x1.g, c))
    b = sy.act_spacetime(sy.compose(x2.g, x1.g), c)
    assert _rel(a.positions, b.positions) < 1e-12 and abs(a.t - b.t) < 1e-12 * max(1, abs(a.t))
    ce = sy.ExtendedConfig(pos, zeta, t)
    a = sy.act_extended(x2, sy.act_extended(x1, ce))
    b = sy.act_extended(sy.compose_ext(x2, x1), ce)
    assert _rel(a.zetas, b.zetas) < 1e-12
    assert _rel(a.positions, b.positions) < 1e-12


@settings(max_examples=200, deadline=None)
@given(seeds)
def test_cocycle_condition_random(seed):
    rng = np.random.default_rng(seed)
    g3, g2, g1 = (sy.random_element(rng) for _ in range(3))
    res = sy.cocycle_condition_residual(g3, g2, g1)
    assert abs(res) <= 1e-12 * sy.cocycle_condition_scale(g3, g2, g1)


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_shifted_cocycle_satisfies_condition_and_keeps_defect(seed):
    rng = np.random.default_rng(seed)
    c = rng.normal(size=3)

    def delta(g):
        return c[0] * np.sin(g.b) + c[1] * (g.v @ g.a) + c[2] * np.trace(g.R)

    g3, g2, g1 = (sy.random_element(rng, scale=3.0) for _ in range(3))
    xi = lambda x, y: sy.shifted_cocycle(delta, x, y)  # noqa: E731
    res = xi(sy.compose(g3, g2), g1) - xi(g3, sy.compose(g2, g1)) + xi(g3, g2) - xi(g2, g1)
    assert abs(res) < 1e-11
    gp = G(rng.uniform(-3, 3, 3), rng.uniform(-3, 3, 3))
    g = G(rng.uniform(-3, 3, 3), rng.uniform(-3, 3, 3))
    expected = gp.v @ g.a - g.v @ gp.a
    assert sy.antisymmetric_defect(gp, g, delta) == pytest.approx(expected, abs=1e-12 * max(1, abs(expected)) * 10)


# --- group-level algebra probe ---------------------------------------------------


def test_probe_examples():
    est = sy.algebra_probe("V_x", "A_x", 1e-3)
    assert est["Z"] == pytest.approx(1.0, abs=1e-6)
    assert sy.bracket_error(est, {"Z": 1.0}) < 1e-6
    assert sy.bracket_error(sy.algebra_probe("A_x", "A_y", 1e-3), {}) == 0.0
    assert sy.bracket_error(sy.algebra_probe("V_x", "B", 1e-3), {"A_x": 1.0}) < 1e-6


def test_probe_rejects_bad_eps():
    with pytest.raises(ValueError):
        sy.algebra_probe("V_x", "A_x", 0.1)
    with pytest.raises(ValueError):
        sy.algebra_probe("V_x", "A_x", 0.0)


@pytest.mark.parametrize("d", [2, 3])
def test_probe_reproduces_every_structure_constant(d):
    labels = sy.basis_labels(d)
    eps = [1e-2, 1e-3, 1e-4]
    for X in labels:
        for Y in labels:
            expected = sy.expected_bracket(X, Y, d)
            raw = [sy.bracket_error(sy.algebra_probe(X, Y, e, d, richardson=False), expected) for e in eps]
            # error <= C eps with one constant across the sweep
            C = max(r / e for r, e in zip(raw, eps))
            assert C < 5.0, (X, Y, raw)
            assert sy.bracket_error(sy.algebra_probe(X, Y, 1e-3, d), expected) < 1e-6


def test_structure_constants_table():
    sc = sy.structure_constants(3)
    assert sc[("D_x", "D_y")] == {"D_z": 1.0}
    assert sc[("V_x", "A_x")] == {"Z": 1.0}
    assert sc[("A_x", "V_x")] == {"Z": -1.0}
    assert sc[("V_y", "B")] == {"A_y": 1.0}
    assert sc[("D_x", "V_y")] == {"V_z": 1.0}
    assert sc[("D_x", "A_y")] == {"A_z": 1.0}
    assert sc[("V_x", "A_y")] == {}
    for (X, Y), rhs in sc.items():
        if "Z" in (X, Y) or X == Y:
            assert rhs == {}
