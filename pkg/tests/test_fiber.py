import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bargmann import fiber as fb
from bargmann.grid import GridSpec, make_gaussian
from bargmann.potentials import ZeroPotential
from bargmann.quantum import evolve
from bargmann.reference import free_gaussian
from bargmann.symmetry import ExtendedElement, GalileiElement, cocycle

FREE = ZeroPotential()
TWO_PI = 2 * np.pi


@pytest.fixture(scope="module")
def line():
    return GridSpec.create(points=256, box=40.0)


def fibre(grid, masses, weights=None, centers=None, box=TWO_PI):
    weights = weights or [1.0] * len(masses)
    centers = centers or [0.0] * len(masses)
    slices = [make_gaussian(grid, [m], c, 1.0) * np.sqrt(w) for m, w, c in zip(masses, weights, centers)]
    return fb.MassFiberState(tuple(slices), box).normalized()


def test_lattice_constraints(line):
    assert fb.lattice_mass(3, TWO_PI) == pytest.approx(3.0)
    assert fb.lattice_index(-2.0, TWO_PI) == -2
    with pytest.raises(fb.LatticeError):
        fb.lattice_index(1.5, TWO_PI)
    with pytest.raises(fb.LatticeError):
        fibre(line, [1.5])
    with pytest.raises(ValueError):
        fibre(line, [1.0, 1.0])


def test_single_slice_modulus_is_zeta_independent(line):
    f = fb.synthesize_zeta(fibre(line, [2.0]), 16)
    mag = np.abs(f.amplitudes)
    assert np.max(np.abs(mag - mag[:, :1])) < 1e-15


def test_one_fringe_for_unit_index_gap(line):
    f = fb.synthesize_zeta(fibre(line, [1.0, 2.0]), 64)
    z, rho = f.zeta_marginal()
    assert np.allclose(rho, (1 + np.cos(z)) / TWO_PI, atol=1e-12)
    peaks = (rho > np.roll(rho, 1)) & (rho >= np.roll(rho, -1))
    assert peaks.sum() == 1


@settings(max_examples=10, deadline=None)
@given(w=st.floats(0.05, 0.95), c=st.floats(-3, 3))
def test_synthesis_round_trip(w, c):
    g = GridSpec.create(points=128, box=40.0)
    s = fibre(g, [1.0, 3.0], weights=[w, 1 - w], centers=[0.0, c])
    back, leftover = fb.analyze_zeta(fb.synthesize_zeta(s, 16), s.mass_lists)
    assert back.distance(s) < 1e-12
    assert leftover < 1e-12


def test_single_mode_field(line):
    s = fibre(line, [2.0])
    f = fb.synthesize_zeta(s, 8)
    back, leftover = fb.analyze_zeta(f, [[2.0]])
    _, weights = fb.mass_expectation(back)
    assert weights[0] == pytest.approx(1.0, abs=1e-12)
    other, _ = fb.analyze_zeta(f, [[2.0], [1.0]])
    assert other.slices[1].norm() < 1e-13


def test_aliasing_refused(line):
    s = fibre(line, [1.0, 5.0])
    with pytest.raises(fb.AliasingError):
        fb.synthesize_zeta(s, 8)


def test_evolve_fiber_per_mass(line):
    g = GridSpec.create(points=1024, box=40.0)
    s = fibre(g, [1.0, 3.0])
    out = fb.evolve_fiber(s, FREE, 1.0)
    assert out.norm2() == pytest.approx(1.0, abs=1e-12)
    for phi, m in zip(out.slices, (1.0, 3.0)):
        ref = free_gaussian(g.axis(0), 1.0, m, 0.0, 1.0) * np.sqrt(0.5)
        assert np.sqrt(np.sum(np.abs(phi.amplitudes - ref) ** 2) * g.cell_volume) < 1e-10
    single = fibre(g, [2.0])
    assert fb.evolve_fiber(single, FREE, 0.5).slices[0].distance(evolve(single.slices[0], FREE, 0.5)) == 0.0


def test_theta_acts_as_global_phase(line):
    s = fibre(line, [3.0])
    out = fb.apply_Ubar(ExtendedElement(0.4, GalileiElement.identity(1)), s)
    assert out.slices[0].distance(s.slices[0] * np.exp(1.2j)) < 1e-14
    assert fb.apply_Ubar(ExtendedElement.identity(1), s).distance(s) < 1e-15


def _extended(rng, scale=0.5):
    return ExtendedElement(
        float(rng.uniform(-1, 1)),
        GalileiElement.make(v=[rng.uniform(-scale, scale)], a=[rng.uniform(-2 * scale, 2 * scale)]),
    )


def test_ubar_matches_field_pullback(line):
    rng = np.random.default_rng(5)
    s = fibre(line, [1.0, 2.0, 3.0], centers=[-1.0, 0.0, 1.0])
    for _ in range(5):
        gbar = _extended(rng)
        lhs = fb.synthesize_zeta(fb.apply_Ubar(gbar, s), 16)
        rhs = fb.pullback_zeta_field(fb.synthesize_zeta(s, 16), gbar)
        assert lhs.distance(rhs) < 1e-10


def test_true_representation_with_theta(line):
    rng = np.random.default_rng(11)
    s = fibre(line, [1.0, 2.0, 3.0])
    for _ in range(5):
        gp, g = _extended(rng), _extended(rng)
        assert fb.representation_residual(gp, g, s) < 1e-10


def test_dropping_theta_brings_back_the_multiplier(line):
    s = fibre(line, [1.0, 2.0])
    gp = ExtendedElement(0.0, GalileiElement.make(v=[0.5]))
    g = ExtendedElement(0.0, GalileiElement.make(a=[1.0]))
    xi = cocycle(gp.g, g.g)
    weights = fb.mass_expectation(s)[1]
    expected = np.sqrt(sum(w * abs(np.exp(1j * M * xi) - 1) ** 2 for w, M in zip(weights, (1.0, 2.0))))
    assert fb.representation_residual(gp, g, s, track_theta=False) == pytest.approx(expected, abs=1e-10)


def test_projective_defect_examples(line):
    s = fibre(line, [1.0, 2.0])
    g = GalileiElement.make(a=[1.0])
    none = fb.projective_defect(GalileiElement.make(a=[0.5]), g, s)
    assert all(abs(ph) < 1e-12 for _, ph in none)
    phases = dict(fb.projective_defect(GalileiElement.make(v=[1.0]), g, s))
    assert phases[1.0] == pytest.approx(1.0, abs=1e-10)
    assert phases[2.0] == pytest.approx(2.0, abs=1e-10)


def test_mass_expectation(line):
    mean, weights = fb.mass_expectation(fibre(line, [3.0]))
    assert mean == pytest.approx(3.0) and weights == pytest.approx((1.0,))
    s = fibre(line, [1.0, 3.0])
    assert fb.mass_expectation(s)[0] == pytest.approx(2.0)
    moved = fb.apply_Ubar(ExtendedElement(0.7, GalileiElement.make(v=[0.3], a=[1.0])), s)
    assert fb.mass_expectation(moved)[1] == pytest.approx(fb.mass_expectation(s)[1], abs=1e-12)


def test_central_kernel(line):
    assert fb.central_kernel_period(2.0) == pytest.approx(np.pi)
    assert fb.central_kernel_period(-2.0) == pytest.approx(np.pi)
    with pytest.raises(ValueError):
        fb.central_kernel_period(0.0)
    s = fibre(line, [1.0])
    turn = ExtendedElement(TWO_PI, GalileiElement.identity(1))
    assert fb.apply_Ubar(turn, s).distance(s) < 1e-12
    both = fibre(line, [1.0, 2.0])
    half = ExtendedElement(np.pi, GalileiElement.identity(1))
    out = fb.apply_Ubar(half, both)
    assert out.slices[0].distance(both.slices[0] * -1) < 1e-12
    assert out.slices[1].distance(both.slices[1]) < 1e-12


def test_negative_masses_are_flagged(line):
    s = fibre(line, [1.0, -1.0])
    assert s.has_negative_mass
    assert not fibre(line, [1.0]).has_negative_mass


def test_slices_must_share_a_grid(line):
    a = make_gaussian(line, [1.0], 0.0, 1.0)
    b = make_gaussian(GridSpec.create(points=128, box=40.0), [2.0], 0.0, 1.0)
    with pytest.raises(ValueError):
        fb.MassFiberState((a, b), TWO_PI)
    with pytest.raises(ValueError):
        fb.MassFiberState((), TWO_PI)


def test_zeta_translation_is_theta_phase(line):
    s = fibre(line, [1.0, 2.0])
    f = fb.synthesize_zeta(s, 16)
    theta = 0.9
    shifted = fb.translate_zeta(f, theta)
    via = fb.synthesize_zeta(fb.apply_Ubar(ExtendedElement(theta, GalileiElement.identity(1)), s), 16)
    assert shifted.distance(via) < 1e-12


def test_field_pullback_refuses_time_shift(line):
    f = fb.synthesize_zeta(fibre(line, [1.0]), 8)
    with pytest.raises(ValueError):
        fb.pullback_zeta_field(f, ExtendedElement(0.0, GalileiElement.make(b=1.0, d=1)))

