import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bargmann import quantum as qm
from bargmann.grid import GridSpec, Wavefunction, make_gaussian
from bargmann.potentials import ExternalHarmonic, HarmonicPair, ZeroPotential
from bargmann.reference import coherent_state, free_gaussian
from bargmann.symmetry import DimensionError, GalileiElement, Rotation, cocycle

FREE = ZeroPotential()


@pytest.fixture(scope="module")
def line():
    return GridSpec.create(points=1024, box=40.0)


@pytest.fixture(scope="module")
def gauss(line):
    return make_gaussian(line, [1.0], 0.0, 1.0)


def test_plane_wave_eigenvalue():
    g = GridSpec.create(points=64, box=2 * np.pi, hbar=0.8)
    psi = Wavefunction.from_function(g, [1.7], lambda x: np.exp(4j * x[0][0]))
    Hpsi = qm.apply_hamiltonian(psi, FREE)
    assert np.max(np.abs(Hpsi.amplitudes - 0.8**2 * 16 / (2 * 1.7) * psi.amplitudes)) < 1e-12


def test_harmonic_ground_state_energy():
    g = GridSpec.create(points=256, box=20.0)
    m, k = 1.3, 2.0
    omega = np.sqrt(k / m)
    psi = Wavefunction.from_function(g, [m], lambda x: coherent_state(x[0][0], 0.0, m, omega, 0.0))
    Hpsi = qm.apply_hamiltonian(psi, ExternalHarmonic(k))
    assert Hpsi.distance(psi * (omega / 2)) < 1e-8


def test_hamiltonian_is_hermitian(line):
    rng = np.random.default_rng(3)
    x = line.axis(0)
    env = np.exp(-(x**2) / 8)
    a = Wavefunction(line, env * (rng.normal(size=x.size) + 1j * rng.normal(size=x.size)), (1.0,))
    b = Wavefunction(line, env * (rng.normal(size=x.size) + 1j * rng.normal(size=x.size)), (1.0,))
    V = ExternalHarmonic(0.5)
    lhs = a.inner(qm.apply_hamiltonian(b, V))
    rhs = qm.apply_hamiltonian(a, V).inner(b)
    assert abs(lhs - rhs) < 1e-10 * abs(lhs)


def test_evolve_zero_time_is_identity(gauss):
    assert qm.evolve(gauss, ExternalHarmonic(1.0), 0.0).distance(gauss) == 0.0


def test_free_evolution_matches_closed_form(line):
    psi = make_gaussian(line, [1.0], -2.0, 1.0, momenta=1.0)
    out = qm.evolve(psi, FREE, 1.0)
    ref = Wavefunction(line, free_gaussian(line.axis(0), 1.0, 1.0, -2.0, 1.0, k0=1.0), (1.0,))
    assert out.distance(ref) <= 1e-6


def test_harmonic_evolution_forward_and_back():
    g = GridSpec.create(points=256, box=20.0)
    psi = make_gaussian(g, [1.0], 1.0, 1.0)
    V = ExternalHarmonic(1.0)
    fwd = qm.evolve(psi, V, 0.5, dt=1e-3)
    assert abs(fwd.norm() - 1.0) < 1e-12
    assert qm.evolve(fwd, V, -0.5, dt=1e-3).distance(psi) < 1e-12


def test_coherent_state_period_fidelity():
    g = GridSpec.create(points=256, box=20.0)
    omega = 1.0
    psi = Wavefunction.from_function(g, [1.0], lambda x: coherent_state(x[0][0], 0.0, 1.0, omega, 2.0))
    out = qm.evolve(psi, ExternalHarmonic(1.0), 2 * np.pi / omega, dt=2 * np.pi / 4000)
    assert abs(psi.inner(out)) ** 2 >= 1 - 1e-6


def test_non_integral_step_count_warns(gauss):
    with pytest.warns(UserWarning):
        qm.evolve(gauss, ExternalHarmonic(1.0), 0.01, dt=0.003)
    with pytest.raises(ValueError):
        qm.evolve(gauss, ExternalHarmonic(1.0), 0.01, dt=0.0)


def test_apply_U_identity(gauss):
    assert qm.apply_U(GalileiElement.identity(1), gauss, FREE).distance(gauss) < 1e-15


def test_pure_boost_shifts_momentum(line, gauss):
    M = 2.5
    psi = make_gaussian(line, [M], 0.0, 1.0)
    out = qm.apply_U(GalileiElement.make(v=[0.6]), psi, FREE)
    assert qm.momentum_expectation(out)[0, 0] == pytest.approx(M * 0.6, abs=1e-8)
    x = line.axis(0)
    assert np.max(np.abs(out.amplitudes - np.exp(1j * M * 0.6 * x) * psi.amplitudes)) < 1e-14


@settings(max_examples=15, deadline=None)
@given(
    v=st.floats(-0.5, 0.5),
    a=st.floats(-2, 2),
    b=st.floats(-0.5, 0.5),
)
def test_apply_U_is_unitary_and_invertible(v, a, b):
    g = GridSpec.create(points=512, box=40.0)
    psi = make_gaussian(g, [1.5], 0.0, 1.0)
    el = GalileiElement.make(v=[v], a=[a], b=b)
    out = qm.apply_U(el, psi, FREE)
    assert abs(out.norm() - 1.0) < 1e-12
    assert qm.apply_U_inverse(el, out, FREE).distance(psi) < 1e-12


def test_apply_U_refuses_dimension_mismatch(gauss):
    with pytest.raises(DimensionError):
        qm.apply_U(GalileiElement.identity(2), gauss)


def test_planar_rotation_action_is_unitary():
    g = GridSpec.create(d=2, points=64, box=24.0)
    psi = make_gaussian(g, [1.0], [[1.0, -0.5]], [[1.0, 1.3]])
    el = GalileiElement.make(R=Rotation.from_angle(0.8), v=[0.2, -0.1], a=[0.5, 0.3])
    out = qm.apply_U(el, psi, FREE)
    assert abs(out.norm() - 1.0) < 1e-12
    assert qm.apply_U_inverse(el, out, FREE).distance(psi) < 1e-9


def test_solution_map_translation_free(line):
    psi = make_gaussian(line, [1.0], 0.0, 1.0)
    assert qm.solution_map_residual(GalileiElement.identity(1), psi, FREE, 1.0) < 1e-12
    assert qm.solution_map_residual(GalileiElement.make(a=[1.3]), psi, FREE, 1.0) <= 1e-8


def test_solution_map_boost_translation_pair():
    g = GridSpec.create(n=2, points=128, box=24.0)
    psi = make_gaussian(g, [1.0, 2.0], [[-1.0], [1.0]], 1.0)
    el = GalileiElement.make(v=[0.3], a=[0.7], b=0.2)
    assert qm.solution_map_residual(el, psi, HarmonicPair(1.0), 1.0, dt=1e-2) <= 1e-6


def test_solution_map_detects_broken_symmetry():
    g = GridSpec.create(points=256, box=30.0)
    psi = make_gaussian(g, [1.0], 0.0, 1.0)
    assert qm.solution_map_residual(GalileiElement.make(a=[1.0]), psi, ExternalHarmonic(1.0), 1.0, dt=1e-2) > 0.1


def test_composition_phase_orders(gauss):
    boost, trans = GalileiElement.make(v=[1.0]), GalileiElement.make(a=[1.0])
    first = qm.composition_phase(trans, boost, gauss, FREE)
    assert first.predicted == pytest.approx(0.0)
    assert abs(first.error) < 1e-10
    second = qm.composition_phase(boost, trans, gauss, FREE)
    assert second.predicted == pytest.approx(1.0)
    assert abs(second.error) < 1e-10
    trivial = qm.composition_phase(GalileiElement.identity(1), boost, gauss, FREE)
    assert abs(trivial.measured) < 1e-12


@settings(max_examples=10, deadline=None)
@given(
    v1=st.floats(-0.4, 0.4), a1=st.floats(-1, 1), b1=st.floats(-0.4, 0.4),
    v2=st.floats(-0.4, 0.4), a2=st.floats(-1, 1), b2=st.floats(-0.4, 0.4),
)
def test_composition_phase_is_the_cocycle(v1, a1, b1, v2, a2, b2):
    g = GridSpec.create(points=512, box=40.0)
    psi = make_gaussian(g, [1.3], 0.0, 1.0)
    gp = GalileiElement.make(v=[v1], a=[a1], b=b1)
    el = GalileiElement.make(v=[v2], a=[a2], b=b2)
    res = qm.composition_phase(gp, el, psi, FREE)
    assert res.predicted == pytest.approx(qm.wrap_phase(1.3 * cocycle(gp, el)))
    assert abs(res.error) < 1e-9


def test_commutator_phase_example(line):
    psi = make_gaussian(line, [2.0], 0.0, 1.0)
    res = qm.commutator_phase([0.5], [1.0], psi)
    assert res.predicted == pytest.approx(-1.0)
    assert abs(res.measured) == pytest.approx(1.0, abs=1e-10)
    assert res.overlap > 1 - 1e-12
    assert abs(qm.commutator_phase([0.5], [0.0], psi).measured) < 1e-14


def test_phase_comparison_needs_overlap(line):
    a = make_gaussian(line, [1.0], -3.0, 1.0)
    b = make_gaussian(line, [1.0], 3.0, 1.0)
    with pytest.raises(qm.PhaseComparisonError):
        qm._relative_phase(a, b)


def test_superselection_examples(line):
    psi1 = make_gaussian(line, [1.0], 0.0, 1.0)
    psi2 = make_gaussian(line, [2.0], 0.0, 1.0)
    same = qm.superselection_demo(psi1, psi1, [1.0], [1.0])
    assert abs(same.relative_measured) < 1e-12
    gap = qm.superselection_demo(psi2, psi1, [1.0], [1.0])
    assert abs(gap.relative_predicted) == pytest.approx(1.0)
    assert gap.error < 1e-10
    assert min(r.overlap for r in gap.branch) >= 1 - 1e-8


def test_generator_labels():
    assert [str(x) for x in qm.generator_labels(2)] == ["D_z", "V_x", "V_y", "A_x", "A_y", "B", "Z"]
    assert str(qm.GeneratorLabel.parse("A_y")) == "A_y"
    for bad in ("Q", "A", "A_w", "B_x"):
        with pytest.raises(ValueError):
            qm.GeneratorLabel.parse(bad)


def test_generators_on_simple_states(line, gauss):
    M = 1.0
    assert qm.apply_generator("Z", gauss).distance(gauss * (1j * M)) < 1e-15
    g = GridSpec.create(points=64, box=2 * np.pi)
    wave = Wavefunction.from_function(g, [1.0], lambda x: np.exp(3j * x[0][0]))
    assert qm.apply_generator("A_x", wave).distance(wave * (-3j)) < 1e-12
    with pytest.raises(DimensionError):
        qm.apply_generator("D_z", gauss)
    with pytest.raises(DimensionError):
        qm.apply_generator("A_y", gauss)


def test_generators_are_anti_hermitian():
    g = GridSpec.create(d=2, points=64, box=24.0)
    a = make_gaussian(g, [1.2], [[1.0, 0.0]], 1.0, momenta=[[0.3, -0.2]])
    b = make_gaussian(g, [1.2], [[0.0, -0.5]], 1.3)
    V = ExternalHarmonic(0.4)
    for X in qm.generator_labels(2):
        lhs = a.inner(qm.apply_generator(X, b, V))
        rhs = -qm.apply_generator(X, a, V).inner(b)
        assert abs(lhs - rhs) < 1e-9, X


@pytest.mark.parametrize(
    "X, Y, V, tol",
    [
        ("V_x", "A_x", FREE, 1e-8),
        ("A_x", "A_x", FREE, 1e-10),
        ("V_x", "B", FREE, 1e-6),
        ("V_x", "B", HarmonicPair(1.0), 1e-6),
        ("A_x", "B", HarmonicPair(1.0), 1e-6),
        ("V_x", "Z", HarmonicPair(1.0), 1e-10),
    ],
)
def test_algebra_residual_one_dimension(X, Y, V, tol):
    g = GridSpec.create(n=2, points=128, box=24.0)
    psi = make_gaussian(g, [1.0, 2.0], [[-1.0], [1.0]], 1.0)
    assert qm.algebra_residual(X, Y, psi, V) <= tol


def test_algebra_residual_planar():
    g = GridSpec.create(d=2, points=64, box=24.0)
    psi = make_gaussian(g, [1.0], [[0.5, -0.5]], 1.0)
    labels = qm.generator_labels(2)
    worst = max(qm.algebra_residual(x, y, psi, FREE) for x in labels for y in labels)
    assert worst <= 1e-6


def test_casimir_K_free_particle_vanishes(gauss):
    assert qm.casimir_K(gauss, FREE).norm() < 1e-8


def test_casimir_K_internal_ground_state():
    g = GridSpec.create(n=2, points=128, box=24.0)
    m1, m2, k = 1.0, 2.0, 1.5
    mu = m1 * m2 / (m1 + m2)
    omega = np.sqrt(k / mu)

    def f(x):
        r = x[0][0] - x[1][0]
        R = (m1 * x[0][0] + m2 * x[1][0]) / (m1 + m2)
        return np.exp(-mu * omega * r**2 / 2 - R**2 / 2)

    psi = Wavefunction.from_function(g, [m1, m2], f)
    V = HarmonicPair(k)
    expected = 2 * (m1 + m2) * omega / 2
    assert qm.casimir_K(psi, V).distance(psi * expected) <= 1e-6
    for X in qm.generator_labels(1):
        assert qm.casimir_commutator("K", X, psi, V) <= 1e-5


def test_casimir_S2_single_particle_vanishes():
    g = GridSpec.create(d=2, points=64, box=24.0)
    psi = make_gaussian(g, [1.0], [[0.5, -0.3]], 1.0, momenta=[[0.4, 0.1]])
    assert qm.casimir_S2(psi, FREE).norm() <= 1e-6
    with pytest.raises(DimensionError):
        qm.casimir_S2(make_gaussian(GridSpec.create(points=64, box=24.0), [1.0], 0.0, 1.0))
