"""Invariant suites behind the command line, and the report they produce.

Each suite turns a :class:`~bargmann.config.ScenarioConfig` into a list of
:class:`Check` records plus optional plottable artifacts. :func:`run_suite`
wraps the result in a :class:`Report`, writes ``<out>/<suite>.json`` and the
data exports, and the CLI maps the overall status onto the exit code.
"""

from __future__ import annotations

import datetime as _dt
import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import classical as cl
from . import fiber as fb
from . import quantum as qm
from . import symmetry as sy
from .config import ScenarioConfig
from .grid import GridSpec, Wavefunction, make_gaussian
from .potentials import ExternalHarmonic, from_spec
from .reference import coherent_state, free_gaussian


@dataclass(frozen=True)
class Check:
    """One verified property.

    ``mode`` fixes how ``measured`` is judged: ``"le"`` means
    ``measured <= tolerance``, ``"abs"`` means ``|measured - predicted| <= tolerance``
    and ``"ge"`` means ``measured >= predicted - tolerance``.
    """

    name: str
    ref: str
    measured: float
    predicted: float
    tolerance: float
    mode: str = "le"

    @property
    def passed(self) -> bool:
        m, p, tol = self.measured, self.predicted, self.tolerance
        if not np.isfinite(m):
            return False
        if self.mode == "le":
            return m <= tol
        if self.mode == "abs":
            return abs(m - p) <= tol
        if self.mode == "ge":
            return m >= p - tol
        raise ValueError(f"unknown check mode {self.mode!r}")

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "ref": self.ref,
            "measured": float(self.measured),
            "predicted": float(self.predicted),
            "tolerance": float(self.tolerance),
            "mode": self.mode,
            "pass": bool(self.passed),
        }


@dataclass(frozen=True)
class Series:
    """A table destined for CSV: column names and equal-length columns."""

    header: tuple[str, ...]
    columns: tuple[np.ndarray, ...]


@dataclass
class Report:
    suite: str
    checks: list[Check]
    seed: int
    config: dict
    settings: dict
    tolerance_scale: float
    wall_clock_s: float = 0.0
    started_at: str = ""
    exports: list[str] = field(default_factory=list)
    flags: list[str] = field(default_factory=list)
    artifacts: dict[str, Any] = field(default_factory=dict, repr=False)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "suite": self.suite,
            "status": "pass" if self.passed else "fail",
            "checks": [c.to_dict() for c in self.checks],
            "seed": self.seed,
            "config": self.config,
            "settings": self.settings,
            "tolerance_scale": self.tolerance_scale,
            "exports": list(self.exports),
            "flags": list(self.flags),
            "wall_clock_s": self.wall_clock_s,
            "started_at": self.started_at,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


class _Checks:
    """Collects checks with tolerances looked up (and scaled) from the config."""

    def __init__(self, cfg: ScenarioConfig):
        self.cfg = cfg
        self.items: list[Check] = []

    def add(self, name: str, ref: str, measured: float, predicted: float = 0.0, mode: str = "le") -> None:
        self.items.append(Check(name, ref, float(measured), float(predicted), self.cfg.tol(name), mode))


# ---------------------------------------------------------------------------
# Element parsing and sampling
# ---------------------------------------------------------------------------


def parse_element(spec: dict, d: int) -> sy.ExtendedElement:
    """Build an extended element from a config object with optional
    ``angle`` / ``rotvec`` / ``quaternion``, ``v``, ``a``, ``b`` and ``theta``."""
    if "angle" in spec:
        if d != 2:
            raise sy.DimensionError("'angle' rotations need d = 2")
        rot = sy.Rotation.from_angle(spec["angle"])
    elif "rotvec" in spec:
        rot = sy.Rotation.from_rotvec(spec["rotvec"])
    elif "quaternion" in spec:
        rot = sy.Rotation.from_quaternion(spec["quaternion"])
    else:
        rot = sy.Rotation.identity(d)
    v = np.asarray(spec.get("v", np.zeros(d)), dtype=float)
    a = np.asarray(spec.get("a", np.zeros(d)), dtype=float)
    g = sy.GalileiElement(rot, v, a, float(spec.get("b", 0.0)))
    if g.dim != d:
        raise sy.DimensionError(f"element has dimension {g.dim}, scenario needs {d}")
    return sy.ExtendedElement(float(spec.get("theta", 0.0)), g)


def _count(elements) -> int | None:
    return int(elements.split(":")[1]) if isinstance(elements, str) else None


def _small_element(rng: np.random.Generator, d: int, scale: float, with_b: bool = True) -> sy.ExtendedElement:
    """Element sized for grid work: ``|v|, |b| <= scale``, ``|a|, |theta| <= 4 scale``."""
    rot = sy.random_rotation(rng, d) if d >= 2 else sy.Rotation.identity(d)
    g = sy.GalileiElement(
        rot,
        rng.uniform(-scale, scale, d),
        rng.uniform(-4 * scale, 4 * scale, d),
        rng.uniform(-scale, scale) if with_b else 0.0,
    )
    return sy.ExtendedElement(rng.uniform(-4 * scale, 4 * scale), g)


def _tuples(cfg: ScenarioConfig, rng, d: int, size: int, draw: Callable) -> list[tuple]:
    """``size``-tuples of elements: random draws, or all ordered tuples of an explicit list."""
    count = _count(cfg["elements"])
    if count is not None:
        return [tuple(draw() for _ in range(size)) for _ in range(count)]
    pool = [parse_element(e, d) for e in cfg["elements"]]
    idx = np.indices((len(pool),) * size).reshape(size, -1).T
    return [tuple(pool[i] for i in row) for row in idx]


def _rel_gap(x: np.ndarray, y: np.ndarray) -> float:
    scale = max(1.0, float(np.max(np.abs(x))), float(np.max(np.abs(y))))
    return float(np.max(np.abs(x - y))) / scale


def _log_slope(h, err) -> float:
    return float(np.polyfit(np.log(h), np.log(err), 1)[0])


# ---------------------------------------------------------------------------
# Suites
# ---------------------------------------------------------------------------


def suite_group_axioms(cfg: ScenarioConfig, rng: np.random.Generator):
    d, scale = cfg["d"], cfg["element_scale"]
    triples = _tuples(cfg, rng, d, 3, lambda: sy.random_ext_element(rng, d, scale))
    worst = dict.fromkeys(
        ["assoc", "inv", "act", "xassoc", "xinv", "xact", "cocycle"], 0.0
    )
    for x3, x2, x1 in triples:
        g3, g2, g1 = x3.g, x2.g, x1.g
        worst["assoc"] = max(
            worst["assoc"],
            _rel_gap(sy.compose(sy.compose(g3, g2), g1).components(), sy.compose(g3, sy.compose(g2, g1)).components()),
        )
        e = sy.GalileiElement.identity(d).components()
        gi = sy.invert(g1)
        worst["inv"] = max(
            worst["inv"],
            _rel_gap(sy.compose(g1, gi).components(), e) * _inv_scale(g1),
            _rel_gap(sy.compose(gi, g1).components(), e) * _inv_scale(g1),
        )
        pos = rng.uniform(-scale, scale, (2, d))
        t, zeta = rng.uniform(-scale, scale), rng.uniform(-scale, scale, 2)
        c = sy.SpacetimeConfig(pos, t)
        lhs = sy.act_spacetime(g2, sy.act_spacetime(g1, c))
        rhs = sy.act_spacetime(sy.compose(g2, g1), c)
        worst["act"] = max(
            worst["act"],
            _rel_gap(np.append(lhs.positions.ravel(), lhs.t), np.append(rhs.positions.ravel(), rhs.t)),
        )
        worst["xassoc"] = max(
            worst["xassoc"],
            _rel_gap(
                sy.compose_ext(sy.compose_ext(x3, x2), x1).components(),
                sy.compose_ext(x3, sy.compose_ext(x2, x1)).components(),
            ),
        )
        xe = sy.ExtendedElement.identity(d).components()
        xi = sy.invert_ext(x1)
        worst["xinv"] = max(
            worst["xinv"],
            _rel_gap(sy.compose_ext(x1, xi).components(), xe) * _inv_scale(g1),
            _rel_gap(sy.compose_ext(xi, x1).components(), xe) * _inv_scale(g1),
        )
        ce = sy.ExtendedConfig(pos, zeta, t)
        lhs = sy.act_extended(x2, sy.act_extended(x1, ce))
        rhs = sy.act_extended(sy.compose_ext(x2, x1), ce)
        worst["xact"] = max(
            worst["xact"],
            _rel_gap(_ext_config_vec(lhs), _ext_config_vec(rhs)),
        )
        worst["cocycle"] = max(
            worst["cocycle"],
            abs(sy.cocycle_condition_residual(g3, g2, g1)) / sy.cocycle_condition_scale(g3, g2, g1),
        )
    out = _Checks(cfg)
    out.add("associativity", "group law: associativity", worst["assoc"])
    out.add("inverse", "group law: inverse", worst["inv"])
    out.add("action_compatibility", "spacetime action is a group action", worst["act"])
    out.add("ext_associativity", "extended group law: associativity", worst["xassoc"])
    out.add("ext_inverse", "extended group law: inverse", worst["xinv"])
    out.add("ext_action_compatibility", "extended action is a group action", worst["xact"])
    out.add("cocycle_condition", "cocycle condition (coboundary of xi vanishes)", worst["cocycle"])
    return out.items, {}


def _inv_scale(g: sy.GalileiElement) -> float:
    """Rescale an identity-comparison gap to be relative to the element's size."""
    return 1.0 / max(1.0, float(np.max(np.abs(g.components()))))


def _ext_config_vec(c: sy.ExtendedConfig) -> np.ndarray:
    return np.concatenate([c.positions.ravel(), c.zetas, [c.t]])


def _random_delta(rng: np.random.Generator, d: int) -> Callable[[sy.GalileiElement], float]:
    """A random smooth function on the group, used as a coboundary generator."""
    c = rng.normal(size=6)
    u = rng.normal(size=d)
    w = rng.normal(size=d * d)

    def delta(g: sy.GalileiElement) -> float:
        return float(
            c[0] * g.b
            + c[1] * np.sin(g.v @ u)
            + c[2] * g.a @ u
            + c[3] * np.cos(0.1 * g.b) * (g.v @ g.v)
            + c[4] * np.tanh(g.a @ g.v / 10.0)
            + c[5] * g.R.ravel() @ w
        )

    return delta


def suite_cocycle(cfg: ScenarioConfig, rng: np.random.Generator):
    d, scale = cfg["d"], cfg["element_scale"]

    def draw():
        g = sy.GalileiElement.make(v=rng.uniform(-scale, scale, d), a=rng.uniform(-scale, scale, d))
        return sy.ExtendedElement(0.0, g)

    pairs = [(x.g, y.g) for x, y in _tuples(cfg, rng, d, 2, draw)]
    formula = invariance = condition = 0.0
    nonzero = 0
    for gp, g in pairs:
        expected = float(gp.v @ g.a - g.v @ gp.a)
        scale_ = max(1.0, abs(expected), float(np.max(np.abs(gp.v))) * float(np.max(np.abs(g.a))))
        base = sy.antisymmetric_defect(gp, g)
        formula = max(formula, abs(base - expected) / scale_)
        nonzero += abs(expected) > 1e-9
        delta = _random_delta(rng, d)
        shifted = sy.antisymmetric_defect(gp, g, delta)
        terms = [delta(sy.compose(gp, g)), delta(gp), delta(g), sy.cocycle(gp, g)]
        invariance = max(invariance, abs(shifted - base) / max(1.0, *map(abs, terms)))
        g3 = sy.random_element(rng, d, scale)
        xi = lambda x, y: sy.shifted_cocycle(delta, x, y)  # noqa: E731
        res = xi(sy.compose(g3, gp), g) - xi(g3, sy.compose(gp, g)) + xi(g3, gp) - xi(gp, g)
        mags = [
            abs(xi(sy.compose(g3, gp), g)),
            abs(xi(g3, sy.compose(gp, g))),
            abs(xi(g3, gp)),
            abs(xi(gp, g)),
            abs(delta(sy.compose(sy.compose(g3, gp), g))),
        ]
        condition = max(condition, abs(res) / max(1.0, *mags))
    out = _Checks(cfg)
    out.add("defect_formula", "antisymmetric defect equals v'.a - v.a'", formula)
    out.add("defect_coboundary_invariance", "defect unchanged by coboundary shifts", invariance)
    out.add("shifted_cocycle_condition", "shifted cocycle still satisfies the cocycle condition", condition)
    out.add(
        "defect_nonzero_fraction",
        "defect is generically nonzero, so xi is not a coboundary",
        nonzero / len(pairs),
        1.0,
        mode="ge",
    )
    return out.items, {}


def _classical_initial(cfg: ScenarioConfig, rng: np.random.Generator) -> cl.ClassicalState:
    masses = np.asarray(cfg["masses"], dtype=float)
    n, d = len(masses), cfg["d"]
    return cl.ClassicalState(rng.uniform(-1.5, 1.5, (n, d)), rng.uniform(-1, 1, (n, d)), rng.uniform(-1, 1, n), masses)


def suite_classical(cfg: ScenarioConfig, rng: np.random.Generator):
    V = from_spec(cfg["potential"])
    d, dt = cfg["d"], cfg["dt"]
    s0 = _classical_initial(cfg, rng)
    steps = int(round(cfg["energy_T"] / dt))
    traj = cl.integrate(s0, V, dt, steps)
    mass_gap = float(np.max(np.abs(traj.m - s0.m)))
    drift = cl.energy_drift(traj, V)
    quad = cl.zeta_quadrature(traj, V)
    zeta_gap = float(np.max(np.abs((traj.zeta - traj.zeta[0]) - quad)))

    scale = cfg["element_scale"]
    gaps = {True: 0.0, False: 0.0}
    count = _count(cfg["elements"])
    if count is not None:
        elements = [_small_element(rng, d, scale, with_b=bool(k % 2)) for k in range(2 * count)]
    else:
        elements = [parse_element(e, d) for e in cfg["elements"]]
    for gbar in elements:
        start = _classical_initial(cfg, rng)
        r = cl.covariance_residual(gbar, start, V, cfg["T"], dt)
        key = gbar.g.b == 0.0
        gaps[key] = max(gaps[key], r)
    out = _Checks(cfg)
    out.add("mass_conservation", "masses conserved (dm/dt = -dH/dzeta = 0)", mass_gap)
    out.add("energy_drift", "energy conservation under RK4", drift)
    out.add("zeta_quadrature", "zeta(t) equals the integral of dV/dm - xdot^2/2", zeta_gap)
    out.add("covariance_b0", "extended action maps trajectories to trajectories (b = 0)", gaps[True])
    out.add("covariance_b", "extended action maps trajectories to trajectories (b != 0)", gaps[False])
    return out.items, {"trajectory": traj}


def _grid1(cfg: ScenarioConfig, key: str = "grid", n: int = 1, d: int = 1) -> GridSpec:
    spec = cfg[key]
    return GridSpec.create(n=n, d=d, points=spec["points"], box=spec["box"], hbar=cfg["hbar"])


def suite_quantum(cfg: ScenarioConfig, rng: np.random.Generator):
    hbar, dt, T = cfg["hbar"], cfg["dt"], cfg["T"]
    grid = _grid1(cfg)
    m = cfg["masses"][0]
    out = _Checks(cfg)
    x = grid.axis(0)

    # Closed-form free packet.
    w, k0 = 1.0, 1.0
    psi0 = make_gaussian(grid, [m], [[0.0]], [[w]], [[k0]])
    free = qm.evolve(psi0, None, T, dt)
    exact = free_gaussian(x, T, m, 0.0, w, k0, hbar)
    out.add("free_gaussian_oracle", "free Schroedinger evolution vs closed-form packet", free.distance(free.with_amplitudes(exact)))

    # Second-order convergence on the oscillator, where splitting is not exact.
    omega = 1.0
    trap = ExternalHarmonic(k=m * omega**2)
    x0 = 2.0
    coh0 = Wavefunction(grid, coherent_state(x, 0.0, m, omega, x0, hbar), (m,))
    steps = np.array([0.04, 0.02, 0.01, 0.005])
    errs = [
        qm.evolve(coh0, trap, 1.0, h).distance(coh0.with_amplitudes(coherent_state(x, 1.0, m, omega, x0, hbar)))
        for h in steps
    ]
    out.add("convergence_order", "Strang splitting is second order in dt", _log_slope(steps, errs), 2.0, mode="ge")
    moved = qm.evolve(coh0, trap, T, dt)
    out.add("norm_preservation", "evolution is unitary", abs(moved.norm() - 1.0) / T)
    period = 2 * np.pi / omega
    back = qm.evolve(coh0, trap, period, period / 4096)
    out.add("period_fidelity", "coherent state returns after one period", abs(1.0 - abs(coh0.inner(back))))

    # Solution map on free and interacting states.
    vb = np.asarray(cfg["boost"], dtype=float)
    at = np.asarray(cfg["translation"], dtype=float)
    tests = [
        sy.GalileiElement.make(a=at),
        sy.GalileiElement.make(v=vb),
        sy.GalileiElement.make(v=vb, a=at),
        sy.GalileiElement.make(v=vb, a=at, b=0.3),
    ]
    free_res = max(qm.solution_map_residual(g, psi0, None, T, dt) for g in tests)
    out.add("solution_map_free", "Galilei transforms map free solutions to solutions", free_res)
    pg = _grid1(cfg, "pair_grid", n=2)
    pm = cfg["pair_masses"]
    pair = make_gaussian(pg, pm, [[-1.0], [1.0]], [[0.9], [0.8]], [[0.3], [-0.2]])
    V = from_spec(cfg["potential"])
    pair_res = max(qm.solution_map_residual(g, pair, V, T, dt) for g in tests)
    out.add("solution_map_pair", "Galilei transforms map interacting solutions to solutions", pair_res)

    # Multiplier phases on random pairs.
    probe = make_gaussian(grid, [m], [[0.0]], [[1.0]], [[0.5]])
    scale = cfg["element_scale"]
    pairs = _tuples(cfg, rng, 1, 2, lambda: _small_element(rng, 1, scale))
    phase_err = overlap_gap = unitarity = 0.0
    for xp, xg in pairs:
        r = qm.composition_phase(xp.g, xg.g, probe)
        phase_err = max(phase_err, r.error)
        overlap_gap = max(overlap_gap, 1.0 - r.overlap)
        unitarity = max(unitarity, abs(qm.apply_U(xg.g, probe).norm() - 1.0))
    out.add("composition_phase", "U_g' U_g = exp(i M xi(g',g) / hbar) U_g'g", phase_err)
    out.add("composition_overlap", "composed transports agree up to phase", overlap_gap)
    out.add("unitarity", "U_g is unitary", unitarity)

    # Boost/translation commutator, magnitude and linearity in M.
    Ms = np.asarray(cfg["commutator_masses"], dtype=float)
    results = [qm.commutator_phase(vb, at, make_gaussian(grid, [M], [[0.0]], [[1.0]])) for M in Ms]
    measured = np.array([r.measured for r in results])
    mag = max(abs(abs(r.measured) - abs(r.predicted)) for r in results)
    out.add("commutator_phase_magnitude", "boost/translation commutator phase |M v'.a| / hbar", mag)
    slope = float(Ms @ measured / (Ms @ Ms))
    out.add("commutator_linearity", "commutator phase is linear in M", float(np.max(np.abs(measured - slope * Ms))))
    sign = "+" if slope > 0 else "-"
    flags = [f"commutator phase measured with sign {sign} (slope {slope:.12g} rad per unit mass)"]
    return out.items, {"free_marginal": free, "flags": flags}


def suite_algebra(cfg: ScenarioConfig, rng: np.random.Generator):
    out = _Checks(cfg)

    def worst_bracket(psi, V, d):
        labels = qm.generator_labels(d)
        return max(qm.algebra_residual(X, Y, psi, V) for X in labels for Y in labels)

    pg = _grid1(cfg, "pair_grid", n=2)
    m1, m2 = cfg["pair_masses"]
    V = from_spec(cfg["potential"])
    offset = rng.uniform(-0.5, 0.5)
    pair = make_gaussian(pg, [m1, m2], [[-1.0 + offset], [1.2]], [[0.9], [0.8]], [[0.4], [-0.3]])
    out.add("brackets_1d", "Lie algebra brackets on two interacting particles", worst_bracket(pair, V, 1))

    g2 = _grid1(cfg, "grid2", n=1, d=2)
    c2 = rng.uniform(-1, 1, 2)
    psi2 = make_gaussian(g2, [1.3], [c2], [[1.2, 0.9]], [[0.7, 0.2]])
    out.add("brackets_2d", "Lie algebra brackets, plane", worst_bracket(psi2, None, 2))

    g3 = _grid1(cfg, "grid3", n=1, d=3)
    c3 = rng.uniform(-0.5, 0.5, 3)
    psi3 = make_gaussian(g3, [1.3], [c3], [[1.0, 0.95, 1.05]], [[0.7, 0.2, -0.3]])
    out.add("brackets_3d", "Lie algebra brackets, space", worst_bracket(psi3, None, 3))

    eps = sorted(cfg["probe_eps"], reverse=True)
    labels = sy.basis_labels(3)
    probe_err = 0.0
    orders = []
    for X in labels:
        for Y in labels:
            expected = sy.expected_bracket(X, Y, 3)
            probe_err = max(probe_err, sy.bracket_error(sy.algebra_probe(X, Y, eps[-1], 3), expected))
            raw = [sy.bracket_error(sy.algebra_probe(X, Y, e, 3, richardson=False), expected) for e in eps]
            if min(raw) > 1e-13:
                orders.append(_log_slope(eps, raw))
    out.add("probe_structure_constants", "group commutators reproduce the structure constants", probe_err)
    out.add(
        "probe_convergence_order",
        "group-commutator estimate converges at first order in eps",
        min(orders) if orders else float("nan"),
        1.0,
        mode="ge",
    )

    s2 = max(qm.casimir_S2(psi2).norm(), qm.casimir_S2(psi3).norm())
    out.add("S2_single_particle", "internal angular momentum of one particle vanishes", s2)
    g1 = GridSpec.create(1, 1, 256, 30.0, hbar=cfg["hbar"])
    single = make_gaussian(g1, [1.3], [[0.5]], [[1.2]], [[0.7]])
    out.add("K_free", "K vanishes on one free particle", qm.casimir_K(single).norm())

    M, mu = m1 + m2, m1 * m2 / (m1 + m2)
    k = V.k
    omega = np.sqrt(k / mu)
    hbar = cfg["hbar"]

    def ground(xs):
        x1, x2 = xs[0][0], xs[1][0]
        r, R = x1 - x2, (m1 * x1 + m2 * x2) / M
        return np.exp(-mu * omega * r**2 / (2 * hbar)) * np.exp(-((R - 0.3) ** 2) / 2 + 0.4j * R)

    gs = Wavefunction.from_function(pg, [m1, m2], ground)
    eig = 2 * M / hbar**2 * (hbar * omega / 2)
    out.add(
        "K_internal_ground_state",
        "K = (2M / hbar^2) times the internal energy",
        (qm.casimir_K(gs, V) - gs * eig).norm(),
    )
    kc = max(
        max(qm.casimir_commutator("K", X, gs, V) for X in qm.generator_labels(1)),
        max(qm.casimir_commutator("K", X, psi2, None) for X in qm.generator_labels(2)),
        max(qm.casimir_commutator("K", X, psi3, None) for X in qm.generator_labels(3)),
    )
    out.add("K_commutators", "K commutes with every generator", kc)
    sc = max(
        max(qm.casimir_commutator("S2", X, psi2, None) for X in qm.generator_labels(2)),
        max(qm.casimir_commutator("S2", X, psi3, None) for X in qm.generator_labels(3)),
    )
    out.add("S2_commutators", "S^2 commutes with every generator", sc)
    return out.items, {}


def suite_superselection(cfg: ScenarioConfig, rng: np.random.Generator):
    grid = _grid1(cfg)
    base = cfg["base_mass"]
    vb, at = cfg["boost"], cfg["translation"]
    psi_base = make_gaussian(grid, [base], [[0.0]], [[1.0]], [[0.3]])
    gaps = np.asarray(cfg["sweep"], dtype=float)
    measured, predicted = [], []
    err = overlap_gap = 0.0
    for gap in gaps:
        psi = make_gaussian(grid, [base + gap], [[0.0]], [[1.0]], [[0.3]])
        r = qm.superselection_demo(psi, psi_base, vb, at)
        measured.append(r.relative_measured)
        predicted.append(r.relative_predicted)
        err = max(err, r.error)
        overlap_gap = max(overlap_gap, *(1.0 - b.overlap for b in r.branch))
    measured, predicted = np.array(measured), np.array(predicted)
    out = _Checks(cfg)
    out.add("relative_phase", "relative phase (M - M') v'.a / hbar between mass branches (magnitude)", err)
    slope = float(gaps @ measured / (gaps @ gaps)) if np.any(gaps) else 0.0
    out.add("linearity", "relative phase is linear in M - M'", float(np.max(np.abs(measured - slope * gaps))))
    out.add("branch_overlap", "each branch returns to itself up to phase", overlap_gap)
    series = Series(("mass_gap", "measured_phase", "predicted_phase"), (gaps, measured, predicted))
    flags = []
    if slope:
        flags.append(f"relative phase measured with sign {'+' if slope > 0 else '-'} (slope {slope:.12g} rad per unit mass gap)")
    return out.items, {"sweep": series, "flags": flags}


def _fiber_state(cfg: ScenarioConfig, rng: np.random.Generator) -> fb.MassFiberState:
    grid = _grid1(cfg)
    L = cfg["zeta_box"]
    hbar = cfg["hbar"]
    slices = []
    for j, ks in enumerate(cfg["slice_indices"]):
        masses = [fb.lattice_mass(k, L, hbar) for k in ks]
        if len(masses) != 1:
            raise ValueError("the extended-representation suite uses one particle per slice")
        phi = make_gaussian(grid, masses, [[rng.uniform(-2, 2)]], [[rng.uniform(0.8, 1.4)]], [[rng.uniform(-0.5, 0.5)]])
        weight = rng.uniform(0.3, 1.0) * np.exp(1j * rng.uniform(0, 2 * np.pi))
        slices.append(phi * weight)
    return fb.MassFiberState(tuple(slices), (L,), cfg["seed"]).normalized()


def suite_extended(cfg: ScenarioConfig, rng: np.random.Generator):
    s = _fiber_state(cfg, rng)
    hbar = cfg["hbar"]
    scale = cfg["element_scale"]
    Nz = cfg["zeta_points"]
    out = _Checks(cfg)

    pairs0 = _tuples(cfg, rng, 1, 2, lambda: _small_element(rng, 1, scale, with_b=False))
    pairs = _tuples(cfg, rng, 1, 2, lambda: _small_element(rng, 1, scale))
    rep0 = rep = defect_phase = defect_norm = pull = weights_gap = 0.0
    _, w0 = fb.mass_expectation(s)
    field0 = fb.synthesize_zeta(s, Nz)
    for xp, xg in pairs0:
        rep0 = max(rep0, fb.representation_residual(xp, xg, s))
        moved = fb.apply_Ubar(xg, s)
        pull = max(pull, fb.synthesize_zeta(moved, Nz).distance(fb.pullback_zeta_field(field0, xg)))
    for xp, xg in pairs:
        rep = max(rep, fb.representation_residual(xp, xg, s))
        xi = sy.cocycle(xp.g, xg.g)
        for M, phase in fb.projective_defect(xp.g, xg.g, s):
            defect_phase = max(defect_phase, qm.phase_difference(phase, M * xi / hbar))
        predicted = np.sqrt(sum(abs(np.exp(1j * M * xi / hbar) - 1) ** 2 * w for M, w in zip(s.total_masses, w0)))
        measured = fb.representation_residual(xp, xg, s, track_theta=False)
        defect_norm = max(defect_norm, abs(measured - predicted))
        _, w1 = fb.mass_expectation(fb.apply_Ubar(xg, s))
        weights_gap = max(weights_gap, float(np.max(np.abs(np.subtract(w1, w0)))))
    _, w2 = fb.mass_expectation(fb.evolve_fiber(s, None, 1.0))
    weights_gap = max(weights_gap, float(np.max(np.abs(np.subtract(w2, w0)))))
    out.add("representation_b0", "extended group acts as a true representation (b = 0)", rep0)
    out.add("representation_b", "extended group acts as a true representation (b != 0)", rep)
    out.add("projective_defect_phases", "without theta, slices pick up M xi / hbar", defect_phase)
    out.add("projective_defect_norm", "without theta, mismatch equals the multiplier-weighted norm", defect_norm)
    out.add("pullback_consistency", "slice phases equal the zeta-space pullback", pull)
    out.add("weights_invariance", "mass distribution invariant under the representation", weights_gap)

    kernel = 0.0
    for phi, M in zip(s.slices, s.total_masses):
        single = fb.MassFiberState((phi.normalized(),), s.zeta_box)
        theta = fb.central_kernel_period(M, hbar)
        e = sy.ExtendedElement(theta, sy.GalileiElement.identity(1))
        kernel = max(kernel, fb.apply_Ubar(e, single).distance(single))
    out.add("central_kernel", "theta = 2 pi hbar / M acts trivially on mass M", kernel)

    back, leftover = fb.analyze_zeta(field0, s.mass_lists)
    out.add("fourier_round_trip", "zeta synthesis and analysis are inverse", max(back.distance(s), leftover))
    shift = float(rng.uniform(-1, 1) * cfg["zeta_box"])
    phased = s.with_slices([phi * np.exp(1j * phi.total_mass * shift / hbar) for phi in s.slices])
    shifted = fb.translate_zeta(field0, shift)
    duality = max(
        fb.analyze_zeta(shifted, s.mass_lists)[0].distance(phased),
        fb.synthesize_zeta(phased, Nz).distance(shifted),
    )
    out.add("zeta_shift_duality", "zeta translation equals the per-slice mass phase", duality)

    # Two adjacent lattice masses: one fringe across the zeta box.
    k = cfg["slice_indices"][0][0]
    L = cfg["zeta_box"]
    grid = s.grid
    phi = make_gaussian(grid, [fb.lattice_mass(k, L, hbar)], [[0.0]], [[1.0]])
    phi2 = make_gaussian(grid, [fb.lattice_mass(k + 1 if k != -1 else k + 2, L, hbar)], [[0.0]], [[1.0]])
    two = fb.MassFiberState((phi, phi2), (L,)).normalized()
    fringe = fb.synthesize_zeta(two, Nz)
    z, rho = fringe.zeta_marginal(0)
    dk = 1 if k != -1 else 2
    expected = (1.0 + np.cos(2 * np.pi * dk * z / L)) / L
    out.add("two_slice_fringe", "two adjacent lattice masses interfere with one fringe per zeta box", float(np.max(np.abs(rho - expected))))

    flags = ["negative-mass slices present"] if s.has_negative_mass else []
    return out.items, {"zeta_fringe": fringe, "fiber": s, "flags": flags}


SUITE_FUNCTIONS: dict[str, Callable] = {
    "group-axioms": suite_group_axioms,
    "cocycle": suite_cocycle,
    "classical-covariance": suite_classical,
    "quantum-symmetry": suite_quantum,
    "algebra-casimir": suite_algebra,
    "superselection-demo": suite_superselection,
    "extended-representation": suite_extended,
}


def run_suite(cfg: ScenarioConfig, write: bool = True) -> Report:
    """Run the configured suite; with ``write`` the report and data files go to ``cfg['out']``."""
    started = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    t0 = time.perf_counter()
    rng = np.random.default_rng(cfg.seed)
    checks, artifacts = SUITE_FUNCTIONS[cfg.suite](cfg, rng)
    flags = artifacts.pop("flags", [])
    report = Report(
        suite=cfg.suite,
        checks=checks,
        seed=cfg.seed,
        config=cfg.raw,
        settings=cfg.settings,
        tolerance_scale=cfg.tolerance_scale,
        started_at=started,
        flags=flags,
        artifacts=artifacts,
    )
    if write:
        from .plotdata import emit_plot_data

        out = Path(cfg["out"])
        out.mkdir(parents=True, exist_ok=True)
        for name, obj in sorted(artifacts.items()):
            for path in emit_plot_data(obj, out / f"{cfg.suite}_{name}"):
                report.exports.append(path.name)
    report.wall_clock_s = round(time.perf_counter() - t0, 3)
    if write:
        (Path(cfg["out"]) / f"{cfg.suite}.json").write_text(report.to_json())
    return report
