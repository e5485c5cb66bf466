"""Fixed-mass Schrödinger dynamics on a grid and the projective Galilei action.

``apply_U`` implements

    (U_g psi)(x) = exp{(i/hbar) M [v.(R_cm - a) + v^2 b / 2]}
                   * (exp(i H b / hbar) psi)(R^-1 (x - a + v b)),

on which ``U_g' U_g = exp(i M xi(g', g) / hbar) U_g'g``. The helpers here
measure that phase, the generators' brackets and the Casimir elements.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from . import grid as gr
from .grid import GridSpec, Wavefunction
from .potentials import Potential, ZeroPotential
from .symmetry import (
    DimensionError,
    GalileiElement,
    cocycle,
    compose,
    expected_bracket,
)

#: Overlap magnitude below which two states are considered different rays.
MIN_OVERLAP = 0.99
DEFAULT_DT = 1e-3


class SolverError(RuntimeError):
    pass


class PhaseComparisonError(ValueError):
    """The compared states differ beyond a phase ("states differ beyond phase")."""


def wrap_phase(phi: float) -> float:
    """Map an angle into ``(-pi, pi]``."""
    w = float(np.angle(np.exp(1j * phi)))
    return np.pi if w == -np.pi else w


def phase_difference(a: float, b: float) -> float:
    return abs(wrap_phase(a - b))


# ---------------------------------------------------------------------------
# Hamiltonian and evolution
# ---------------------------------------------------------------------------


@lru_cache(maxsize=32)
def kinetic_multiplier(grid: GridSpec, masses: tuple[float, ...]) -> np.ndarray:
    """Fourier symbol ``sum_i hbar^2 |k_i|^2 / (2 m_i)`` of the kinetic energy."""
    k = grid.wavenumbers()
    out = np.zeros(grid.shape)
    for i, m in enumerate(masses):
        for j in range(grid.d):
            out = out + grid.hbar**2 * k[i * grid.d + j] ** 2 / (2.0 * m)
    out.setflags(write=False)
    return out


def _is_zero(V: Potential | None) -> bool:
    return V is None or isinstance(V, ZeroPotential)


@lru_cache(maxsize=32)
def potential_values(grid: GridSpec, masses: tuple[float, ...], V: Potential) -> np.ndarray:
    vals = np.broadcast_to(np.asarray(V.eval(grid.particle_coords(), masses), dtype=float), grid.shape).copy()
    vals.setflags(write=False)
    return vals


def _hamiltonian_array(amp: np.ndarray, grid: GridSpec, masses, V: Potential | None) -> np.ndarray:
    out = gr.ifft(kinetic_multiplier(grid, masses) * gr.fft(amp, grid), grid)
    if not _is_zero(V):
        out = out + potential_values(grid, masses, V) * amp
    return out


def apply_hamiltonian(psi: Wavefunction, V: Potential | None = None) -> Wavefunction:
    """``H psi`` with a spectral Laplacian."""
    return psi.with_amplitudes(_hamiltonian_array(psi.amplitudes, psi.grid, psi.masses, V))


def _evolve_array(amp: np.ndarray, grid: GridSpec, masses, V: Potential | None, t: float, dt: float) -> np.ndarray:
    if t == 0.0:
        return amp
    hbar = grid.hbar
    T = kinetic_multiplier(grid, masses)
    if _is_zero(V):
        # Free evolution is diagonal in momentum space, hence exact in one step.
        return gr.ifft(np.exp(-1j * T * t / hbar) * gr.fft(amp, grid), grid)
    if not dt > 0:
        raise ValueError("dt must be positive")
    ratio = abs(t) / dt
    steps = max(1, int(round(ratio)))
    if abs(ratio - round(ratio)) > 1e-9 * max(1.0, ratio):
        warnings.warn(f"|t|/dt = {ratio} is not integral; using {steps} steps", stacklevel=3)
    h = t / steps
    Vg = potential_values(grid, masses, V)
    half = np.exp(-0.5j * h * Vg / hbar)
    full = half * half
    kin = np.exp(-1j * h * T / hbar)
    out = half * amp
    for step in range(steps):
        out = gr.ifft(kin * gr.fft(out, grid), grid)
        out = (half if step == steps - 1 else full) * out
    if not np.all(np.isfinite(out)):
        raise SolverError("nonfinite amplitudes during evolution")
    return out


def evolve(psi: Wavefunction, V: Potential | None, t: float, dt: float = DEFAULT_DT) -> Wavefunction:
    """``exp(-i H t / hbar) psi`` by Strang splitting (potential half steps around a kinetic step).

    ``t`` may be negative. Steps are ``t / round(|t| / dt)`` long so the end
    time is hit exactly.
    """
    return psi.with_amplitudes(_evolve_array(psi.amplitudes, psi.grid, psi.masses, V, t, dt))


# ---------------------------------------------------------------------------
# Galilei action on states
# ---------------------------------------------------------------------------


def _check_element(g: GalileiElement, grid: GridSpec) -> None:
    if g.dim != grid.d:
        raise DimensionError(f"element dim {g.dim} vs grid particle dim {grid.d}")


def _galilei_phase(psi: Wavefunction, v: np.ndarray, a: np.ndarray, tail: float) -> np.ndarray:
    """``exp{(i/hbar) [M v.(R_cm - a) + M tail]}`` on the grid."""
    M = psi.total_mass
    R = psi.center_of_mass()
    expo = sum(v[k] * R[k] for k in range(psi.grid.d)) - float(v @ a) + tail
    return np.exp(1j * M * expo / psi.hbar)


def apply_U(g: GalileiElement, psi: Wavefunction, V: Potential | None = None, dt: float = DEFAULT_DT) -> Wavefunction:
    """Unitary action of ``g`` on the fixed-mass Hilbert space."""
    grid = psi.grid
    _check_element(g, grid)
    amp = psi.amplitudes
    if g.b != 0.0:
        amp = _evolve_array(amp, grid, psi.masses, V, -g.b, dt)
    amp = gr.remap(amp, grid, g.R, g.a - g.v * g.b)
    amp = amp * _galilei_phase(psi, g.v, g.a, 0.5 * float(g.v @ g.v) * g.b)
    gr.check_contained(amp, grid.rank, what="transported state")
    return psi.with_amplitudes(amp)


def apply_U_inverse(g: GalileiElement, psi: Wavefunction, V: Potential | None = None, dt: float = DEFAULT_DT) -> Wavefunction:
    """``U_g^-1 psi``, undoing the phase, the point map and the time translation in turn."""
    grid = psi.grid
    _check_element(g, grid)
    amp = psi.amplitudes * np.conj(_galilei_phase(psi, g.v, g.a, 0.5 * float(g.v @ g.v) * g.b))
    amp = gr.unremap(amp, grid, g.R, g.a - g.v * g.b)
    if g.b != 0.0:
        amp = _evolve_array(amp, grid, psi.masses, V, g.b, dt)
    gr.check_contained(amp, grid.rank, what="transported state")
    return psi.with_amplitudes(amp)


def apply_T_at_time(g: GalileiElement, psi0: Wavefunction, V: Potential | None, t: float, dt: float = DEFAULT_DT) -> Wavefunction:
    """The transformed solution at time ``t``, built from the original solution at ``t - b``:

    ``exp{(i/hbar) M [v.(R_cm - a) - v^2 (t - b) / 2]} psi(R^-1 (x - a - v (t - b)), t - b)``.
    """
    grid = psi0.grid
    _check_element(g, grid)
    tau = t - g.b
    amp = _evolve_array(psi0.amplitudes, grid, psi0.masses, V, tau, dt)
    amp = gr.remap(amp, grid, g.R, g.a + g.v * tau)
    amp = amp * _galilei_phase(psi0, g.v, g.a, -0.5 * float(g.v @ g.v) * tau)
    gr.check_contained(amp, grid.rank, what="transformed solution")
    return psi0.with_amplitudes(amp)


def solution_map_residual(
    g: GalileiElement, psi0: Wavefunction, V: Potential | None, t: float, dt: float = DEFAULT_DT
) -> float:
    """``|| evolve(U_g psi0, t) - (T_g psi)(t) ||``: zero when ``g`` maps solutions to solutions."""
    lhs = evolve(apply_U(g, psi0, V, dt), V, t, dt)
    rhs = apply_T_at_time(g, psi0, V, t, dt)
    return lhs.distance(rhs)


# ---------------------------------------------------------------------------
# Phase measurements
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PhaseResult:
    measured: float
    predicted: float
    overlap: float

    @property
    def error(self) -> float:
        return phase_difference(self.measured, self.predicted)


def _relative_phase(ref: Wavefunction, other: Wavefunction) -> tuple[float, float]:
    z = ref.inner(other) / (ref.norm() * other.norm())
    overlap = abs(z)
    if overlap < MIN_OVERLAP:
        raise PhaseComparisonError(f"states differ beyond phase (overlap {overlap:.4f})")
    return float(np.angle(z)), float(overlap)


def composition_phase(
    gp: GalileiElement, g: GalileiElement, psi: Wavefunction, V: Potential | None = None, dt: float = DEFAULT_DT
) -> PhaseResult:
    """Measured ``arg <U_g'g psi, U_g' U_g psi>`` against ``M xi(g', g) / hbar``."""
    two_step = apply_U(gp, apply_U(g, psi, V, dt), V, dt)
    one_step = apply_U(compose(gp, g), psi, V, dt)
    measured, overlap = _relative_phase(one_step, two_step)
    predicted = wrap_phase(psi.total_mass * cocycle(gp, g) / psi.hbar)
    return PhaseResult(measured, predicted, overlap)


def _translation(a: Sequence[float]) -> GalileiElement:
    return GalileiElement.make(a=np.asarray(a, dtype=float))


def _boost(v: Sequence[float]) -> GalileiElement:
    return GalileiElement.make(v=np.asarray(v, dtype=float))


def commutator_phase(vp, a, psi: Wavefunction, V: Potential | None = None) -> PhaseResult:
    """Phase of ``U_g'^-1 U_g^-1 U_g' U_g psi`` for translation ``g`` by ``a`` and boost ``g'`` by ``vp``.

    ``predicted`` is ``-M vp.a / hbar``. The operator identity that follows
    from the multiplier gives the opposite sign, which is what ``measured``
    shows; compare magnitudes.
    """
    vp = np.atleast_1d(np.asarray(vp, dtype=float))
    a = np.atleast_1d(np.asarray(a, dtype=float))
    g, gp = _translation(a), _boost(vp)
    out = apply_U_inverse(gp, apply_U_inverse(g, apply_U(gp, apply_U(g, psi, V), V), V), V)
    measured, overlap = _relative_phase(psi, out)
    predicted = wrap_phase(-psi.total_mass * float(vp @ a) / psi.hbar)
    return PhaseResult(measured, predicted, overlap)


@dataclass(frozen=True)
class SuperselectionResult:
    relative_measured: float
    relative_predicted: float
    branch: tuple[PhaseResult, PhaseResult]
    masses: tuple[float, float]

    @property
    def error(self) -> float:
        """Gap between measured and predicted relative phase magnitudes."""
        return abs(abs(self.relative_measured) - abs(self.relative_predicted))


def superselection_demo(psiM: Wavefunction, psiMp: Wavefunction, vp, a) -> SuperselectionResult:
    """Apply the translation/boost commutator to both branches of ``psi_M + psi_M'``.

    Returns the relative phase between the branches and the prediction
    ``(M - M') vp.a / hbar``.
    """
    gr.check_same_grid(psiM, psiMp)
    first = commutator_phase(vp, a, psiM)
    second = commutator_phase(vp, a, psiMp)
    vp = np.atleast_1d(np.asarray(vp, dtype=float))
    a = np.atleast_1d(np.asarray(a, dtype=float))
    M, Mp = psiM.total_mass, psiMp.total_mass
    return SuperselectionResult(
        relative_measured=wrap_phase(first.measured - second.measured),
        relative_predicted=wrap_phase((M - Mp) * float(vp @ a) / psiM.hbar),
        branch=(first, second),
        masses=(M, Mp),
    )


# ---------------------------------------------------------------------------
# Generators, brackets and Casimir elements
# ---------------------------------------------------------------------------

_AXES = "xyz"


@dataclass(frozen=True)
class GeneratorLabel:
    kind: str
    index: int | None = None

    def __post_init__(self) -> None:
        if self.kind not in "DVABZ" or len(self.kind) != 1:
            raise ValueError(f"unknown generator kind {self.kind!r}")
        if (self.kind in "DVA") != (self.index is not None):
            raise ValueError(f"generator {self.kind} index mismatch: {self.index!r}")

    @classmethod
    def parse(cls, label: str | GeneratorLabel) -> GeneratorLabel:
        if isinstance(label, GeneratorLabel):
            return label
        if label in ("B", "Z"):
            return cls(label)
        kind, _, comp = label.partition("_")
        if comp not in tuple(_AXES):
            raise ValueError(f"bad generator label {label!r}")
        return cls(kind, _AXES.index(comp))

    def __str__(self) -> str:
        return self.kind if self.index is None else f"{self.kind}_{_AXES[self.index]}"


def generator_labels(d: int) -> list[GeneratorLabel]:
    rot = {1: [], 2: ["D_z"], 3: ["D_x", "D_y", "D_z"]}[d]
    names = rot + [f"{k}_{_AXES[j]}" for k in "VA" for j in range(d)] + ["B", "Z"]
    return [GeneratorLabel.parse(s) for s in names]


class _Ops:
    """Generator actions on raw arrays for one grid, mass list and potential."""

    def __init__(self, psi: Wavefunction, V: Potential | None):
        self.grid = psi.grid
        self.masses = psi.masses
        self.M = psi.total_mass
        self.hbar = psi.hbar
        self.V = V
        self.x = self.grid.particle_coords()

    def _d(self, amp, i, k):
        return gr.derivative(amp, self.grid, i * self.grid.d + k)

    def A(self, amp, k):
        return -sum(self._d(amp, i, k) for i in range(self.grid.n))

    def Vb(self, amp, k):
        return (1j / self.hbar) * sum(m * self.x[i][k] for i, m in enumerate(self.masses)) * amp

    def D(self, amp, a):
        d = self.grid.d
        if d == 1:
            raise DimensionError("rotation generator needs d >= 2")
        if d == 2 and a != 2:
            raise DimensionError("only D_z exists in two dimensions")
        b, c = (a + 1) % 3, (a + 2) % 3
        out = 0.0
        for i in range(self.grid.n):
            x = self.x[i]
            # -(x_b d_c - x_c d_b), axes indexed cyclically; 2D uses (b, c) = (0, 1).
            out = out - (x[b] * self._d(amp, i, c) - x[c] * self._d(amp, i, b))
        return out

    def B(self, amp):
        return (1j / self.hbar) * _hamiltonian_array(amp, self.grid, self.masses, self.V)

    def Z(self, amp):
        return (1j * self.M / self.hbar) * amp

    def apply(self, label: GeneratorLabel, amp):
        if label.kind == "A":
            return self.A(amp, label.index)
        if label.kind == "V":
            return self.Vb(amp, label.index)
        if label.kind == "D":
            return self.D(amp, label.index)
        if label.kind == "B":
            return self.B(amp)
        return self.Z(amp)


def _validate_label(label: GeneratorLabel, d: int) -> None:
    if label.kind in "VA" and label.index >= d:
        raise DimensionError(f"{label} needs d > {label.index}")
    if label.kind == "D" and (d == 1 or (d == 2 and label.index != 2)):
        raise DimensionError(f"{label} unsupported for d = {d}")


def apply_generator(X: str | GeneratorLabel, psi: Wavefunction, V: Potential | None = None) -> Wavefunction:
    label = GeneratorLabel.parse(X)
    _validate_label(label, psi.grid.d)
    if label.kind in "DV":
        gr.check_contained(psi.amplitudes, psi.grid.rank, what="input to position-weighted generator")
    return psi.with_amplitudes(_Ops(psi, V).apply(label, psi.amplitudes))


def commutator(X, Y, psi: Wavefunction, V: Potential | None = None) -> Wavefunction:
    """``[X, Y] psi = X(Y psi) - Y(X psi)``."""
    x, y = GeneratorLabel.parse(X), GeneratorLabel.parse(Y)
    for lab in (x, y):
        _validate_label(lab, psi.grid.d)
    ops = _Ops(psi, V)
    amp = psi.amplitudes
    return psi.with_amplitudes(ops.apply(x, ops.apply(y, amp)) - ops.apply(y, ops.apply(x, amp)))


def algebra_residual(X, Y, psi: Wavefunction, V: Potential | None = None) -> float:
    """``|| [X, Y] psi - (expected bracket) psi || / || psi ||``; unlisted pairs expect zero."""
    x, y = GeneratorLabel.parse(X), GeneratorLabel.parse(Y)
    lhs = commutator(x, y, psi, V).amplitudes
    ops = _Ops(psi, V)
    rhs = np.zeros_like(lhs)
    for name, coeff in expected_bracket(str(x), str(y), psi.grid.d).items():
        rhs = rhs + coeff * ops.apply(GeneratorLabel.parse(name), psi.amplitudes)
    diff = psi.with_amplitudes(lhs - rhs)
    return diff.norm() / psi.norm()


def _casimir_K_array(ops: _Ops, amp):
    out = -2.0 * ops.Z(ops.B(amp))
    for k in range(ops.grid.d):
        out = out + ops.A(ops.A(amp, k), k)
    return out


def _S_component(ops: _Ops, amp, a: int):
    b, c = (a + 1) % 3, (a + 2) % 3
    return ops.Z(ops.D(amp, a)) - (ops.Vb(ops.A(amp, c), b) - ops.Vb(ops.A(amp, b), c))


def _casimir_S2_array(ops: _Ops, amp):
    comps = [2] if ops.grid.d == 2 else [0, 1, 2]
    return sum(_S_component(ops, _S_component(ops, amp, a), a) for a in comps)


def casimir_K(psi: Wavefunction, V: Potential | None = None) -> Wavefunction:
    """``K psi = (A.A - 2 Z B) psi``."""
    return psi.with_amplitudes(_casimir_K_array(_Ops(psi, V), psi.amplitudes))


def casimir_S2(psi: Wavefunction, V: Potential | None = None) -> Wavefunction:
    """``S^2 psi`` with ``S = Z D - V x A``; in two dimensions only ``S_z`` exists."""
    if psi.grid.d < 2:
        raise DimensionError("S^2 needs d >= 2")
    gr.check_contained(psi.amplitudes, psi.grid.rank, what="input to S^2")
    return psi.with_amplitudes(_casimir_S2_array(_Ops(psi, V), psi.amplitudes))


def casimir_commutator(which: str, X, psi: Wavefunction, V: Potential | None = None) -> float:
    """``|| [C, X] psi || / || psi ||`` for ``C`` in ``{"K", "S2"}``."""
    label = GeneratorLabel.parse(X)
    _validate_label(label, psi.grid.d)
    ops = _Ops(psi, V)
    cas = {"K": _casimir_K_array, "S2": _casimir_S2_array}[which]
    if which == "S2" and psi.grid.d < 2:
        raise DimensionError("S^2 needs d >= 2")
    amp = psi.amplitudes
    diff = cas(ops, ops.apply(label, amp)) - ops.apply(label, cas(ops, amp))
    return psi.with_amplitudes(diff).norm() / psi.norm()


def momentum_expectation(psi: Wavefunction) -> np.ndarray:
    """``<psi, -i hbar grad_i psi>`` per particle, shape ``(n, d)``."""
    out = np.zeros((psi.grid.n, psi.grid.d))
    for i in range(psi.grid.n):
        for k in range(psi.grid.d):
            dpsi = gr.derivative(psi.amplitudes, psi.grid, i * psi.grid.d + k)
            val = np.vdot(psi.amplitudes, -1j * psi.hbar * dpsi) * psi.grid.cell_volume
            out[i, k] = val.real / psi.norm2()
    return out
