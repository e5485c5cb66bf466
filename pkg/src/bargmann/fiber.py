"""States with dynamical mass: finite direct sums of fixed-mass wavefunctions.

A periodic ``zeta`` box of length ``L`` per particle quantizes the masses to the
lattice ``m = 2 pi hbar k / L`` (``k`` a nonzero integer). On that lattice the
``zeta <-> m`` Fourier pair is an exact finite sum, so a ``MassFiberState`` and
its ``ZetaField`` synthesis carry the same information.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.fft as sfft

from . import grid as gr
from .grid import GridSpec, Wavefunction
from .potentials import Potential
from .quantum import DEFAULT_DT, apply_U, composition_phase, evolve
from .symmetry import ExtendedElement, GalileiElement, compose_ext

LATTICE_TOL = 1e-9


class LatticeError(ValueError):
    """A mass does not sit on the lattice fixed by the zeta box."""


class AliasingError(ValueError):
    """Too few zeta points to resolve the requested mass modes."""


def lattice_mass(k: int, zeta_box: float, hbar: float = 1.0) -> float:
    return 2.0 * np.pi * hbar * k / zeta_box


def lattice_index(m: float, zeta_box: float, hbar: float = 1.0) -> int:
    """Integer ``k`` with ``m = 2 pi hbar k / L``; refuses off-lattice and zero masses."""
    q = m * zeta_box / (2.0 * np.pi * hbar)
    k = int(round(q))
    if abs(q - k) > LATTICE_TOL * max(1.0, abs(q)):
        raise LatticeError(f"mass {m} is off the lattice 2 pi hbar k / {zeta_box} (k = {q:.6f})")
    if k == 0:
        raise LatticeError("the zero-mass lattice point is excluded")
    return k


@dataclass(frozen=True, eq=False)
class MassFiberState:
    slices: tuple[Wavefunction, ...]
    zeta_box: tuple[float, ...]
    seed: int | None = None

    def __post_init__(self) -> None:
        slices = tuple(self.slices)
        if not slices:
            raise ValueError("a fibre state needs at least one slice")
        grid = slices[0].grid
        for s in slices[1:]:
            if s.grid != grid:
                raise gr.GridMismatchError("all slices must share one grid")
        box = gr._per_axis(self.zeta_box, grid.n, "zeta_box")
        masses = [s.masses for s in slices]
        if len(set(masses)) != len(masses):
            raise ValueError("slice mass lists must be pairwise distinct")
        for ms in masses:
            for m, L in zip(ms, box):
                lattice_index(m, L, grid.hbar)
        object.__setattr__(self, "slices", slices)
        object.__setattr__(self, "zeta_box", box)

    @property
    def grid(self) -> GridSpec:
        return self.slices[0].grid

    @property
    def hbar(self) -> float:
        return self.grid.hbar

    @property
    def mass_lists(self) -> list[tuple[float, ...]]:
        return [s.masses for s in self.slices]

    @property
    def total_masses(self) -> list[float]:
        return [s.total_mass for s in self.slices]

    def indices(self) -> list[tuple[int, ...]]:
        return [
            tuple(lattice_index(m, L, self.hbar) for m, L in zip(s.masses, self.zeta_box))
            for s in self.slices
        ]

    @property
    def has_negative_mass(self) -> bool:
        return any(m < 0 for ms in self.mass_lists for m in ms)

    def norm2(self) -> float:
        return float(sum(s.norm2() for s in self.slices))

    def normalized(self) -> MassFiberState:
        c = 1.0 / np.sqrt(self.norm2())
        return self.with_slices([s * c for s in self.slices])

    def with_slices(self, slices: Sequence[Wavefunction]) -> MassFiberState:
        return MassFiberState(tuple(slices), self.zeta_box, self.seed)

    def distance(self, other: MassFiberState) -> float:
        if self.mass_lists != other.mass_lists:
            raise ValueError("states have different slice layouts")
        return float(np.sqrt(sum(a.distance(b) ** 2 for a, b in zip(self.slices, other.slices))))


@dataclass(frozen=True, eq=False)
class ZetaField:
    """``Psi(x, zeta)`` on the configuration grid times ``n`` periodic zeta axes."""

    grid: GridSpec
    zeta_box: tuple[float, ...]
    zeta_points: tuple[int, ...]
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        amp = np.asarray(self.amplitudes, dtype=complex)
        if amp.shape != self.grid.shape + tuple(self.zeta_points):
            raise ValueError("amplitude shape does not match grid and zeta axes")
        if not np.all(np.isfinite(amp)):
            raise ValueError("zeta field must be finite")
        amp.setflags(write=False)
        object.__setattr__(self, "amplitudes", amp)

    @property
    def n(self) -> int:
        return self.grid.n

    def zeta_axis(self, i: int) -> np.ndarray:
        N, L = self.zeta_points[i], self.zeta_box[i]
        return np.arange(N) * (L / N)

    @property
    def cell_volume(self) -> float:
        dz = np.prod([L / N for L, N in zip(self.zeta_box, self.zeta_points)])
        return float(self.grid.cell_volume * dz)

    def norm2(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2) * self.cell_volume)

    def with_amplitudes(self, amp: np.ndarray) -> ZetaField:
        return ZetaField(self.grid, self.zeta_box, self.zeta_points, amp)

    def distance(self, other: ZetaField) -> float:
        return float(np.sqrt(np.sum(np.abs(self.amplitudes - other.amplitudes) ** 2) * self.cell_volume))

    def zeta_marginal(self, i: int = 0) -> tuple[np.ndarray, np.ndarray]:
        """``(zeta_i, density)`` with every other axis integrated out."""
        rho = np.abs(self.amplitudes) ** 2
        axis = self.grid.rank + i
        other = tuple(ax for ax in range(rho.ndim) if ax != axis)
        dz = self.zeta_box[i] / self.zeta_points[i]
        return self.zeta_axis(i), rho.sum(axis=other) * self.cell_volume / dz


def _zeta_points(value, n: int) -> tuple[int, ...]:
    return gr._per_axis(value, n, "zeta_points", int)


def _check_resolution(indices: Sequence[Sequence[int]], points: Sequence[int]) -> None:
    for i, N in enumerate(points):
        kmax = max(abs(k[i]) for k in indices)
        if N < 2 * kmax + 1:
            raise AliasingError(f"zeta axis {i}: {N} points cannot resolve lattice index {kmax}")


def _mode_phases(ks: Sequence[int], points: Sequence[int], rank: int) -> list[np.ndarray]:
    """``exp(2 pi i k_i j / N_i)`` per particle, shaped to broadcast after ``rank`` axes."""
    n = len(points)
    out = []
    for i, (k, N) in enumerate(zip(ks, points)):
        j = np.arange(N)
        ph = np.exp(2j * np.pi * ((k * j) % N) / N)
        shape = [1] * (rank + n)
        shape[rank + i] = N
        out.append(ph.reshape(shape))
    return out


def synthesize_zeta(s: MassFiberState, zeta_points) -> ZetaField:
    """``Psi(x, zeta) = prod_i L_i^(-1/2) sum_slices exp((i/hbar) sum_i m_i zeta_i) Phi(x)``."""
    grid = s.grid
    points = _zeta_points(zeta_points, grid.n)
    idx = s.indices()
    _check_resolution(idx, points)
    norm = 1.0 / np.sqrt(np.prod(s.zeta_box))
    expand = (Ellipsis,) + (None,) * grid.n
    amp = np.zeros(grid.shape + points, dtype=complex)
    for ks, phi in zip(idx, s.slices):
        term = phi.amplitudes[expand]
        for ph in _mode_phases(ks, points, grid.rank):
            term = term * ph
        amp += term
    return ZetaField(grid, s.zeta_box, points, norm * amp)


def analyze_zeta(
    f: ZetaField, masses: Sequence[Sequence[float]], seed: int | None = None
) -> tuple[MassFiberState, float]:
    """Project ``f`` onto the requested lattice mass lists.

    Returns the fibre state and the weight left outside the requested modes.
    """
    grid = f.grid
    idx = [tuple(lattice_index(m, L, grid.hbar) for m, L in zip(ms, f.zeta_box)) for ms in masses]
    _check_resolution(idx, f.zeta_points)
    zaxes = tuple(range(grid.rank, grid.rank + grid.n))
    coeffs = sfft.fftn(f.amplitudes, axes=zaxes) * (np.sqrt(np.prod(f.zeta_box)) / np.prod(f.zeta_points))
    slices = []
    for ms, ks in zip(masses, idx):
        sel = (Ellipsis,) + tuple(k % N for k, N in zip(ks, f.zeta_points))
        slices.append(Wavefunction(grid, coeffs[sel], tuple(ms)))
    state = MassFiberState(tuple(slices), f.zeta_box, seed)
    residual = f.norm2() - state.norm2()
    return state, float(max(residual, 0.0))


def _zeta_wavenumbers(f: ZetaField, i: int) -> np.ndarray:
    N, L = f.zeta_points[i], f.zeta_box[i]
    shape = [1] * f.amplitudes.ndim
    shape[f.grid.rank + i] = N
    return (2 * np.pi * sfft.fftfreq(N, L / N)).reshape(shape)


def _shift_zeta_axis(f: ZetaField, amp: np.ndarray, i: int, s) -> np.ndarray:
    """``amp(..., zeta_i + s, ...)``; ``s`` may be an array broadcasting over the grid."""
    ax = f.grid.rank + i
    return sfft.ifft(sfft.fft(amp, axis=ax) * np.exp(1j * _zeta_wavenumbers(f, i) * s), axis=ax)


def translate_zeta(f: ZetaField, shift) -> ZetaField:
    """``Psi(x, zeta + shift)``; ``shift`` is a scalar or one value per particle."""
    s = np.broadcast_to(np.asarray(shift, dtype=float), (f.n,))
    amp = f.amplitudes
    for i in range(f.n):
        amp = _shift_zeta_axis(f, amp, i, float(s[i]))
    return f.with_amplitudes(amp)


def pullback_zeta_field(f: ZetaField, gbar: ExtendedElement) -> ZetaField:
    """``Psi o gbar^-1`` at ``t = 0`` for elements without time shift.

    ``gbar^-1`` sends ``(x_i, zeta_i)`` to ``(R^-1 (x_i - a), zeta_i + theta + v.(x_i - a))``.
    """
    g = gbar.g
    if g.b != 0.0:
        raise ValueError("field pullback is only defined here for b = 0")
    grid = f.grid
    amp = gr.remap(f.amplitudes, grid, g.R, g.a)
    x = grid.particle_coords(extra=grid.n)
    for i in range(grid.n):
        c = gbar.theta + sum(g.v[k] * (x[i][k] - g.a[k]) for k in range(grid.d))
        amp = _shift_zeta_axis(f, amp, i, c)
    return f.with_amplitudes(amp)


def evolve_fiber(s: MassFiberState, V: Potential | None, t: float, dt: float = DEFAULT_DT) -> MassFiberState:
    """Evolve every slice with its own masses inserted into the Hamiltonian."""
    return s.with_slices([evolve(phi, V, t, dt) for phi in s.slices])


def apply_Ubar(gbar: ExtendedElement, s: MassFiberState, V: Potential | None = None, dt: float = DEFAULT_DT) -> MassFiberState:
    """Slice-wise ``exp(i M theta / hbar) U_g``: a true representation of the extended group."""
    out = []
    for phi in s.slices:
        phase = np.exp(1j * phi.total_mass * gbar.theta / phi.hbar)
        out.append(apply_U(gbar.g, phi, V, dt) * phase)
    return s.with_slices(out)


def representation_residual(
    gp: ExtendedElement,
    g: ExtendedElement,
    s: MassFiberState,
    V: Potential | None = None,
    dt: float = DEFAULT_DT,
    track_theta: bool = True,
) -> float:
    """``|| Ubar_g' Ubar_g s - Ubar_(g'g) s ||`` over all slices.

    With ``track_theta=False`` the central coordinate is dropped (both
    elements and their product taken with ``theta = 0``), which brings back
    the per-slice multiplier ``exp(i M xi / hbar)``.
    """
    if not track_theta:
        gp = ExtendedElement(0.0, gp.g)
        g = ExtendedElement(0.0, g.g)
        prod = ExtendedElement(0.0, compose_ext(gp, g).g)
    else:
        prod = compose_ext(gp, g)
    two_step = apply_Ubar(gp, apply_Ubar(g, s, V, dt), V, dt)
    one_step = apply_Ubar(prod, s, V, dt)
    return two_step.distance(one_step)


def projective_defect(
    gp: GalileiElement, g: GalileiElement, s: MassFiberState, V: Potential | None = None, dt: float = DEFAULT_DT
) -> list[tuple[float, float]]:
    """Measured multiplier phase of ``U_g' U_g`` against ``U_g'g`` on every slice."""
    return [(phi.total_mass, composition_phase(gp, g, phi, V, dt).measured) for phi in s.slices]


def mass_expectation(s: MassFiberState) -> tuple[float, tuple[float, ...]]:
    """Mean total mass and the per-slice weights (slice norms squared)."""
    weights = tuple(phi.norm2() for phi in s.slices)
    total = sum(weights)
    mean = sum(w * M for w, M in zip(weights, s.total_masses)) / total
    return float(mean), weights


def central_kernel_period(M: float, hbar: float = 1.0) -> float:
    """Smallest ``theta > 0`` acting trivially on a slice of total mass ``M``: ``2 pi hbar / |M|``."""
    if M == 0:
        raise ValueError("total mass must be nonzero")
    return 2.0 * np.pi * hbar / abs(M)
