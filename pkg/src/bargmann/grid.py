"""Uniform periodic grids over configuration space and wavefunctions living on them.

Axis ``i * d + k`` carries component ``k`` of particle ``i``. Coordinates are
``origin + (j - N/2) * L/N`` so a zero origin gives the box-centred chart
``[-L/2, L/2)``. All derivatives, shifts and rotations are spectral.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
import scipy.fft as sfft

#: Supported ``(n, d)`` layouts; larger products of grid axes are refused.
SUPPORTED = {(1, 1), (1, 2), (2, 1), (1, 3)}
MIN_POINTS = 16
#: Minimum distance, in widths, from a Gaussian centre to the box boundary.
CONTAINMENT_WIDTHS = 6.0
#: Largest allowed boundary amplitude relative to the peak amplitude.
BOUNDARY_TOL = 1e-7
# Fractional grid shifts closer than this to an integer are done by np.roll.
_LATTICE_TOL = 1e-12


class CapacityError(ValueError):
    """Grid layout outside the supported desk-scale configurations."""


class ContainmentError(ValueError):
    """A state reaches the periodic boundary and spectral operations would be corrupted."""


class UnsupportedRotationError(ValueError):
    pass


class GridMismatchError(ValueError):
    pass


def _per_axis(value, rank: int, name: str, cast=float) -> tuple:
    arr = np.atleast_1d(np.asarray(value))
    if arr.size == 1:
        arr = np.repeat(arr, rank)
    if arr.size != rank:
        raise ValueError(f"{name} needs 1 or {rank} entries, got {arr.size}")
    return tuple(cast(v) for v in arr)


@dataclass(frozen=True)
class GridSpec:
    n: int
    d: int
    points: tuple[int, ...]
    box: tuple[float, ...]
    origin: tuple[float, ...]
    hbar: float = 1.0

    def __post_init__(self) -> None:
        if (self.n, self.d) not in SUPPORTED:
            raise CapacityError(
                f"unsupported layout n={self.n}, d={self.d}; supported: {sorted(SUPPORTED)}"
            )
        rank = self.n * self.d
        if not (len(self.points) == len(self.box) == len(self.origin) == rank):
            raise ValueError("points, box and origin need one entry per grid axis")
        for N in self.points:
            if N < MIN_POINTS or N & (N - 1):
                raise ValueError(f"points per axis must be a power of two >= {MIN_POINTS}, got {N}")
        if any(not L > 0 for L in self.box):
            raise ValueError("box lengths must be positive")
        if not self.hbar > 0:
            raise ValueError("hbar must be positive")

    @classmethod
    def create(cls, n: int = 1, d: int = 1, points=1024, box=40.0, origin=0.0, hbar: float = 1.0) -> GridSpec:
        rank = n * d
        return cls(
            n,
            d,
            _per_axis(points, rank, "points", int),
            _per_axis(box, rank, "box"),
            _per_axis(origin, rank, "origin"),
            float(hbar),
        )

    @property
    def rank(self) -> int:
        return self.n * self.d

    @property
    def shape(self) -> tuple[int, ...]:
        return self.points

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple(L / N for L, N in zip(self.box, self.points))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    def axis(self, k: int) -> np.ndarray:
        N, L, o = self.points[k], self.box[k], self.origin[k]
        return o + (np.arange(N) - N // 2) * (L / N)

    def bounds(self, k: int) -> tuple[float, float]:
        return self.origin[k] - self.box[k] / 2, self.origin[k] + self.box[k] / 2

    def coords(self, extra: int = 0) -> list[np.ndarray]:
        """Sparse coordinate arrays, one per axis, with ``extra`` trailing singleton dims."""
        return list(_coords(self, extra))

    def particle_coords(self, extra: int = 0) -> list[list[np.ndarray]]:
        c = self.coords(extra)
        return [[c[i * self.d + k] for k in range(self.d)] for i in range(self.n)]

    def wavenumbers(self, extra: int = 0) -> list[np.ndarray]:
        return list(_wavenumbers(self, extra))


def _sparse(vec: np.ndarray, k: int, rank: int, extra: int) -> np.ndarray:
    shape = [1] * (rank + extra)
    shape[k] = vec.size
    out = vec.reshape(shape)
    out.setflags(write=False)
    return out


@lru_cache(maxsize=64)
def _coords(grid: GridSpec, extra: int) -> tuple[np.ndarray, ...]:
    return tuple(_sparse(grid.axis(k), k, grid.rank, extra) for k in range(grid.rank))


@lru_cache(maxsize=64)
def _wavenumbers(grid: GridSpec, extra: int) -> tuple[np.ndarray, ...]:
    return tuple(
        _sparse(2 * np.pi * sfft.fftfreq(N, L / N), k, grid.rank, extra)
        for k, (N, L) in enumerate(zip(grid.points, grid.box))
    )


@dataclass(frozen=True, eq=False)
class Wavefunction:
    grid: GridSpec
    amplitudes: np.ndarray
    masses: tuple[float, ...]

    def __post_init__(self) -> None:
        amp = np.array(self.amplitudes, dtype=complex)
        if amp.shape != self.grid.shape:
            raise ValueError(f"amplitudes {amp.shape} do not match grid {self.grid.shape}")
        if not np.all(np.isfinite(amp)):
            raise ValueError("amplitudes must be finite")
        masses = tuple(float(m) for m in self.masses)
        if len(masses) != self.grid.n:
            raise ValueError(f"need {self.grid.n} masses, got {len(masses)}")
        if any(m == 0 for m in masses):
            raise ValueError("masses must be nonzero")
        amp.setflags(write=False)
        object.__setattr__(self, "amplitudes", amp)
        object.__setattr__(self, "masses", masses)

    @classmethod
    def from_function(cls, grid: GridSpec, masses: Sequence[float], f: Callable, normalize: bool = True) -> Wavefunction:
        """Sample ``f(x)`` where ``x[i][k]`` are broadcast coordinate arrays."""
        amp = np.broadcast_to(np.asarray(f(grid.particle_coords()), dtype=complex), grid.shape)
        psi = cls(grid, amp, tuple(masses))
        return psi.normalized() if normalize else psi

    @property
    def hbar(self) -> float:
        return self.grid.hbar

    @property
    def total_mass(self) -> float:
        return float(sum(self.masses))

    def center_of_mass(self) -> list[np.ndarray]:
        """Centre-of-mass coordinate arrays ``R_k = sum_i m_i x_ik / M``."""
        px = self.grid.particle_coords()
        M = self.total_mass
        return [sum(m * px[i][k] for i, m in enumerate(self.masses)) / M for k in range(self.grid.d)]

    def with_amplitudes(self, amp: np.ndarray) -> Wavefunction:
        return Wavefunction(self.grid, amp, self.masses)

    def norm2(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2) * self.grid.cell_volume)

    def norm(self) -> float:
        return float(np.sqrt(self.norm2()))

    def normalized(self) -> Wavefunction:
        return self.with_amplitudes(self.amplitudes / self.norm())

    def inner(self, other: Wavefunction) -> complex:
        """``<self, other>``, antilinear in ``self``."""
        check_same_grid(self, other)
        return complex(np.vdot(self.amplitudes, other.amplitudes) * self.grid.cell_volume)

    def distance(self, other: Wavefunction) -> float:
        check_same_grid(self, other)
        return float(np.sqrt(np.sum(np.abs(self.amplitudes - other.amplitudes) ** 2) * self.grid.cell_volume))

    def __add__(self, other: Wavefunction) -> Wavefunction:
        check_same_grid(self, other)
        return self.with_amplitudes(self.amplitudes + other.amplitudes)

    def __sub__(self, other: Wavefunction) -> Wavefunction:
        check_same_grid(self, other)
        return self.with_amplitudes(self.amplitudes - other.amplitudes)

    def __mul__(self, c: complex) -> Wavefunction:
        return self.with_amplitudes(self.amplitudes * c)

    __rmul__ = __mul__


def check_same_grid(a: Wavefunction, b: Wavefunction) -> None:
    if a.grid != b.grid:
        raise GridMismatchError("wavefunctions live on different grids")


def make_gaussian(grid: GridSpec, masses: Sequence[float], centers, widths, momenta=0.0) -> Wavefunction:
    """Normalized product Gaussian ``prod exp(-(x - c)^2 / (2 w^2) + i k x)``.

    ``centers``, ``widths`` and ``momenta`` (wavevectors) broadcast to ``(n, d)``.
    The width ``w`` is the amplitude scale: ``|psi|^2`` has standard deviation
    ``w / sqrt(2)`` per axis. Each centre must sit at least six widths inside
    the box.
    """
    shape = (grid.n, grid.d)
    c = np.broadcast_to(np.asarray(centers, dtype=float), shape)
    w = np.broadcast_to(np.asarray(widths, dtype=float), shape)
    k = np.broadcast_to(np.asarray(momenta, dtype=float), shape)
    if np.any(w <= 0):
        raise ValueError("widths must be positive")
    for i in range(grid.n):
        for j in range(grid.d):
            lo, hi = grid.bounds(i * grid.d + j)
            margin = min(c[i, j] - lo, hi - c[i, j])
            if margin < CONTAINMENT_WIDTHS * w[i, j]:
                raise ContainmentError(
                    f"centre {c[i, j]} of particle {i} axis {j} is {margin / w[i, j]:.2f} widths from the boundary"
                )

    def f(x):
        expo = 0.0
        for i in range(grid.n):
            for j in range(grid.d):
                expo = expo - (x[i][j] - c[i, j]) ** 2 / (2 * w[i, j] ** 2) + 1j * k[i, j] * x[i][j]
        return np.exp(expo)

    return Wavefunction.from_function(grid, masses, f)


def check_contained(amp: np.ndarray, rank: int, tol: float = BOUNDARY_TOL, what: str = "state") -> None:
    """Refuse states whose amplitude on any boundary face exceeds ``tol * max|psi|``."""
    mag = np.abs(amp)
    peak = mag.max()
    if peak == 0:
        return
    for ax in range(rank):
        edge = max(np.take(mag, 0, axis=ax).max(), np.take(mag, -1, axis=ax).max())
        if edge > tol * peak:
            raise ContainmentError(f"{what} touches the boundary on axis {ax}: {edge / peak:.2e} of peak")


# ---------------------------------------------------------------------------
# Spectral primitives on arrays whose leading ``grid.rank`` axes are spatial
# ---------------------------------------------------------------------------


def fft(amp: np.ndarray, grid: GridSpec) -> np.ndarray:
    return sfft.fftn(amp, axes=tuple(range(grid.rank)))


def ifft(amp: np.ndarray, grid: GridSpec) -> np.ndarray:
    return sfft.ifftn(amp, axes=tuple(range(grid.rank)))


def axis_wavenumbers(grid: GridSpec, ax: int, ndim: int) -> np.ndarray:
    """Angular wavenumbers of axis ``ax`` shaped to broadcast against an ``ndim`` array."""
    N, L = grid.points[ax], grid.box[ax]
    shape = [1] * ndim
    shape[ax] = N
    return (2 * np.pi * sfft.fftfreq(N, L / N)).reshape(shape)


def derivative(amp: np.ndarray, grid: GridSpec, axis: int) -> np.ndarray:
    """Spectral ``d/dx`` along one grid axis."""
    k = axis_wavenumbers(grid, axis, amp.ndim)
    return sfft.ifft(1j * k * sfft.fft(amp, axis=axis), axis=axis)


def shift(amp: np.ndarray, grid: GridSpec, s: Sequence[float]) -> np.ndarray:
    """``f(x - s)`` with the d-vector ``s`` applied to every particle."""
    out = amp
    for i in range(grid.n):
        for k in range(grid.d):
            ax = i * grid.d + k
            out = _shift_axis(out, grid, ax, float(s[k]))
    return out


def _shift_axis(amp: np.ndarray, grid: GridSpec, ax: int, s: float) -> np.ndarray:
    if s == 0.0:
        return amp
    dx = grid.spacing[ax]
    cells = s / dx
    nearest = round(cells)
    if abs(cells - nearest) <= _LATTICE_TOL * max(1.0, abs(cells)):
        return np.roll(amp, nearest, axis=ax)
    phase = np.exp(-1j * axis_wavenumbers(grid, ax, amp.ndim) * s)
    return sfft.ifft(sfft.fft(amp, axis=ax) * phase, axis=ax)


def _shear(amp: np.ndarray, grid: GridSpec, along: int, by: int, factor: float) -> np.ndarray:
    """``g(x) = f(x + factor * x_by * e_along)`` on axes ``along``/``by``."""
    if factor == 0.0:
        return amp
    y = grid.axis(by)
    yshape = [1] * amp.ndim
    yshape[by] = y.size
    phase = np.exp(1j * factor * axis_wavenumbers(grid, along, amp.ndim) * y.reshape(yshape))
    return sfft.ifft(sfft.fft(amp, axis=along) * phase, axis=along)


def _rotate_planar(amp: np.ndarray, grid: GridSpec, angle: float) -> np.ndarray:
    """``f(Q x)`` for the planar rotation ``Q`` by ``angle``, via three shear passes.

    Large angles are split into sub-rotations of at most pi/4 so the shears
    stay moderate.
    """
    if angle == 0.0:
        return amp
    pieces = int(np.ceil(abs(angle) / (np.pi / 4)))
    step = angle / pieces
    alpha = -np.tan(step / 2)
    beta = np.sin(step)
    out = amp
    for _ in range(pieces):
        out = _shear(out, grid, 0, 1, alpha)
        out = _shear(out, grid, 1, 0, beta)
        out = _shear(out, grid, 0, 1, alpha)
    return out


def _rotate_lattice3(amp: np.ndarray, grid: GridSpec, Q: np.ndarray) -> np.ndarray:
    """``f(Q x)`` for a signed permutation ``Q`` on a cubic, centred grid."""
    Qi = np.rint(Q).astype(int)
    if np.max(np.abs(Q - Qi)) > 1e-12:
        raise UnsupportedRotationError("only lattice rotations are supported on 3D grids")
    if len(set(grid.points)) != 1 or len(set(grid.box)) != 1 or any(o != 0.0 for o in grid.origin):
        raise UnsupportedRotationError("3D lattice rotations need a cubic grid centred on the origin")
    N = grid.points[0]
    centred = np.indices(grid.shape) - N // 2
    src = np.einsum("ab,b...->a...", Qi, centred)
    src = (src + N // 2) % N
    return amp[src[0], src[1], src[2]]


def rotate(amp: np.ndarray, grid: GridSpec, Q: np.ndarray) -> np.ndarray:
    """``f(Q x_i)`` for every particle, ``Q`` a rotation matrix."""
    if grid.d == 1 or np.array_equal(Q, np.eye(grid.d)):
        return amp
    if grid.d == 2:
        return _rotate_planar(amp, grid, float(np.arctan2(Q[1, 0], Q[0, 0])))
    return _rotate_lattice3(amp, grid, Q)


def remap(amp: np.ndarray, grid: GridSpec, R: np.ndarray, s: Sequence[float]) -> np.ndarray:
    """``f(R^-1 (x_i - s))``: rotate about the origin, then translate by ``s``."""
    return shift(rotate(amp, grid, R.T), grid, s)


def unremap(amp: np.ndarray, grid: GridSpec, R: np.ndarray, s: Sequence[float]) -> np.ndarray:
    """Inverse of :func:`remap`: ``h(R y + s)``."""
    return rotate(shift(amp, grid, -np.asarray(s, dtype=float)), grid, R)
