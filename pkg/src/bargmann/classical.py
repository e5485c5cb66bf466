"""Hamiltonian dynamics of n particles whose masses are dynamical momenta.

Each particle carries a coordinate ``zeta_i`` canonically conjugate to its mass
``m_i``. The Hamiltonian is the ordinary one, so masses are conserved and
``zeta_i`` obeys ``dzeta_i/dt = dV/dm_i - p_i^2 / (2 m_i^2)``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np
from scipy.integrate import cumulative_simpson

from .potentials import Potential
from .symmetry import DimensionError, ExtendedElement


class IntegrationError(RuntimeError):
    def __init__(self, step: int, message: str = "nonfinite state"):
        super().__init__(f"{message} at step {step}")
        self.step = step


def _check_masses(m: np.ndarray, allow_negative: bool) -> None:
    if np.any(m == 0):
        raise ValueError("masses must be nonzero")
    if not allow_negative and np.any(m < 0):
        raise ValueError("negative masses need allow_negative=True")


@dataclass(frozen=True, eq=False)
class ClassicalState:
    x: np.ndarray
    p: np.ndarray
    zeta: np.ndarray
    m: np.ndarray
    t: float = 0.0
    allow_negative: bool = False

    def __post_init__(self) -> None:
        x = np.array(np.atleast_2d(self.x), dtype=float)
        p = np.array(np.atleast_2d(self.p), dtype=float)
        zeta = np.array(np.atleast_1d(self.zeta), dtype=float)
        m = np.array(np.atleast_1d(self.m), dtype=float)
        n = x.shape[0]
        if p.shape != x.shape or zeta.shape != (n,) or m.shape != (n,):
            raise ValueError(
                f"inconsistent shapes x{x.shape} p{p.shape} zeta{zeta.shape} m{m.shape}"
            )
        _check_masses(m, self.allow_negative)
        for name, arr in (("x", x), ("p", p), ("zeta", zeta), ("m", m)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "t", float(self.t))

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def d(self) -> int:
        return self.x.shape[1]

    def vector(self) -> np.ndarray:
        """All components ``(t, x, p, zeta, m)`` flattened, for comparisons."""
        return np.concatenate([[self.t], self.x.ravel(), self.p.ravel(), self.zeta, self.m])


@dataclass(frozen=True)
class Derivatives:
    x: np.ndarray
    p: np.ndarray
    zeta: np.ndarray
    m: np.ndarray


def hamiltonian(s: ClassicalState, V: Potential) -> float:
    kinetic = float(np.sum(np.sum(s.p**2, axis=1) / (2.0 * s.m)))
    return kinetic + float(V.eval(s.x, s.m))


def _rates(x: np.ndarray, p: np.ndarray, m: np.ndarray, V: Potential):
    xdot = p / m[:, None]
    pdot = -V.grad_x(x, m)
    zdot = V.grad_m(x, m) - np.sum(p**2, axis=1) / (2.0 * m**2)
    return xdot, pdot, zdot


def time_derivatives(s: ClassicalState, V: Potential) -> Derivatives:
    xdot, pdot, zdot = _rates(s.x, s.p, s.m, V)
    return Derivatives(x=xdot, p=pdot, zeta=zdot, m=np.zeros_like(s.m))


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Uniformly sampled trajectory; ``t`` has shape ``(N,)``, ``x`` ``(N, n, d)``, etc."""

    t: np.ndarray
    x: np.ndarray
    p: np.ndarray
    zeta: np.ndarray
    m: np.ndarray
    allow_negative: bool = False

    def __len__(self) -> int:
        return len(self.t)

    def __getitem__(self, k: int) -> ClassicalState:
        return ClassicalState(
            self.x[k], self.p[k], self.zeta[k], self.m, self.t[k], allow_negative=self.allow_negative
        )

    def __iter__(self) -> Iterator[ClassicalState]:
        return (self[k] for k in range(len(self)))

    @property
    def dt(self) -> float:
        return float(self.t[1] - self.t[0]) if len(self.t) > 1 else 0.0

    @property
    def final(self) -> ClassicalState:
        return self[len(self) - 1]


def integrate(s0: ClassicalState, V: Potential, dt: float, steps: int) -> Trajectory:
    """Fixed-step RK4 on ``(x, p, zeta)``; masses are copied unchanged.

    ``zeta`` rides along as a pure quadrature: its rate depends on ``(x, p)``
    only, so the RK4 stage weights reduce to a Simpson rule over each step.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    if steps < 1:
        raise ValueError("steps must be >= 1")
    m = s0.m
    n, d = s0.x.shape
    xs = np.empty((steps + 1, n, d))
    ps = np.empty((steps + 1, n, d))
    zs = np.empty((steps + 1, n))
    xs[0], ps[0], zs[0] = s0.x, s0.p, s0.zeta
    x, p, z = s0.x.copy(), s0.p.copy(), s0.zeta.copy()
    half = 0.5 * dt
    for k in range(1, steps + 1):
        k1x, k1p, k1z = _rates(x, p, m, V)
        k2x, k2p, k2z = _rates(x + half * k1x, p + half * k1p, m, V)
        k3x, k3p, k3z = _rates(x + half * k2x, p + half * k2p, m, V)
        k4x, k4p, k4z = _rates(x + dt * k3x, p + dt * k3p, m, V)
        x = x + dt / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
        p = p + dt / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)
        z = z + dt / 6.0 * (k1z + 2.0 * k2z + 2.0 * k3z + k4z)
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(p)) and np.all(np.isfinite(z))):
            raise IntegrationError(k)
        xs[k], ps[k], zs[k] = x, p, z
    t = s0.t + dt * np.arange(steps + 1)
    return Trajectory(t, xs, ps, zs, m, allow_negative=s0.allow_negative)


def zeta_quadrature(traj: Trajectory, V: Potential) -> np.ndarray:
    """Integrate ``dV/dm_i - xdot_i^2 / 2`` along the sampled positions and momenta.

    Returns the running integral from the first sample, shape ``(N, n)``,
    computed with the cumulative composite Simpson rule.
    """
    if len(traj) < 3:
        raise ValueError("zeta quadrature needs at least 3 samples")
    dts = np.diff(traj.t)
    if np.max(np.abs(dts - dts[0])) > 1e-9 * abs(dts[0]):
        raise ValueError("trajectory must be sampled at uniform dt")
    m = traj.m
    vel2 = np.sum((traj.p / m[None, :, None]) ** 2, axis=2)
    dvdm = np.array([V.grad_m(x, m) for x in traj.x])
    integrand = dvdm - 0.5 * vel2
    return cumulative_simpson(integrand, dx=float(dts[0]), axis=0, initial=0.0)


def transform_state(gbar: ExtendedElement, s: ClassicalState) -> ClassicalState:
    """Extended-group action on phase space (constant gamma_g = 0)."""
    g = gbar.g
    if g.dim != s.d:
        raise DimensionError(f"element dim {g.dim} vs state dim {s.d}")
    rx = s.x @ g.R.T
    x = rx + g.v * s.t + g.a
    p = s.p @ g.R.T + s.m[:, None] * g.v
    zeta = s.zeta - (gbar.theta + rx @ g.v + 0.5 * (g.v @ g.v) * s.t)
    return ClassicalState(x, p, zeta, s.m, s.t + g.b, allow_negative=s.allow_negative)


def covariance_residual(
    gbar: ExtendedElement, s0: ClassicalState, V: Potential, T: float, dt: float
) -> float:
    """Max componentwise gap between "evolve then transform" and "transform then evolve".

    Both routes integrate over the same duration ``T``; when ``b != 0`` the
    transformed initial state starts at ``t0 + b`` and ends at ``t0 + b + T``,
    which is where the transformed endpoint lives.
    """
    if not T > 0:
        raise ValueError("T must be positive")
    steps = int(round(T / dt))
    if steps < 1:
        raise ValueError("T must span at least one step")
    end = integrate(s0, V, dt, steps).final
    route_a = transform_state(gbar, end)
    route_b = integrate(transform_state(gbar, s0), V, dt, steps).final
    return float(np.max(np.abs(route_a.vector() - route_b.vector())))


def energy_drift(traj: Trajectory, V: Potential) -> float:
    """``max_t |H(t) - H(0)| / |H(0)|``."""
    energies = np.array([hamiltonian(s, V) for s in traj])
    return float(np.max(np.abs(energies - energies[0])) / abs(energies[0]))


def trajectory_columns(n: int, d: int) -> list[str]:
    axes = "xyz"
    cols = ["t"]
    cols += [f"x{i}_{axes[k]}" for i in range(n) for k in range(d)]
    cols += [f"p{i}_{axes[k]}" for i in range(n) for k in range(d)]
    cols += [f"zeta{i}" for i in range(n)]
    cols += [f"m{i}" for i in range(n)]
    return cols


def export_trajectory_csv(traj: Trajectory, path: str | Path) -> Path:
    """One row per step: ``t``, positions, momenta, zetas, masses."""
    path = Path(path)
    n, d = traj.x.shape[1:]
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(trajectory_columns(n, d))
        for k in range(len(traj)):
            row: Sequence[float] = [traj.t[k], *traj.x[k].ravel(), *traj.p[k].ravel(), *traj.zeta[k], *traj.m]
            w.writerow([repr(float(v)) for v in row])
    return path
