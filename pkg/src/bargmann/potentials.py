"""Potentials ``V({x_i}, {m_i})`` shared by the classical and grid solvers.

Positions are indexed ``x[i][k]`` (particle ``i``, component ``k``). Each entry
may be a scalar or an array, so the same code evaluates a classical
configuration of shape ``(n, d)`` and broadcast coordinate arrays of a grid.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Any, Sequence

import numpy as np


def _pair_distance2(x: Any, i: int, j: int):
    return sum((xi - xj) ** 2 for xi, xj in zip(x[i], x[j]))


class Potential:
    """Base class. Subclasses implement :meth:`eval`, :meth:`grad_x`, :meth:`grad_m`."""

    #: True when the potential depends on positions only through pair distances.
    galilei_invariant: bool = True
    #: True when ``grad_m`` is not identically zero.
    mass_dependent: bool = False

    def eval(self, x, m: Sequence[float]):
        raise NotImplementedError

    def grad_x(self, x: np.ndarray, m: Sequence[float]) -> np.ndarray:
        """Gradient with respect to positions, shape ``(n, d)``."""
        raise NotImplementedError

    def grad_m(self, x: np.ndarray, m: Sequence[float]) -> np.ndarray:
        """Partial derivatives with respect to the masses, shape ``(n,)``."""
        return np.zeros(len(m))

    def describe(self) -> dict:
        return {"kind": type(self).__name__}


class ZeroPotential(Potential):
    def eval(self, x, m):
        return 0.0

    def grad_x(self, x, m):
        return np.zeros(np.shape(x))

    def describe(self):
        return {"kind": "zero"}


class PairPotential(Potential):
    """``sum_{i<j} u(r_ij, m_i, m_j)``; subclasses supply ``u`` and its derivatives."""

    def pair(self, r2, mi: float, mj: float):
        """Pair energy as a function of the squared distance."""
        raise NotImplementedError

    def pair_dr2(self, r2, mi: float, mj: float):
        """Derivative of the pair energy with respect to ``r^2``."""
        raise NotImplementedError

    def pair_dmi(self, r2, mi: float, mj: float):
        """Derivative of the pair energy with respect to ``m_i``."""
        return 0.0

    def eval(self, x, m):
        total = 0.0
        for i, j in combinations(range(len(m)), 2):
            total = total + self.pair(_pair_distance2(x, i, j), m[i], m[j])
        return total

    def grad_x(self, x, m):
        x = np.asarray(x, dtype=float)
        g = np.zeros_like(x)
        for i, j in combinations(range(len(m)), 2):
            diff = x[i] - x[j]
            f = 2.0 * self.pair_dr2(diff @ diff, m[i], m[j]) * diff
            g[i] += f
            g[j] -= f
        return g

    def grad_m(self, x, m):
        x = np.asarray(x, dtype=float)
        g = np.zeros(len(m))
        for i, j in combinations(range(len(m)), 2):
            r2 = _pair_distance2(x, i, j)
            g[i] += self.pair_dmi(r2, m[i], m[j])
            g[j] += self.pair_dmi(r2, m[j], m[i])
        return g


@dataclass(frozen=True)
class HarmonicPair(PairPotential):
    """``k/2 sum_{i<j} r_ij^2``."""

    k: float = 1.0

    def pair(self, r2, mi, mj):
        return 0.5 * self.k * r2

    def pair_dr2(self, r2, mi, mj):
        return 0.5 * self.k

    def describe(self):
        return {"kind": "harmonic", "k": self.k}


@dataclass(frozen=True)
class PowerLawPair(PairPotential):
    """``g m_i m_j (r_ij^2 + core^2)^(s/2)``; ``s = -1, g < 0`` is softened gravity.

    ``core = 0`` gives the bare power law.
    """

    g: float = -1.0
    s: float = -1.0
    core: float = 1e-3

    mass_dependent = True

    def _base(self, r2):
        return r2 + self.core**2

    def pair(self, r2, mi, mj):
        return self.g * mi * mj * self._base(r2) ** (0.5 * self.s)

    def pair_dr2(self, r2, mi, mj):
        return 0.5 * self.s * self.g * mi * mj * self._base(r2) ** (0.5 * self.s - 1.0)

    def pair_dmi(self, r2, mi, mj):
        return self.g * mj * self._base(r2) ** (0.5 * self.s)

    def describe(self):
        return {"kind": "power", "g": self.g, "s": self.s, "core": self.core}


@dataclass(frozen=True)
class ExternalHarmonic(Potential):
    """Trap ``sum_i k/2 |x_i - center|^2``. Not Galilei invariant; used for solver checks."""

    k: float = 1.0
    center: float = 0.0

    galilei_invariant = False

    def eval(self, x, m):
        total = 0.0
        for i in range(len(m)):
            total = total + 0.5 * self.k * sum((xk - self.center) ** 2 for xk in x[i])
        return total

    def grad_x(self, x, m):
        return self.k * (np.asarray(x, dtype=float) - self.center)

    def describe(self):
        return {"kind": "trap", "k": self.k, "center": self.center}


def from_spec(spec: dict | None) -> Potential:
    """Build a potential from ``{"kind": ..., **params}``."""
    if spec is None:
        return ZeroPotential()
    spec = dict(spec)
    kind = spec.pop("kind", "zero")
    table = {"zero": ZeroPotential, "harmonic": HarmonicPair, "power": PowerLawPair, "trap": ExternalHarmonic}
    if kind not in table:
        raise ValueError(f"unknown potential kind {kind!r}")
    try:
        return table[kind](**spec)
    except TypeError as exc:
        raise ValueError(f"bad parameters for potential {kind!r}: {exc}") from None
