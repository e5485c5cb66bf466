"""Galilei group, its central extension by the reals, and the multiplier cocycle.

Group elements are immutable values ``(R, v, a, b)``: rotation matrix, boost
velocity, space translation and time shift. The extended group carries an
extra central coordinate ``theta`` and multiplies with the twist

    (theta', g') (theta, g) = (theta' + theta + xi(g', g), g' g),

where ``xi(g', g) = v' . R' a + v'^2 b / 2``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy.spatial.transform import Rotation as _ScipyRotation

ORTHO_TOL = 1e-12
QUAT_TOL = 1e-12


class DimensionError(ValueError):
    """Raised when elements or configurations of different dimension meet."""


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Rotation:
    """Proper rotation in d = 1, 2 or 3 dimensions, stored as a matrix."""

    matrix: np.ndarray

    def __post_init__(self) -> None:
        m = _frozen(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] not in (1, 2, 3):
            raise DimensionError(f"rotation must be d x d with d in 1..3, got {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ValueError("rotation matrix has nonfinite entries")
        d = m.shape[0]
        if np.max(np.abs(m.T @ m - np.eye(d))) > ORTHO_TOL * 10:
            raise ValueError("rotation matrix is not orthogonal")
        if abs(np.linalg.det(m) - 1.0) > ORTHO_TOL * 10:
            raise ValueError("rotation matrix must have det +1")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def identity(cls, d: int) -> Rotation:
        return cls(np.eye(d))

    @classmethod
    def from_angle(cls, angle: float) -> Rotation:
        """Planar rotation by ``angle`` (counterclockwise)."""
        c, s = np.cos(angle), np.sin(angle)
        return cls(np.array([[c, -s], [s, c]]))

    @classmethod
    def from_rotvec(cls, k: Sequence[float]) -> Rotation:
        """3D rotation ``exp([k]_x)``: angle ``|k|`` about axis ``k/|k|``."""
        return cls(_ScipyRotation.from_rotvec(np.asarray(k, dtype=float)).as_matrix())

    @classmethod
    def from_quaternion(cls, q: Sequence[float]) -> Rotation:
        """3D rotation from a unit quaternion ``(w, x, y, z)``.

        ``q`` and ``-q`` give the same matrix; the SU(2) sign is dropped by the
        projection onto SO(3).
        """
        w, x, y, z = (float(c) for c in q)
        norm = np.sqrt(w * w + x * x + y * y + z * z)
        if abs(norm - 1.0) > QUAT_TOL:
            raise ValueError(f"quaternion must be unit length, |q| = {norm!r}")
        m = np.array(
            [
                [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
                [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
                [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
            ]
        )
        return cls(m)

    def inverse(self) -> Rotation:
        return Rotation(self.matrix.T)

    def __matmul__(self, other: Rotation) -> Rotation:
        return Rotation(self.matrix @ other.matrix)

    def __repr__(self) -> str:
        return f"Rotation({self.matrix.tolist()})"


@dataclass(frozen=True, eq=False)
class GalileiElement:
    """Element ``(R, v, a, b)`` of the proper Galilei group."""

    rotation: Rotation
    v: np.ndarray
    a: np.ndarray
    b: float

    def __post_init__(self) -> None:
        rot = self.rotation
        if not isinstance(rot, Rotation):
            rot = Rotation(rot)
            object.__setattr__(self, "rotation", rot)
        v = _frozen(np.atleast_1d(self.v))
        a = _frozen(np.atleast_1d(self.a))
        if v.shape != (rot.dim,) or a.shape != (rot.dim,):
            raise DimensionError(
                f"boost {v.shape} and translation {a.shape} must match rotation dim {rot.dim}"
            )
        b = float(self.b)
        if not (np.all(np.isfinite(v)) and np.all(np.isfinite(a)) and np.isfinite(b)):
            raise ValueError("group element has nonfinite components")
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def dim(self) -> int:
        return self.rotation.dim

    @property
    def R(self) -> np.ndarray:
        return self.rotation.matrix

    @classmethod
    def identity(cls, d: int = 3) -> GalileiElement:
        return cls(Rotation.identity(d), np.zeros(d), np.zeros(d), 0.0)

    @classmethod
    def make(cls, R=None, v=None, a=None, b: float = 0.0, d: int | None = None) -> GalileiElement:
        """Convenience constructor; omitted parts default to the identity."""
        if d is None:
            for part in (v, a):
                if part is not None:
                    d = len(np.atleast_1d(part))
                    break
            else:
                d = np.asarray(R.matrix if isinstance(R, Rotation) else R).shape[0] if R is not None else 3
        rot = Rotation.identity(d) if R is None else (R if isinstance(R, Rotation) else Rotation(R))
        return cls(
            rot,
            np.zeros(d) if v is None else v,
            np.zeros(d) if a is None else a,
            b,
        )

    def components(self) -> np.ndarray:
        """Flat vector ``(R.ravel(), v, a, b)`` used for componentwise comparisons."""
        return np.concatenate([self.R.ravel(), self.v, self.a, [self.b]])

    def is_subgroup_element(self) -> bool:
        """True on the abelian subgroup of boosts and translations (R = I, b = 0)."""
        return bool(np.array_equal(self.R, np.eye(self.dim)) and self.b == 0.0)

    def __matmul__(self, other: GalileiElement) -> GalileiElement:
        return compose(self, other)

    def __repr__(self) -> str:
        return f"GalileiElement(R={self.R.tolist()}, v={self.v.tolist()}, a={self.a.tolist()}, b={self.b})"


@dataclass(frozen=True, eq=False)
class ExtendedElement:
    """Element ``(theta, g)`` of the extended group."""

    theta: float
    g: GalileiElement

    def __post_init__(self) -> None:
        theta = float(self.theta)
        if not np.isfinite(theta):
            raise ValueError("theta must be finite")
        object.__setattr__(self, "theta", theta)

    @property
    def dim(self) -> int:
        return self.g.dim

    @classmethod
    def identity(cls, d: int = 3) -> ExtendedElement:
        return cls(0.0, GalileiElement.identity(d))

    def components(self) -> np.ndarray:
        return np.concatenate([[self.theta], self.g.components()])

    def __matmul__(self, other: ExtendedElement) -> ExtendedElement:
        return compose_ext(self, other)

    def __repr__(self) -> str:
        return f"ExtendedElement(theta={self.theta}, g={self.g!r})"


@dataclass(frozen=True, eq=False)
class SpacetimeConfig:
    """Positions of ``n`` particles (shape ``(n, d)``) at time ``t``."""

    positions: np.ndarray
    t: float

    def __post_init__(self) -> None:
        x = _frozen(np.atleast_2d(self.positions))
        if x.ndim != 2 or x.shape[0] < 1:
            raise ValueError("positions must have shape (n, d) with n >= 1")
        if not np.all(np.isfinite(x)) or not np.isfinite(self.t):
            raise ValueError("configuration must be finite")
        object.__setattr__(self, "positions", x)
        object.__setattr__(self, "t", float(self.t))


@dataclass(frozen=True, eq=False)
class ExtendedConfig:
    """Positions, mass-conjugate coordinates ``zeta`` (shape ``(n,)``) and time."""

    positions: np.ndarray
    zetas: np.ndarray
    t: float

    def __post_init__(self) -> None:
        x = _frozen(np.atleast_2d(self.positions))
        z = _frozen(np.atleast_1d(self.zetas))
        if z.shape != (x.shape[0],):
            raise ValueError(f"need one zeta per particle: {z.shape} vs {x.shape[0]} particles")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(z)) and np.isfinite(self.t)):
            raise ValueError("configuration must be finite")
        object.__setattr__(self, "positions", x)
        object.__setattr__(self, "zetas", z)
        object.__setattr__(self, "t", float(self.t))


def _check_dims(*dims: int) -> None:
    if len(set(dims)) != 1:
        raise DimensionError(f"dimension mismatch: {dims}")


def compose(gp: GalileiElement, g: GalileiElement) -> GalileiElement:
    """Product ``g' g = (R'R, v' + R'v, a' + R'a + v'b, b' + b)``."""
    _check_dims(gp.dim, g.dim)
    Rp = gp.R
    return GalileiElement(
        Rotation(Rp @ g.R),
        gp.v + Rp @ g.v,
        gp.a + Rp @ g.a + gp.v * g.b,
        gp.b + g.b,
    )


def invert(g: GalileiElement) -> GalileiElement:
    """Inverse ``(R^-1, -R^-1 v, -R^-1 (a - v b), -b)``."""
    Rinv = g.R.T
    return GalileiElement(Rotation(Rinv), -Rinv @ g.v, -Rinv @ (g.a - g.v * g.b), -g.b)


def act_spacetime(g: GalileiElement, c: SpacetimeConfig) -> SpacetimeConfig:
    """Map ``({x_i}, t) -> ({R x_i + a + v t}, t + b)``."""
    _check_dims(g.dim, c.positions.shape[1])
    x = c.positions @ g.R.T + g.a + g.v * c.t
    return SpacetimeConfig(x, c.t + g.b)


def cocycle(gp: GalileiElement, g: GalileiElement) -> float:
    """Multiplier ``xi(g', g) = v' . R' a + v'^2 b / 2``."""
    _check_dims(gp.dim, g.dim)
    return float(gp.v @ (gp.R @ g.a) + 0.5 * (gp.v @ gp.v) * g.b)


def cocycle_condition_residual(gpp: GalileiElement, gp: GalileiElement, g: GalileiElement) -> float:
    """Coboundary of ``xi``: ``xi(g''g', g) - xi(g'', g'g) + xi(g'', g') - xi(g', g)``."""
    return (
        cocycle(compose(gpp, gp), g)
        - cocycle(gpp, compose(gp, g))
        + cocycle(gpp, gp)
        - cocycle(gp, g)
    )


def cocycle_condition_scale(gpp: GalileiElement, gp: GalileiElement, g: GalileiElement) -> float:
    """Magnitude against which :func:`cocycle_condition_residual` is judged."""
    terms = (
        cocycle(compose(gpp, gp), g),
        cocycle(gpp, compose(gp, g)),
        cocycle(gpp, gp),
        cocycle(gp, g),
    )
    return max(1.0, max(abs(t) for t in terms))


Delta = Callable[[GalileiElement], float]


def shifted_cocycle(delta: Delta, gp: GalileiElement, g: GalileiElement) -> float:
    """Cocycle changed by the coboundary of ``delta``:
    ``xi(g', g) - delta(g'g) + delta(g') + delta(g)``."""
    return cocycle(gp, g) - delta(compose(gp, g)) + delta(gp) + delta(g)


def integration_constant(g: GalileiElement) -> float:
    """The phase constant ``v^2 b / 2 - v . a`` built into the quantum action."""
    return float(0.5 * (g.v @ g.v) * g.b - g.v @ g.a)


def antisymmetric_defect(gp: GalileiElement, g: GalileiElement, delta: Delta | None = None) -> float:
    """``xi~(g', g) - xi~(g, g')`` on the boost/translation subgroup.

    Any coboundary shift is symmetric there, so the result is ``v'.a - v.a'``
    whatever ``delta`` is.
    """
    if not (gp.is_subgroup_element() and g.is_subgroup_element()):
        raise ValueError("antisymmetric_defect needs R = I and b = 0 for both elements")
    if delta is None:
        return cocycle(gp, g) - cocycle(g, gp)
    return shifted_cocycle(delta, gp, g) - shifted_cocycle(delta, g, gp)


def compose_ext(gp: ExtendedElement, g: ExtendedElement) -> ExtendedElement:
    return ExtendedElement(gp.theta + g.theta + cocycle(gp.g, g.g), compose(gp.g, g.g))


def invert_ext(gbar: ExtendedElement) -> ExtendedElement:
    """Inverse ``(-theta + v.a - v^2 b / 2, g^-1)``."""
    g = gbar.g
    theta = -gbar.theta + float(g.v @ g.a) - 0.5 * float(g.v @ g.v) * g.b
    return ExtendedElement(theta, invert(g))


def act_extended(gbar: ExtendedElement, c: ExtendedConfig) -> ExtendedConfig:
    """Action on extended configuration space (with the constant gamma_g = 0).

    Positions and time move as under the plain group; each zeta is lowered by
    ``theta + v . R x_i + v^2 t / 2``.
    """
    g = gbar.g
    _check_dims(g.dim, c.positions.shape[1])
    rx = c.positions @ g.R.T
    zetas = c.zetas - (gbar.theta + rx @ g.v + 0.5 * (g.v @ g.v) * c.t)
    return ExtendedConfig(rx + g.a + g.v * c.t, zetas, c.t + g.b)


def random_rotation(rng: np.random.Generator, d: int) -> Rotation:
    if d == 1:
        return Rotation.identity(1)
    if d == 2:
        return Rotation.from_angle(rng.uniform(-np.pi, np.pi))
    q = rng.normal(size=4)
    return Rotation.from_quaternion(q / np.linalg.norm(q))


def random_element(rng: np.random.Generator, d: int = 3, scale: float = 10.0) -> GalileiElement:
    """Random element with boost, translation and time shift uniform in ``[-scale, scale]``."""
    return GalileiElement(
        random_rotation(rng, d),
        rng.uniform(-scale, scale, d),
        rng.uniform(-scale, scale, d),
        rng.uniform(-scale, scale),
    )


def random_ext_element(rng: np.random.Generator, d: int = 3, scale: float = 10.0) -> ExtendedElement:
    g = random_element(rng, d, scale)
    return ExtendedElement(rng.uniform(-scale, scale), g)


# ---------------------------------------------------------------------------
# Group-level probe of the Lie algebra
# ---------------------------------------------------------------------------

_AXES = "xyz"


def basis_labels(d: int = 3) -> list[str]:
    if d not in (2, 3):
        raise DimensionError("algebra probe supports d = 2 or 3")
    rot = ["D_z"] if d == 2 else [f"D_{c}" for c in _AXES]
    return rot + [f"{k}_{c}" for k in "VA" for c in _AXES[:d]] + ["B", "Z"]


def _basis_element(label: str, eps: float, d: int) -> ExtendedElement:
    kind = label[0]
    if kind == "Z":
        return ExtendedElement(eps, GalileiElement.identity(d))
    if kind == "B":
        return ExtendedElement(0.0, GalileiElement.make(b=eps, d=d))
    axis = _AXES.index(label[2])
    unit = np.zeros(d)
    if kind == "D":
        if d == 2:
            return ExtendedElement(0.0, GalileiElement.make(R=Rotation.from_angle(eps), d=2))
        k = np.zeros(3)
        k[axis] = eps
        return ExtendedElement(0.0, GalileiElement.make(R=Rotation.from_rotvec(k), d=3))
    unit[axis] = eps
    if kind == "V":
        return ExtendedElement(0.0, GalileiElement.make(v=unit))
    if kind == "A":
        return ExtendedElement(0.0, GalileiElement.make(a=unit))
    raise ValueError(f"unknown basis label {label!r}")


def _log_coordinates(gbar: ExtendedElement) -> dict[str, float]:
    """First-order log coordinates of an element near the identity."""
    g = gbar.g
    d = g.dim
    out: dict[str, float] = {}
    if d == 2:
        out["D_z"] = float(np.arctan2(g.R[1, 0], g.R[0, 0]))
    else:
        k = _ScipyRotation.from_matrix(g.R).as_rotvec()
        for i, c in enumerate(_AXES):
            out[f"D_{c}"] = float(k[i])
    for i in range(d):
        out[f"V_{_AXES[i]}"] = float(g.v[i])
        out[f"A_{_AXES[i]}"] = float(g.a[i])
    out["B"] = g.b
    out["Z"] = gbar.theta
    return out


def group_commutator(x: ExtendedElement, y: ExtendedElement) -> ExtendedElement:
    """``x y x^-1 y^-1``."""
    return compose_ext(compose_ext(compose_ext(x, y), invert_ext(x)), invert_ext(y))


def algebra_probe(X: str, Y: str, eps: float = 1e-3, d: int = 3, richardson: bool = True) -> dict[str, float]:
    """Estimate the bracket ``[X, Y]`` from the group commutator of small elements.

    The commutator of ``exp(eps X)`` and ``exp(eps Y)`` is
    ``exp(eps^2 [X, Y] + O(eps^3))``; reading its log coordinates and dividing
    by ``eps^2`` gives the structure constants with an O(eps) bias, which the
    two-point Richardson step (``eps`` and ``eps / 2``) removes.
    """
    if not (0.0 < eps <= 1e-2):
        raise ValueError(f"eps must lie in (0, 1e-2], got {eps!r}")
    labels = basis_labels(d)
    for lab in (X, Y):
        if lab not in labels:
            raise ValueError(f"unknown basis label {lab!r} for d={d}")

    def raw(e: float) -> dict[str, float]:
        c = group_commutator(_basis_element(X, e, d), _basis_element(Y, e, d))
        return {k: v / e**2 for k, v in _log_coordinates(c).items()}

    coarse = raw(eps)
    if not richardson:
        return coarse
    fine = raw(eps / 2)
    return {k: 2.0 * fine[k] - coarse[k] for k in coarse}


def _levi_civita(i: int, j: int, k: int) -> int:
    return int((i - j) * (j - k) * (k - i) / 2)


def expected_bracket(X: str, Y: str, d: int = 3) -> dict[str, float]:
    """Nonzero structure constants of the extended Galilei algebra for ``[X, Y]``.

    Returns a mapping label -> coefficient; an empty dict means the pair commutes.
    Antisymmetry fills in the reversed orderings.
    """
    out = _bracket_table(X, Y, d)
    if out is None:
        rev = _bracket_table(Y, X, d)
        out = {} if rev is None else {k: -v for k, v in rev.items()}
    return out


def _bracket_table(X: str, Y: str, d: int) -> dict[str, float] | None:
    kx, ky = X[0], Y[0]
    if kx == "D" and ky in "DVA":
        a = _AXES.index(X[2])
        b = _AXES.index(Y[2])
        if d == 2:
            # Only D_z exists; [D_z, W_x] = W_y, [D_z, W_y] = -W_x.
            if ky == "D":
                return {}
            return {f"{ky}_y": 1.0} if b == 0 else {f"{ky}_x": -1.0}
        res = {}
        for c in range(3):
            eps = _levi_civita(a, b, c)
            if eps:
                res[f"{ky}_{_AXES[c]}"] = float(eps)
        return res
    if kx == "V" and ky == "A":
        return {"Z": 1.0} if X[2] == Y[2] else {}
    if kx == "V" and ky == "B":
        return {f"A_{X[2]}": 1.0}
    return None


def structure_constants(d: int = 3) -> dict[tuple[str, str], dict[str, float]]:
    labels = basis_labels(d)
    return {(x, y): expected_bracket(x, y, d) for x in labels for y in labels}


def bracket_error(estimate: Mapping[str, float], expected: Mapping[str, float]) -> float:
    keys = set(estimate) | set(expected)
    return max(abs(estimate.get(k, 0.0) - expected.get(k, 0.0)) for k in keys)
