"""Scenario configuration: JSON loading, validation and the defaults table.

A scenario is a single JSON object. Every key is optional; anything left out
comes from :data:`DEFAULTS` merged with the suite's entry in
:data:`SUITE_DEFAULTS`. Keys a suite does not use, unknown tolerance names and
ill-typed values are rejected with a :class:`ConfigError` naming the key.
"""

from __future__ import annotations

import copy
import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

SUITES = (
    "group-axioms",
    "cocycle",
    "classical-covariance",
    "quantum-symmetry",
    "algebra-casimir",
    "superselection-demo",
    "extended-representation",
)

# Physical and numerical defaults shared by every suite.
DEFAULTS: dict[str, Any] = {
    "seed": 42,
    "hbar": 1.0,
    "out": "bargmann-out",
}

# Per-suite defaults; a key listed here is a key the suite accepts.
SUITE_DEFAULTS: dict[str, dict[str, Any]] = {
    "group-axioms": {
        "d": 3,
        "elements": "random:10000",
        "element_scale": 10.0,
    },
    "cocycle": {
        "d": 3,
        "elements": "random:1000",
        "element_scale": 10.0,
    },
    "classical-covariance": {
        "d": 2,
        "masses": [1.0, 2.0, 1.5],
        "potential": {"kind": "harmonic", "k": 1.0},
        "elements": "random:6",
        "element_scale": 1.0,
        "T": 2.0,
        "dt": 1e-3,
        "energy_T": 10.0,
    },
    "quantum-symmetry": {
        "grid": {"points": 1024, "box": 40.0},
        "pair_grid": {"points": 128, "box": 24.0},
        "masses": [1.0],
        "pair_masses": [1.0, 2.0],
        "potential": {"kind": "harmonic", "k": 1.0},
        "elements": "random:100",
        "element_scale": 0.5,
        "boost": [0.5],
        "translation": [1.0],
        "T": 1.0,
        "dt": 1e-3,
        "commutator_masses": [1.0, 2.0, 4.0],
    },
    "algebra-casimir": {
        "pair_grid": {"points": 128, "box": 24.0},
        "pair_masses": [1.0, 2.0],
        "potential": {"kind": "harmonic", "k": 1.5},
        "grid2": {"points": 64, "box": 24.0},
        "grid3": {"points": 64, "box": 16.0},
        "probe_eps": [4e-3, 2e-3, 1e-3],
    },
    "superselection-demo": {
        "grid": {"points": 1024, "box": 40.0},
        "base_mass": 1.0,
        "sweep": [0.0, 0.5, 1.0, 1.5, 2.0],
        "boost": [1.0],
        "translation": [1.0],
    },
    "extended-representation": {
        "grid": {"points": 256, "box": 40.0},
        "zeta_box": 6.283185307179586,
        "slice_indices": [[1], [2], [3]],
        "zeta_points": 16,
        "elements": "random:100",
        "element_scale": 0.5,
    },
}

# Default tolerances, one per check. Check names are the keys.
TOLERANCES: dict[str, dict[str, float]] = {
    "group-axioms": {
        "associativity": 1e-12,
        "inverse": 1e-12,
        "action_compatibility": 1e-12,
        "ext_associativity": 1e-12,
        "ext_inverse": 1e-12,
        "ext_action_compatibility": 1e-12,
        "cocycle_condition": 1e-12,
    },
    "cocycle": {
        "defect_formula": 1e-12,
        "defect_coboundary_invariance": 1e-12,
        "shifted_cocycle_condition": 1e-12,
        "defect_nonzero_fraction": 0.5,
    },
    "classical-covariance": {
        "mass_conservation": 0.0,
        "energy_drift": 1e-8,
        "zeta_quadrature": 1e-8,
        "covariance_b0": 1e-7,
        "covariance_b": 1e-6,
    },
    "quantum-symmetry": {
        "free_gaussian_oracle": 1e-6,
        "convergence_order": 0.1,
        "norm_preservation": 1e-12,
        "period_fidelity": 1e-6,
        "unitarity": 1e-12,
        "solution_map_free": 1e-6,
        "solution_map_pair": 1e-6,
        "composition_phase": 1e-6,
        "composition_overlap": 1e-8,
        "commutator_phase_magnitude": 1e-6,
        "commutator_linearity": 1e-6,
    },
    "algebra-casimir": {
        "brackets_1d": 1e-6,
        "brackets_2d": 1e-6,
        "brackets_3d": 1e-6,
        "probe_structure_constants": 1e-6,
        "probe_convergence_order": 0.1,
        "S2_single_particle": 1e-6,
        "K_free": 1e-6,
        "K_internal_ground_state": 1e-6,
        "K_commutators": 1e-5,
        "S2_commutators": 1e-5,
    },
    "superselection-demo": {
        "relative_phase": 1e-6,
        "linearity": 1e-6,
        "branch_overlap": 1e-8,
    },
    "extended-representation": {
        "representation_b0": 1e-10,
        "representation_b": 1e-6,
        "projective_defect_phases": 1e-6,
        "projective_defect_norm": 1e-6,
        "pullback_consistency": 1e-10,
        "weights_invariance": 1e-12,
        "central_kernel": 1e-12,
        "fourier_round_trip": 1e-12,
        "zeta_shift_duality": 1e-12,
        "two_slice_fringe": 1e-12,
    },
}

_RANDOM = re.compile(r"^random:(\d+)$")
_ELEMENT_KEYS = {"angle", "rotvec", "quaternion", "v", "a", "b", "theta"}


class ConfigError(ValueError):
    """Invalid scenario; ``key`` names the offending entry."""

    def __init__(self, key: str, message: str):
        super().__init__(f"config key '{key}': {message}")
        self.key = key


def _number(key: str, value, positive: bool = False) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(key, f"expected a number, got {value!r}")
    if positive and not value > 0:
        raise ConfigError(key, f"must be > 0, got {value!r}")
    return float(value)


def _integer(key: str, value, minimum: int | None = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(key, f"expected an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise ConfigError(key, f"must be >= {minimum}, got {value}")
    return value


def _vector(key: str, value) -> list[float]:
    if not isinstance(value, list) or not value:
        raise ConfigError(key, f"expected a nonempty list of numbers, got {value!r}")
    return [_number(f"{key}[{i}]", v) for i, v in enumerate(value)]


def _grid(key: str, value) -> dict:
    if not isinstance(value, dict):
        raise ConfigError(key, "expected an object with 'points' and 'box'")
    for sub in value:
        if sub not in ("points", "box"):
            raise ConfigError(f"{key}.{sub}", "unknown grid key")
    points = _integer(f"{key}.points", value.get("points", 0), minimum=16)
    if points & (points - 1):
        raise ConfigError(f"{key}.points", f"must be a power of two, got {points}")
    box = _number(f"{key}.box", value.get("box"), positive=True)
    return {"points": points, "box": box}


def _elements(key: str, value) -> str | list:
    if isinstance(value, str):
        m = _RANDOM.match(value)
        if not m or int(m.group(1)) < 1:
            raise ConfigError(key, f"expected 'random:<count>' with count >= 1, got {value!r}")
        return value
    if not isinstance(value, list) or not value:
        raise ConfigError(key, "expected 'random:<count>' or a nonempty list of elements")
    for i, el in enumerate(value):
        if not isinstance(el, dict):
            raise ConfigError(f"{key}[{i}]", "element must be an object")
        for sub, v in el.items():
            name = f"{key}[{i}].{sub}"
            if sub not in _ELEMENT_KEYS:
                raise ConfigError(name, "unknown element key")
            if sub in ("angle", "b", "theta"):
                _number(name, v)
            else:
                _vector(name, v)
    return value


def _potential(key: str, value) -> dict:
    from .potentials import from_spec

    if not isinstance(value, dict) or "kind" not in value:
        raise ConfigError(key, "expected an object with a 'kind'")
    try:
        from_spec(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(key, str(exc)) from None
    return value


def _mass_list(key: str, value) -> list[float]:
    ms = _vector(key, value)
    for i, m in enumerate(ms):
        if m <= 0:
            raise ConfigError(f"{key}[{i}]", f"masses must be > 0, got {m}")
    return ms


def _slice_indices(key: str, value) -> list[list[int]]:
    if not isinstance(value, list) or not value:
        raise ConfigError(key, "expected a nonempty list of lattice index lists")
    out = []
    for i, ks in enumerate(value):
        if not isinstance(ks, list) or not ks:
            raise ConfigError(f"{key}[{i}]", "expected a nonempty list of integers")
        row = [_integer(f"{key}[{i}][{j}]", k) for j, k in enumerate(ks)]
        if any(k == 0 for k in row):
            raise ConfigError(f"{key}[{i}]", "lattice index 0 (zero mass) is excluded")
        out.append(row)
    if len({len(r) for r in out}) != 1:
        raise ConfigError(key, "all slices need the same particle count")
    return out


def _path(key: str, value) -> str:
    if not isinstance(value, str) or not value:
        raise ConfigError(key, f"expected a path string, got {value!r}")
    return value


_VALIDATORS = {
    "seed": lambda k, v: _integer(k, v, minimum=0),
    "hbar": lambda k, v: _number(k, v, positive=True),
    "out": _path,
    "d": lambda k, v: _integer(k, v, minimum=1),
    "elements": _elements,
    "element_scale": lambda k, v: _number(k, v, positive=True),
    "masses": _mass_list,
    "pair_masses": _mass_list,
    "commutator_masses": _mass_list,
    "potential": _potential,
    "T": lambda k, v: _number(k, v, positive=True),
    "dt": lambda k, v: _number(k, v, positive=True),
    "energy_T": lambda k, v: _number(k, v, positive=True),
    "grid": _grid,
    "pair_grid": _grid,
    "grid2": _grid,
    "grid3": _grid,
    "boost": _vector,
    "translation": _vector,
    "probe_eps": _vector,
    "base_mass": lambda k, v: _number(k, v, positive=True),
    "sweep": _vector,
    "zeta_box": lambda k, v: _number(k, v, positive=True),
    "slice_indices": _slice_indices,
    "zeta_points": lambda k, v: _integer(k, v, minimum=2),
}


@dataclass
class ScenarioConfig:
    """Validated scenario: ``raw`` is the verbatim input, ``settings`` the merged values."""

    suite: str
    raw: dict
    settings: dict
    tolerances: dict[str, float]
    tolerance_scale: float = 1.0
    overrides: dict = field(default_factory=dict)

    @property
    def seed(self) -> int:
        return self.settings["seed"]

    def __getitem__(self, key: str):
        return self.settings[key]

    def tol(self, name: str) -> float:
        return self.tolerances[name] * self.tolerance_scale


def build_config(
    suite: str,
    raw: dict | None = None,
    *,
    seed: int | None = None,
    out: str | None = None,
    tolerance_scale: float = 1.0,
) -> ScenarioConfig:
    """Validate ``raw`` for ``suite`` and merge it over the defaults.

    ``seed`` and ``out`` override the config file values when given.
    """
    raw = {} if raw is None else raw
    if not isinstance(raw, dict):
        raise ConfigError("<root>", "config must be a JSON object")
    if suite not in SUITES:
        raise ConfigError("suite", f"unknown suite {suite!r}; choose from {', '.join(SUITES)}")
    if "suite" in raw and raw["suite"] != suite:
        raise ConfigError("suite", f"config names suite {raw['suite']!r} but {suite!r} was requested")
    tolerance_scale = _number("tolerance_scale", tolerance_scale, positive=True)

    allowed = set(DEFAULTS) | set(SUITE_DEFAULTS[suite]) | {"suite", "tolerances"}
    settings = copy.deepcopy(DEFAULTS)
    settings.update(copy.deepcopy(SUITE_DEFAULTS[suite]))
    for key, value in raw.items():
        if key in ("suite", "tolerances"):
            continue
        if key not in allowed:
            if key in _VALIDATORS:
                raise ConfigError(key, f"not used by suite {suite!r}")
            raise ConfigError(key, "unknown key")
        settings[key] = _VALIDATORS[key](key, value)

    tolerances = dict(TOLERANCES[suite])
    user_tol = raw.get("tolerances", {})
    if not isinstance(user_tol, dict):
        raise ConfigError("tolerances", "expected an object of check name -> tolerance")
    for name, value in user_tol.items():
        if name not in tolerances:
            raise ConfigError(f"tolerances.{name}", f"no such check in suite {suite!r}")
        tolerances[name] = _number(f"tolerances.{name}", value, positive=True)

    if seed is not None:
        settings["seed"] = _integer("seed", seed, minimum=0)
    if out is not None:
        settings["out"] = out
    return ScenarioConfig(suite, copy.deepcopy(raw), settings, tolerances, tolerance_scale)


def load_config_file(path: str | Path) -> dict:
    """Parse a JSON scenario file; syntax errors surface as :class:`ConfigError`."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError("--config", f"cannot read {path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("<json>", f"line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise ConfigError("<root>", "config must be a JSON object")
    return data
