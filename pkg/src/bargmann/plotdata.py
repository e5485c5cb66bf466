"""CSV exports for plotting; rendering is left to the user.

Headers per artifact:

* series (e.g. the superselection sweep): the series' own column names,
  ``mass_gap, measured_phase, predicted_phase`` for the sweep;
* trajectory: ``t, x{i}_{axis}..., p{i}_{axis}..., zeta{i}..., m{i}...``;
* wavefunction: ``x, density`` (|psi|^2 marginal on the first grid axis);
* zeta field: ``zeta, density`` (|Psi|^2 integrated over configuration space);
* fibre state: a JSON manifest plus one binary snapshot per slice.
"""

from __future__ import annotations

import csv
from pathlib import Path

from .classical import Trajectory, export_trajectory_csv
from .fiber import MassFiberState, ZetaField
from .grid import Wavefunction
from .io import export_fiber, export_marginal_csv, export_zeta_marginal_csv


def write_series(header, columns, path: str | Path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(list(header))
        for row in zip(*columns):
            w.writerow([repr(float(v)) for v in row])
    return path


def emit_plot_data(obj, stem: str | Path) -> list[Path]:
    """Write ``obj`` next to ``stem`` (suffix chosen by type); returns the files written.

    OS errors propagate unchanged.
    """
    from .suites import Report, Series

    stem = Path(stem)
    if isinstance(obj, Series):
        return [write_series(obj.header, obj.columns, stem.with_suffix(".csv"))]
    if isinstance(obj, Trajectory):
        return [export_trajectory_csv(obj, stem.with_suffix(".csv"))]
    if isinstance(obj, Wavefunction):
        return [export_marginal_csv(obj, stem.with_suffix(".csv"))]
    if isinstance(obj, ZetaField):
        return [export_zeta_marginal_csv(obj, stem.with_suffix(".csv"))]
    if isinstance(obj, MassFiberState):
        manifest = export_fiber(obj, stem.parent, stem.name)
        return [manifest] + [stem.parent / f"{stem.name}_slice{j}.bgmn" for j in range(len(obj.slices))]
    if isinstance(obj, Report):
        paths = []
        for name, art in sorted(obj.artifacts.items()):
            paths += emit_plot_data(art, stem.parent / f"{stem.name}_{name}")
        return paths
    raise TypeError(f"no plot export for {type(obj).__name__}")
