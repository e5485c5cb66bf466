"""File formats: wavefunction snapshots, CSV marginals and fibre-state manifests.

Snapshot layout (little endian)::

    b"BGMN1"
    u32 rank
    u32 size[rank]
    f64 box[rank]
    f64 hbar
    u32 n
    f64 masses[n]
    f64 (re, im) pairs, row-major over the grid

The layout has no slot for the grid origin; snapshots are written only for
grids centred on zero and read back that way.
"""

from __future__ import annotations

import csv
import json
import struct
from pathlib import Path

import numpy as np

from .fiber import MassFiberState, ZetaField, mass_expectation
from .grid import GridSpec, Wavefunction

MAGIC = b"BGMN1"


class SnapshotError(ValueError):
    pass


def snapshot_bytes(psi: Wavefunction) -> bytes:
    grid = psi.grid
    if any(o != 0.0 for o in grid.origin):
        raise SnapshotError("snapshot format stores no origin; grid must be centred on zero")
    parts = [
        MAGIC,
        struct.pack("<I", grid.rank),
        struct.pack(f"<{grid.rank}I", *grid.points),
        struct.pack(f"<{grid.rank}d", *grid.box),
        struct.pack("<d", grid.hbar),
        struct.pack("<I", grid.n),
        struct.pack(f"<{grid.n}d", *psi.masses),
    ]
    inter = np.empty(psi.amplitudes.shape + (2,), dtype="<f8")
    inter[..., 0] = psi.amplitudes.real
    inter[..., 1] = psi.amplitudes.imag
    parts.append(np.ascontiguousarray(inter).tobytes(order="C"))
    return b"".join(parts)


def snapshot_from_bytes(data: bytes) -> Wavefunction:
    if data[:5] != MAGIC:
        raise SnapshotError("bad magic")
    off = 5

    def take(fmt: str):
        nonlocal off
        size = struct.calcsize(fmt)
        if off + size > len(data):
            raise SnapshotError("truncated snapshot header")
        vals = struct.unpack_from(fmt, data, off)
        off += size
        return vals

    (rank,) = take("<I")
    points = take(f"<{rank}I")
    box = take(f"<{rank}d")
    (hbar,) = take("<d")
    (n,) = take("<I")
    masses = take(f"<{n}d")
    if rank % n:
        raise SnapshotError(f"rank {rank} is not a multiple of particle count {n}")
    grid = GridSpec.create(n=n, d=rank // n, points=points, box=box, origin=0.0, hbar=hbar)
    count = int(np.prod(points)) * 2
    if len(data) - off != count * 8:
        raise SnapshotError(f"expected {count * 8} amplitude bytes, found {len(data) - off}")
    flat = np.frombuffer(data, dtype="<f8", count=count, offset=off).reshape(tuple(points) + (2,))
    return Wavefunction(grid, flat[..., 0] + 1j * flat[..., 1], masses)


def write_snapshot(psi: Wavefunction, path: str | Path) -> Path:
    path = Path(path)
    path.write_bytes(snapshot_bytes(psi))
    return path


def read_snapshot(path: str | Path) -> Wavefunction:
    return snapshot_from_bytes(Path(path).read_bytes())


def marginal(psi: Wavefunction, axis: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """``(x, density)`` for one grid axis, all other axes integrated out."""
    grid = psi.grid
    rho = np.abs(psi.amplitudes) ** 2
    other = tuple(ax for ax in range(grid.rank) if ax != axis)
    return grid.axis(axis), rho.sum(axis=other) * grid.cell_volume / grid.spacing[axis]


def _write_columns(path: Path, header: list[str], columns) -> Path:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in zip(*columns):
            w.writerow([repr(float(v)) for v in row])
    return path


def export_marginal_csv(psi: Wavefunction, path: str | Path, axis: int = 0) -> Path:
    """CSV with columns ``x, density``."""
    x, rho = marginal(psi, axis)
    return _write_columns(Path(path), ["x", "density"], (x, rho))


def export_zeta_marginal_csv(f: ZetaField, path: str | Path, axis: int = 0) -> Path:
    """CSV with columns ``zeta, density`` for one zeta axis."""
    z, rho = f.zeta_marginal(axis)
    return _write_columns(Path(path), ["zeta", "density"], (z, rho))


def export_fiber(s: MassFiberState, directory: str | Path, stem: str = "fiber") -> Path:
    """Write ``<stem>.json`` plus one snapshot per slice; returns the manifest path."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    _, weights = mass_expectation(s)
    files = []
    for j, phi in enumerate(s.slices):
        name = f"{stem}_slice{j}.bgmn"
        write_snapshot(phi, directory / name)
        files.append(name)
    manifest = {
        "format": "bargmann-fiber/1",
        "hbar": s.hbar,
        "zeta_box": list(s.zeta_box),
        "lattice_indices": [list(k) for k in s.indices()],
        "slice_masses": [list(m) for m in s.mass_lists],
        "weights": list(weights),
        "seed": s.seed,
        "negative_mass": s.has_negative_mass,
        "files": files,
    }
    path = directory / f"{stem}.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


def load_fiber(manifest_path: str | Path) -> MassFiberState:
    manifest_path = Path(manifest_path)
    manifest = json.loads(manifest_path.read_text())
    slices = [read_snapshot(manifest_path.parent / name) for name in manifest["files"]]
    for phi, ms in zip(slices, manifest["slice_masses"]):
        if list(phi.masses) != [float(m) for m in ms]:
            raise SnapshotError("manifest masses disagree with slice snapshot")
    return MassFiberState(tuple(slices), tuple(manifest["zeta_box"]), manifest.get("seed"))
