"""Deterministic writers: VTK legacy ASCII, CSV tables, manifest, PNG.

Everything numeric goes through one %.17g formatter so identical runs
produce byte-identical files.  Only the manifest carries a timestamp.
"""

from __future__ import annotations

import hashlib
import os
from datetime import datetime, timezone

import numpy as np

from .errors import ConfigurationError
from .fields import ScalarField2D, VectorField2D


def _fmt(x):
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    return "%.17g" % float(x)


def _vtk_header(grid, title):
    return "\n".join([
        "# vtk DataFile Version 3.0",
        title,
        "ASCII",
        "DATASET STRUCTURED_POINTS",
        f"DIMENSIONS {grid.nx} {grid.ny} 1",
        f"ORIGIN {_fmt(grid.xmin)} {_fmt(grid.ymin)} 0",
        f"SPACING {_fmt(grid.hx)} {_fmt(grid.hy)} 1",
        f"POINT_DATA {grid.nx * grid.ny}",
    ])


def write_vtk_scalar(path, field: ScalarField2D, name):
    lines = [_vtk_header(field.grid, name),
             f"SCALARS {name} double 1",
             "LOOKUP_TABLE default"]
    lines.extend(_fmt(v) for v in field.values.ravel(order="C"))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def write_vtk_vector(path, vec: VectorField2D, name):
    lines = [_vtk_header(vec.grid, name), f"VECTORS {name} double"]
    v1 = vec.x1.values.ravel(order="C")
    v2 = vec.x2.values.ravel(order="C")
    lines.extend(f"{_fmt(a)} {_fmt(b)} 0" for a, b in zip(v1, v2))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def write_table_csv(path, header, rows):
    """Generic CSV: header list + row tuples, x-fastest convention upstream."""
    out = [",".join(header)]
    out.extend(",".join(_fmt(v) for v in row) for row in rows)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(out) + "\n")


def _node_rows(grid):
    x, y = grid.x, grid.y
    for j in range(grid.ny):
        for i in range(grid.nx):
            yield x[i], y[j]


def write_field_csv(path, field: ScalarField2D, name):
    rows = ((x, y, v) for (x, y), v in
            zip(_node_rows(field.grid), field.values.ravel(order="C")))
    write_table_csv(path, ["x", "y", name], rows)


def write_vector_csv(path, vec: VectorField2D, name):
    rows = ((x, y, a, b) for (x, y), a, b in
            zip(_node_rows(vec.grid), vec.x1.values.ravel(order="C"),
                vec.x2.values.ravel(order="C")))
    write_table_csv(path, ["x", "y", f"{name}1", f"{name}2"], rows)


def write_quiver_csv(path, vec: VectorField2D, stride):
    grid = vec.grid
    stride = max(int(stride), 1)
    rows = []
    for j in range(0, grid.ny, stride):
        for i in range(0, grid.nx, stride):
            x, y = grid.node(i, j)
            rows.append((x, y, vec.x1.values[j, i], vec.x2.values[j, i]))
    write_table_csv(path, ["x", "y", "u1", "u2"], rows)


def write_manifest(outdir, command, config_text, filenames):
    """One line per emitted file with its digest plus the config hash."""
    cfg_hash = hashlib.sha256(config_text.encode("utf-8")).hexdigest()
    lines = [f"command={command}",
             f"config_sha256={cfg_hash}",
             f"created={datetime.now(timezone.utc).isoformat()}"]
    for name in sorted(filenames):
        with open(os.path.join(outdir, name), "rb") as fh:
            digest = hashlib.sha256(fh.read()).hexdigest()
        lines.append(f"{name} sha256={digest} config={cfg_hash[:12]}")
    with open(os.path.join(outdir, "manifest.txt"), "w", encoding="utf-8",
              newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def save_png(path, field: ScalarField2D, vec: VectorField2D = None,
             quiver_stride=8, title=None):
    """Optional raster heatmap with velocity arrows; needs matplotlib."""
    try:
        import matplotlib
    except ImportError:
        raise ConfigurationError(
            "png output requested but matplotlib is not installed; "
            "install the 'plots' extra") from None
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    grid = field.grid
    X, Y = grid.meshes()
    fig, ax = plt.subplots(figsize=(6.0, 5.0), dpi=120)
    im = ax.pcolormesh(X, Y, field.values, shading="auto", cmap="RdBu_r")
    fig.colorbar(im, ax=ax)
    if vec is not None:
        s = max(int(quiver_stride), 1)
        ax.quiver(X[::s, ::s], Y[::s, ::s],
                  vec.x1.values[::s, ::s], vec.x2.values[::s, ::s],
                  color="black", scale_units="xy", angles="xy")
    ax.set_xlabel("x1")
    ax.set_ylabel("x2")
    ax.set_aspect("equal")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, metadata={"Software": None})
    plt.close(fig)
