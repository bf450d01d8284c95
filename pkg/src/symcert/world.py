"""A wrap-around grid world with one movable, recolorable object.

States are triples ``(x, y, c)`` on an ``N x N`` grid with ``N`` colors; the
symmetry group is the triple product of cyclic shift groups, acting by
componentwise wrap-around steps.  Rendering is deterministic and bit-exact:
the object fills one grid cell with a grayscale intensity keyed to its color.

Two analytic latent tables are provided: the unit-circle embedding, whose
induced action is exactly linear (block rotations), and the plain coordinate
embedding, whose induced wrap-around action is not.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .actions import FiniteAction, ProductStructure, validate_action
from .groups import (
    DirectProductDecomposition,
    FiniteGroup,
    decomposition_from_subgroups,
    validate_group,
)


class WorldError(ValueError):
    pass


class ZeroScaleError(WorldError):
    pass


class IoFailureError(WorldError):
    pass


def default_palette(n: int) -> tuple[int, ...]:
    return tuple(int(round(255 * (c + 1) / n)) for c in range(n))


@dataclass(frozen=True)
class GridWorldSpec:
    """Grid size, pixels per cell, and the grayscale palette (one entry per color)."""

    n: int
    cell_pixels: int = 8
    palette: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if self.n < 2:
            raise WorldError(f"grid size must be at least 2, got {self.n}")
        if self.cell_pixels < 1:
            raise WorldError("cell_pixels must be positive")
        if not self.palette:
            object.__setattr__(self, "palette", default_palette(self.n))
        if len(self.palette) != self.n:
            raise WorldError(f"palette must have {self.n} entries")
        prev = -1
        for v in self.palette:
            if not prev < v <= 255:
                raise WorldError("palette values must be strictly increasing in 0..255")
            prev = v


@dataclass(frozen=True)
class WorldState:
    x: int
    y: int
    c: int


@dataclass(frozen=True, eq=False)
class Observation:
    width: int
    height: int
    pixels: np.ndarray


def state_index(n: int, w: WorldState) -> int:
    return (w.x * n + w.y) * n + w.c


def state_at(n: int, index: int) -> WorldState:
    x, r = divmod(int(index), n * n)
    y, c = divmod(r, n)
    return WorldState(x=x, y=y, c=c)


def all_states(n: int) -> list[WorldState]:
    return [state_at(n, i) for i in range(n**3)]


def world_group(
    n: int,
) -> tuple[FiniteGroup, DirectProductDecomposition, FiniteAction]:
    """The shift group of the grid world, its three-factor decomposition, and
    its action on the states.

    States and group elements share the lexicographic ``(x, y, c)`` indexing,
    so the action table coincides with the multiplication table (the group
    acts on the state set exactly as it acts on itself).
    """
    if n < 2:
        raise WorldError(f"grid size must be at least 2, got {n}")
    size = n**3
    idx = np.arange(size)
    x, r = divmod(idx, n * n)
    y, c = divmod(r, n)
    cay = (
        ((x[:, None] + x[None, :]) % n) * n * n
        + ((y[:, None] + y[None, :]) % n) * n
        + (c[:, None] + c[None, :]) % n
    )
    labels = [f"({x[i]},{y[i]},{c[i]})" for i in range(size)]
    group = validate_group(cay, labels)
    factors = [
        [v * n * n for v in range(n)],
        [v * n for v in range(n)],
        list(range(n)),
    ]
    decomposition = decomposition_from_subgroups(group, factors)
    action = validate_action(group, cay)
    return group, decomposition, action


def world_product_structure(n: int) -> ProductStructure:
    """The canonical ``(x, y, c)`` labelling of the state indices."""
    return ProductStructure.lexicographic((n, n, n))


def apply_world_action(n: int, g: int, w: WorldState) -> WorldState:
    """Apply element ``g`` (a displacement triple) by componentwise wrap-around."""
    d = state_at(n, g)
    return WorldState((w.x + d.x) % n, (w.y + d.y) % n, (w.c + d.c) % n)


def generator_elements(n: int) -> tuple[int, int, int]:
    """Element indices of the unit steps along x, y, and color."""
    return (n * n, n, 1)


def render(spec: GridWorldSpec, w: WorldState) -> Observation:
    """Draw the state: black background, the cell at ``(x, y)`` filled with
    the palette intensity of color ``c``.  ``(0, 0)`` is the top-left cell;
    x selects the column and y the row."""
    size = spec.n * spec.cell_pixels
    img = np.zeros((size, size), dtype=np.uint8)
    cp = spec.cell_pixels
    img[w.y * cp : (w.y + 1) * cp, w.x * cp : (w.x + 1) * cp] = spec.palette[w.c]
    img.setflags(write=False)
    return Observation(width=size, height=size, pixels=img)


def canonical_embedding(n: int, w: WorldState) -> np.ndarray:
    """Unit-circle latent: one complex phase per coordinate."""
    return np.exp(2j * np.pi * np.array([w.x, w.y, w.c], dtype=float) / n)


def canonical_embedding_real(n: int, w: WorldState) -> np.ndarray:
    """The same latent over the reals, interleaving (Re, Im) per coordinate."""
    z = canonical_embedding(n, w)
    out = np.empty(6, dtype=float)
    out[0::2] = z.real
    out[1::2] = z.imag
    return out


def canonical_complex_table(n: int) -> np.ndarray:
    idx = np.arange(n**3)
    x, r = divmod(idx, n * n)
    y, c = divmod(r, n)
    return np.exp(2j * np.pi * np.stack([x, y, c], axis=1) / n)


def canonical_table(n: int) -> np.ndarray:
    """Real 6-column latent table covering every state, in state-index order."""
    z = canonical_complex_table(n)
    out = np.empty((n**3, 6), dtype=float)
    out[:, 0::2] = z.real
    out[:, 1::2] = z.imag
    return out


def canonical_linear_action(n: int, g: int) -> np.ndarray:
    """The 6x6 block-diagonal rotation matrix of element ``g``: one 2x2
    rotation per coordinate plane, by the element's displacement angle."""
    d = state_at(n, g)
    out = np.zeros((6, 6), dtype=float)
    for k, step in enumerate((d.x, d.y, d.c)):
        t = 2.0 * np.pi * step / n
        out[2 * k : 2 * k + 2, 2 * k : 2 * k + 2] = [
            [np.cos(t), -np.sin(t)],
            [np.sin(t), np.cos(t)],
        ]
    return out


def canonical_action_matrices(n: int) -> np.ndarray:
    """Stack of :func:`canonical_linear_action` over all elements."""
    idx = np.arange(n**3)
    x, r = divmod(idx, n * n)
    y, c = divmod(r, n)
    out = np.zeros((n**3, 6, 6), dtype=float)
    for k, steps in enumerate((x, y, c)):
        t = 2.0 * np.pi * steps / n
        out[:, 2 * k, 2 * k] = np.cos(t)
        out[:, 2 * k, 2 * k + 1] = -np.sin(t)
        out[:, 2 * k + 1, 2 * k] = np.sin(t)
        out[:, 2 * k + 1, 2 * k + 1] = np.cos(t)
    return out


def coordinate_embedding(
    n: int, w: WorldState, scales: tuple[float, float, float] = (1.0, 1.0, 1.0)
) -> np.ndarray:
    """Scaled raw coordinates; injective, but its induced action wraps around
    and therefore is not linear."""
    if any(s == 0 for s in scales):
        raise ZeroScaleError("all scales must be nonzero")
    return np.array([scales[0] * w.x, scales[1] * w.y, scales[2] * w.c], dtype=float)


def coordinate_table(
    n: int, scales: tuple[float, float, float] = (1.0, 1.0, 1.0)
) -> np.ndarray:
    if any(s == 0 for s in scales):
        raise ZeroScaleError("all scales must be nonzero")
    idx = np.arange(n**3)
    x, r = divmod(idx, n * n)
    y, c = divmod(r, n)
    return np.stack([scales[0] * x, scales[1] * y, scales[2] * c], axis=1).astype(float)


def export_dataset(spec: GridWorldSpec, directory: str | Path, workers: int = 1) -> dict:
    """Write every observation as a PGM plus the state, transition, group,
    action, and decomposition files, and a manifest with SHA-256 hashes.

    Output is bit-exact across runs.  Returns the manifest dictionary; the
    manifest file itself lists every other file, sorted by name.
    """
    from . import serialize

    out = Path(directory)
    try:
        out.mkdir(parents=True, exist_ok=True)
        group, decomposition, action = world_group(spec.n)
        size = spec.n**3
        width = len(str(size - 1))
        names: list[str] = []

        def render_one(i: int) -> bytes:
            return serialize.encode_pgm(render(spec, state_at(spec.n, i)).pixels)

        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                payloads = list(pool.map(render_one, range(size)))
        else:
            payloads = [render_one(i) for i in range(size)]
        for i, payload in enumerate(payloads):
            name = f"obs_{i:0{width}d}.pgm"
            (out / name).write_bytes(payload)
            names.append(name)

        lines = ["state_id,x,y,c"]
        for i in range(size):
            w = state_at(spec.n, i)
            lines.append(f"{i},{w.x},{w.y},{w.c}")
        (out / "states.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
        names.append("states.csv")

        lines = ["state_id,element_id,next_state_id"]
        for i in range(size):
            for g in generator_elements(spec.n):
                lines.append(f"{i},{g},{action.table[g][i]}")
        (out / "transitions.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
        names.append("transitions.csv")

        serialize.save_group(group, out / "group.json")
        names.append("group.json")
        serialize.save_action(action, out / "action.json", group_ref="group.json")
        names.append("action.json")
        serialize.save_decomposition(decomposition, out / "decomposition.json")
        names.append("decomposition.json")

        manifest = {
            "schema": 1,
            "n": spec.n,
            "cell_pixels": spec.cell_pixels,
            "palette": list(spec.palette),
            "states": size,
            "files": [
                {
                    "path": name,
                    "bytes": (out / name).stat().st_size,
                    "sha256": serialize.sha256_file(out / name),
                }
                for name in sorted(names)
            ],
        }
        serialize.save_json(manifest, out / "manifest.json")
        return manifest
    except OSError as exc:
        raise IoFailureError(f"failed writing dataset to {out}: {exc}") from exc
