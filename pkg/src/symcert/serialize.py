"""File formats shared by the library and the command line.

JSON schemas:
  group          ``{"order": n, "labels": [...], "cayley": [n*n ints, row major]}``
  action         ``{"group": <path or inline group>, "set_size": m, "table": [n*m ints]}``
  decomposition  ``{"factors": [[member indices], ...]}``
  representation ``{"group": <path or inline>, "dim": d, "field": "real"|"complex",
                    "matrices": nested lists; complex entries as [re, im] pairs}``
Latent tables are CSV with header ``state_id,z_0,...,z_{d-1}``; observations
are binary PGM (P5, maxval 255); reports are schema-versioned JSON.
"""

from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path

import numpy as np

from .actions import FiniteAction, validate_action
from .certify import CertificationReport, FittedLinearAction, MetricScores
from .groups import (
    DirectProductDecomposition,
    FiniteGroup,
    decomposition_from_subgroups,
    validate_group,
)
from .reps import (
    LinearRepresentation,
    SubspaceDecomposition,
    validate_representation,
)

SCHEMA_VERSION = 1


class FormatError(ValueError):
    pass


def save_json(payload: dict, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def _load_json(path: Path) -> dict:
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(payload, dict):
        raise FormatError(f"{path}: expected a JSON object")
    return payload


def sha256_file(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


# ---------------------------------------------------------------------------
# groups / actions / decompositions


def group_to_dict(group: FiniteGroup) -> dict:
    return {
        "order": group.order,
        "labels": list(group.labels),
        "cayley": [int(v) for row in group.cayley for v in row],
    }


def group_from_dict(payload: dict) -> FiniteGroup:
    try:
        order = int(payload["order"])
        cayley = payload["cayley"]
        labels = payload.get("labels")
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed group object: {exc}") from exc
    if len(cayley) != order * order:
        raise FormatError(
            f"group object claims order {order} but carries {len(cayley)} table entries"
        )
    table = np.asarray(cayley, dtype=np.intp).reshape(order, order)
    return validate_group(table, labels)


def save_group(group: FiniteGroup, path: str | Path) -> None:
    save_json(group_to_dict(group), path)


def load_group(path: str | Path) -> FiniteGroup:
    return group_from_dict(_load_json(Path(path)))


def _resolve_group(ref: object, base: Path) -> FiniteGroup:
    if isinstance(ref, str):
        return load_group((base / ref) if not Path(ref).is_absolute() else Path(ref))
    if isinstance(ref, dict):
        return group_from_dict(ref)
    raise FormatError("the 'group' field must be a path or an inline group object")


def save_action(
    action: FiniteAction, path: str | Path, group_ref: str | None = None
) -> None:
    payload = {
        "group": group_ref if group_ref is not None else group_to_dict(action.group),
        "set_size": action.set_size,
        "table": [int(v) for row in action.table for v in row],
    }
    save_json(payload, path)


def load_action(path: str | Path) -> FiniteAction:
    p = Path(path)
    payload = _load_json(p)
    try:
        group = _resolve_group(payload["group"], p.parent)
        set_size = int(payload["set_size"])
        flat = payload["table"]
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"{p}: malformed action object: {exc}") from exc
    if len(flat) != group.order * set_size:
        raise FormatError(f"{p}: table length does not match order x set_size")
    table = np.asarray(flat, dtype=np.intp).reshape(group.order, set_size)
    return validate_action(group, table)


def save_decomposition(decomposition: DirectProductDecomposition, path: str | Path) -> None:
    save_json(
        {"factors": [list(f.members) for f in decomposition.factors]}, path
    )


def load_decomposition(
    path: str | Path, parent: FiniteGroup
) -> DirectProductDecomposition:
    payload = _load_json(Path(path))
    factors = payload.get("factors")
    if not isinstance(factors, list) or not factors:
        raise FormatError(f"{path}: expected a non-empty 'factors' list")
    return decomposition_from_subgroups(parent, factors)


# ---------------------------------------------------------------------------
# representations


def representation_to_dict(rep: LinearRepresentation, group_ref: str | None = None) -> dict:
    if rep.field == "complex":
        mats = np.stack([rep.matrices.real, rep.matrices.imag], axis=-1)
    else:
        mats = rep.matrices
    return {
        "group": group_ref if group_ref is not None else group_to_dict(rep.group),
        "dim": rep.dim,
        "field": rep.field,
        "matrices": mats.tolist(),
    }


def save_representation(
    rep: LinearRepresentation, path: str | Path, group_ref: str | None = None
) -> None:
    save_json(representation_to_dict(rep, group_ref), path)


def load_representation(path: str | Path, tol_rep: float | None = None) -> LinearRepresentation:
    p = Path(path)
    payload = _load_json(p)
    try:
        group = _resolve_group(payload["group"], p.parent)
        dim = int(payload["dim"])
        field = payload["field"]
        raw = np.asarray(payload["matrices"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"{p}: malformed representation object: {exc}") from exc
    if field == "complex":
        if raw.shape != (group.order, dim, dim, 2):
            raise FormatError(f"{p}: complex matrices must have shape (n, d, d, 2)")
        mats = raw[..., 0] + 1j * raw[..., 1]
    elif field == "real":
        if raw.shape != (group.order, dim, dim):
            raise FormatError(f"{p}: real matrices must have shape (n, d, d)")
        mats = raw
    else:
        raise FormatError(f"{p}: unknown field {field!r}")
    kwargs = {} if tol_rep is None else {"tol_rep": tol_rep}
    return validate_representation(group, mats, field=field, **kwargs)


# ---------------------------------------------------------------------------
# latent tables (CSV)


def save_latent_table(vectors: np.ndarray, path: str | Path) -> None:
    vec = np.asarray(vectors, dtype=float)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["state_id"] + [f"z_{k}" for k in range(vec.shape[1])])
        for i, row in enumerate(vec):
            writer.writerow([i] + [repr(float(v)) for v in row])


def load_latent_table(path: str | Path) -> np.ndarray:
    p = Path(path)
    with open(p, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise FormatError(f"{p}: empty table") from None
        if len(header) < 2 or header[0] != "state_id" or header[1:] != [
            f"z_{k}" for k in range(len(header) - 1)
        ]:
            raise FormatError(f"{p}: expected header state_id,z_0,...,z_d-1")
        dim = len(header) - 1
        rows: dict[int, list[float]] = {}
        for line in reader:
            if not line:
                continue
            if len(line) != dim + 1:
                raise FormatError(f"{p}: row has {len(line)} fields, expected {dim + 1}")
            try:
                sid = int(line[0])
                vals = [float(v) for v in line[1:]]
            except ValueError as exc:
                raise FormatError(f"{p}: {exc}") from exc
            if sid in rows:
                raise FormatError(f"{p}: duplicate state_id {sid}")
            rows[sid] = vals
    if not rows or sorted(rows) != list(range(len(rows))):
        raise FormatError(f"{p}: state ids must cover 0..{len(rows) - 1} exactly once")
    return np.asarray([rows[i] for i in range(len(rows))], dtype=float)


# ---------------------------------------------------------------------------
# PGM observations


def encode_pgm(pixels: np.ndarray) -> bytes:
    img = np.asarray(pixels, dtype=np.uint8)
    if img.ndim != 2:
        raise FormatError("PGM encoding expects a 2-d grayscale array")
    header = f"P5\n{img.shape[1]} {img.shape[0]}\n255\n".encode("ascii")
    return header + img.tobytes()


def write_pgm(path: str | Path, pixels: np.ndarray) -> None:
    Path(path).write_bytes(encode_pgm(pixels))


def read_pgm(path: str | Path) -> np.ndarray:
    data = Path(path).read_bytes()
    if not data.startswith(b"P5"):
        raise FormatError(f"{path}: not a binary PGM file")
    fields: list[bytes] = []
    pos = 2
    while len(fields) < 3:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos : pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        fields.append(data[start:pos])
    pos += 1  # single whitespace after maxval
    width, height, maxval = (int(f) for f in fields)
    if maxval != 255:
        raise FormatError(f"{path}: expected maxval 255, got {maxval}")
    body = data[pos : pos + width * height]
    if len(body) != width * height:
        raise FormatError(f"{path}: truncated pixel data")
    return np.frombuffer(body, dtype=np.uint8).reshape(height, width)


# ---------------------------------------------------------------------------
# certification reports


def _subspace_to_dict(dec: SubspaceDecomposition) -> dict:
    blocks = []
    for basis, assigned in zip(dec.blocks, dec.assignments):
        entry = {
            "dimension": int(basis.shape[1]),
            "assignment": "trivial" if assigned is None else int(assigned),
            "basis": np.asarray(basis).real.tolist()
            if not np.iscomplexobj(basis)
            else np.stack([basis.real, basis.imag], axis=-1).tolist(),
        }
        blocks.append(entry)
    return {"blocks": blocks}


def _fit_to_dict(fit: FittedLinearAction) -> dict:
    gens = {
        str(g): fit.matrices[g].tolist() for g in fit.generator_ids
    }
    return {
        "source": fit.source,
        "rank": fit.rank,
        "f_scale": fit.f_scale,
        "equivariance_residual": fit.equivariance_residual,
        "equivariance_residual_relative": fit.equivariance_residual_relative,
        "homomorphism_residual": fit.homomorphism_residual,
        "generator_ids": list(fit.generator_ids),
        "generator_matrices": gens,
    }


def _metrics_to_dict(metrics: MetricScores) -> dict:
    return {
        "modularity": [None if v is None else float(v) for v in metrics.modularity],
        "dropped_dimensions": list(metrics.dropped_dimensions),
        "compactness": list(metrics.compactness),
        "explicitness": metrics.explicitness,
    }


def report_to_dict(report: CertificationReport) -> dict:
    return {
        "schema": SCHEMA_VERSION,
        "well_defined": report.well_defined,
        "collisions": [list(c) for c in report.collisions],
        "ill_defined_witness": (
            None
            if report.ill_defined_witness is None
            else list(report.ill_defined_witness)
        ),
        "num_states": report.num_states,
        "latent_dim": report.latent_dim,
        "f_scale": report.f_scale,
        "equivariance_residual": report.equivariance_residual,
        "linear_fit": None if report.linear_fit is None else _fit_to_dict(report.linear_fit),
        "linear_fit_passed": report.linear_fit_passed,
        "linear_fit_failure": report.linear_fit_failure,
        "subspace_blocks": (
            None
            if report.subspace_blocks is None
            else _subspace_to_dict(report.subspace_blocks)
        ),
        "coordinate_assignment": [
            None if a is None else int(a) for a in report.coordinate_assignment
        ],
        "sensitivities": np.asarray(report.sensitivities).tolist(),
        "verdict_disentangled": report.verdict_disentangled,
        "verdict_linear_disentangled": report.verdict_linear_disentangled,
        "metrics": _metrics_to_dict(report.metrics),
        "tolerances": report.tolerances,
    }


def save_report(report: CertificationReport, path: str | Path) -> None:
    save_json(report_to_dict(report), path)
