"""Command line interface.

Subcommands: ``world gen``, ``group validate``, ``group decompose``,
``action check``, ``rep validate``, ``rep certify``, ``certify``, ``demo``.

Exit codes: 0 = success / disentangled, 2 = invalid input, 3 = valid input
but entangled.  All numeric output is printed with 12 significant digits.
``SYMCERT_THREADS`` caps internal parallelism (0 = auto, unset = sequential).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import serialize
from .actions import ActionError, is_disentangled_action, is_free, is_transitive, orbits, search_product_structure
from .certify import (
    TOL_EQ_ANALYTIC,
    TOL_EQ_IMPORTED,
    TOL_NL,
    CertifyError,
    CertificationReport,
    certify,
)
from .groups import (
    GroupTableError,
    cube_rotation_group,
    find_direct_decompositions,
    is_abelian,
)
from .reps import (
    RepresentationError,
    homomorphism_residual,
    is_disentangled_representation,
)
from .world import (
    GridWorldSpec,
    WorldError,
    canonical_action_matrices,
    canonical_table,
    coordinate_table,
    export_dataset,
    world_group,
)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_ENTANGLED = 3

_INPUT_ERRORS = (
    GroupTableError,
    ActionError,
    RepresentationError,
    CertifyError,
    WorldError,
    serialize.FormatError,
    OSError,
)


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def _workers() -> int:
    raw = os.environ.get("SYMCERT_THREADS")
    if raw is None:
        return 1
    try:
        value = int(raw)
    except ValueError:
        return 1
    if value == 0:
        return min(8, os.cpu_count() or 1)
    return max(1, value)


def _print_report(report: CertificationReport, out: str | None) -> None:
    payload = serialize.report_to_dict(report)
    text = json.dumps(payload, indent=2)
    print(text)
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text + "\n", encoding="utf-8")


def cmd_world_gen(args: argparse.Namespace) -> int:
    spec = GridWorldSpec(n=args.n, cell_pixels=args.cell_pixels)
    manifest = export_dataset(spec, args.out, workers=_workers())
    print(f"wrote {len(manifest['files'])} files to {args.out}")
    print(f"manifest: {Path(args.out) / 'manifest.json'}")
    return EXIT_OK


def cmd_group_validate(args: argparse.Namespace) -> int:
    group = serialize.load_group(args.file)
    print(f"valid group of order {group.order}")
    print(f"identity: index {group.identity} ({group.labels[group.identity]})")
    print(f"abelian: {is_abelian(group)}")
    return EXIT_OK


def cmd_group_decompose(args: argparse.Namespace) -> int:
    group = serialize.load_group(args.file)
    decompositions = find_direct_decompositions(group, args.max_factors)
    print(f"{len(decompositions)} direct-product decompositions found")
    if not decompositions:
        print("indecomposable")
    payload = []
    for i, dec in enumerate(decompositions):
        orders = dec.factor_orders
        print(f"decomposition {i}: factor orders {orders}")
        for j, f in enumerate(dec.factors):
            print(f"  factor {j}: members {list(f.members)}")
        payload.append({"factor_orders": list(orders), "factors": [list(f.members) for f in dec.factors]})
    if args.out:
        serialize.save_json({"decompositions": payload}, args.out)
    return EXIT_OK


def cmd_action_check(args: argparse.Namespace) -> int:
    action = serialize.load_action(args.file)
    print(f"valid action: group order {action.group.order}, {action.set_size} points")
    print(f"orbits: {len(orbits(action))}")
    if not args.decomposition:
        return EXIT_OK
    decomposition = serialize.load_decomposition(args.decomposition, action.group)
    structure = search_product_structure(action, decomposition)
    if structure is None:
        print("no disentangling coordinate labelling found")
        return EXIT_ENTANGLED
    verdict, witness = is_disentangled_action(action, decomposition, structure)
    print(f"factor sizes: {structure.factor_sizes}")
    print(f"disentangled: {verdict}")
    if witness is not None:
        print(f"witness (element, point, coordinate): {witness}")
    return EXIT_OK if verdict else EXIT_ENTANGLED


def cmd_rep_validate(args: argparse.Namespace) -> int:
    kwargs = {} if args.tol_rep is None else {"tol_rep": args.tol_rep}
    rep = serialize.load_representation(args.file, **kwargs)
    residual, _ = homomorphism_residual(rep.group, rep.matrices)
    print(f"valid {rep.field} representation: dim {rep.dim}, group order {rep.group.order}")
    print(f"max homomorphism residual: {_fmt(residual)}")
    return EXIT_OK


def cmd_rep_certify(args: argparse.Namespace) -> int:
    rep = serialize.load_representation(args.file)
    decomposition = serialize.load_decomposition(args.decomposition, rep.group)
    kwargs = {} if args.tol_lin is None else {"tol_lin": args.tol_lin}
    cert = is_disentangled_representation(rep, decomposition, **kwargs)
    dims = cert.decomposition.dims
    assigned = [
        "trivial" if a is None else f"factor {a}" for a in cert.decomposition.assignments
    ]
    print(f"disentangled: {cert.disentangled}")
    print(f"block dims: {dims}")
    print(f"block assignments: {assigned}")
    print(f"dimension deficit: {cert.dimension_deficit}")
    print(f"basis min singular value: {_fmt(cert.basis_min_singular)}")
    return EXIT_OK if cert.disentangled else EXIT_ENTANGLED


def cmd_certify(args: argparse.Namespace) -> int:
    world_dir = Path(args.world)
    action = serialize.load_action(world_dir / "action.json")
    decomposition = serialize.load_decomposition(args.decomposition, action.group)
    vectors = serialize.load_latent_table(args.rep)
    target = None
    manifest_path = world_dir / "manifest.json"
    if manifest_path.exists():
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
        n = int(manifest["n"])
        if n**3 == action.set_size:
            target = canonical_table(n)
    report = certify(
        vectors,
        action,
        decomposition,
        tol_eq=args.tol_eq,
        tol_nl=args.tol_nl,
        explicitness_target=target,
    )
    _print_report(report, args.out)
    return EXIT_OK if report.verdict_disentangled else EXIT_ENTANGLED


def _demo_header(n: int):
    group, decomposition, action = world_group(n)
    print(f"grid world N={n}: {action.set_size} states, group order {group.order}")
    print(f"action free: {is_free(action)}, transitive: {is_transitive(action)}")
    print(f"factor orders: {decomposition.factor_orders}")
    return group, decomposition, action


def _print_verdicts(report: CertificationReport) -> None:
    fit = report.linear_fit
    if fit is not None:
        print(f"equivariance residual: {_fmt(fit.equivariance_residual)}")
        print(
            "equivariance residual (relative): "
            f"{_fmt(fit.equivariance_residual_relative)}"
        )
        print(f"homomorphism residual: {_fmt(fit.homomorphism_residual)}")
    if report.subspace_blocks is not None:
        dims = report.subspace_blocks.dims
        assigned = report.subspace_blocks.assignments
        print(f"invariant blocks: dims {dims}, factors {assigned}")
    print(f"coordinate assignment: {report.coordinate_assignment}")
    print(
        f"verdict: disentangled={report.verdict_disentangled}, "
        f"linear={report.verdict_linear_disentangled}"
    )
    m = report.metrics
    mod = ["dropped" if v is None else _fmt(v) for v in m.modularity]
    print(f"modularity per dimension: {mod}")
    print(f"compactness per factor: {m.compactness}")
    if m.explicitness is not None:
        print(f"explicitness: {_fmt(m.explicitness)}")


def cmd_demo(args: argparse.Namespace) -> int:
    if args.which == "so3":
        group = cube_rotation_group()
        print(f"cube rotation group: order {group.order}, abelian: {is_abelian(group)}")
        decompositions = find_direct_decompositions(group, max_factors=4)
        print(f"{len(decompositions)} direct-product decompositions found")
        if not decompositions:
            print("the cube rotation group is direct-product-indecomposable")
        if args.out:
            outdir = Path(args.out)
            outdir.mkdir(parents=True, exist_ok=True)
            serialize.save_group(group, outdir / "cube_rotation_group.json")
            serialize.save_json(
                {"decompositions": len(decompositions)}, outdir / "search_result.json"
            )
        return EXIT_OK

    n = args.n
    rng = np.random.default_rng(args.seed)
    group, decomposition, action = _demo_header(n)
    if args.which == "linear-grid":
        print("certifying the unit-circle embedding with its rotation action")
        table = canonical_table(n)
        mats = canonical_action_matrices(n)
        report = certify(
            table,
            action,
            decomposition,
            tol_eq=TOL_EQ_ANALYTIC,
            z_matrices=mats,
            explicitness_target=table,
        )
        _print_verdicts(report)
        # seeded invariance spot-check: orthogonal change of latent basis
        q, _ = np.linalg.qr(rng.normal(size=(6, 6)))
        rotated = certify(
            table @ q.T,
            action,
            decomposition,
            tol_eq=TOL_EQ_ANALYTIC,
            z_matrices=np.einsum("ij,gjk,lk->gil", q, mats, q),
            explicitness_target=table,
        )
        print(
            "after seeded orthogonal conjugation: "
            f"disentangled={rotated.verdict_disentangled}, "
            f"linear={rotated.verdict_linear_disentangled}"
        )
    else:
        print("certifying the raw coordinate embedding")
        table = coordinate_table(n)
        report = certify(
            table,
            action,
            decomposition,
            tol_eq=TOL_EQ_ANALYTIC,
            explicitness_target=canonical_table(n),
        )
        _print_verdicts(report)
        # seeded invariance spot-check: nonzero per-dimension rescaling
        scales = rng.uniform(0.5, 2.0, size=3) * rng.choice([-1.0, 1.0], size=3)
        rescaled = certify(
            table * scales,
            action,
            decomposition,
            tol_eq=TOL_EQ_ANALYTIC,
            explicitness_target=canonical_table(n),
        )
        print(
            "after seeded per-dimension rescaling: "
            f"disentangled={rescaled.verdict_disentangled}, "
            f"linear={rescaled.verdict_linear_disentangled}"
        )
    if args.out:
        outdir = Path(args.out)
        outdir.mkdir(parents=True, exist_ok=True)
        serialize.save_latent_table(table, outdir / "table.csv")
        serialize.save_report(report, outdir / "report.json")
    print("report:")
    print(json.dumps(serialize.report_to_dict(report), indent=2))
    return EXIT_OK if report.verdict_disentangled else EXIT_ENTANGLED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="symcert",
        description="Certify symmetry structure of groups, actions, and latent tables.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    world = sub.add_parser("world", help="grid-world dataset tools")
    world_sub = world.add_subparsers(dest="world_command", required=True)
    gen = world_sub.add_parser("gen", help="render every state and write the dataset")
    gen.add_argument("--n", type=int, required=True, help="grid / color cycle size")
    gen.add_argument("--out", required=True, help="output directory")
    gen.add_argument("--cell-pixels", type=int, default=8)
    gen.set_defaults(func=cmd_world_gen)

    group = sub.add_parser("group", help="group table tools")
    group_sub = group.add_subparsers(dest="group_command", required=True)
    gval = group_sub.add_parser("validate", help="check the group axioms on a table")
    gval.add_argument("file")
    gval.set_defaults(func=cmd_group_validate)
    gdec = group_sub.add_parser("decompose", help="search direct-product decompositions")
    gdec.add_argument("file")
    gdec.add_argument("--max-factors", type=int, default=None)
    gdec.add_argument("--out", default=None)
    gdec.set_defaults(func=cmd_group_decompose)

    action = sub.add_parser("action", help="group action tools")
    action_sub = action.add_subparsers(dest="action_command", required=True)
    acheck = action_sub.add_parser("check", help="validate an action table")
    acheck.add_argument("file")
    acheck.add_argument("--decomposition", default=None)
    acheck.set_defaults(func=cmd_action_check)

    rep = sub.add_parser("rep", help="linear representation tools")
    rep_sub = rep.add_subparsers(dest="rep_command", required=True)
    rval = rep_sub.add_parser("validate", help="check the representation axioms")
    rval.add_argument("file")
    rval.add_argument("--tol-rep", type=float, default=None)
    rval.set_defaults(func=cmd_rep_validate)
    rcert = rep_sub.add_parser("certify", help="projector-based disentanglement check")
    rcert.add_argument("file")
    rcert.add_argument("--decomposition", required=True)
    rcert.add_argument("--tol-lin", type=float, default=None)
    rcert.set_defaults(func=cmd_rep_certify)

    cert = sub.add_parser("certify", help="certify a latent table against a world")
    cert.add_argument("--world", required=True, help="directory written by 'world gen'")
    cert.add_argument("--rep", required=True, help="latent table CSV")
    cert.add_argument("--decomposition", required=True)
    cert.add_argument("--tol-eq", type=float, default=TOL_EQ_IMPORTED)
    cert.add_argument("--tol-nl", type=float, default=TOL_NL)
    cert.add_argument("--out", default=None, help="also write the report JSON here")
    cert.set_defaults(func=cmd_certify)

    demo = sub.add_parser("demo", help="rebuild and certify the worked examples")
    demo.add_argument("which", choices=["grid", "linear-grid", "so3"])
    demo.add_argument("--n", type=int, default=8)
    demo.add_argument("--seed", type=int, default=0)
    demo.add_argument("--out", default=None)
    demo.set_defaults(func=cmd_demo)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
