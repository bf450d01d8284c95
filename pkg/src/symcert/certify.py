"""Certify a latent table against a symmetric world.

Given one latent vector per world state and the group action on the states,
decide whether the induced action on the latents is well defined, measure
how far the action is from commuting with the table, fit the best linear
action per element by least squares, and issue two verdicts: disentangled
(per-factor structure exists) and linearly disentangled (the structure is
carried by a linear action).  Summary scores per latent dimension and per
factor round out the report.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .actions import FiniteAction, validate_action
from .groups import DirectProductDecomposition
from .reps import (
    TOL_LIN,
    DisentanglementCertificate,
    LinearRepresentation,
    SubspaceDecomposition,
    homomorphism_residual,
    is_disentangled_representation,
)

TOL_EQ_IMPORTED = 1e-6  # default for tables produced by an external learner
TOL_EQ_ANALYTIC = 1e-9  # default for analytically constructed tables
TOL_NL = 1e-3  # per-dimension relative cross-sensitivity threshold


class CertifyError(ValueError):
    pass


class SizeMismatchError(CertifyError):
    pass


class IllDefinedError(CertifyError):
    def __init__(self, witness: tuple[int, int, int]) -> None:
        self.witness = witness
        w1, w2, g = witness
        super().__init__(
            f"states {w1} and {w2} share a latent vector but element {g} separates them"
        )


class RankDeficientError(CertifyError):
    def __init__(self, rank: int, dim: int) -> None:
        self.rank = rank
        self.dim = dim
        super().__init__(f"latent vectors span only {rank} of {dim} dimensions")


@dataclass(frozen=True, eq=False)
class WellDefinedness:
    """Latent collision structure and whether the induced action respects it."""

    well_defined: bool
    state_class: np.ndarray
    collisions: tuple[tuple[int, ...], ...]
    witness: tuple[int, int, int] | None

    @property
    def num_classes(self) -> int:
        return int(self.state_class.max()) + 1


@dataclass(frozen=True, eq=False)
class InducedAction:
    """The action transported onto the deduplicated latent vectors."""

    action: FiniteAction
    state_class: np.ndarray
    class_vectors: np.ndarray


@dataclass(frozen=True, eq=False)
class FittedLinearAction:
    """One matrix per element acting on the latents, with its residuals.

    ``source`` records whether the matrices were fitted by least squares or
    supplied by the caller.  The equivariance residual is the worst mismatch
    ``|A_g f(w) - f(g.w)|`` over all elements and states; the homomorphism
    residual is the worst product defect over all element pairs, including
    each generator's power-to-identity relation.
    """

    matrices: np.ndarray
    generator_ids: tuple[int, ...]
    rank: int
    f_scale: float
    equivariance_residual: float
    equivariance_residual_relative: float
    homomorphism_residual: float
    source: str = "fitted"


@dataclass(frozen=True, eq=False)
class MetricScores:
    """Per-dimension purity, per-factor dimension counts, linear decodability.

    ``modularity[k]`` is ``1 - second/first`` over factor sensitivities of
    dimension ``k`` (``None`` for dropped dimensions); ``compactness[i]``
    counts dimensions assigned to factor ``i``; ``explicitness`` is the
    clamped R^2 of an affine map from the latents to the reference table.
    """

    modularity: tuple[float | None, ...]
    dropped_dimensions: tuple[int, ...]
    compactness: tuple[int, ...]
    explicitness: float | None


@dataclass(frozen=True, eq=False)
class CertificationReport:
    well_defined: bool
    collisions: tuple[tuple[int, ...], ...]
    ill_defined_witness: tuple[int, int, int] | None
    num_states: int
    latent_dim: int
    f_scale: float
    equivariance_residual: float
    linear_fit: FittedLinearAction | None
    linear_fit_passed: bool
    linear_fit_failure: str | None
    subspace_blocks: SubspaceDecomposition | None
    linear_certificate: DisentanglementCertificate | None
    coordinate_assignment: tuple[int | None, ...]
    sensitivities: np.ndarray
    verdict_disentangled: bool
    verdict_linear_disentangled: bool
    metrics: MetricScores
    tolerances: dict[str, float]


def _as_table(vectors: object, action: FiniteAction) -> np.ndarray:
    vec = np.asarray(vectors, dtype=float)
    if vec.ndim != 2:
        raise SizeMismatchError(f"expected a 2-d latent table, got shape {vec.shape}")
    if vec.shape[0] != action.set_size:
        raise SizeMismatchError(
            f"table has {vec.shape[0]} rows but the action has {action.set_size} states"
        )
    if not np.isfinite(vec).all():
        raise CertifyError("latent table contains non-finite entries")
    return vec


def _merge_classes(vec: np.ndarray, tol_eq: float) -> np.ndarray:
    """Union-find merge of states whose vectors coincide within ``tol_eq``,
    relabelled by first occurrence."""
    m = vec.shape[0]
    parent = np.arange(m)

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    sq = (vec * vec).sum(axis=1)
    tol2 = tol_eq * tol_eq
    chunk = 256
    for start in range(0, m, chunk):
        stop = min(start + chunk, m)
        d2 = sq[start:stop, None] + sq[None, :] - 2.0 * (vec[start:stop] @ vec.T)
        for i, j in np.argwhere(d2 <= tol2):
            a, b = find(start + int(i)), find(int(j))
            if a != b:
                parent[max(a, b)] = min(a, b)
    roots = np.array([find(i) for i in range(m)])
    ids = np.full(m, -1, dtype=np.intp)
    nxt = 0
    for i in range(m):
        r = roots[i]
        if ids[r] < 0:
            ids[r] = nxt
            nxt += 1
        ids[i] = ids[r]
    return ids


def check_well_defined(
    vectors: object, action: FiniteAction, tol_eq: float = TOL_EQ_IMPORTED
) -> WellDefinedness:
    """Group states with coinciding latents and test that every element maps
    merged states to merged states (otherwise no induced action exists).

    The witness on failure is ``(w1, w2, g)``: two merged states that element
    ``g`` sends to different classes.
    """
    vec = _as_table(vectors, action)
    ids = _merge_classes(vec, tol_eq)
    num = int(ids.max()) + 1
    members: list[list[int]] = [[] for _ in range(num)]
    for i, k in enumerate(ids):
        members[k].append(i)
    collisions = tuple(tuple(c) for c in members if len(c) > 1)
    arr = action.array
    witness = None
    for g in range(action.group.order):
        img = ids[arr[g]]
        first = np.full(num, -1, dtype=np.intp)
        first[ids] = img
        bad = first[ids] != img
        if bad.any():
            a = int(np.flatnonzero(bad)[0])
            cls = ids[a]
            mates = np.flatnonzero(ids == cls)
            b = int(mates[np.flatnonzero(img[mates] != img[a])[0]])
            witness = (min(a, b), max(a, b), g)
            break
    ids.setflags(write=False)
    return WellDefinedness(
        well_defined=witness is None,
        state_class=ids,
        collisions=collisions,
        witness=witness,
    )


def induce_action_on_image(
    vectors: object, action: FiniteAction, tol_eq: float = TOL_EQ_IMPORTED
) -> InducedAction:
    """Transport the action onto the deduplicated latent vectors.

    Requires well-definedness; both action axioms hold exactly on the class
    table by construction and are re-verified.
    """
    vec = _as_table(vectors, action)
    wd = check_well_defined(vec, action, tol_eq)
    if not wd.well_defined:
        assert wd.witness is not None
        raise IllDefinedError(wd.witness)
    ids = wd.state_class
    num = wd.num_classes
    first = np.full(num, -1, dtype=np.intp)
    for i in range(len(ids) - 1, -1, -1):
        first[ids[i]] = i
    table = ids[action.array[:, first]]
    induced = validate_action(action.group, table)
    class_vectors = vec[first].copy()
    class_vectors.setflags(write=False)
    return InducedAction(action=induced, state_class=ids, class_vectors=class_vectors)


def verify_equivariance(
    vectors: object, action: FiniteAction, z_action: np.ndarray | InducedAction
) -> float:
    """Worst-case norm of ``z_action(g)(f(w)) - f(g.w)`` over all ``(g, w)``.

    ``z_action`` is either a stack of matrices (one per element) or an
    induced point action on the deduplicated latents.
    """
    vec = _as_table(vectors, action)
    arr = action.array
    worst = 0.0
    if isinstance(z_action, InducedAction):
        ids = z_action.state_class
        for g in range(action.group.order):
            moved = z_action.class_vectors[z_action.action.array[g][ids]]
            diff = moved - vec[arr[g]]
            worst = max(worst, float(np.linalg.norm(diff, axis=1).max()))
        return worst
    mats = np.asarray(z_action, dtype=float)
    if mats.shape != (action.group.order, vec.shape[1], vec.shape[1]):
        raise SizeMismatchError(
            f"expected matrices of shape ({action.group.order}, d, d), got {mats.shape}"
        )
    for g in range(action.group.order):
        diff = vec @ mats[g].T - vec[arr[g]]
        worst = max(worst, float(np.linalg.norm(diff, axis=1).max()))
    return worst


def _action_residuals(
    vec: np.ndarray,
    action: FiniteAction,
    mats: np.ndarray,
    generator_ids: tuple[int, ...],
) -> tuple[float, float, float]:
    f_scale = float(np.linalg.norm(vec, axis=1).max())
    eq = verify_equivariance(vec, action, mats)
    hom, _ = homomorphism_residual(action.group, mats)
    for g in generator_ids:
        order = action.group.element_order(g)
        power = np.linalg.matrix_power(mats[g], order)
        hom = max(hom, float(np.sqrt(((power - np.eye(vec.shape[1])) ** 2).sum())))
    return f_scale, eq, hom


def default_generators(decomposition: DirectProductDecomposition) -> tuple[int, ...]:
    """One generator per factor: its smallest non-identity member."""
    e = decomposition.parent.identity
    out = []
    for f in decomposition.factors:
        non_id = [m for m in f.members if m != e]
        if non_id:
            out.append(non_id[0])
    return tuple(out)


def fit_linear_action(
    vectors: object, action: FiniteAction, generators: tuple[int, ...] = ()
) -> FittedLinearAction:
    """Least-squares matrix per element: ``A_g`` minimizing
    ``sum_w |A_g f(w) - f(g.w)|^2`` over the state-indexed table.

    Requires the latents to span their full dimension (the fit is otherwise
    not identifiable); raises :class:`RankDeficientError` with the achieved
    rank.
    """
    vec = _as_table(vectors, action)
    d = vec.shape[1]
    rank = int(np.linalg.matrix_rank(vec))
    if rank < d:
        raise RankDeficientError(rank, d)
    pinv = np.linalg.pinv(vec)
    targets = vec[action.array]  # (n, m, d)
    mats = np.einsum("am,gmb->gba", pinv, targets)
    mats = np.ascontiguousarray(mats)
    mats.setflags(write=False)
    f_scale, eq, hom = _action_residuals(vec, action, mats, generators)
    return FittedLinearAction(
        matrices=mats,
        generator_ids=tuple(generators),
        rank=rank,
        f_scale=f_scale,
        equivariance_residual=eq,
        equivariance_residual_relative=eq / f_scale if f_scale > 0 else 0.0,
        homomorphism_residual=hom,
        source="fitted",
    )


def given_linear_action(
    vectors: object,
    action: FiniteAction,
    matrices: object,
    generators: tuple[int, ...] = (),
) -> FittedLinearAction:
    """Wrap caller-supplied matrices with the same residual accounting as a
    fit.  No rank requirement: the matrices need not be identifiable from
    the table."""
    vec = _as_table(vectors, action)
    mats = np.ascontiguousarray(np.asarray(matrices, dtype=float))
    if mats.shape != (action.group.order, vec.shape[1], vec.shape[1]):
        raise SizeMismatchError(
            f"expected matrices of shape ({action.group.order}, d, d), got {mats.shape}"
        )
    mats.setflags(write=False)
    f_scale, eq, hom = _action_residuals(vec, action, mats, generators)
    return FittedLinearAction(
        matrices=mats,
        generator_ids=tuple(generators),
        rank=int(np.linalg.matrix_rank(vec)),
        f_scale=f_scale,
        equivariance_residual=eq,
        equivariance_residual_relative=eq / f_scale if f_scale > 0 else 0.0,
        homomorphism_residual=hom,
        source="provided",
    )


def sensitivity_matrix(
    vectors: object, action: FiniteAction, decomposition: DirectProductDecomposition
) -> np.ndarray:
    """``S[i, k]``: the largest change of latent dimension ``k`` under any
    member of factor ``i``, over all states.  Maxima rather than means: one
    violating transition is enough to entangle a dimension."""
    vec = _as_table(vectors, action)
    arr = action.array
    e = decomposition.parent.identity
    out = np.zeros((len(decomposition.factors), vec.shape[1]))
    for i, factor in enumerate(decomposition.factors):
        members = [m for m in factor.members if m != e]
        if not members:
            continue
        diffs = np.abs(vec[arr[members]] - vec[None, :, :])
        out[i] = diffs.max(axis=(0, 1))
    return out


def _coordinate_partition(
    sens: np.ndarray, tol_nl: float
) -> tuple[tuple[int | None, ...], bool]:
    """Assign each latent dimension to its most sensitive factor.

    A dimension with (relatively) no sensitivity at all is left unassigned.
    The partition is a disentanglement witness when every dimension's
    off-assigned sensitivity stays below ``tol_nl`` relative to its own peak.
    """
    k, d = sens.shape
    global_scale = float(sens.max()) if sens.size else 0.0
    assignment: list[int | None] = []
    ok = True
    for dim in range(d):
        col = sens[:, dim]
        peak = float(col.max())
        if global_scale == 0.0 or peak <= tol_nl * global_scale:
            assignment.append(None)
            continue
        best = int(col.argmax())
        assignment.append(best)
        off = float(np.delete(col, best).max()) if k > 1 else 0.0
        if off > tol_nl * peak:
            ok = False
    return tuple(assignment), ok


def _modularity(
    sens: np.ndarray, assignment: tuple[int | None, ...]
) -> tuple[float | None, ...]:
    out: list[float | None] = []
    for dim, assigned in enumerate(assignment):
        if assigned is None:
            out.append(None)
            continue
        col = np.sort(sens[:, dim])[::-1]
        second = float(col[1]) if col.size > 1 else 0.0
        out.append(1.0 - second / float(col[0]))
    return tuple(out)


def explicitness_score(vectors: object, target: object) -> float:
    """Clamped R^2 of the affine least-squares map from the latents onto the
    reference coordinates, pooled over all output dimensions."""
    vec = np.asarray(vectors, dtype=float)
    ref = np.asarray(target, dtype=float)
    if vec.shape[0] != ref.shape[0]:
        raise SizeMismatchError("latent table and reference table differ in length")
    design = np.hstack([vec, np.ones((vec.shape[0], 1))])
    sol, *_ = np.linalg.lstsq(design, ref, rcond=None)
    ss_res = float(((ref - design @ sol) ** 2).sum())
    ss_tot = float(((ref - ref.mean(axis=0)) ** 2).sum())
    if ss_tot == 0.0:
        return 1.0 if ss_res <= 1e-18 else 0.0
    return float(min(1.0, max(0.0, 1.0 - ss_res / ss_tot)))


def metric_scores(
    vectors: object,
    action: FiniteAction,
    decomposition: DirectProductDecomposition,
    tol_nl: float = TOL_NL,
    explicitness_target: object | None = None,
) -> MetricScores:
    """Per-dimension and per-factor summary scores for a latent table."""
    sens = sensitivity_matrix(vectors, action, decomposition)
    assignment, _ = _coordinate_partition(sens, tol_nl)
    modularity = _modularity(sens, assignment)
    compact = tuple(
        sum(1 for a in assignment if a == i) for i in range(len(decomposition.factors))
    )
    dropped = tuple(i for i, a in enumerate(assignment) if a is None)
    explicit = (
        explicitness_score(vectors, explicitness_target)
        if explicitness_target is not None
        else None
    )
    return MetricScores(
        modularity=modularity,
        dropped_dimensions=dropped,
        compactness=compact,
        explicitness=explicit,
    )


def certify(
    vectors: object,
    action: FiniteAction,
    decomposition: DirectProductDecomposition,
    tol_eq: float = TOL_EQ_IMPORTED,
    tol_nl: float = TOL_NL,
    tol_lin: float | None = None,
    z_matrices: object | None = None,
    generators: tuple[int, ...] | None = None,
    explicitness_target: object | None = None,
) -> CertificationReport:
    """Run the full pipeline and assemble the report.

    Well-definedness first; then the linear action (fitted by least squares,
    or the supplied ``z_matrices``).  When the linear action reproduces the
    table within ``tol_eq`` and multiplies consistently, the verdicts come
    from the projector certificate on its matrices; otherwise the fallback
    coordinate test assigns each latent dimension to its dominant factor and
    demands negligible cross-factor sensitivity.  A table with no induced
    action at all (ill defined) fails both verdicts.
    """
    vec = _as_table(vectors, action)
    d = vec.shape[1]
    if tol_lin is None:
        tol_lin = max(TOL_LIN, 10.0 * tol_eq)
    gens = default_generators(decomposition) if generators is None else tuple(generators)
    wd = check_well_defined(vec, action, tol_eq)

    fit: FittedLinearAction | None = None
    failure: str | None = None
    if z_matrices is not None:
        fit = given_linear_action(vec, action, z_matrices, gens)
    else:
        try:
            fit = fit_linear_action(vec, action, gens)
        except RankDeficientError as exc:
            failure = str(exc)

    passed = False
    if fit is not None:
        scale = max(1.0, fit.f_scale)
        mat_scale = max(1.0, float(np.abs(fit.matrices).max()))
        eq_ok = fit.equivariance_residual <= tol_eq * scale
        hom_ok = fit.homomorphism_residual <= tol_eq * mat_scale * mat_scale * d
        passed = bool(eq_ok and hom_ok)
        if not passed and failure is None:
            failure = (
                f"linear action misses the table (equivariance {fit.equivariance_residual:.3e},"
                f" homomorphism {fit.homomorphism_residual:.3e} at tol_eq {tol_eq:.1e})"
            )

    certificate: DisentanglementCertificate | None = None
    verdict_linear = False
    if passed and fit is not None:
        svals = np.linalg.svd(fit.matrices, compute_uv=False)
        if svals[:, -1].min() <= 1e-12:
            passed = False
            failure = "fitted action contains a singular matrix"
        else:
            rep = LinearRepresentation(
                group=action.group, dim=d, field="real", matrices=fit.matrices
            )
            certificate = is_disentangled_representation(rep, decomposition, tol_lin)
            verdict_linear = certificate.disentangled

    sens = sensitivity_matrix(vec, action, decomposition)
    assignment, nonlinear_ok = _coordinate_partition(sens, tol_nl)
    if passed:
        verdict = verdict_linear
    else:
        verdict = nonlinear_ok
    if not wd.well_defined:
        verdict = False
        verdict_linear = False

    modularity = _modularity(sens, assignment)
    compact = tuple(
        sum(1 for a in assignment if a == i) for i in range(len(decomposition.factors))
    )
    dropped = tuple(i for i, a in enumerate(assignment) if a is None)
    explicit = (
        explicitness_score(vec, explicitness_target)
        if explicitness_target is not None
        else None
    )
    metrics = MetricScores(
        modularity=modularity,
        dropped_dimensions=dropped,
        compactness=compact,
        explicitness=explicit,
    )

    if fit is not None:
        top_eq = fit.equivariance_residual
    else:
        top_eq = 0.0 if wd.well_defined else float("inf")
    sens_ro = sens.copy()
    sens_ro.setflags(write=False)
    return CertificationReport(
        well_defined=wd.well_defined,
        collisions=wd.collisions,
        ill_defined_witness=wd.witness,
        num_states=action.set_size,
        latent_dim=d,
        f_scale=float(np.linalg.norm(vec, axis=1).max()),
        equivariance_residual=top_eq,
        linear_fit=fit,
        linear_fit_passed=passed,
        linear_fit_failure=failure,
        subspace_blocks=certificate.decomposition if certificate else None,
        linear_certificate=certificate,
        coordinate_assignment=assignment,
        sensitivities=sens_ro,
        verdict_disentangled=bool(verdict),
        verdict_linear_disentangled=bool(verdict_linear),
        metrics=metrics,
        tolerances={"tol_eq": tol_eq, "tol_nl": tol_nl, "tol_lin": tol_lin},
    )
