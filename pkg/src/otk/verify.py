"""Theorem-verification harness: equality reports, the acceptance suite, and
deterministic JSON serialization.

The distance oracle here deliberately shares no code with the production
solver: it evaluates the objective from its definition and refines a coarse
lattice by compass search, so solver and oracle can cross-check each other.
"""

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .config import TOL_EQ, TOL_MEMBER, thread_count
from .errors import ConfigError, ConsistencyError
from .ranges import (
    membership_zero_in_convV,
    membership_zero_in_V,
    range_sample_to_csv,
    sample_V,
    v_block_formula_check,
    v_product_check,
)
from .solvers import (
    DistOptions,
    VarianceOptions,
    dist_objective_gradient,
    dist_to_scalars,
    chebyshev_radius_normal,
    max_variance,
)
from .tuples import (
    BlockSpec,
    FactorSpec,
    OperatorTuple,
    gallery,
    gen_commuting_normal,
    gen_doubly,
    gen_toeplitz,
    gram,
    is_doubly_commuting,
    shift,
    tuple_from_json_dict,
    tuple_norm,
    tuple_to_json_dict,
    variance,
    variance_gradient,
)

__all__ = [
    "EqualityReport",
    "InequalityReport",
    "SuiteConfig",
    "CriterionResult",
    "check_inequality",
    "check_equality",
    "toeplitz_section_sweep",
    "dist_oracle",
    "run_suite",
    "dumps_canonical",
    "save_tuple",
    "load_tuple",
]

TUPLE_CLASSES = (
    "doubly_commuting",
    "toeplitz_section",
    "commuting_normal",
    "commuting_small_dim",
    "d1",
    "general",
)


# ---------------------------------------------------------------------------
# canonical JSON: sorted keys, floats at 17 significant digits
# ---------------------------------------------------------------------------


def _jsonify(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonify(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonify(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if obj is None or isinstance(obj, str):
        return obj
    raise TypeError(f"cannot serialize {type(obj)} canonically")


def _dump_value(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if not math.isfinite(v):
            raise ValueError("non-finite float in canonical JSON")
        return format(v, ".17g")
    if isinstance(v, str):
        return json.dumps(v)
    if v is None:
        return "null"
    if isinstance(v, list):
        return "[" + ",".join(_dump_value(x) for x in v) + "]"
    if isinstance(v, dict):
        items = sorted(v.items())
        return "{" + ",".join(f"{json.dumps(k)}:{_dump_value(val)}" for k, val in items) + "}"
    raise TypeError(f"cannot serialize {type(v)}")


def dumps_canonical(obj) -> str:
    """Deterministic JSON: sorted keys, floats with 17 significant digits."""
    return _dump_value(_jsonify(obj))


def save_tuple(path, a: OperatorTuple) -> None:
    with open(path, "w") as fh:
        fh.write(dumps_canonical(tuple_to_json_dict(a)) + "\n")


def load_tuple(path) -> OperatorTuple:
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read tuple file {path}: {exc}") from exc
    return tuple_from_json_dict(obj)


# ---------------------------------------------------------------------------
# equality / inequality reports
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class InequalityReport:
    ok: bool
    dist2: float
    maxvar: float
    gap: float

    def to_dict(self):
        return {"ok": self.ok, "dist2": self.dist2, "maxvar": self.maxvar, "gap": self.gap}


@dataclass(frozen=True)
class EqualityReport:
    dist2: float
    maxvar: float
    gap: float
    gap_normalized: float
    equal: bool
    tuple_class: str
    tol_eq: float
    scale: float
    z0: np.ndarray
    witness_residual: float
    conv_membership_residual: float
    dist_converged: bool

    def to_dict(self):
        return {
            "dist2": self.dist2,
            "maxvar": self.maxvar,
            "gap": self.gap,
            "gap_normalized": self.gap_normalized,
            "equal": self.equal,
            "class": self.tuple_class,
            "tol_eq": self.tol_eq,
            "scale": self.scale,
            "z0": [[z.real, z.imag] for z in np.asarray(self.z0)],
            "witness_residual": self.witness_residual,
            "conv_membership_residual": self.conv_membership_residual,
            "dist_converged": self.dist_converged,
        }


def check_inequality(
    a: OperatorTuple,
    dist_opts: DistOptions = DistOptions(),
    var_opts: VarianceOptions = VarianceOptions(),
    tol: float = 1e-9,
) -> InequalityReport:
    """max variance <= dist^2 + tol; expected to hold for every tuple."""
    dr = dist_to_scalars(a, dist_opts)
    vr = max_variance(a, var_opts)
    gap = dr.dist2 - vr.value
    return InequalityReport(ok=bool(vr.value <= dr.dist2 + tol), dist2=dr.dist2, maxvar=vr.value, gap=gap)


def check_equality(
    a: OperatorTuple,
    expected_class: str = "general",
    tol_eq: float = TOL_EQ,
    dist_opts: DistOptions = DistOptions(),
    var_opts: VarianceOptions = VarianceOptions(),
    membership_restarts: int = 32,
) -> EqualityReport:
    """Run both solvers on the tuple (normalized to unit tuple norm), attach
    the 0-in-V witness for the optimally shifted tuple, and classify equality
    of dist^2 and max variance at tol_eq."""
    if expected_class not in TUPLE_CLASSES:
        raise ConfigError(f"unknown class {expected_class!r}; options: {TUPLE_CLASSES}")
    if expected_class == "doubly_commuting":
        rep = is_doubly_commuting(a)
        if not rep.ok:
            raise ConfigError(
                f"tuple declared doubly commuting, but commutator residual is {rep.max_residual:.3e}"
            )
    if expected_class == "d1" and a.d != 1:
        raise ConfigError(f"class d1 requires a single operator, got d={a.d}")

    tn = tuple_norm(a)
    if tn == 0.0:
        z0 = np.zeros(a.d, dtype=np.complex128)
        return EqualityReport(
            dist2=0.0,
            maxvar=0.0,
            gap=0.0,
            gap_normalized=0.0,
            equal=True,
            tuple_class=expected_class,
            tol_eq=tol_eq,
            scale=0.0,
            z0=z0,
            witness_residual=0.0,
            conv_membership_residual=0.0,
            dist_converged=True,
        )

    an = OperatorTuple(tuple(m / tn for m in a.matrices))
    dr = dist_to_scalars(an, dist_opts)
    vr = max_variance(an, var_opts)
    gap_norm = dr.dist2 - vr.value
    if gap_norm < -tol_eq:
        raise ConsistencyError(
            f"max variance {vr.value} exceeds dist^2 {dr.dist2} beyond tolerance"
        )
    a0n = shift(an, dr.z0)
    mem = membership_zero_in_V(a0n, restarts=membership_restarts, seed=dist_opts.seed)
    return EqualityReport(
        dist2=dr.dist2 * tn * tn,
        maxvar=vr.value * tn * tn,
        gap=gap_norm * tn * tn,
        gap_normalized=gap_norm,
        equal=bool(abs(gap_norm) <= tol_eq),
        tuple_class=expected_class,
        tol_eq=tol_eq,
        scale=tn,
        z0=dr.z0 * tn,
        witness_residual=mem.residual,
        conv_membership_residual=dr.certificate_residual,
        dist_converged=dr.converged,
    )


def toeplitz_section_sweep(symbols, n_list, tol_eq: float = TOL_EQ, **kwargs):
    """check_equality on finite Toeplitz sections for every n in ascending
    n_list; the per-n gap trend is surfaced, no convergence rate asserted."""
    ns = list(n_list)
    if ns != sorted(ns):
        raise ConfigError("n_list must be ascending")
    reports = []
    for n in ns:
        a = gen_toeplitz(symbols, n)
        reports.append(check_equality(a, expected_class="toeplitz_section", tol_eq=tol_eq, **kwargs))
    return reports


# ---------------------------------------------------------------------------
# independent distance oracle: coarse lattice + compass refinement
# ---------------------------------------------------------------------------


def _objective_from_definition(a: OperatorTuple, z: np.ndarray) -> float:
    eye = np.eye(a.n, dtype=np.complex128)
    m = np.zeros((a.n, a.n), dtype=np.complex128)
    for aj, zj in zip(a.matrices, z):
        s = aj - zj * eye
        m += s.conj().T @ s
    return float(np.linalg.eigvalsh(0.5 * (m + m.conj().T))[-1])


def dist_oracle(
    a: OperatorTuple,
    box: float = 2.0,
    lattice_step: float = 1.0,
    step0: float = 0.05,
    step_min: float = 1e-9,
    probes: int = 400,
    seed: int = 0,
):
    """Grid-plus-refinement oracle for min_z lambda_max(sum (A_j-z_j)*(A_j-z_j)).

    Evaluates the objective from its definition on a coarse lattice in
    [-box, box]^{2d}, compass-refines from the best lattice points down to
    step_min, and certifies the result with random probes around the
    minimizer. Returns (f_min, z_min, probe_certified).
    """
    d = a.d
    ticks = np.arange(-box, box + lattice_step / 2, lattice_step)
    grids = np.meshgrid(*([ticks] * (2 * d)), indexing="ij")
    lattice = np.stack([g.ravel() for g in grids], axis=1)

    def as_complex(v):
        return v[0::2] + 1j * v[1::2]

    values = np.array([_objective_from_definition(a, as_complex(v)) for v in lattice])
    order = np.argsort(values)
    starts = [lattice[i] for i in order[:3]]

    best_f = np.inf
    best_v = None
    dirs = []
    for j in range(2 * d):
        e = np.zeros(2 * d)
        e[j] = 1.0
        dirs.append(e.copy())
        dirs.append(-e)
    for v0 in starts:
        v = v0.copy()
        f = _objective_from_definition(a, as_complex(v))
        step = step0
        while step >= step_min:
            improved = False
            for e in dirs:
                cand = v + step * e
                fc = _objective_from_definition(a, as_complex(cand))
                if fc < f - 1e-15 * (1.0 + abs(f)):
                    v, f = cand, fc
                    improved = True
            if not improved:
                step *= 0.5
        if f < best_f:
            best_f, best_v = f, v

    rng = np.random.default_rng(seed)
    certified = True
    for radius in (1e-2, 1e-4, 1e-6):
        u = rng.standard_normal((probes, 2 * d))
        u /= np.linalg.norm(u, axis=1, keepdims=True)
        for row in u:
            fc = _objective_from_definition(a, as_complex(best_v + radius * row))
            if fc < best_f - 1e-10 * (1.0 + abs(best_f)):
                certified = False
    return best_f, as_complex(best_v), certified


# ---------------------------------------------------------------------------
# seeded instance generators
# ---------------------------------------------------------------------------


def _rng(seed, *tags) -> np.random.Generator:
    return np.random.default_rng([int(seed)] + [int(t) for t in tags])


def random_general_tuple(rng, n_max=16, d_max=4, n_min=2, d_min=1) -> OperatorTuple:
    n = int(rng.integers(n_min, n_max + 1))
    d = int(rng.integers(d_min, d_max + 1))
    mats = tuple(
        (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2.0 * n)
        for _ in range(d)
    )
    return OperatorTuple(mats)


def random_doubly_spec(rng, d_choices=(2, 3), max_blocks=3, p_max=3, n_cap=40) -> FactorSpec:
    d = int(rng.choice(d_choices))
    n_blocks = int(rng.integers(1, max_blocks + 1))
    blocks = []
    total = 0
    for _ in range(n_blocks):
        dims = tuple(int(rng.integers(1, p_max + 1)) for _ in range(d))
        size = int(np.prod(dims))
        if total + size > n_cap:
            dims = tuple(1 for _ in range(d))
            size = 1
        blocks.append(BlockSpec(dims))
        total += size
    return FactorSpec(tuple(blocks))


def random_diag_tuple(rng, n_max=32, d_max=4) -> OperatorTuple:
    n = int(rng.integers(2, n_max + 1))
    d = int(rng.integers(1, d_max + 1))
    pts = rng.standard_normal((n, d)) + 1j * rng.standard_normal((n, d))
    return gen_commuting_normal(pts)


def random_commuting_poly_tuple(rng, n_max=10, d_max=3, degree=3) -> OperatorTuple:
    """Commuting (generally non-normal) tuple: polynomials in one matrix."""
    n = int(rng.integers(2, n_max + 1))
    d = int(rng.integers(2, d_max + 1))
    m = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2.0 * n)
    mats = []
    for _ in range(d):
        coeffs = rng.standard_normal(degree + 1) + 1j * rng.standard_normal(degree + 1)
        out = np.zeros((n, n), dtype=np.complex128)
        power = np.eye(n, dtype=np.complex128)
        for c in coeffs:
            out += c * power
            power = power @ m
        mats.append(out / np.sqrt(degree + 1.0))
    return OperatorTuple(tuple(mats))


# ---------------------------------------------------------------------------
# acceptance criteria
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CriterionResult:
    name: str
    passed: bool
    details: dict

    def to_dict(self):
        return {"name": self.name, "passed": self.passed, "details": _jsonify(self.details)}


def _parallel(fn, items):
    workers = thread_count()
    if workers <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def criterion_pauli(config) -> CriterionResult:
    a = gallery("pauli")
    vr = max_variance(a, VarianceOptions(restarts=config.restarts, seed=config.seed))
    dr = dist_to_scalars(a, DistOptions(seed=config.seed))
    f_oracle, _, certified = dist_oracle(a, seed=config.seed)
    ok = (
        abs(vr.value - 2.0) <= 1e-6
        and abs(dr.dist2 - 3.0) <= 1e-6
        and abs(dr.dist2 - f_oracle) <= 1e-6
        and certified
        and dr.dist2 - vr.value > 0.0
    )
    return CriterionResult(
        "01_pauli_gallery",
        ok,
        {
            "maxvar": vr.value,
            "dist2": dr.dist2,
            "oracle": f_oracle,
            "oracle_certified": certified,
            "gap": dr.dist2 - vr.value,
        },
    )


def criterion_d2(config) -> CriterionResult:
    a = gallery("d2")
    vr = max_variance(a, VarianceOptions(restarts=config.restarts, seed=config.seed))
    dr = dist_to_scalars(a, DistOptions(seed=config.seed))
    f_oracle, _, certified = dist_oracle(a, seed=config.seed)
    ok = (
        abs(vr.value - 4.0 / 3.0) <= 1e-6
        and abs(dr.dist2 - f_oracle) <= 1e-6
        and abs(dr.dist2 - 25.0 / 16.0) <= 1e-6
        and certified
        and dr.dist2 >= 1.5 - 1e-9
    )
    return CriterionResult(
        "02_d2_gallery",
        ok,
        {
            "maxvar": vr.value,
            "dist2": dr.dist2,
            "oracle": f_oracle,
            "oracle_certified": certified,
            "lower_bound_3_over_2": dr.dist2 >= 1.5 - 1e-9,
        },
    )


def criterion_ex2(config) -> CriterionResult:
    a = gallery("ex2")
    dr = dist_to_scalars(a, DistOptions(seed=config.seed))
    vr = max_variance(a, VarianceOptions(restarts=config.restarts, seed=config.seed))
    z_err = float(np.linalg.norm(dr.z0 - np.array([1.0, 0.0])))
    a0 = shift(a, dr.z0)
    mem = membership_zero_in_convV(a0)
    sample = sample_V(a0, 512, seed=config.seed, boundary_dirs=64)
    # nonconvexity diagnostic: how far do midpoints of sampled points stray
    # from the sampled set itself (large = visibly nonconvex)
    pts = sample.points
    rng = _rng(config.seed, 3)
    idx = rng.integers(0, pts.shape[0], size=(256, 2))
    mids = 0.5 * (pts[idx[:, 0]] + pts[idx[:, 1]])
    from .ranges import embed_real, hausdorff_distance  # local import to avoid cycle confusion
    from scipy.spatial import cKDTree

    defect = float(np.max(cKDTree(embed_real(pts)).query(embed_real(mids))[0]))
    ok = (
        abs(dr.dist2 - 1.0) <= 1e-7
        and z_err <= 1e-7
        and abs(vr.value - 1.0) <= 1e-6
        and mem.is_member
        and mem.residual <= 1e-8
    )
    return CriterionResult(
        "03_ex2_gallery",
        ok,
        {
            "dist2": dr.dist2,
            "z0_error": z_err,
            "maxvar": vr.value,
            "conv_membership_residual": mem.residual,
            "nonconvexity_defect_diagnostic": defect,
        },
    )


def criterion_doubly(config) -> CriterionResult:
    def one(i):
        rng = _rng(config.seed, 4, i)
        spec = random_doubly_spec(rng)
        conjugate = bool(rng.integers(0, 2))
        tup, _ = gen_doubly(spec, seed=int(rng.integers(0, 2**31)), conjugate=conjugate)
        rep = check_equality(
            tup,
            expected_class="doubly_commuting",
            tol_eq=config.tol_eq,
            dist_opts=DistOptions(seed=config.seed + i),
            var_opts=VarianceOptions(restarts=config.restarts, seed=config.seed + i),
        )
        return abs(rep.gap_normalized), rep.witness_residual

    rows = _parallel(one, list(range(config.counts["doubly"])))
    worst_gap = max(r[0] for r in rows)
    worst_resid = max(r[1] for r in rows)
    ok = worst_gap <= config.tol_eq and worst_resid <= 1e-6
    return CriterionResult(
        "04_theorem6_doubly_commuting",
        ok,
        {"instances": len(rows), "max_abs_gap": worst_gap, "max_witness_residual": worst_resid},
    )


def criterion_inequality(config) -> CriterionResult:
    def one(i):
        rng = _rng(config.seed, 5, i)
        a = random_general_tuple(rng, n_max=16, d_max=4)
        rep = check_inequality(
            a,
            dist_opts=DistOptions(seed=config.seed + i),
            var_opts=VarianceOptions(restarts=config.restarts_light, seed=config.seed + i),
        )
        return rep.ok, rep.gap

    rows = _parallel(one, list(range(config.counts["general"])))
    ok = all(r[0] for r in rows)
    return CriterionResult(
        "05_inequality_soundness",
        ok,
        {"instances": len(rows), "min_gap": min(r[1] for r in rows)},
    )


def criterion_normal_oracle(config) -> CriterionResult:
    def one(i):
        rng = _rng(config.seed, 6, i)
        a = random_diag_tuple(rng)
        dr = dist_to_scalars(a, DistOptions(seed=config.seed + i))
        ch = chebyshev_radius_normal(a)
        return abs(dr.dist - ch.radius)

    rows = _parallel(one, list(range(config.counts["normal"])))
    worst = max(rows)
    return CriterionResult(
        "06_commuting_normal_oracle",
        worst <= 1e-7,
        {"instances": len(rows), "max_radius_mismatch": worst},
    )


def criterion_d1(config) -> CriterionResult:
    def one(i):
        rng = _rng(config.seed, 7, i)
        n = int(rng.integers(2, 33))
        m = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2.0 * n)
        rep = check_equality(
            OperatorTuple((m,)),
            expected_class="d1",
            tol_eq=config.tol_eq,
            dist_opts=DistOptions(seed=config.seed + i),
            var_opts=VarianceOptions(restarts=config.restarts, seed=config.seed + i),
        )
        return abs(rep.gap_normalized)

    rows = _parallel(one, list(range(config.counts["d1"])))
    worst = max(rows)
    return CriterionResult(
        "07_d1_equality",
        worst <= config.tol_eq,
        {"instances": len(rows), "max_abs_gap": worst},
    )


def criterion_product(config) -> CriterionResult:
    def one(i):
        rng = _rng(config.seed, 8, i)
        d = int(rng.integers(2, 4))
        factors = [
            (rng.standard_normal((p, p)) + 1j * rng.standard_normal((p, p))) / np.sqrt(2.0)
            for p in (int(rng.integers(2, 4)) for _ in range(d))
        ]
        rep = v_product_check(
            factors,
            samples=config.samples,
            seed=config.seed + i,
            boundary_dirs=config.boundary_dirs,
        )
        return rep.hausdorff

    rows = _parallel(one, list(range(config.counts["product"])))
    worst = max(rows)
    return CriterionResult(
        "08_lemma3_product_formula",
        worst <= 1e-5,
        {"instances": len(rows), "max_hausdorff": worst},
    )


def criterion_blocks(config) -> CriterionResult:
    def one(i):
        rng = _rng(config.seed, 9, i)
        d = int(rng.integers(2, 4))
        n_blocks = int(rng.integers(2, 4))
        blocks = tuple(
            BlockSpec(tuple(int(rng.integers(1, 4)) for _ in range(d))) for _ in range(n_blocks)
        )
        _, spec = gen_doubly(FactorSpec(blocks), seed=int(rng.integers(0, 2**31)))
        rep = v_block_formula_check(
            spec, samples=config.samples, seed=config.seed + i, boundary_dirs=config.boundary_dirs
        )
        return rep.max_point_to_hull, rep.hausdorff

    rows = _parallel(one, list(range(config.counts["blocks"])))
    worst_pt = max(r[0] for r in rows)
    worst_h = max(r[1] for r in rows)
    return CriterionResult(
        "09_block_formula",
        worst_pt <= 1e-6 and worst_h <= 1e-5,
        {"instances": len(rows), "max_point_to_hull": worst_pt, "max_hausdorff": worst_h},
    )


def criterion_membership_probe(config) -> CriterionResult:
    def one(i):
        rng = _rng(config.seed, 10, i)
        a = random_general_tuple(rng, n_max=8, d_max=3, n_min=2, d_min=1)
        tn = tuple_norm(a)
        a = OperatorTuple(tuple(m / tn for m in a.matrices))
        if i % 2 == 1:
            # shift to the optimum so 0 lands in conv V (orthogonal instance)
            dr = dist_to_scalars(a, DistOptions(seed=config.seed + i))
            a = shift(a, dr.z0)
        mem = membership_zero_in_convV(a)
        norm_a = tuple_norm(a)
        probes = rng.standard_normal((config.probes, a.d)) + 1j * rng.standard_normal(
            (config.probes, a.d)
        )
        probes *= rng.uniform(0.01, 1.5, size=(config.probes, 1))
        worst = np.inf
        for z in probes:
            worst = min(worst, tuple_norm(shift(a, z)))
        probe_orthogonal = bool(worst >= norm_a - 1e-7)
        return mem.is_member == probe_orthogonal, mem.is_member, probe_orthogonal, worst - norm_a

    rows = _parallel(one, list(range(config.counts["membership"])))
    ok = all(r[0] for r in rows)
    members = sum(1 for r in rows if r[1])
    return CriterionResult(
        "10_theorem1_probe_consistency",
        ok,
        {
            "instances": len(rows),
            "agreements": sum(1 for r in rows if r[0]),
            "members": members,
            "non_members": len(rows) - members,
        },
    )


def criterion_toeplitz(config) -> CriterionResult:
    symbols = [{1: 1.0}, {-1: 1.0}]
    reports = toeplitz_section_sweep(
        symbols,
        config.toeplitz_ns,
        tol_eq=config.tol_eq,
        dist_opts=DistOptions(seed=config.seed),
        var_opts=VarianceOptions(restarts=config.restarts, seed=config.seed),
    )
    gaps = [abs(r.gap_normalized) for r in reports]
    ok = gaps[-1] <= gaps[0] + 1e-8 and gaps[-1] <= 0.05
    return CriterionResult(
        "11_toeplitz_sections",
        ok,
        {"ns": list(config.toeplitz_ns), "gaps": gaps},
    )


def criterion_gradients(config) -> CriterionResult:
    count = config.counts["grad"]
    rng = _rng(config.seed, 12)
    eps = 1e-5

    worst_f = 0.0
    accepted = 0
    attempts = 0
    while accepted < count and attempts < 20 * count:
        attempts += 1
        a = random_general_tuple(rng, n_max=10, d_max=3)
        z = rng.standard_normal(a.d) + 1j * rng.standard_normal(a.d)
        f0, grad, gap = dist_objective_gradient(a, z)
        if gap < 1e-6:
            continue
        accepted += 1
        fd = np.zeros_like(grad)
        for k in range(2 * a.d):
            dz = np.zeros(2 * a.d)
            dz[k] = eps
            zp = z + (dz[0::2] + 1j * dz[1::2])
            zm = z - (dz[0::2] + 1j * dz[1::2])
            fp, _, _ = dist_objective_gradient(a, zp)
            fm, _, _ = dist_objective_gradient(a, zm)
            fd[k] = (fp - fm) / (2.0 * eps)
        rel = np.linalg.norm(grad - fd) / max(np.linalg.norm(grad), 1e-8)
        worst_f = max(worst_f, rel)

    worst_v = 0.0
    for _ in range(count):
        a = random_general_tuple(rng, n_max=10, d_max=3)
        x = rng.standard_normal(a.n) + 1j * rng.standard_normal(a.n)
        x /= np.linalg.norm(x)
        g = variance_gradient(a, x)
        fd = np.zeros(2 * a.n)
        for k in range(2 * a.n):
            dv = np.zeros(a.n, dtype=np.complex128)
            if k % 2 == 0:
                dv[k // 2] = eps
            else:
                dv[k // 2] = 1j * eps
            xp = (x + dv) / np.linalg.norm(x + dv)
            xm = (x - dv) / np.linalg.norm(x - dv)
            fd[k] = (variance(a, xp) - variance(a, xm)) / (2.0 * eps)
        g_real = np.empty(2 * a.n)
        g_real[0::2] = g.real
        g_real[1::2] = g.imag
        rel = np.linalg.norm(g_real - fd) / max(np.linalg.norm(g_real), 1e-8)
        worst_v = max(worst_v, rel)

    ok = worst_f <= 1e-5 and worst_v <= 1e-5 and accepted == count
    return CriterionResult(
        "12_gradient_checks",
        ok,
        {
            "points_per_objective": count,
            "max_rel_err_distance_gradient": worst_f,
            "max_rel_err_variance_gradient": worst_v,
        },
    )


def criterion_determinism(config) -> CriterionResult:
    small = replace(
        config,
        counts={
            "doubly": 2,
            "general": 2,
            "normal": 2,
            "d1": 2,
            "product": 1,
            "blocks": 1,
            "membership": 2,
            "grad": 2,
            "commuting_explore": 2,
        },
        toeplitz_ns=(2, 4),
        probes=50,
        samples=64,
        boundary_dirs=8,
        restarts=8,
        restarts_light=4,
        include_determinism=False,
        out_json=None,
        csv_dir=None,
    )
    s1 = dumps_canonical(run_suite(small))
    s2 = dumps_canonical(run_suite(small))
    return CriterionResult(
        "13_suite_determinism",
        s1 == s2,
        {"bytes": len(s1), "identical": s1 == s2},
    )


def remark2_exploration(config) -> dict:
    """Seeded search over commuting (non-normal) tuples built as polynomials
    of a single random matrix; reports the largest observed normalized gap.
    Exploratory only: the equality question for general commuting tuples is
    open, so there is no pass/fail here."""

    def one(i):
        rng = _rng(config.seed, 14, i)
        a = random_commuting_poly_tuple(rng)
        rep = check_equality(
            a,
            expected_class="commuting_small_dim" if a.n <= 3 else "general",
            tol_eq=config.tol_eq,
            dist_opts=DistOptions(seed=config.seed + i),
            var_opts=VarianceOptions(restarts=config.restarts, seed=config.seed + i),
        )
        return rep.gap_normalized

    gaps = _parallel(one, list(range(config.counts["commuting_explore"])))
    return {
        "instances": len(gaps),
        "max_gap_normalized": max(gaps),
        "gaps": gaps,
        "note": "exploratory; no pass/fail semantics",
    }


# ---------------------------------------------------------------------------
# suite configuration and runner
# ---------------------------------------------------------------------------

_DEFAULT_COUNTS = {
    "doubly": 100,
    "general": 500,
    "normal": 100,
    "d1": 100,
    "product": 50,
    "blocks": 25,
    "membership": 50,
    "grad": 100,
    "commuting_explore": 16,
}


@dataclass(frozen=True)
class SuiteConfig:
    seed: int = 20260810
    counts: dict = field(default_factory=lambda: dict(_DEFAULT_COUNTS))
    toeplitz_ns: tuple = (4, 8, 16, 32)
    tol_eq: float = TOL_EQ
    restarts: int = 64
    restarts_light: int = 16
    samples: int = 2048
    boundary_dirs: int = 256
    probes: int = 1000
    include_determinism: bool = True
    out_json: Optional[str] = None
    csv_dir: Optional[str] = None

    def validate(self):
        if not self.counts:
            raise ConfigError("instance counts must not be empty")
        for key in _DEFAULT_COUNTS:
            if key not in self.counts:
                raise ConfigError(f"missing instance count {key!r}")
            if int(self.counts[key]) < 1:
                raise ConfigError(f"instance count {key!r} must be >= 1")
        unknown = set(self.counts) - set(_DEFAULT_COUNTS)
        if unknown:
            raise ConfigError(f"unknown instance counts: {sorted(unknown)}")
        if list(self.toeplitz_ns) != sorted(self.toeplitz_ns):
            raise ConfigError("toeplitz_ns must be ascending")
        if min(self.toeplitz_ns) < 1 or max(self.toeplitz_ns) > 256:
            raise ConfigError("toeplitz_ns out of range")
        if self.restarts < 1 or self.restarts_light < 1:
            raise ConfigError("restarts must be >= 1")
        if self.samples < 1 or self.probes < 1:
            raise ConfigError("samples and probes must be >= 1")

    def to_dict(self):
        return {
            "seed": self.seed,
            "counts": dict(self.counts),
            "toeplitz_ns": list(self.toeplitz_ns),
            "tol_eq": self.tol_eq,
            "restarts": self.restarts,
            "restarts_light": self.restarts_light,
            "samples": self.samples,
            "boundary_dirs": self.boundary_dirs,
            "probes": self.probes,
            "include_determinism": self.include_determinism,
        }

    @staticmethod
    def from_json_file(path) -> "SuiteConfig":
        try:
            with open(path) as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read suite config {path}: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError("suite config must be a JSON object")
        known = {f.name for f in SuiteConfig.__dataclass_fields__.values()}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown suite config keys: {sorted(unknown)}")
        if "toeplitz_ns" in raw:
            raw["toeplitz_ns"] = tuple(raw["toeplitz_ns"])
        if "counts" in raw:
            merged = dict(_DEFAULT_COUNTS)
            merged.update(raw["counts"])
            raw["counts"] = merged
        cfg = SuiteConfig(**raw)
        cfg.validate()
        return cfg


_CRITERIA = (
    criterion_pauli,
    criterion_d2,
    criterion_ex2,
    criterion_doubly,
    criterion_inequality,
    criterion_normal_oracle,
    criterion_d1,
    criterion_product,
    criterion_blocks,
    criterion_membership_probe,
    criterion_toeplitz,
    criterion_gradients,
)


def run_suite(config: SuiteConfig = SuiteConfig()) -> dict:
    """Run the whole verification battery; returns the machine-readable
    summary (and writes it to config.out_json if set)."""
    from . import _kernels

    config.validate()
    results = [fn(config) for fn in _CRITERIA]
    if config.include_determinism:
        results.append(criterion_determinism(config))
    exploratory = remark2_exploration(config)
    summary = {
        "config": config.to_dict(),
        "backend": _kernels.backend(),
        "criteria": [r.to_dict() for r in results],
        "exploratory_commuting_search": exploratory,
        "all_passed": all(r.passed for r in results),
    }
    if config.csv_dir:
        os.makedirs(config.csv_dir, exist_ok=True)
        for name in ("pauli", "d2", "ex2"):
            s = sample_V(gallery(name), config.samples, seed=config.seed, boundary_dirs=config.boundary_dirs)
            range_sample_to_csv(s, os.path.join(config.csv_dir, f"{name}_V.csv"))
    if config.out_json:
        with open(config.out_json, "w") as fh:
            fh.write(dumps_canonical(summary) + "\n")
    return summary
