"""Joint numerical range W(A), its maximal version V(A), membership
certificates for 0 in conv V and 0 in V, and the product/block structure
checks for tensor-form doubly commuting tuples.

Complex d-vectors are embedded in R^{2d} as (re z_1, im z_1, ..., re z_d,
im z_d) throughout.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.spatial import cKDTree

from . import _kernels
from .config import DIM_CAP, REL_TOL_EIGENSPACE, TOL_MEMBER
from .errors import ConvergenceFailure, SizeOverflow
from .linalg import hermitian_eig, hull_distance
from .tuples import OperatorTuple, gram

__all__ = [
    "RangeSample",
    "TopEigenspace",
    "Certificate",
    "MembershipResult",
    "top_eigenspace",
    "compress",
    "sample_W",
    "sample_V",
    "membership_zero_in_convV",
    "membership_zero_in_V",
    "v_product_check",
    "v_block_formula_check",
    "embed_real",
    "hausdorff_distance",
    "range_sample_to_csv",
]


@dataclass(frozen=True)
class TopEigenspace:
    """Numerical top eigenspace of the gram matrix: all eigenvectors with
    eigenvalue >= (1 - rel_tol) * lambda_max."""

    basis: np.ndarray  # (n, m) orthonormal columns
    lambda_max: float
    rel_tol: float

    @property
    def dim(self) -> int:
        return self.basis.shape[1]


@dataclass(frozen=True)
class RangeSample:
    """Finite point cloud approximating W(A) or V(A).

    Every point is the vector of quadratic forms of its witness vector, so
    the cloud can be recomputed (and audited) from the witnesses alone.
    """

    kind: str  # "W" or "V"
    points: np.ndarray  # (N, d) complex
    witnesses: np.ndarray  # (N, n) complex unit rows
    seed: int
    count: int
    boundary_dirs: int


@dataclass(frozen=True)
class Certificate:
    """Optimality/membership certificate.

    kind == "density_matrix": weights s_i > 0 summing to 1 and orthonormal
    vectors x_i (columns) such that T = sum_i s_i x_i x_i* realizes the
    claimed quadratic-form averages.
    kind == "witness_vector": a single unit vector x.
    """

    kind: str
    residual: float
    weights: Optional[np.ndarray] = None
    vectors: Optional[np.ndarray] = None  # (n, l) orthonormal columns
    witness: Optional[np.ndarray] = None


@dataclass(frozen=True)
class MembershipResult:
    is_member: bool
    residual: float
    certificate: Certificate
    iterations: int = 0
    gap: float = 0.0


def embed_real(points: np.ndarray) -> np.ndarray:
    """Complex (N, d) -> real (N, 2d), interleaving re/im per coordinate."""
    pts = np.ascontiguousarray(np.atleast_2d(points), dtype=np.complex128)
    return pts.view(np.float64).reshape(pts.shape[0], 2 * pts.shape[1])


def top_eigenspace(a: OperatorTuple, rel_tol: float = REL_TOL_EIGENSPACE) -> TopEigenspace:
    """Numerical eigenspace of gram(A) at its top eigenvalue."""
    dec = hermitian_eig(gram(a))
    w = dec.eigenvalues
    lam = float(max(w[-1], 0.0))
    threshold = (1.0 - rel_tol) * lam - 1e-13 * (1.0 + lam)
    keep = w >= threshold
    return TopEigenspace(
        basis=np.ascontiguousarray(dec.eigenvectors[:, keep]),
        lambda_max=lam,
        rel_tol=rel_tol,
    )


def compress(a: OperatorTuple, eigenspace: TopEigenspace) -> OperatorTuple:
    """B_j = Basis* A_j Basis on the eigenspace."""
    b = eigenspace.basis
    return OperatorTuple(tuple(b.conj().T @ m @ b for m in a.matrices))


def _random_units(rng: np.random.Generator, count: int, n: int) -> np.ndarray:
    x = rng.standard_normal((count, n)) + 1j * rng.standard_normal((count, n))
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def _boundary_directions(d: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """Directions on the unit sphere of R^{2d}: the 4d coordinate axes first
    (so exposed points in axis directions are always captured), the rest
    seeded uniform."""
    axes = []
    for j in range(2 * d):
        e = np.zeros(2 * d)
        e[j] = 1.0
        axes.append(e.copy())
        e[j] = -1.0
        axes.append(e)
    axes = np.asarray(axes)
    if count <= axes.shape[0]:
        return axes[:count]
    extra = rng.standard_normal((count - axes.shape[0], 2 * d))
    extra /= np.linalg.norm(extra, axis=1, keepdims=True)
    return np.vstack([axes, extra])


def _support_witnesses(a: OperatorTuple, dirs: np.ndarray) -> np.ndarray:
    """Top eigenvector of the Hermitian pencil for each direction c:
    H_c = 0.5 * sum_j (c_j A_j + conj(c_j) A_j*) with c_j = c[2j] + i c[2j+1]."""
    mats = a.stack()
    mats_h = a.stack_adjoint()
    pencils = np.empty((dirs.shape[0], a.n, a.n), dtype=np.complex128)
    for k, c in enumerate(dirs):
        ch = c[0::2] + 1j * c[1::2]
        h = np.zeros((a.n, a.n), dtype=np.complex128)
        for j in range(a.d):
            h += ch[j] * mats[j] + np.conj(ch[j]) * mats_h[j]
        pencils[k] = 0.5 * (h + h.conj().T)
    _, vecs = np.linalg.eigh(pencils)
    return np.ascontiguousarray(vecs[:, :, -1])


def sample_W(a: OperatorTuple, count: int, seed: int = 0, boundary_dirs: int = 0) -> RangeSample:
    """Sample the joint numerical range: `count` seeded uniform unit vectors
    plus one support point of conv W(A) per boundary direction."""
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = np.random.default_rng(seed)
    witnesses = _random_units(rng, count, a.n)
    if boundary_dirs > 0:
        dirs = _boundary_directions(a.d, boundary_dirs, rng)
        witnesses = np.vstack([witnesses, _support_witnesses(a, dirs)])
    points = _kernels.quadforms(a.stack(), witnesses)
    return RangeSample(
        kind="W",
        points=points,
        witnesses=witnesses,
        seed=seed,
        count=count,
        boundary_dirs=boundary_dirs,
    )


def sample_V(
    a: OperatorTuple,
    count: int,
    seed: int = 0,
    boundary_dirs: int = 0,
    rel_tol: float = REL_TOL_EIGENSPACE,
) -> RangeSample:
    """Sample the maximal joint numerical range: W of the compression of A to
    the top eigenspace of gram(A), witnesses lifted back to the full space."""
    space = top_eigenspace(a, rel_tol)
    b = compress(a, space)
    inner = sample_W(b, count, seed=seed, boundary_dirs=boundary_dirs)
    lifted = inner.witnesses @ space.basis.T
    return RangeSample(
        kind="V",
        points=inner.points,
        witnesses=np.ascontiguousarray(lifted),
        seed=seed,
        count=count,
        boundary_dirs=boundary_dirs,
    )


# ---------------------------------------------------------------------------
# membership of 0 in conv V(A): fully corrective Frank-Wolfe over density
# matrices on the top eigenspace
# ---------------------------------------------------------------------------


_PAULI = (
    np.array([[0.0, 1.0], [1.0, 0.0]], dtype=np.complex128),
    np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=np.complex128),
    np.array([[1.0, 0.0], [0.0, -1.0]], dtype=np.complex128),
)


def _min_norm_bloch(mats):
    """Closed-form minimal-norm point for 2x2 tuples.

    Writing B_j = alpha_j I + sum_k beta_jk sigma_k, the quadratic-form image
    over unit vectors is {alpha + beta n : n on the unit sphere of R^3} and
    its convex hull is the affine image of the unit ball, so the nearest
    point to 0 is a 3-dimensional trust-region problem.

    Returns (c, atoms, weights): atoms are the two eigenvectors of the
    optimal density matrix T = (I + sum n_k sigma_k)/2.
    """
    d = mats.shape[0]
    alpha = np.array([0.5 * np.trace(m) for m in mats])
    beta = np.empty((d, 3), dtype=np.complex128)
    for k, sig in enumerate(_PAULI):
        beta[:, k] = [0.5 * np.trace(m @ sig) for m in mats]
    a = embed_real(alpha[None, :])[0]
    m_real = np.empty((2 * d, 3))
    for k in range(3):
        m_real[:, k] = embed_real(beta[None, :, k])[0]
    g = m_real.T @ m_real
    b = m_real.T @ a
    n = -np.linalg.lstsq(g, b, rcond=None)[0]
    nonstationary = float(np.linalg.norm(g @ n + b)) > 1e-10 * (1.0 + float(np.linalg.norm(b)))
    if n @ n > 1.0 or nonstationary:
        w_g, v_g = np.linalg.eigh(g)
        bb = v_g.T @ b

        def radius2(mu):
            return float(np.sum((bb / (w_g + mu)) ** 2))

        lo, hi = 0.0, 1.0 + float(np.linalg.norm(b))
        while radius2(hi) > 1.0:
            hi *= 2.0
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if radius2(mid) > 1.0:
                lo = mid
            else:
                hi = mid
        n = v_g @ (-bb / (w_g + 0.5 * (lo + hi)))
        nn = float(np.linalg.norm(n))
        if nn > 0:
            n = n / max(nn, 1.0)
    c = alpha + beta @ n
    t_mat = 0.5 * (np.eye(2, dtype=np.complex128) + sum(nk * sig for nk, sig in zip(n, _PAULI)))
    t_mat = 0.5 * (t_mat + t_mat.conj().T)
    evals, evecs = np.linalg.eigh(t_mat)
    atoms = [np.ascontiguousarray(evecs[:, 1]), np.ascontiguousarray(evecs[:, 0])]
    weights = np.array([max(evals[1], 0.0), max(evals[0], 0.0)])
    weights = weights / np.sum(weights)
    return c, atoms, weights


def min_norm_quadform_image(
    mats, mats_h, stop_tol: float, max_iter: int = 20000, seed: int = 0, decided_tol: float = np.inf
):
    """Minimal-norm point of conv{(x*M_1 x, ..., x*M_d x) : ||x|| = 1},
    i.e. the image of the density matrices under T -> (tr(M_j T))_j.

    Fully corrective Frank-Wolfe: the linear step adds the minimal
    eigenvector of the Hermitian gradient sum_j (conj(c_j) M_j + c_j M_j*),
    c_j = tr(M_j T); the weights over the active atoms are then re-solved
    exactly, so the objective is non-increasing and interior cases terminate
    with an exact convex combination. Deterministic axis-direction support
    atoms are seeded first so axis-exposed points are captured immediately.

    Returns (c, atoms, weights, gap, iterations): the nearest point c, the
    atom vectors and convex weights realizing it, the final Frank-Wolfe gap,
    and the iteration count. The loop exits once ||c||^2 <= stop_tol, its
    improvement is certified below stop_tol, or the gap certifies
    ||c*||^2 > ||c||^2 - gap with ||c||^2 - gap > stop_tol left to callers.
    """
    m = mats.shape[1]
    d = mats.shape[0]
    if m == 1:
        c = np.array([mm[0, 0] for mm in mats])
        return c, [np.ones(1, dtype=np.complex128)], np.array([1.0]), 0.0, 1
    if m == 2:
        c, atoms, weights = _min_norm_bloch(mats)
        return c, atoms, weights, 0.0, 1
    rng = np.random.default_rng(seed)

    def atom_point(y):
        return np.asarray([np.vdot(y, mm @ y) for mm in mats])

    def min_eig_atoms(g):
        w_g, v_g = np.linalg.eigh(g)
        out = [np.ascontiguousarray(v_g[:, 0])]
        cluster = w_g <= w_g[0] + 1e-12 * (1.0 + abs(w_g[0]))
        mult = int(np.sum(cluster))
        if mult > 1:
            sub = v_g[:, cluster]
            coef = rng.standard_normal((2, mult)) + 1j * rng.standard_normal((2, mult))
            coef /= np.linalg.norm(coef, axis=1, keepdims=True)
            out.extend(np.ascontiguousarray(sub @ coef[k]) for k in range(coef.shape[0]))
        return float(w_g[0]), out

    def support_pencil(c_dir):
        g = np.zeros((m, m), dtype=np.complex128)
        for j in range(d):
            g += np.conj(c_dir[j]) * mats[j] + c_dir[j] * mats_h[j]
        return 0.5 * (g + g.conj().T)

    atoms = [np.ones(m, dtype=np.complex128) / np.sqrt(m)]
    for j in range(d):
        for c_ax in (1.0, -1.0, 1.0j, -1.0j):
            c_dir = np.zeros(d, dtype=np.complex128)
            c_dir[j] = c_ax
            _, new = min_eig_atoms(support_pencil(c_dir))
            atoms.extend(new)
    points = [atom_point(y) for y in atoms]
    pts_real = embed_real(np.asarray(points))
    _, weights = hull_distance(np.zeros(pts_real.shape[1]), pts_real, gap_tol=1e-16)
    c = weights @ np.asarray(points)

    gap = np.inf
    iterations = 0
    for iterations in range(1, max_iter + 1):
        h = float(np.real(np.vdot(c, c)))
        if h <= stop_tol:
            gap = 0.0
            break
        lam_min, new_atoms = min_eig_atoms(support_pencil(c))
        gap = 2.0 * h - lam_min
        if gap <= stop_tol:
            break
        if h - max(gap, 0.0) > decided_tol:
            break  # certified: the optimum stays above the caller's threshold
        # fully corrective step over the active set plus the new atoms
        keep = weights > 0.0
        atoms = [y for y, kp in zip(atoms, keep) if kp] + new_atoms
        points = [p for p, kp in zip(points, keep) if kp] + [atom_point(y) for y in new_atoms]
        pts_real = embed_real(np.asarray(points))
        _, weights = hull_distance(np.zeros(pts_real.shape[1]), pts_real, gap_tol=1e-16)
        c = weights @ np.asarray(points)
    return c, atoms, weights, float(gap if np.isfinite(gap) else 0.0), iterations


def membership_zero_in_convV(
    a: OperatorTuple,
    tol_member: float = TOL_MEMBER,
    max_iter: int = 20000,
    rel_tol: float = REL_TOL_EIGENSPACE,
):
    """Minimize h(T) = sum_j |tr(B_j T)|^2 over density matrices T on the top
    eigenspace of gram(A); member iff sqrt(h) <= tol_member * (1 + ||A||).

    Returns MembershipResult with a density-matrix Certificate (spectral form
    of T, vectors lifted to the full space).
    """
    space = top_eigenspace(a, rel_tol)
    b = compress(a, space)
    tn = float(np.sqrt(space.lambda_max))
    threshold = tol_member * (1.0 + tn)
    m = b.n

    gap_tol = 1e-2 * threshold * threshold
    c, atoms, weights, gap, iterations = min_norm_quadform_image(
        b.stack(), b.stack_adjoint(), gap_tol, max_iter=max_iter,
        decided_tol=threshold * threshold,
    )
    h = float(np.real(np.vdot(c, c)))
    if iterations >= max_iter and h > threshold * threshold and h - gap <= threshold * threshold:
        raise ConvergenceFailure(
            f"membership undecided after {max_iter} iterations (gap {gap:.3e})",
            residual=float(np.sqrt(h)),
        )
    residual = float(np.sqrt(max(h, 0.0)))

    # spectral form of T = sum_i w_i y_i y_i*, lifted to the full space
    t_mat = np.zeros((m, m), dtype=np.complex128)
    for w_i, y in zip(weights, atoms):
        if w_i > 0.0:
            t_mat += w_i * np.outer(y, y.conj())
    t_mat = 0.5 * (t_mat + t_mat.conj().T)
    evals, evecs = np.linalg.eigh(t_mat)
    keep = evals > 1e-12
    s = evals[keep]
    s = s / np.sum(s)
    vecs = space.basis @ evecs[:, keep]
    cert = Certificate(
        kind="density_matrix",
        residual=residual,
        weights=s[::-1].copy(),
        vectors=np.ascontiguousarray(vecs[:, ::-1]),
    )
    return MembershipResult(
        is_member=bool(residual <= threshold),
        residual=residual,
        certificate=cert,
        iterations=iterations,
        gap=gap,
    )


def membership_zero_in_V(
    a: OperatorTuple,
    restarts: int = 64,
    seed: int = 0,
    tol_member: float = TOL_MEMBER,
    max_iter: int = 2000,
    rel_tol: float = REL_TOL_EIGENSPACE,
):
    """Minimize g(x) = sum_j |<x|B_j x>|^2 over unit x in the top eigenspace
    by projected gradient descent with seeded restarts.

    Non-membership is a legitimate answer; the residual sqrt(g) at the best
    vector found is always reported. The first min(m, restarts) starts are
    the eigenspace basis directions, the rest seeded random.
    """
    space = top_eigenspace(a, rel_tol)
    b = compress(a, space)
    tn = float(np.sqrt(space.lambda_max))
    threshold = tol_member * (1.0 + tn)
    m = b.n
    rng = np.random.default_rng(seed)

    n_basis = min(m, restarts)
    starts = np.zeros((max(restarts, n_basis), m), dtype=np.complex128)
    for i in range(n_basis):
        starts[i, i] = 1.0
    if starts.shape[0] > n_basis:
        starts[n_basis:] = _random_units(rng, starts.shape[0] - n_basis, m)

    mats = b.stack()
    mats_h = b.stack_adjoint()
    grad_tol = 1e-12 * (1.0 + tn) ** 2
    vals, xs = _kernels.sqforms_restarts(mats, mats_h, starts, max_iter, grad_tol, 0.5 / (1.0 + tn**2))
    best = 0
    for i in range(1, vals.shape[0]):
        if vals[i] < vals[best] - 1e-12:
            best = i
    residual = float(np.sqrt(max(vals[best], 0.0)))
    witness = space.basis @ xs[best]
    witness = witness / np.linalg.norm(witness)
    cert = Certificate(kind="witness_vector", residual=residual, witness=witness)
    return MembershipResult(
        is_member=bool(residual <= threshold),
        residual=residual,
        certificate=cert,
        iterations=int(vals.shape[0]),
    )


# ---------------------------------------------------------------------------
# product / block formula checks
# ---------------------------------------------------------------------------


def hausdorff_distance(p: np.ndarray, q: np.ndarray) -> float:
    """Two-sided Hausdorff distance between real point clouds."""
    p = np.atleast_2d(p)
    q = np.atleast_2d(q)
    d_pq = float(np.max(cKDTree(q).query(p)[0]))
    d_qp = float(np.max(cKDTree(p).query(q)[0]))
    return max(d_pq, d_qp)


def _dedupe(points: np.ndarray, decimals: int = 9) -> np.ndarray:
    rounded = np.round(embed_real(points), decimals)
    _, idx = np.unique(rounded, axis=0, return_index=True)
    return points[np.sort(idx)]


def _factor_product_points(factors, samples, boundary, seed, cap_points=20000):
    """Cartesian product of the (deduplicated) factor V-samples."""
    factor_sets = []
    for j, x in enumerate(factors):
        s = sample_V(OperatorTuple((x,)), samples, seed=seed + 7 * j + 1, boundary_dirs=boundary)
        factor_sets.append(_dedupe(s.points)[:, 0])
    grids = np.meshgrid(*factor_sets, indexing="ij")
    prod = np.stack([g.ravel() for g in grids], axis=1)
    if prod.shape[0] > cap_points:
        rng = np.random.default_rng(seed)
        prod = prod[rng.choice(prod.shape[0], cap_points, replace=False)]
    return prod


@dataclass(frozen=True)
class ProductCheckReport:
    hausdorff: float
    tuple_sample_size: int
    product_size: int
    samples: int
    boundary_dirs: int
    seed: int


def v_product_check(
    factors,
    samples: int = 512,
    seed: int = 0,
    boundary_dirs: int = 64,
    cap: int = DIM_CAP,
) -> ProductCheckReport:
    """Build A_j = I x ... x X_j x ... x I, sample V of the tensor tuple and
    of each factor, and report the two-sided Hausdorff distance between the
    tuple sample and the cartesian product of the factor samples."""
    from .tuples import BlockSpec, FactorSpec, gen_doubly

    factors = [np.asarray(x, dtype=np.complex128) for x in factors]
    dims = tuple(x.shape[0] for x in factors)
    total = 1
    for p in dims:
        total *= p
    if total > cap:
        raise SizeOverflow(f"tensor dimension {total} exceeds cap {cap}")
    tup, _ = gen_doubly(FactorSpec((BlockSpec(dims, tuple(factors)),)))
    sample = sample_V(tup, samples, seed=seed, boundary_dirs=boundary_dirs)
    prod = _factor_product_points(factors, samples, boundary_dirs, seed)
    h = hausdorff_distance(embed_real(sample.points), embed_real(prod))
    return ProductCheckReport(
        hausdorff=h,
        tuple_sample_size=sample.points.shape[0],
        product_size=prod.shape[0],
        samples=samples,
        boundary_dirs=boundary_dirs,
        seed=seed,
    )


@dataclass(frozen=True)
class BlockCheckReport:
    hausdorff: float
    max_point_to_hull: float
    contributing_blocks: tuple
    block_norm_sums: tuple
    samples: int
    boundary_dirs: int
    seed: int


def v_block_formula_check(
    spec,
    samples: int = 512,
    seed: int = 0,
    boundary_dirs: int = 64,
    rel_tol: float = 1e-9,
) -> BlockCheckReport:
    """Check the block formula for V on a materialized FactorSpec.

    Blocks k with sum_j ||X_{j,k}||^2 equal to the overall squared tuple norm
    (within rel_tol, relative) contribute their product ranges; V of the
    assembled tuple is the convex hull of the union. Reports the Hausdorff
    distance between a sample of V and a sampled hull, plus the exact maximal
    distance of sampled V points to the hull of the contributing product
    points.
    """
    from .tuples import FactorSpec, gen_doubly

    assert isinstance(spec, FactorSpec)
    if any(b.factors is None for b in spec.blocks):
        raise ValueError("spec must be materialized (factors present)")

    sums = []
    for blk in spec.blocks:
        sums.append(sum(float(np.linalg.norm(x, 2)) ** 2 for x in blk.factors))
    smax = max(sums)
    contributing = tuple(
        k for k, s in enumerate(sums) if s >= smax * (1.0 - rel_tol)
    )

    union = []
    for k in contributing:
        blk = spec.blocks[k]
        union.append(_factor_product_points(list(blk.factors), samples, boundary_dirs, seed + 101 * k))
    union = _dedupe(np.vstack(union))
    union_real = embed_real(union)

    tup, _ = gen_doubly(spec)
    sample = sample_V(tup, samples, seed=seed, boundary_dirs=boundary_dirs)
    sample_real = embed_real(sample.points)

    worst = 0.0
    for row in sample_real:
        dist, _ = hull_distance(row, union_real)
        worst = max(worst, dist)

    # sampled hull: union points plus seeded convex combinations
    rng = np.random.default_rng(seed + 13)
    n_union = union_real.shape[0]
    combos = max(samples, 1)
    lam = rng.dirichlet(np.ones(min(n_union, 8)), size=combos)
    picks = np.array([rng.choice(n_union, size=lam.shape[1], replace=n_union < lam.shape[1]) for _ in range(combos)])
    hull_cloud = np.einsum("ck,cki->ci", lam, union_real[picks])
    hull_cloud = np.vstack([union_real, hull_cloud])
    h = hausdorff_distance(sample_real, hull_cloud)

    return BlockCheckReport(
        hausdorff=h,
        max_point_to_hull=worst,
        contributing_blocks=contributing,
        block_norm_sums=tuple(sums),
        samples=samples,
        boundary_dirs=boundary_dirs,
        seed=seed,
    )


def range_sample_to_csv(sample: RangeSample, path) -> None:
    """One row per point: re/im of every coordinate, 17 significant digits."""
    d = sample.points.shape[1]
    header = ",".join(f"re_{j + 1},im_{j + 1}" for j in range(d))
    rows = [header]
    for p in sample.points:
        rows.append(",".join(f"{v:.17g}" for pair in ((c.real, c.imag) for c in p) for v in pair))
    with open(path, "w") as fh:
        fh.write("\n".join(rows) + "\n")
