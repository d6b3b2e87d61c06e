"""Dense complex linear algebra and convex-geometry primitives.

Everything here is pure-functional: inputs are never mutated and no module
state is touched, so all routines are safe to call from multiple threads.
"""

from dataclasses import dataclass

import numpy as np

from .config import DIM_CAP
from .errors import ConvergenceFailure, EmptyInput, NotHermitian, SizeOverflow

__all__ = [
    "EigenDecomposition",
    "Ball",
    "as_matrix",
    "hermitian_eig",
    "kron",
    "smallest_enclosing_ball",
    "hull_distance",
]


@dataclass(frozen=True)
class EigenDecomposition:
    """Spectral decomposition of a Hermitian matrix, eigenvalues ascending."""

    eigenvalues: np.ndarray  # (n,) real, ascending
    eigenvectors: np.ndarray  # (n, n) orthonormal columns


@dataclass(frozen=True)
class Ball:
    """Smallest enclosing ball with its certifying support points."""

    center: np.ndarray
    radius: float
    support: tuple  # indices into the input point list, at most k+1 of them


def as_matrix(data) -> np.ndarray:
    """Validate and return a dense complex matrix (finite entries, 2-D)."""
    m = np.asarray(data, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise ValueError(f"expected a 2-D matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m.view(np.float64))):
        raise ValueError("matrix entries must be finite")
    return m


def hermitian_eig(m) -> EigenDecomposition:
    """Full spectral decomposition of a Hermitian matrix.

    Raises NotHermitian if ||M - M*|| exceeds 1e-12 * ||M||; the caller is
    expected to symmetrize first. Backed by the LAPACK Hermitian solver
    (tridiagonalization plus divide and conquer), never a general
    nonsymmetric eigensolver.
    """
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise NotHermitian(f"matrix is {m.shape[0]}x{m.shape[1]}, not square")
    scale = np.linalg.norm(m)
    herm_defect = np.linalg.norm(m - m.conj().T)
    if herm_defect > 1e-12 * max(scale, 1e-300):
        raise NotHermitian(
            f"||M - M*|| = {herm_defect:.3e} exceeds 1e-12 * ||M|| = {1e-12 * scale:.3e}"
        )
    try:
        w, v = np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(f"eigensolver did not converge: {exc}") from exc
    return EigenDecomposition(eigenvalues=w, eigenvectors=v)


def kron(a, b, cap: int = DIM_CAP) -> np.ndarray:
    """Kronecker product with a dimension guard."""
    a = as_matrix(a)
    b = as_matrix(b)
    rows = a.shape[0] * b.shape[0]
    cols = a.shape[1] * b.shape[1]
    if rows > cap or cols > cap:
        raise SizeOverflow(f"kron result is {rows}x{cols}, cap is {cap}")
    return np.kron(a, b)


# ---------------------------------------------------------------------------
# smallest enclosing ball (Welzl's algorithm, iterative form)
# ---------------------------------------------------------------------------


def _circumsphere(s: np.ndarray):
    """Center and squared radius of the smallest sphere through the rows of s
    (1 <= len(s) <= k+1)."""
    u = s[1:] - s[0]
    if u.shape[0] == 0:
        return s[0].copy(), 0.0
    rhs = 0.5 * np.einsum("ij,ij->i", u, u)
    gram = u @ u.T
    try:
        alpha = np.linalg.solve(gram, rhs)
    except np.linalg.LinAlgError:
        alpha = np.linalg.lstsq(gram, rhs, rcond=None)[0]
    c = alpha @ u
    return s[0] + c, float(c @ c)


def smallest_enclosing_ball(points, seed: int = 0, tol: float = 1e-12) -> Ball:
    """Exact minimal enclosing ball of a finite point set in R^k.

    Welzl's algorithm with the move-to-front heuristic; recursion depth is
    bounded by the support size (k + 2), not the point count. Deterministic
    for a fixed input order and seed. The returned support indices (at most
    k+1) certify minimality: the support points lie on the boundary and
    their circumsphere is the ball itself.
    """
    pts_in = np.atleast_2d(np.asarray(points, dtype=np.float64))
    if pts_in.size == 0:
        raise EmptyInput("smallest_enclosing_ball needs at least one point")
    if not np.all(np.isfinite(pts_in)):
        raise ValueError("points must be finite")
    k = pts_in.shape[1]

    # Duplicates add nothing and make the circumsphere solves singular.
    seen = {}
    for i, row in enumerate(pts_in):
        seen.setdefault(row.tobytes(), i)
    uniq = sorted(seen.values())
    pts = pts_in[uniq]
    n = pts.shape[0]

    scale = max(1.0, float(np.max(np.abs(pts))))
    eps = tol * scale * scale

    rng = np.random.default_rng(seed)
    order = list(rng.permutation(n))

    def solve(end, support):
        """Ball of pts[order[:end]] with `support` forced on the boundary;
        mutates `order` (move-to-front)."""
        if support:
            c, r2 = _circumsphere(pts[np.asarray(support)])
            sup = tuple(support)
        else:
            c, r2, sup = np.zeros(k), -1.0, tuple()
        if len(support) == k + 1:
            return c, r2, sup
        i = 0
        while i < end:
            p = order[i]
            if r2 < 0.0 or float(np.dot(pts[p] - c, pts[p] - c)) > r2 + eps:
                c, r2, sup = solve(i, support + (p,))
                order[1 : i + 1] = order[0:i]
                order[0] = p
            i += 1
        return c, r2, sup

    c, r2, support = solve(n, tuple())
    radius = float(np.sqrt(max(r2, 0.0)))
    support_idx = tuple(int(uniq[i]) for i in support)
    return Ball(center=c, radius=radius, support=support_idx)


# ---------------------------------------------------------------------------
# distance to a convex hull (fully corrective Frank-Wolfe over the simplex)
# ---------------------------------------------------------------------------


def _affine_minimizer(q, t):
    """Weights of the affine combination of the rows of q nearest to t."""
    s = q.shape[0]
    kkt = np.zeros((s + 1, s + 1))
    kkt[:s, :s] = 2.0 * (q @ q.T)
    kkt[:s, s] = 1.0
    kkt[s, :s] = 1.0
    rhs = np.concatenate([2.0 * (q @ t), [1.0]])
    try:
        sol = np.linalg.solve(kkt, rhs)
    except np.linalg.LinAlgError:
        sol = np.linalg.lstsq(kkt, rhs, rcond=None)[0]
    return sol[:s]


def _simplex_corrective(q, t, w):
    """Minimize ||w @ q - t|| over the simplex on the current active set,
    starting from a feasible w (Wolfe's minor cycles)."""
    for _ in range(10 * q.shape[0] + 20):
        v = _affine_minimizer(q, t)
        if np.all(v >= -1e-14):
            v = np.maximum(v, 0.0)
            return v / max(np.sum(v), 1e-300)
        diff = w - v
        mask = diff > 1e-15
        if not np.any(mask):
            return w
        theta = min(1.0, max(0.0, float(np.min(w[mask] / diff[mask]))))
        w = (1.0 - theta) * w + theta * v
        w[w < 1e-15] = 0.0
        total = np.sum(w)
        if total <= 0.0:
            w = np.maximum(v, 0.0)
            total = np.sum(w)
        w = w / total
    return w


def hull_distance(target, points, max_iter: int = 10000, gap_tol: float = 1e-10):
    """Euclidean distance from ``target`` to conv(points), with certifying weights.

    Fully corrective Frank-Wolfe over the simplex: the linear step picks the
    list point most aligned with the descent direction and the active set is
    then re-solved exactly, so membership cases end with an (almost) exact
    convex combination instead of a slowly decaying tail.

    Returns (distance, weights); weights is a convex-coefficient vector over
    the input list reconstructing the projection of target onto the hull.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    if pts.size == 0:
        raise EmptyInput("hull_distance needs at least one point")
    t = np.asarray(target, dtype=np.float64).reshape(-1)
    if t.shape[0] != pts.shape[1]:
        raise ValueError(f"target has dim {t.shape[0]}, points have dim {pts.shape[1]}")
    n = pts.shape[0]

    start = int(np.argmin(np.einsum("ij,ij->i", pts - t, pts - t)))
    active = [start]
    w_active = np.array([1.0])
    x = pts[start].copy()
    scale = 1.0 + float(np.max(np.einsum("ij,ij->i", pts - t, pts - t)))
    for _ in range(max_iter):
        resid = x - t
        scores = pts @ resid
        i_new = int(np.argmin(scores))
        gap = 2.0 * (float(resid @ x) - float(scores[i_new]))
        if gap <= gap_tol * scale:
            break
        if i_new not in active:
            active.append(i_new)
            w_active = np.concatenate([w_active, [0.0]])
        q = pts[active]
        w_active = _simplex_corrective(q, t, w_active)
        keep = w_active > 0.0
        active = [a for a, kp in zip(active, keep) if kp]
        w_active = w_active[keep]
        x_new = w_active @ pts[active]
        if float(np.dot(x - x_new, x - x_new)) <= 1e-32 * scale:
            x = x_new
            break
        x = x_new

    weights = np.zeros(n)
    for a, wa in zip(active, w_active):
        weights[a] += wa
    return float(np.linalg.norm(x - t)), weights
