"""Optimization engines: distance to scalar tuples (convex) and maximal
variance on the unit sphere (non-convex, restarted).

The distance objective f(z) = lambda_max(sum_j (A_j - z_j)^*(A_j - z_j)) is
lambda_max of a pencil affine in (re z, im z) plus ||z||^2, so it is
2-strongly convex with a unique minimizer. Descent directions come from the
minimal-norm element of the sampled subdifferential at the top eigenvalue
cluster; the norm of that element also bounds the distance to the optimum,
which is what the convergence test uses.
"""

from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from . import _kernels
from .config import TOL_GRAD, TOL_MEMBER
from .errors import NotNormalCommuting
from .linalg import hull_distance, smallest_enclosing_ball
from .ranges import Certificate, embed_real, membership_zero_in_convV, min_norm_quadform_image
from .tuples import OperatorTuple, gram, shift, tuple_norm, variance

__all__ = [
    "DistOptions",
    "VarianceOptions",
    "DistanceResult",
    "VarianceResult",
    "dist_to_scalars",
    "dist_objective_gradient",
    "chebyshev_radius_normal",
    "max_variance",
    "orthopair_sup",
]


@dataclass(frozen=True)
class DistOptions:
    tol_grad: float = TOL_GRAD
    tol_cert: float = 1e-7
    max_iter: int = 50000
    seed: int = 0
    init: Optional[tuple] = None  # starting shift, defaults to tr(A_j)/n
    cluster_rel: float = 1e-10

    def to_dict(self):
        return {
            "tol_grad": self.tol_grad,
            "tol_cert": self.tol_cert,
            "max_iter": self.max_iter,
            "seed": self.seed,
            "init": None if self.init is None else [[z.real, z.imag] for z in self.init],
            "cluster_rel": self.cluster_rel,
        }


@dataclass(frozen=True)
class VarianceOptions:
    restarts: int = 64
    max_iter: int = 1500
    seed: int = 0
    grad_tol_rel: float = 1e-12

    def to_dict(self):
        return {
            "restarts": self.restarts,
            "max_iter": self.max_iter,
            "seed": self.seed,
            "grad_tol_rel": self.grad_tol_rel,
        }


@dataclass(frozen=True)
class DistanceResult:
    z0: np.ndarray  # optimal shift in C^d
    dist: float
    iterations: int
    certificate_residual: float
    converged: bool
    subgrad_norm: float
    certificate: Certificate
    options: dict = field(default_factory=dict)

    @property
    def dist2(self) -> float:
        return self.dist * self.dist


@dataclass(frozen=True)
class VarianceResult:
    value: float
    argmax: np.ndarray
    restarts_used: int
    per_restart: np.ndarray
    options: dict = field(default_factory=dict)


class _Pencil:
    """f(z) = lambda_max(K(z)) + ||z||^2 with K affine in (re z, im z)."""

    def __init__(self, a: OperatorTuple):
        self.a = a
        self.g0 = gram(a)
        self.mats = a.stack()
        self.mats_h = a.stack_adjoint()
        self.d = a.d
        self.n = a.n

    def k_of(self, z: np.ndarray) -> np.ndarray:
        k = self.g0.copy()
        for j in range(self.d):
            k -= np.conj(z[j]) * self.mats[j] + z[j] * self.mats_h[j]
        return 0.5 * (k + k.conj().T)

    def value(self, z: np.ndarray) -> float:
        w = np.linalg.eigvalsh(self.k_of(z))
        return float(w[-1]) + float(np.real(np.vdot(z, z)))

    def eig(self, z: np.ndarray):
        w, v = np.linalg.eigh(self.k_of(z))
        return w, v

    def shifted_forms(self, z: np.ndarray, x: np.ndarray) -> np.ndarray:
        """w_j = <x|(A_j - z_j) x> for a unit vector x."""
        q = np.array([np.vdot(x, m @ x) for m in self.mats])
        return q - z

    def k1_of(self, u: np.ndarray) -> np.ndarray:
        """Derivative of K along the shift direction u."""
        k1 = np.zeros((self.n, self.n), dtype=np.complex128)
        for j in range(self.d):
            k1 -= np.conj(u[j]) * self.mats[j] + u[j] * self.mats_h[j]
        return 0.5 * (k1 + k1.conj().T)


def _min_norm_subgradient(pencil: _Pencil, z, basis, tol_grad_abs, max_iter=300):
    """Exact minimal-norm element of the subdifferential restricted to the
    top cluster: the subgradients are -2 w(T) with w_j(T) = tr((A_j - z_j) T)
    over density matrices T on the cluster, so the minimal-norm one is twice
    the nearest point to 0 of the quadratic-form image of the cluster
    compression of the shifted tuple."""
    if basis.shape[1] == 1:
        x = np.ascontiguousarray(basis[:, 0])
        c = np.array([np.vdot(x, pencil.mats[j] @ x) for j in range(pencil.d)]) - z
    else:
        shifted = [
            basis.conj().T @ (pencil.mats[j] @ basis) - z[j] * np.eye(basis.shape[1])
            for j in range(pencil.d)
        ]
        mats = np.ascontiguousarray(np.stack(shifted))
        mats_h = np.ascontiguousarray(np.stack([m.conj().T for m in shifted]))
        c, _, _, _, _ = min_norm_quadform_image(
            mats,
            mats_h,
            stop_tol=2.5e-3 * tol_grad_abs * tol_grad_abs,
            max_iter=max_iter,
            decided_tol=0.25 * tol_grad_abs * tol_grad_abs,
        )
    ghat = -2.0 * embed_real(c[None, :])[0]
    return ghat, float(np.linalg.norm(ghat))


def _hessian(pencil: _Pencil, w, v):
    """Real 2d x 2d Hessian of f at a simple top eigenvalue, from
    second-order perturbation of lambda_max plus the 2I of ||z||^2."""
    d = pencil.d
    x = v[:, -1]
    others = v[:, :-1]
    gaps = np.maximum(w[-1] - w[:-1], 1e-300)
    # derivative matrices of K: re z_j -> -(A_j + A_j*), im z_j -> i(A_j - A_j*)
    cross = np.empty((2 * d, others.shape[1]), dtype=np.complex128)
    for j in range(d):
        cross[2 * j] = others.conj().T @ (-(pencil.mats[j] + pencil.mats_h[j]) @ x)
        cross[2 * j + 1] = others.conj().T @ ((1j * (pencil.mats[j] - pencil.mats_h[j])) @ x)
    h = 2.0 * np.real((cross.conj() / gaps[None, :]) @ cross.T)
    h += 2.0 * np.eye(2 * d)
    return 0.5 * (h + h.T)


def _phi_derivs(pencil: _Pencil, z, u, k1, t):
    """First and second derivative of phi(t) = f(z + t u), via the top
    eigenpair of the pencil and second-order eigenvalue perturbation."""
    zt = z + t * u
    w, v = pencil.eig(zt)
    x = np.ascontiguousarray(v[:, -1])
    k1x = k1 @ x
    d1 = float(np.real(np.vdot(x, k1x))) + 2.0 * float(np.real(np.vdot(zt, u)))
    lam = w[-1]
    cross = v[:, :-1].conj().T @ k1x
    gaps = np.maximum(lam - w[:-1], 1e-14 * (1.0 + abs(lam)))
    d2 = 2.0 * float(np.real(np.vdot(u, u))) + 2.0 * float(np.sum(np.abs(cross) ** 2 / gaps))
    return d1, d2


def _line_search(pencil: _Pencil, z, u, f0):
    """Exact line search along u for the convex section phi(t) = f(z + t u):
    safeguarded Newton on phi' inside an expanding bracket.
    Returns (t, f(z + t u))."""
    k1 = pencil.k1_of(u)
    phi0, _ = _phi_derivs(pencil, z, u, k1, 0.0)
    if phi0 >= 0.0:
        return 0.0, f0
    hi = 1.0
    phi_hi, _ = _phi_derivs(pencil, z, u, k1, hi)
    grow = 0
    while phi_hi < 0.0 and grow < 60:
        hi *= 2.0
        phi_hi, _ = _phi_derivs(pencil, z, u, k1, hi)
        grow += 1
    lo = 0.0
    t = 0.5 * hi
    for _ in range(30):
        d1, d2 = _phi_derivs(pencil, z, u, k1, t)
        if d1 < 0.0:
            lo = t
        else:
            hi = t
        if hi - lo <= 1e-14 * (1.0 + hi) or abs(d1) <= 1e-16 * (1.0 + abs(f0)):
            break
        t_new = t - d1 / d2 if d2 > 0.0 else 0.5 * (lo + hi)
        if not (lo < t_new < hi):
            t_new = 0.5 * (lo + hi)
        t = t_new
    return t, pencil.value(z + t * u)


def _adaptive_subgradient(pencil: _Pencil, z, cluster_rel, tol_abs, width_floor=0.0, force_k=None, inner_iter=25):
    """Minimal-norm subgradient over an adaptive top group of eigenvalues.

    Without force_k, the group is every eigenvalue within
    max(width_floor, 1e-4 * scale) of the top; near a kink optimum the
    coalescing eigenvalues are therefore treated as one cluster, since a
    single-branch gradient only describes one side of the seam. With force_k
    the group is exactly the top k eigenvalues (used by the polish).

    Returns (ghat, gnorm, eps_used, lam, split): eps_used is the realized
    epsilon of the epsilon-subdifferential (largest in-group gap), which the
    caller must bound for a sound optimality certificate; split is the
    root-sum-square of the in-group gaps, zero exactly at group coalescence.
    """
    w, v = pencil.eig(z)
    lam = float(w[-1])
    base = max(cluster_rel * max(1.0, abs(lam)), 1e-14)
    if force_k is not None:
        k = max(1, min(int(force_k), w.shape[0]))
        idx = np.arange(w.shape[0] - k, w.shape[0])
    else:
        threshold = max(width_floor, base)
        if w.shape[0] > 1:
            split = lam - w[-2]
            if split <= 1e-4 * max(1.0, abs(lam)):
                threshold = max(threshold, 1.125 * split + base)
        idx = np.nonzero(w >= lam - threshold)[0]
    basis = np.ascontiguousarray(v[:, idx])
    ghat, gnorm = _min_norm_subgradient(pencil, z, basis, tol_abs, max_iter=inner_iter)
    gaps = lam - w[idx]
    eps_used = float(np.max(gaps)) + base
    split = float(np.sqrt(np.sum(gaps * gaps)))
    return ghat, gnorm, eps_used, lam, split


def _group_residual(pencil: _Pencil, z, k, cluster_rel, tol_abs):
    """Residual whose root is a minimizer with top multiplicity k: the
    minimal-norm subgradient over the top-k group stacked with the in-group
    eigenvalue gaps. Rotation invariant, hence smooth near such a minimizer
    even though individual eigenvectors are not."""
    w, v = pencil.eig(z)
    lam = float(w[-1])
    base = max(cluster_rel * max(1.0, abs(lam)), 1e-14)
    k = max(1, min(int(k), w.shape[0]))
    idx = np.arange(w.shape[0] - k, w.shape[0])
    basis = np.ascontiguousarray(v[:, idx])
    ghat, gnorm = _min_norm_subgradient(pencil, z, basis, tol_abs, max_iter=25)
    gaps = lam - w[idx[:-1]]
    res = np.concatenate([ghat, gaps])
    eps_used = (float(np.max(gaps)) if gaps.size else 0.0) + base
    return res, gnorm, eps_used, lam


def _gauss_newton_k(pencil: _Pencil, z0, k, cluster_rel, tol_abs, max_iter=40):
    """Damped Gauss-Newton with finite-difference Jacobian on the group
    residual. Returns (z, gnorm, eps_used, lam, success)."""
    z = np.array(z0, dtype=np.complex128)
    res, gnorm, eps_used, lam, = _group_residual(pencil, z, k, cluster_rel, tol_abs)
    rnorm = float(np.linalg.norm(res))
    d2 = 2 * pencil.d
    for _ in range(max_iter):
        scale = 1.0 + np.sqrt(max(lam + float(np.real(np.vdot(z, z))), 0.0))
        if gnorm <= 10.0 * tol_abs * scale and eps_used <= 1e-8 * (1.0 + abs(lam)):
            return z, gnorm, eps_used, lam, True
        h = 1e-7 * (1.0 + float(np.linalg.norm(z)))
        jac = np.empty((res.shape[0], d2))
        for a in range(d2):
            dz = np.zeros(d2)
            dz[a] = h
            dzc = dz[0::2] + 1j * dz[1::2]
            rp, _, _, _ = _group_residual(pencil, z + dzc, k, cluster_rel, tol_abs)
            rm, _, _, _ = _group_residual(pencil, z - dzc, k, cluster_rel, tol_abs)
            jac[:, a] = (rp - rm) / (2.0 * h)
        step = np.linalg.lstsq(jac, -res, rcond=None)[0]
        step_c = step[0::2] + 1j * step[1::2]
        tau = 1.0
        accepted = False
        for _ in range(12):
            z_try = z + tau * step_c
            r_t, gn_t, eps_t, lam_t = _group_residual(pencil, z_try, k, cluster_rel, tol_abs)
            rn_t = float(np.linalg.norm(r_t))
            if rn_t < rnorm * (1.0 - 1e-3):
                z, res, rnorm, gnorm, eps_used, lam = z_try, r_t, rn_t, gn_t, eps_t, lam_t
                accepted = True
                break
            tau *= 0.5
        if not accepted:
            break
    scale = 1.0 + np.sqrt(max(lam + float(np.real(np.vdot(z, z))), 0.0))
    ok = gnorm <= 10.0 * tol_abs * scale and eps_used <= 1e-8 * (1.0 + abs(lam))
    return z, gnorm, eps_used, lam, bool(ok)


def _polish_fixed_k(pencil: _Pencil, z0, k, cluster_rel, tol_abs, max_rounds=220):
    """Compass search on gnorm^2 + split^2 for a fixed hypothesized top
    multiplicity k. Both terms vanish exactly at a minimizer whose top
    eigenvalue has multiplicity k, and 0 in the subdifferential certifies
    global optimality of the convex objective."""
    z = np.array(z0, dtype=np.complex128)
    ghat, gnorm, eps_used, lam, split = _adaptive_subgradient(
        pencil, z, cluster_rel, tol_abs, force_k=k
    )
    obj = gnorm * gnorm + split * split
    d2 = 2 * pencil.d
    dirs = []
    for j in range(d2):
        e = np.zeros(d2)
        e[j] = 1.0
        dirs.append(e.copy())
        dirs.append(-e)
    step = 3e-2 * (1.0 + float(np.linalg.norm(z)))
    floor = 1e-13 * (1.0 + float(np.linalg.norm(z)))
    scale = 1.0 + np.sqrt(max(lam + float(np.real(np.vdot(z, z))), 0.0))
    target = 10.0 * tol_abs * scale + 1e-8 * (1.0 + abs(lam))
    pattern = None  # accumulated direction of recent successful moves
    for _ in range(max_rounds):
        if step <= floor:
            break
        if gnorm <= 10.0 * tol_abs * scale and eps_used <= 1e-8 * (1.0 + abs(lam)):
            break
        if np.sqrt(obj) > target + 500.0 * (1.0 + abs(lam)) * step:
            break  # residual cannot be closed within the remaining travel:
            # wrong multiplicity hypothesis (its gap term has an O(1) floor)
        if pattern is not None:
            # Hooke-Jeeves pattern move: follow the valley before polling
            z_try = z + pattern
            g_t, gn_t, eps_t, lam_t, sp_t = _adaptive_subgradient(
                pencil, z_try, cluster_rel, tol_abs, force_k=k, inner_iter=12
            )
            o_t = gn_t * gn_t + sp_t * sp_t
            if o_t < obj * (1.0 - 1e-12):
                obj, ghat, gnorm, eps_used, lam, split, z = (
                    o_t, g_t, gn_t, eps_t, lam_t, sp_t, z_try
                )
                pattern = pattern * 1.7
                continue
            pattern = None
        best = None
        cand = list(dirs)
        if gnorm > 0.0:
            cand.extend([ghat / gnorm, -ghat / gnorm])
        for e in cand:
            z_try = z + step * (e[0::2] + 1j * e[1::2])
            g_t, gn_t, eps_t, lam_t, sp_t = _adaptive_subgradient(
                pencil, z_try, cluster_rel, tol_abs, force_k=k, inner_iter=12
            )
            o_t = gn_t * gn_t + sp_t * sp_t
            if best is None or o_t < best[0]:
                best = (o_t, g_t, gn_t, eps_t, lam_t, sp_t, z_try)
        if best is not None and best[0] < obj * (1.0 - 1e-12):
            pattern = best[6] - z
            obj, ghat, gnorm, eps_used, lam, split, z = best
            step *= 1.7
        else:
            step *= 0.4
    return z, ghat, gnorm, eps_used, lam, obj


def _compass_polish(pencil: _Pencil, z, cluster_rel, tol_abs):
    """Polish the shift by minimizing the subgradient norm directly.

    Value-based descent cannot push the iterate error below the float
    resolution of f; the subgradient norm has no such wall. The top
    multiplicity at the optimum is unknown, so candidate group sizes are
    tried in turn (the size suggested by the current spectrum first) until
    one closes both the minimal-norm subgradient and the group coalescence.
    """
    w0, _ = pencil.eig(z)
    lam0 = float(w0[-1])
    entry_k = int(np.sum(w0 >= lam0 - 1e-4 * max(1.0, abs(lam0))))
    cap = min(pencil.n, 2 * pencil.d + 2)
    order = [entry_k, 2, 3, 1] + list(range(4, cap + 1))
    ks = []
    for k in order:
        if 1 <= k <= cap and k not in ks:
            ks.append(k)
    # cheap Gauss-Newton first for the small multiplicities (closed-form
    # minimal-norm evaluations), then the robust compass walk for every
    # candidate size until one certifies
    for k in (kk for kk in ks if kk <= 2):
        z_k, gn_k, eps_k, lam_k, ok = _gauss_newton_k(pencil, z, k, cluster_rel, tol_abs)
        if ok:
            g_k, gn_k, eps_k, lam_k, _ = _adaptive_subgradient(
                pencil, z_k, cluster_rel, tol_abs, force_k=k
            )
            return z_k, g_k, gn_k, eps_k, lam_k
    best = None
    for k in ks:
        z_k, g_k, gn_k, eps_k, lam_k, obj_k = _polish_fixed_k(
            pencil, z, k, cluster_rel, tol_abs
        )
        scale_k = 1.0 + np.sqrt(max(lam_k + float(np.real(np.vdot(z_k, z_k))), 0.0))
        if gn_k <= 10.0 * tol_abs * scale_k and eps_k <= 1e-8 * (1.0 + abs(lam_k)):
            return z_k, g_k, gn_k, eps_k, lam_k
        if best is None or obj_k < best[0]:
            best = (obj_k, z_k, g_k, gn_k, eps_k, lam_k)
    _, z_b, g_b, gn_b, eps_b, lam_b = best
    return z_b, g_b, gn_b, eps_b, lam_b


def dist_to_scalars(a: OperatorTuple, opts: DistOptions = DistOptions()) -> DistanceResult:
    """Minimize f(z) = lambda_max(sum_j (A_j - z_j)^*(A_j - z_j)) over C^d.

    Starts at the trace center z_j = tr(A_j)/n. At each iterate a descent
    direction comes from a damped Newton step while the top eigenvalue is
    simple, and otherwise from the exact minimal-norm element of the
    top-cluster subdifferential followed by an exact line search; a vanishing
    minimal-norm element certifies optimality (the objective is 2-strongly
    convex, so that norm also bounds the distance to the unique minimizer).
    Returns the distance sqrt(f) and the density-matrix certificate of the
    shifted tuple.
    """
    pencil = _Pencil(a)
    if opts.init is not None:
        z = np.asarray(opts.init, dtype=np.complex128).reshape(-1)
        if z.shape[0] != a.d:
            raise ValueError("init shift has wrong length")
    else:
        z = np.array([np.trace(m) / a.n for m in a.matrices], dtype=np.complex128)

    f = pencil.value(z)
    widen = 1.0
    converged = False
    gnorm = np.inf
    iterations = 0
    for iterations in range(1, opts.max_iter + 1):
        w, v = pencil.eig(z)
        lam = w[-1]
        scale = 1.0 + np.sqrt(max(lam + np.real(np.vdot(z, z)), 0.0))
        gap_rel = (lam - w[-2]) / max(abs(lam), 1e-300) if w.shape[0] > 1 else np.inf

        if gap_rel > 1e-4 and widen == 1.0:
            # smooth regime: damped Newton on the gradient; not limited by
            # the float resolution of f the way a value line search is
            x = np.ascontiguousarray(v[:, -1])
            forms = pencil.shifted_forms(z, x)
            grad = -2.0 * embed_real(forms[None, :])[0]
            gnorm = float(np.linalg.norm(grad))
            if gnorm <= opts.tol_grad * scale:
                converged = True
                break
            hess = _hessian(pencil, w, v)
            step = np.linalg.solve(hess, -grad)
            step_c = step[0::2] + 1j * step[1::2]
            tau = 1.0
            accepted = False
            for _ in range(25):
                z_try = z + tau * step_c
                w_t, v_t = pencil.eig(z_try)
                if w_t.shape[0] > 1 and (w_t[-1] - w_t[-2]) <= 1e-12 * abs(w_t[-1]):
                    tau *= 0.5  # stepped into a degeneracy, shorten
                    continue
                forms_t = pencil.shifted_forms(z_try, np.ascontiguousarray(v_t[:, -1]))
                if np.linalg.norm(-2.0 * embed_real(forms_t[None, :])[0]) < 0.9 * gnorm:
                    z = z_try
                    f = pencil.value(z)
                    accepted = True
                    break
                tau *= 0.5
            if accepted:
                continue
            # Newton made no progress (effectively nonsmooth): fall through

        base = max(opts.cluster_rel * max(1.0, abs(lam)), 1e-14)
        ghat, gnorm, eps_used, lam, _ = _adaptive_subgradient(
            pencil, z, opts.cluster_rel, opts.tol_grad * scale,
            width_floor=widen * base, inner_iter=60,
        )
        if gnorm <= opts.tol_grad * scale and eps_used <= 1e-8 * (1.0 + abs(lam)):
            converged = True
            break
        if gnorm > opts.tol_grad * scale:
            u = -(ghat[0::2] + 1j * ghat[1::2])
            u = u / np.linalg.norm(u)
            t, f_new = _line_search(pencil, z, u, f)
        else:
            t, f_new = 0.0, f  # epsilon-stationary at a too-wide cluster
        if eps_used > 2.0 * base and f - f_new <= 1e-9 * (1.0 + abs(f)):
            break  # seam crawl: the subgradient polish finishes the job
        if f - f_new <= 1e-14 * (1.0 + abs(f)):
            if widen < 1e3:
                widen *= 32.0  # stalled: widen the cluster (epsilon-subdifferential)
                continue
            break  # value plateau: hand over to the subgradient polish
        z = z + t * u
        f = f_new
        widen = 1.0

    if not converged:
        # value descent has hit the resolution of f; recover shift precision
        # by polishing the subgradient norm directly
        z, ghat, gnorm, eps_used, lam = _compass_polish(
            pencil, z, opts.cluster_rel, opts.tol_grad
        )
        scale = 1.0 + np.sqrt(max(lam + np.real(np.vdot(z, z)), 0.0))
        converged = bool(
            gnorm <= opts.tol_grad * scale * 10.0 and eps_used <= 1e-8 * (1.0 + abs(lam))
        )

    f = pencil.value(z)
    dist = float(np.sqrt(max(f, 0.0)))
    member = membership_zero_in_convV(shift(a, z), tol_member=opts.tol_cert)
    cert_ok = member.residual <= opts.tol_cert * (1.0 + dist)
    return DistanceResult(
        z0=z,
        dist=dist,
        iterations=iterations,
        certificate_residual=member.residual,
        converged=bool(converged and cert_ok),
        subgrad_norm=float(gnorm),
        certificate=member.certificate,
        options=opts.to_dict(),
    )


def dist_objective_gradient(a: OperatorTuple, z):
    """Objective f(z), its gradient in R^{2d} at a simple top eigenvalue, and
    the top eigenvalue gap (for finite-difference validation)."""
    pencil = _Pencil(a)
    z = np.asarray(z, dtype=np.complex128).reshape(-1)
    w, v = pencil.eig(z)
    x = np.ascontiguousarray(v[:, -1])
    forms = pencil.shifted_forms(z, x)
    grad = -2.0 * embed_real(forms[None, :])[0]
    f = float(w[-1]) + float(np.real(np.vdot(z, z)))
    gap = float(w[-1] - w[-2]) if w.shape[0] > 1 else np.inf
    return f, grad, gap


class ChebyshevResult(NamedTuple):
    radius: float
    center: np.ndarray
    ball: object


def chebyshev_radius_normal(a: OperatorTuple, tol: float = 1e-10, seed: int = 0) -> ChebyshevResult:
    """Chebyshev radius and center of the joint spectrum of a commuting
    normal tuple, via the smallest enclosing ball in R^{2d}.

    Accepts diagonal tuples directly; otherwise attempts a simultaneous
    unitary diagonalization through a generic Hermitian combination and
    raises NotNormalCommuting if the residual exceeds tolerance.
    """
    scale = 1.0 + tuple_norm(a)
    off = 0.0
    for m in a.matrices:
        off = max(off, float(np.max(np.abs(m - np.diag(np.diag(m))))))
    if off <= tol * scale:
        joint = np.stack([np.diag(m) for m in a.matrices], axis=1)
    else:
        rng = np.random.default_rng(seed)
        coeff = rng.standard_normal(a.d) + 1j * rng.standard_normal(a.d)
        h = np.zeros((a.n, a.n), dtype=np.complex128)
        for c, m in zip(coeff, a.matrices):
            h += c * m + np.conj(c) * m.conj().T
        _, u = np.linalg.eigh(0.5 * (h + h.conj().T))
        rotated = [u.conj().T @ m @ u for m in a.matrices]
        resid = max(
            float(np.max(np.abs(m - np.diag(np.diag(m))))) for m in rotated
        )
        if resid > 1e-8 * scale:
            raise NotNormalCommuting(
                f"simultaneous diagonalization residual {resid:.3e} exceeds tolerance"
            )
        joint = np.stack([np.diag(m) for m in rotated], axis=1)
    ball = smallest_enclosing_ball(embed_real(joint))
    center = ball.center[0::2] + 1j * ball.center[1::2]
    return ChebyshevResult(radius=float(ball.radius), center=center, ball=ball)


def _variance_starts(a: OperatorTuple, restarts: int, rng: np.random.Generator):
    """Structured starts (top eigenvectors of the trace-centered gram) plus
    seeded random unit vectors."""
    center = np.array([np.trace(m) / a.n for m in a.matrices], dtype=np.complex128)
    g0 = gram(shift(a, center))
    _, v = np.linalg.eigh(g0)
    n_structured = min(a.n, max(1, restarts // 4), 8, restarts)
    starts = np.empty((restarts, a.n), dtype=np.complex128)
    for i in range(n_structured):
        starts[i] = v[:, -(i + 1)]
    if restarts > n_structured:
        x = rng.standard_normal((restarts - n_structured, a.n)) + 1j * rng.standard_normal(
            (restarts - n_structured, a.n)
        )
        starts[n_structured:] = x / np.linalg.norm(x, axis=1, keepdims=True)
    return starts


def max_variance(a: OperatorTuple, opts: VarianceOptions = VarianceOptions()) -> VarianceResult:
    """Maximize the variance over the unit sphere by projected gradient
    ascent with seeded restarts.

    The returned value is variance(A, argmax) recomputed exactly, hence a
    certified lower bound for the supremum. Ties between restarts (within
    1e-12) resolve to the lowest restart index.
    """
    rng = np.random.default_rng(opts.seed)
    starts = _variance_starts(a, opts.restarts, rng)
    g = gram(a)
    tn2 = float(np.linalg.eigvalsh(g)[-1])
    grad_tol = opts.grad_tol_rel * (1.0 + tn2)
    step0 = 0.5 / (1.0 + tn2)
    vals, xs = _kernels.variance_restarts(
        g, a.stack(), a.stack_adjoint(), starts, opts.max_iter, grad_tol, step0
    )
    best = 0
    for i in range(1, vals.shape[0]):
        if vals[i] > vals[best] + 1e-12:
            best = i
    x = xs[best] / np.linalg.norm(xs[best])
    value = variance(a, x)
    return VarianceResult(
        value=value,
        argmax=x,
        restarts_used=int(vals.shape[0]),
        per_restart=vals,
        options=opts.to_dict(),
    )


def orthopair_sup(a: OperatorTuple, opts: VarianceOptions = VarianceOptions()) -> float:
    """sup |<Ax|y>| over unit x and unit y in the d-fold sum with <x|y_j> = 0.

    For fixed x the inner maximum is attained at the normalized projection of
    (A_1 x, ..., A_d x) away from x componentwise, with value
    sqrt(sum_j ||(I - xx*)A_j x||^2) = sqrt(variance(A, x)); the outer
    supremum is therefore sqrt(max variance).
    """
    return float(np.sqrt(max_variance(a, opts).value))
