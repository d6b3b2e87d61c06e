"""Hot numeric kernels: numba-compiled fast path plus a pure-numpy fallback.

The numba path runs each sphere-optimization restart as a tight compiled
loop; the numpy path advances all restarts in lockstep with batched matrix
products. Set ``OTK_PURE_NUMPY=1`` to force the numpy path (used by
``benchmarks/bench_kernels.py`` to compare both).

All kernels are deterministic: restarts are reduced in index order and no
kernel draws random numbers (start vectors come from the caller).
"""

import os

import numpy as np

_ARMIJO = 1e-4
_SHRINK = 0.5
_GROW = 1.3
_STEP_MIN = 1e-20

_FORCE_NUMPY = os.environ.get("OTK_PURE_NUMPY", "").strip().lower() in ("1", "true", "yes")

if not _FORCE_NUMPY:
    try:
        from numba import njit as _njit

        HAVE_NUMBA = True
    except ImportError:  # pragma: no cover - numba is a declared dependency
        HAVE_NUMBA = False
else:
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and not _FORCE_NUMPY


def backend() -> str:
    return "numba" if USE_NUMBA else "numpy"


# ---------------------------------------------------------------------------
# numba path: one compiled loop per restart
# ---------------------------------------------------------------------------


def _variance_one(gram, mats, mats_h, x0, max_iter, grad_tol, step0):
    """Projected gradient ascent for x†Gx - sum_j |x†A_j x|² on the unit sphere."""
    d = mats.shape[0]
    n = x0.shape[0]
    x = x0 / np.sqrt(np.vdot(x0, x0).real)
    ax = np.empty((d, n), dtype=np.complex128)
    t = step0
    gx = gram @ x
    val = np.vdot(x, gx).real
    for j in range(d):
        ax[j] = mats[j] @ x
        q = np.vdot(x, ax[j])
        val -= (q * np.conj(q)).real
    iters = 0
    for iters in range(max_iter):
        grad = gx.copy()
        for j in range(d):
            q = np.vdot(x, ax[j])
            grad -= np.conj(q) * ax[j] + q * (mats_h[j] @ x)
        grad *= 2.0
        ip = np.vdot(x, grad)
        gt = grad - ip * x
        gsq = np.vdot(gt, gt).real
        if gsq <= grad_tol * grad_tol:
            break
        moved = False
        while t >= _STEP_MIN:
            y = x + t * gt
            y = y / np.sqrt(np.vdot(y, y).real)
            gy = gram @ y
            vy = np.vdot(y, gy).real
            for j in range(d):
                ay = mats[j] @ y
                q = np.vdot(y, ay)
                vy -= (q * np.conj(q)).real
            if vy >= val + _ARMIJO * t * gsq:
                x = y
                gx = gy
                val = vy
                for j in range(d):
                    ax[j] = mats[j] @ x
                t = t * _GROW
                moved = True
                break
            t = t * _SHRINK
        if not moved:
            break
    return val, x, iters


def _sqforms_one(mats, mats_h, x0, max_iter, grad_tol, step0):
    """Projected gradient descent for sum_j |x†A_j x|² on the unit sphere."""
    d = mats.shape[0]
    n = x0.shape[0]
    x = x0 / np.sqrt(np.vdot(x0, x0).real)
    ax = np.empty((d, n), dtype=np.complex128)
    val = 0.0
    for j in range(d):
        ax[j] = mats[j] @ x
        q = np.vdot(x, ax[j])
        val += (q * np.conj(q)).real
    t = step0
    iters = 0
    for iters in range(max_iter):
        grad = np.zeros(n, dtype=np.complex128)
        for j in range(d):
            q = np.vdot(x, ax[j])
            grad += np.conj(q) * ax[j] + q * (mats_h[j] @ x)
        grad *= 2.0
        ip = np.vdot(x, grad)
        gt = grad - ip * x
        gsq = np.vdot(gt, gt).real
        if gsq <= grad_tol * grad_tol:
            break
        moved = False
        while t >= _STEP_MIN:
            y = x - t * gt
            y = y / np.sqrt(np.vdot(y, y).real)
            vy = 0.0
            for j in range(d):
                ay = mats[j] @ y
                q = np.vdot(y, ay)
                vy += (q * np.conj(q)).real
            if vy <= val - _ARMIJO * t * gsq:
                x = y
                val = vy
                for j in range(d):
                    ax[j] = mats[j] @ x
                t = t * _GROW
                moved = True
                break
            t = t * _SHRINK
        if not moved:
            break
    return val, x, iters


def _variance_restarts_serial(gram, mats, mats_h, starts, max_iter, grad_tol, step0):
    r = starts.shape[0]
    vals = np.empty(r, dtype=np.float64)
    xs = np.empty_like(starts)
    for i in range(r):
        v, x, _ = _variance_one(gram, mats, mats_h, starts[i], max_iter, grad_tol, step0)
        vals[i] = v
        xs[i] = x
    return vals, xs


def _sqforms_restarts_serial(mats, mats_h, starts, max_iter, grad_tol, step0):
    r = starts.shape[0]
    vals = np.empty(r, dtype=np.float64)
    xs = np.empty_like(starts)
    for i in range(r):
        v, x, _ = _sqforms_one(mats, mats_h, starts[i], max_iter, grad_tol, step0)
        vals[i] = v
        xs[i] = x
    return vals, xs


def _quadforms_serial(mats, xs):
    r = xs.shape[0]
    d = mats.shape[0]
    out = np.empty((r, d), dtype=np.complex128)
    for i in range(r):
        for j in range(d):
            out[i, j] = np.vdot(xs[i], mats[j] @ xs[i])
    return out


# ---------------------------------------------------------------------------
# numpy path: all restarts in lockstep
# ---------------------------------------------------------------------------


def _batch_quadforms_np(mats, xs):
    ax = np.einsum("dij,rj->rdi", mats, xs)
    return np.einsum("ri,rdi->rd", xs.conj(), ax)


def _variance_vals_np(gram, mats, xs):
    gx = xs @ gram.T
    vals = np.einsum("ri,ri->r", xs.conj(), gx).real
    q = _batch_quadforms_np(mats, xs)
    return vals - np.sum(np.abs(q) ** 2, axis=1), gx


def _sqform_vals_np(mats, xs):
    q = _batch_quadforms_np(mats, xs)
    return np.sum(np.abs(q) ** 2, axis=1)


def _sphere_batch_np(objective_sign, gram, mats, mats_h, starts, max_iter, grad_tol, step0):
    """Lockstep PGD over the sphere for all restarts; sign +1 = ascend variance,
    sign -1 = descend sum of squared quadratic forms."""
    xs = starts / np.linalg.norm(starts, axis=1, keepdims=True)
    r = xs.shape[0]
    if objective_sign > 0:
        vals, _ = _variance_vals_np(gram, mats, xs)
    else:
        vals = _sqform_vals_np(mats, xs)
    t = np.full(r, step0)
    active = np.ones(r, dtype=bool)
    for _ in range(max_iter):
        idx = np.nonzero(active)[0]
        if idx.size == 0:
            break
        x = xs[idx]
        ax = np.einsum("dij,rj->rdi", mats, x)
        q = np.einsum("ri,rdi->rd", x.conj(), ax)
        hx = np.einsum("dij,rj->rdi", mats_h, x)
        sq_part = np.einsum("rd,rdi->ri", q.conj(), ax) + np.einsum("rd,rdi->ri", q, hx)
        if objective_sign > 0:
            grad = 2.0 * (x @ gram.T - sq_part)
        else:
            grad = 2.0 * sq_part
        ip = np.einsum("ri,ri->r", x.conj(), grad)
        gt = grad - ip[:, None] * x
        gsq = np.einsum("ri,ri->r", gt.conj(), gt).real
        conv = gsq <= grad_tol * grad_tol
        active[idx[conv]] = False
        trial = idx[~conv]
        gt = gt[~conv]
        gsq = gsq[~conv]
        while trial.size:
            tt = t[trial][:, None]
            if objective_sign > 0:
                y = xs[trial] + tt * gt
            else:
                y = xs[trial] - tt * gt
            y /= np.linalg.norm(y, axis=1, keepdims=True)
            if objective_sign > 0:
                vy, _ = _variance_vals_np(gram, mats, y)
                ok = vy >= vals[trial] + _ARMIJO * t[trial] * gsq
            else:
                vy = _sqform_vals_np(mats, y)
                ok = vy <= vals[trial] - _ARMIJO * t[trial] * gsq
            acc = trial[ok]
            xs[acc] = y[ok]
            vals[acc] = vy[ok]
            t[acc] *= _GROW
            trial = trial[~ok]
            gt = gt[~ok]
            gsq = gsq[~ok]
            t[trial] *= _SHRINK
            dead = t[trial] < _STEP_MIN
            active[trial[dead]] = False
            trial = trial[~dead]
            gt = gt[~dead]
            gsq = gsq[~dead]
    return vals, xs


def _variance_restarts_np(gram, mats, mats_h, starts, max_iter, grad_tol, step0):
    return _sphere_batch_np(+1, gram, mats, mats_h, starts, max_iter, grad_tol, step0)


def _sqforms_restarts_np(mats, mats_h, starts, max_iter, grad_tol, step0):
    return _sphere_batch_np(-1, None, mats, mats_h, starts, max_iter, grad_tol, step0)


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------

if USE_NUMBA:
    try:
        _variance_one = _njit(cache=True)(_variance_one)
        _sqforms_one = _njit(cache=True)(_sqforms_one)
        _variance_restarts_serial = _njit(cache=True)(_variance_restarts_serial)
        _sqforms_restarts_serial = _njit(cache=True)(_sqforms_restarts_serial)
        _quadforms_serial = _njit(cache=True)(_quadforms_serial)
    except RuntimeError:  # cache directory not writable
        _variance_one = _njit(cache=False)(_variance_one.py_func if hasattr(_variance_one, "py_func") else _variance_one)
        _sqforms_one = _njit(cache=False)(_sqforms_one)
        _variance_restarts_serial = _njit(cache=False)(_variance_restarts_serial)
        _sqforms_restarts_serial = _njit(cache=False)(_sqforms_restarts_serial)
        _quadforms_serial = _njit(cache=False)(_quadforms_serial)


def variance_restarts(gram, mats, mats_h, starts, max_iter=500, grad_tol=1e-10, step0=0.1):
    """Run projected-gradient variance ascent from every start vector.

    Returns (values, final_vectors), one row per restart, in restart order.
    """
    if USE_NUMBA:
        return _variance_restarts_serial(gram, mats, mats_h, starts, max_iter, grad_tol, step0)
    return _variance_restarts_np(gram, mats, mats_h, starts, max_iter, grad_tol, step0)


def sqforms_restarts(mats, mats_h, starts, max_iter=500, grad_tol=1e-10, step0=0.1):
    """Run projected-gradient descent of sum_j |x†A_j x|² from every start."""
    if USE_NUMBA:
        return _sqforms_restarts_serial(mats, mats_h, starts, max_iter, grad_tol, step0)
    return _sqforms_restarts_np(mats, mats_h, starts, max_iter, grad_tol, step0)


def quadforms(mats, xs):
    """Quadratic forms x†A_j x for a batch of vectors: returns (len(xs), d)."""
    xs = np.ascontiguousarray(xs)
    if USE_NUMBA:
        return _quadforms_serial(mats, xs)
    return _batch_quadforms_np(mats, xs)
