"""Operator tuples: the data model, elementary functionals, and generators.

A tuple A = (A_1, ..., A_d) of same-sized square complex matrices is viewed
as the column operator x -> (A_1 x, ..., A_d x); its norm is the square root
of the largest eigenvalue of sum_j A_j* A_j.
"""

from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .config import DIM_CAP
from .errors import (
    ConfigError,
    ConsistencyError,
    EmptyInput,
    LengthMismatch,
    NotUnitVector,
    SizeOverflow,
    UnknownName,
)
from .linalg import as_matrix, hermitian_eig, kron

__all__ = [
    "OperatorTuple",
    "BlockSpec",
    "FactorSpec",
    "gram",
    "tuple_norm",
    "shift",
    "variance",
    "variance_gradient",
    "is_doubly_commuting",
    "gen_doubly",
    "gen_toeplitz",
    "gen_commuting_normal",
    "gallery",
    "random_unitary",
    "tuple_to_json_dict",
    "tuple_from_json_dict",
]


@dataclass(frozen=True)
class OperatorTuple:
    """Ordered tuple of d square n x n complex matrices."""

    matrices: tuple

    def __post_init__(self):
        mats = tuple(as_matrix(m) for m in self.matrices)
        if len(mats) < 1:
            raise EmptyInput("an operator tuple needs at least one matrix")
        n = mats[0].shape[0]
        for m in mats:
            if m.shape != (n, n):
                raise ValueError(
                    f"all matrices must be square of equal size, got {[x.shape for x in mats]}"
                )
        for m in mats:
            m.setflags(write=False)
        object.__setattr__(self, "matrices", mats)

    @property
    def d(self) -> int:
        return len(self.matrices)

    @property
    def n(self) -> int:
        return self.matrices[0].shape[0]

    def stack(self) -> np.ndarray:
        """(d, n, n) contiguous array of the matrices."""
        return np.ascontiguousarray(np.stack(self.matrices))

    def stack_adjoint(self) -> np.ndarray:
        """(d, n, n) array of the adjoints."""
        return np.ascontiguousarray(np.stack([m.conj().T for m in self.matrices]))


def gram(a: OperatorTuple) -> np.ndarray:
    """sum_j A_j* A_j, exactly symmetrized; positive semidefinite."""
    g = np.zeros((a.n, a.n), dtype=np.complex128)
    for m in a.matrices:
        g += m.conj().T @ m
    return 0.5 * (g + g.conj().T)


def tuple_norm(a: OperatorTuple) -> float:
    """sqrt of the top eigenvalue of the gram matrix."""
    w = np.linalg.eigvalsh(gram(a))
    return float(np.sqrt(max(w[-1], 0.0)))


def shift(a: OperatorTuple, z) -> OperatorTuple:
    """Componentwise A_j - z_j I."""
    z = np.asarray(z, dtype=np.complex128).reshape(-1)
    if z.shape[0] != a.d:
        raise LengthMismatch(f"shift has length {z.shape[0]}, tuple has d={a.d}")
    eye = np.eye(a.n, dtype=np.complex128)
    return OperatorTuple(tuple(m - zj * eye for m, zj in zip(a.matrices, z)))


def _check_unit(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.complex128).reshape(-1)
    nrm = np.linalg.norm(x)
    if abs(nrm - 1.0) > 1e-10:
        raise NotUnitVector(f"||x|| = {nrm!r} is not 1 within 1e-10")
    return x


def variance(a: OperatorTuple, x) -> float:
    """||A x||^2 - sum_j |<x|A_j x>|^2 for a unit vector x.

    Clamped to zero from below at magnitude 1e-12; a larger negative value
    indicates an internal inconsistency and raises.
    """
    x = _check_unit(x)
    if x.shape[0] != a.n:
        raise ValueError(f"vector has length {x.shape[0]}, tuple dimension is {a.n}")
    total = 0.0
    for m in a.matrices:
        mx = m @ x
        total += float(np.real(np.vdot(mx, mx)))
        total -= abs(np.vdot(x, mx)) ** 2
    if total < 0.0:
        scale = 1.0 + sum(float(np.linalg.norm(m)) ** 2 for m in a.matrices)
        if total < -1e-12 * scale:
            raise ConsistencyError(f"variance evaluated to {total}, far below zero")
        total = 0.0
    return total


def variance_gradient(a: OperatorTuple, x) -> np.ndarray:
    """Euclidean gradient of the variance at x, projected onto the tangent
    space of the unit sphere (the objective is phase invariant)."""
    x = _check_unit(x)
    g = gram(a) @ x
    for m in a.matrices:
        mx = m @ x
        q = np.vdot(x, mx)
        g = g - (np.conj(q) * mx + q * (m.conj().T @ x))
    g = 2.0 * g
    return g - np.vdot(x, g) * x


class DoublyCommutingReport(NamedTuple):
    ok: bool
    max_residual: float


def is_doubly_commuting(a: OperatorTuple, tol: float = 1e-10) -> DoublyCommutingReport:
    """Check A_i A_j = A_j A_i and A_i* A_j = A_j A_i* for all i != j.

    The residual is the largest spectral norm over both families of
    commutators; ok means residual <= tol * (1 + tuple_norm^2).
    """
    worst = 0.0
    mats = a.matrices
    for i in range(a.d):
        for j in range(i + 1, a.d):
            worst = max(worst, np.linalg.norm(mats[i] @ mats[j] - mats[j] @ mats[i], 2))
            hi = mats[i].conj().T
            worst = max(worst, np.linalg.norm(hi @ mats[j] - mats[j] @ hi, 2))
            hj = mats[j].conj().T
            worst = max(worst, np.linalg.norm(hj @ mats[i] - mats[i] @ hj, 2))
    bound = tol * (1.0 + tuple_norm(a) ** 2)
    return DoublyCommutingReport(ok=bool(worst <= bound), max_residual=float(worst))


# ---------------------------------------------------------------------------
# generators
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BlockSpec:
    """One tensor block: factor sizes (p_1, ..., p_d) and, once materialized,
    the factor matrices X_j (p_j x p_j each)."""

    dims: tuple
    factors: Optional[tuple] = None

    def __post_init__(self):
        dims = tuple(int(p) for p in self.dims)
        if any(p < 1 for p in dims):
            raise ValueError(f"factor sizes must be >= 1, got {dims}")
        object.__setattr__(self, "dims", dims)
        if self.factors is not None:
            facs = tuple(as_matrix(f) for f in self.factors)
            if len(facs) != len(dims) or any(
                f.shape != (p, p) for f, p in zip(facs, dims)
            ):
                raise ValueError("factor matrices do not match the declared sizes")
            object.__setattr__(self, "factors", facs)

    @property
    def size(self) -> int:
        out = 1
        for p in self.dims:
            out *= p
        return out


@dataclass(frozen=True)
class FactorSpec:
    """Block-diagonal tensor structure: one BlockSpec per diagonal block.

    All blocks must declare the same tuple length d; the generated space
    dimension is the sum of the block sizes.
    """

    blocks: tuple

    def __post_init__(self):
        blocks = tuple(
            b if isinstance(b, BlockSpec) else BlockSpec(tuple(b)) for b in self.blocks
        )
        if not blocks:
            raise EmptyInput("FactorSpec needs at least one block")
        d = len(blocks[0].dims)
        if any(len(b.dims) != d for b in blocks):
            raise ValueError("all blocks must have the same tuple length d")
        object.__setattr__(self, "blocks", blocks)

    @property
    def d(self) -> int:
        return len(self.blocks[0].dims)

    @property
    def n(self) -> int:
        return sum(b.size for b in self.blocks)


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-ish random unitary from the QR decomposition of a complex Gaussian."""
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def _tensor_factor(factor: np.ndarray, dims, position: int) -> np.ndarray:
    """I x ... x X (at `position`) x ... x I over the given factor sizes."""
    out = np.eye(1, dtype=np.complex128)
    for j, p in enumerate(dims):
        out = kron(out, factor if j == position else np.eye(p, dtype=np.complex128))
    return out


def gen_doubly(spec: FactorSpec, seed: int = 0, conjugate: bool = False, cap: int = DIM_CAP):
    """Build a doubly commuting tuple in block-diagonal tensor form.

    Block k contributes A_{j,k} = I x ... x X_{j,k} x ... x I; blocks are
    stacked along the diagonal. Factors missing from the spec are drawn from
    a seeded complex Gaussian and returned materialized, so downstream checks
    can recompute everything. With conjugate=True the whole tuple is
    conjugated by a seeded random unitary, which preserves double
    commutativity but hides the block structure.
    """
    if spec.n > cap:
        raise SizeOverflow(f"total dimension {spec.n} exceeds cap {cap}")
    rng = np.random.default_rng(seed)
    blocks = []
    for b in spec.blocks:
        if b.factors is not None:
            blocks.append(b)
        else:
            facs = tuple(
                (rng.standard_normal((p, p)) + 1j * rng.standard_normal((p, p)))
                / np.sqrt(2.0)
                for p in b.dims
            )
            blocks.append(BlockSpec(b.dims, facs))
    materialized = FactorSpec(tuple(blocks))

    n = materialized.n
    d = materialized.d
    mats = [np.zeros((n, n), dtype=np.complex128) for _ in range(d)]
    offset = 0
    for b in materialized.blocks:
        m = b.size
        for j in range(d):
            mats[j][offset : offset + m, offset : offset + m] = _tensor_factor(
                b.factors[j], b.dims, j
            )
        offset += m
    if conjugate:
        u = random_unitary(n, rng)
        mats = [u @ m @ u.conj().T for m in mats]
    return OperatorTuple(tuple(mats)), materialized


def gen_toeplitz(symbols: Sequence[dict], n: int) -> OperatorTuple:
    """Finite Toeplitz sections: (A_j)_{r,s} = c^{(j)}_{r-s}.

    Each symbol is a mapping offset -> coefficient; offsets outside [-(n-1),
    n-1] are ignored. Positive offsets fill subdiagonals (c_1 is the first
    subdiagonal), negative ones superdiagonals.
    """
    if n < 1:
        raise ValueError(f"section size must be >= 1, got {n}")
    if not symbols:
        raise EmptyInput("need at least one symbol")
    mats = []
    for sym in symbols:
        m = np.zeros((n, n), dtype=np.complex128)
        for offset, coeff in sym.items():
            offset = int(offset)
            if abs(offset) >= n:
                continue
            idx = np.arange(n - abs(offset))
            if offset >= 0:
                m[idx + offset, idx] = complex(coeff)
            else:
                m[idx, idx - offset] = complex(coeff)
        mats.append(m)
    return OperatorTuple(tuple(mats))


def gen_commuting_normal(points) -> OperatorTuple:
    """Commuting normal tuple with prescribed joint eigenvalues: d diagonal
    matrices whose k-th diagonal entries are the k-th point's coordinates."""
    pts = np.atleast_2d(np.asarray(points, dtype=np.complex128))
    if pts.size == 0:
        raise EmptyInput("need at least one joint eigenvalue")
    return OperatorTuple(tuple(np.diag(pts[:, j]) for j in range(pts.shape[1])))


_GALLERY = {
    "pauli": (
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ),
    "d2": (
        [[0, 1], [0, 0]],
        [[1, 0], [0, -1]],
    ),
    "ex2": (
        [[1, 0], [0, 0]],
        [[0, 0], [1, 0]],
    ),
}


def gallery(name: str) -> OperatorTuple:
    """Named 2x2 worked examples: 'pauli' (the three spin matrices), 'd2'
    (the strict-inequality pair), 'ex2' (the equality-without-convexity pair)."""
    try:
        mats = _GALLERY[name]
    except KeyError:
        raise UnknownName(f"unknown gallery name {name!r}; options: {sorted(_GALLERY)}")
    return OperatorTuple(tuple(np.asarray(m, dtype=np.complex128) for m in mats))


# ---------------------------------------------------------------------------
# JSON wire format
# ---------------------------------------------------------------------------


def tuple_to_json_dict(a: OperatorTuple) -> dict:
    """{"d": ..., "n": ..., "matrices": [[[ [re, im], ... ]]]} structure."""
    return {
        "d": a.d,
        "n": a.n,
        "matrices": [
            [[[float(v.real), float(v.imag)] for v in row] for row in m]
            for m in a.matrices
        ],
    }


def tuple_from_json_dict(obj) -> OperatorTuple:
    """Parse the wire format, rejecting ragged or non-square data."""
    if not isinstance(obj, dict):
        raise ConfigError("tuple JSON must be an object")
    try:
        d = int(obj["d"])
        n = int(obj["n"])
        raw = obj["matrices"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"tuple JSON missing or malformed field: {exc}") from exc
    if not isinstance(raw, list) or len(raw) != d:
        raise ConfigError(f"expected {d} matrices, got {len(raw) if isinstance(raw, list) else type(raw)}")
    mats = []
    for m in raw:
        if not isinstance(m, list) or len(m) != n:
            raise ConfigError("matrix is not an n-row list")
        rows = []
        for row in m:
            if not isinstance(row, list) or len(row) != n:
                raise ConfigError("matrix row has wrong length (non-square or ragged data)")
            entries = []
            for v in row:
                if not isinstance(v, list) or len(v) != 2:
                    raise ConfigError("matrix entry must be a [re, im] pair")
                re, im = float(v[0]), float(v[1])
                if not (np.isfinite(re) and np.isfinite(im)):
                    raise ConfigError("matrix entries must be finite")
                entries.append(complex(re, im))
            rows.append(entries)
        mats.append(np.asarray(rows, dtype=np.complex128))
    return OperatorTuple(tuple(mats))
