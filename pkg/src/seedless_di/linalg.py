"""Dense complex-matrix primitives shared by all modules.

Everything here is plain ``numpy.complex128``; operators on composite
systems use a fixed site list ``dims`` and big-endian Kronecker order
(first factor varies slowest). Dimensions stay desk-scale, so dense
eigensolves and SVDs are used throughout.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

HERMITICITY_TOL = 1e-12
PSD_TOL = -1e-10
DIM_GUARD = 2**12


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product, first factor varying slowest."""
    return np.kron(np.asarray(a), np.asarray(b))


def kron_all(mats: Sequence[np.ndarray]) -> np.ndarray:
    out = np.asarray(mats[0], dtype=complex)
    for m in mats[1:]:
        out = np.kron(out, m)
    return out


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conjugate(m.T)


def hermiticity_defect(m: np.ndarray) -> float:
    """Largest elementwise |M - M^dagger|."""
    return float(np.abs(m - dagger(m)).max())


def is_hermitian(m: np.ndarray, tol: float = HERMITICITY_TOL) -> bool:
    return hermiticity_defect(m) <= tol


def min_eigenvalue(m: np.ndarray) -> float:
    """Smallest eigenvalue of a Hermitian matrix."""
    return float(np.linalg.eigvalsh(m)[0])


def trace_norm(m: np.ndarray) -> float:
    """Sum of singular values."""
    return float(np.linalg.svd(np.atleast_2d(m), compute_uv=False).sum())


def embed_operator(op: np.ndarray, sites: Sequence[int], dims: Sequence[int]) -> np.ndarray:
    """Embed ``op`` acting on ``sites`` (in that leg order) into the full space.

    ``dims`` lists every site dimension in global order; the remaining
    sites receive identities.
    """
    sites = list(sites)
    rest = [i for i in range(len(dims)) if i not in sites]
    d_rest = int(np.prod([dims[i] for i in rest], dtype=np.int64)) if rest else 1
    big = np.kron(np.asarray(op, dtype=complex), np.eye(d_rest))
    order = sites + rest
    dims_perm = [dims[i] for i in order]
    tens = big.reshape(dims_perm + dims_perm)
    inv = np.argsort(order)
    n = len(dims)
    tens = tens.transpose(list(inv) + [n + i for i in inv])
    d_total = int(np.prod(dims, dtype=np.int64))
    return np.ascontiguousarray(tens.reshape(d_total, d_total))


def permute_sites(op: np.ndarray, dims_src: Sequence[int], src_of: Sequence[int]) -> np.ndarray:
    """Reorder tensor factors of a square operator.

    ``src_of[target_pos]`` names the source site that lands at
    ``target_pos``; ``dims_src`` are the source site dimensions.
    """
    dims_src = list(dims_src)
    n = len(dims_src)
    tens = np.asarray(op).reshape(dims_src + dims_src)
    axes = list(src_of) + [n + i for i in src_of]
    d = int(np.prod(dims_src, dtype=np.int64))
    return np.ascontiguousarray(tens.transpose(axes).reshape(d, d))


def partial_trace(rho: np.ndarray, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Trace out every site not in ``keep``; kept sites stay in global order."""
    dims = list(dims)
    n = len(dims)
    keep = sorted(keep)
    tens = np.asarray(rho).reshape(dims + dims)
    row = list(range(n))
    col = [i if i not in keep else n + i for i in range(n)]
    out = [i for i in keep] + [n + i for i in keep]
    res = np.einsum(tens, row + col, out)
    d_keep = int(np.prod([dims[i] for i in keep], dtype=np.int64)) if keep else 1
    return np.ascontiguousarray(res.reshape(d_keep, d_keep))


def ginibre_state(dim: int, rank: int | None = None, rng: np.random.Generator | None = None) -> np.ndarray:
    """Random density matrix G G^dagger / tr, with G complex Gaussian dim x rank."""
    rng = rng or np.random.default_rng()
    r = rank or dim
    g = rng.standard_normal((dim, r)) + 1j * rng.standard_normal((dim, r))
    m = g @ dagger(g)
    return m / np.trace(m).real


def _is_psd(herm: np.ndarray, tol: float) -> bool:
    """Cholesky fast path with an eigensolve fallback for the borderline case."""
    try:
        np.linalg.cholesky(herm + tol * np.eye(herm.shape[0]))
        return True
    except np.linalg.LinAlgError:
        return min_eigenvalue(herm) >= -tol


def validate_density(rho: np.ndarray, tol: float = 1e-10) -> None:
    """Raise ValueError unless rho is Hermitian, PSD and unit trace."""
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError("density matrix must be square")
    if hermiticity_defect(rho) > 1e-10:
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(rho).real - 1.0) > tol:
        raise ValueError("density matrix trace differs from 1")
    if not _is_psd((rho + dagger(rho)) / 2, tol):
        raise ValueError("density matrix has a negative eigenvalue")
