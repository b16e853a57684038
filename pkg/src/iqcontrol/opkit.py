"""Dense complex-matrix kernel.

Construction helpers, tensor products, partial trace over the probe,
Hermitian eigendecomposition, unitary matrix exponentials and the trace
distance.  Everything operates on plain ``numpy`` arrays (``complex128``);
density matrices are validated, not wrapped in a class.  All functions are
pure, so they are safe to call from concurrent contexts.

Tensor ordering is system (x) probe throughout.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionError, HermiticityError, StateError

# Tolerances: double precision leaves ample headroom at dims <= 64.
HERM_TOL = 1e-10
TRACE_TOL = 1e-12
PSD_FLOOR = -1e-10


def as_matrix(a) -> np.ndarray:
    """Coerce to a finite, square complex matrix."""
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m.view(float))):
        raise StateError("matrix contains NaN or Inf entries")
    return m


def dag(a: np.ndarray) -> np.ndarray:
    """Conjugate transpose."""
    return np.asarray(a).conj().T


def herm_defect(a: np.ndarray) -> float:
    """Max-entry deviation from Hermiticity."""
    a = np.asarray(a)
    return float(np.max(np.abs(a - a.conj().T), initial=0.0))


def require_hermitian(a, tol: float = HERM_TOL) -> np.ndarray:
    m = as_matrix(a)
    d = herm_defect(m)
    if d > tol:
        raise HermiticityError(f"matrix is not Hermitian (defect {d:.3e} > {tol:.0e})")
    return m


def validate_density_matrix(rho, herm_tol: float = TRACE_TOL,
                            trace_tol: float = TRACE_TOL,
                            psd_floor: float = PSD_FLOOR) -> np.ndarray:
    """Check Hermiticity, unit trace and positivity; return the array."""
    m = as_matrix(rho)
    d = herm_defect(m)
    if d > herm_tol:
        raise StateError(f"density matrix not Hermitian (defect {d:.3e})")
    tr = complex(np.trace(m))
    if abs(tr - 1.0) > trace_tol:
        raise StateError(f"density matrix trace {tr} differs from 1")
    evals = np.linalg.eigvalsh(0.5 * (m + m.conj().T))
    if evals.min() < psd_floor:
        raise StateError(f"density matrix has eigenvalue {evals.min():.3e} < {psd_floor:.0e}")
    return m


def kron(a, b) -> np.ndarray:
    """Kronecker product (system factor first)."""
    return np.kron(as_matrix(a), as_matrix(b))


def partial_trace_probe(rho, dim_s: int, dim_p: int) -> np.ndarray:
    """Trace out the probe from a (dim_s*dim_p)-dimensional operator.

    The composite ordering is system (x) probe, so the probe occupies the
    inner (fast) index.
    """
    m = as_matrix(rho)
    if m.shape[0] != dim_s * dim_p:
        raise DimensionError(
            f"operator dim {m.shape[0]} != dim_s*dim_p = {dim_s * dim_p}")
    return np.trace(m.reshape(dim_s, dim_p, dim_s, dim_p), axis1=1, axis2=3)


def eig_hermitian(a, tol: float = HERM_TOL):
    """Eigendecomposition of a Hermitian matrix.

    Returns ``(values, vectors)`` with values ascending and orthonormal
    eigenvector columns.  Each eigenvector's phase is fixed by making its
    largest-magnitude component real and positive, so downstream phase
    extractions are deterministic.
    """
    m = require_hermitian(a, tol)
    values, vectors = np.linalg.eigh(m)
    for k in range(vectors.shape[1]):
        col = vectors[:, k]
        i = int(np.argmax(np.abs(col)))
        ph = col[i]
        if abs(ph) > 0:
            vectors[:, k] = col * (abs(ph) / ph)
    return values, vectors


def expm_i_hermitian(h, t: float, tol: float = HERM_TOL) -> np.ndarray:
    """exp(-i h t) for Hermitian h, via eigendecomposition.

    Unitary up to the eigensolver tolerance; exact at t = 0.
    """
    values, vectors = eig_hermitian(h, tol)
    phases = np.exp(-1j * values * t)
    return (vectors * phases) @ dag(vectors)


def trace_distance(a, b) -> float:
    """Trace distance (1/2)||a - b||_1 between two density matrices."""
    ma, mb = as_matrix(a), as_matrix(b)
    if ma.shape != mb.shape:
        raise DimensionError(f"shape mismatch {ma.shape} vs {mb.shape}")
    diff = ma - mb
    evals = np.linalg.eigvalsh(0.5 * (diff + diff.conj().T))
    return float(0.5 * np.sum(np.abs(evals)))
