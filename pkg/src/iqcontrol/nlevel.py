"""Indirect control of an N-level system through an N-level probe.

For a product interaction h_s (x) h_p the composite propagator factorizes
over the probe eigenbasis into conditional unitaries
U_M = exp(-i E_M h_s t).  Weighting them by the probe's eigenbasis
diagonal gives a completely positive trace-preserving (Kraus) channel on
the system.  The reachability machinery expresses a diagonal target in a
reference evolved basis and solves for the probe spectrum on the
probability simplex.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from . import opkit
from .errors import (
    DimensionError,
    NormalizationError,
    ProbabilityError,
)


@dataclass(frozen=True)
class ProductHamiltonian:
    """Factor pair (h_s, h_p) with the probe factor's eigensystem.

    System and probe must share the same dimension.
    """

    h_s: np.ndarray
    h_p: np.ndarray
    probe_values: np.ndarray = field(init=False)
    probe_vectors: np.ndarray = field(init=False)

    def __post_init__(self):
        h_s = opkit.require_hermitian(self.h_s)
        h_p = opkit.require_hermitian(self.h_p)
        if h_s.shape != h_p.shape:
            raise DimensionError(
                f"system dim {h_s.shape[0]} != probe dim {h_p.shape[0]}")
        object.__setattr__(self, "h_s", h_s)
        object.__setattr__(self, "h_p", h_p)
        values, vectors = opkit.eig_hermitian(h_p)
        object.__setattr__(self, "probe_values", values)
        object.__setattr__(self, "probe_vectors", vectors)

    @property
    def dim(self) -> int:
        return self.h_s.shape[0]


@dataclass(frozen=True)
class ConditionalDecomposition:
    """Conditional unitaries U_M = exp(-i E_M h_s t), one per probe eigenvalue."""

    energies: np.ndarray
    unitaries: list
    probe_vectors: np.ndarray


@dataclass(frozen=True)
class KrausChannel:
    """Weighted conditional unitaries forming a CPTP map."""

    weights: np.ndarray
    unitaries: list

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if np.any(w < -1e-12) or abs(w.sum() - 1.0) > 1e-12:
            raise ProbabilityError(f"channel weights {w} are not a distribution")
        object.__setattr__(self, "weights", np.clip(w, 0.0, None))
        dim = self.unitaries[0].shape[0]
        for u in self.unitaries:
            if u.shape != (dim, dim):
                raise DimensionError("channel unitaries have mixed dimensions")
            defect = np.max(np.abs(opkit.dag(u) @ u - np.eye(dim)))
            if defect > 1e-10:
                raise ProbabilityError(
                    f"channel operator not unitary (defect {defect:.3e})")

    @property
    def dim(self) -> int:
        return self.unitaries[0].shape[0]

    def kraus_operators(self) -> list:
        return [np.sqrt(w) * u for w, u in zip(self.weights, self.unitaries)]


def conditional_decomposition(h: ProductHamiltonian, t: float
                              ) -> ConditionalDecomposition:
    """Split exp(-i (h_s (x) h_p) t) over the probe eigenbasis."""
    unitaries = [opkit.expm_i_hermitian(h.h_s, float(e) * t)
                 for e in h.probe_values]
    return ConditionalDecomposition(energies=h.probe_values.copy(),
                                    unitaries=unitaries,
                                    probe_vectors=h.probe_vectors.copy())


def kraus_from_probe(decomp: ConditionalDecomposition, probe_state
                     ) -> KrausChannel:
    """Channel with weights <M| rho_p |M> in the probe eigenbasis.

    Probe coherences between eigenvectors do not reach the reduced
    dynamics, so only the diagonal enters.
    """
    rho_p = opkit.as_matrix(probe_state)
    v = decomp.probe_vectors
    if rho_p.shape[0] != v.shape[0]:
        raise DimensionError(
            f"probe state dim {rho_p.shape[0]} != decomposition dim {v.shape[0]}")
    weights = np.real(np.einsum("iM,ij,jM->M", v.conj(), rho_p, v))
    return KrausChannel(weights=weights, unitaries=list(decomp.unitaries))


def apply_channel(ch: KrausChannel, rho) -> np.ndarray:
    """Sum_M K_M rho K_M^dag."""
    rho = opkit.as_matrix(rho)
    if rho.shape[0] != ch.dim:
        raise DimensionError(f"state dim {rho.shape[0]} != channel dim {ch.dim}")
    out = np.zeros_like(rho)
    for k in ch.kraus_operators():
        out += k @ rho @ opkit.dag(k)
    return out


def pure_state_transporter(src, dst, norm_tol: float = 1e-10) -> np.ndarray:
    """A unitary U with U src = dst (up to roundoff).

    Both vectors are completed to orthonormal bases by Gram-Schmidt
    against the standard basis in index order, skipping candidates whose
    residual falls below 1e-8; U maps basis to basis.
    """
    src = np.asarray(src, dtype=complex).ravel()
    dst = np.asarray(dst, dtype=complex).ravel()
    if src.shape != dst.shape:
        raise DimensionError("source and destination dimensions differ")
    for name, v in (("source", src), ("destination", dst)):
        n = np.linalg.norm(v)
        if abs(n - 1.0) > norm_tol:
            raise NormalizationError(f"{name} vector norm {n} != 1")

    def complete(v):
        dim = v.size
        basis = [v]
        for k in range(dim):
            cand = np.zeros(dim, dtype=complex)
            cand[k] = 1.0
            for b in basis:
                cand = cand - np.vdot(b, cand) * b
            n = np.linalg.norm(cand)
            if n >= 1e-8:
                basis.append(cand / n)
            if len(basis) == dim:
                break
        return np.column_stack(basis)

    b_src = complete(src)
    b_dst = complete(dst)
    return b_dst @ opkit.dag(b_src)


def expansion_coefficients(h_s, energies, t: float, ref_time: float
                           ) -> np.ndarray:
    """Coefficients c[alpha, j, m] = <ref_alpha| exp(-i h_s E_m t) |j>.

    The reference basis is {exp(-i h_s ref_time)|alpha>}, orthonormal by
    construction, so each (j, m) column has unit norm.
    """
    h_s = opkit.require_hermitian(h_s)
    energies = np.asarray(energies, dtype=float)
    w_ref = opkit.expm_i_hermitian(h_s, ref_time)
    c = np.empty((h_s.shape[0], h_s.shape[0], energies.size), dtype=complex)
    for m, e in enumerate(energies):
        c[:, :, m] = opkit.dag(w_ref) @ opkit.expm_i_hermitian(h_s, float(e) * t)
    return c


@dataclass(frozen=True)
class ReachabilityProblem:
    """Linear reachability system for the probe spectrum.

    coefficients c[alpha, j, m] expand the evolved initial eigenvectors in
    the target basis; initial_weights p_j and target_weights q_alpha are
    probability vectors.
    """

    initial_weights: np.ndarray
    target_weights: np.ndarray
    coefficients: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.initial_weights, dtype=float)
        q = np.asarray(self.target_weights, dtype=float)
        c = np.asarray(self.coefficients, dtype=complex)
        for name, v in (("initial", p), ("target", q)):
            if np.any(v < -1e-12) or abs(v.sum() - 1.0) > 1e-10:
                raise ProbabilityError(f"{name} weights are not a distribution")
        if c.ndim != 3 or c.shape[0] != c.shape[1] or c.shape[0] != p.size:
            raise DimensionError(f"coefficient tensor shape {c.shape} invalid")
        col_norms = np.sum(np.abs(c) ** 2, axis=0)
        if np.max(np.abs(col_norms - 1.0)) > 1e-10:
            raise ProbabilityError("coefficient columns are not unit norm")
        object.__setattr__(self, "initial_weights", p)
        object.__setattr__(self, "target_weights", q)
        object.__setattr__(self, "coefficients", c)

    @property
    def dim(self) -> int:
        return self.initial_weights.size


def _gram_tensor(prob: ReachabilityProblem) -> np.ndarray:
    """G[beta, gamma, m] = sum_j p_j c[beta,j,m] c[gamma,j,m]^*."""
    c = prob.coefficients
    return np.einsum("j,bjm,gjm->bgm", prob.initial_weights, c, c.conj())


def _check_simplex(w, dim: int) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    if w.size != dim:
        raise DimensionError(f"candidate has {w.size} entries, expected {dim}")
    if np.any(w < -1e-12) or abs(w.sum() - 1.0) > 1e-10:
        raise ProbabilityError(f"candidate {w} is not a probability vector")
    return w


def reachability_residual(prob: ReachabilityProblem, w):
    """Defects of the reachability system at probe diagonal w.

    Returns (diag_residuals, offdiag_residuals): the per-target-weight
    defects q_alpha - sum_jm ..., and the ordered beta != gamma
    off-diagonal sums (all of which must vanish for an exact realization).
    """
    w = _check_simplex(w, prob.dim)
    g = _gram_tensor(prob)
    value = g @ w
    diag = prob.target_weights - np.real(np.diagonal(value))
    off = [complex(value[b, c]) for b in range(prob.dim)
           for c in range(prob.dim) if b != c]
    return diag, off


def project_simplex(v) -> np.ndarray:
    """Euclidean projection onto {w >= 0, sum w = 1} (sort-based)."""
    v = np.asarray(v, dtype=float)
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    idx = np.arange(1, v.size + 1)
    cond = u - css / idx > 0
    rho = idx[cond][-1]
    tau = css[rho - 1] / rho
    return np.maximum(v - tau, 0.0)


def _stacked_system(prob: ReachabilityProblem):
    """Real least-squares form M w = b of the full residual system."""
    g = _gram_tensor(prob)
    n = prob.dim
    rows = [np.real(g[a, a, :]) for a in range(n)]
    rhs = list(prob.target_weights)
    for b in range(n):
        for c in range(b + 1, n):
            rows.append(np.real(g[b, c, :]))
            rhs.append(0.0)
            rows.append(np.imag(g[b, c, :]))
            rhs.append(0.0)
    return np.array(rows), np.array(rhs)


def solve_probe_spectrum(prob: ReachabilityProblem, max_iter: int = 10_000,
                         tol: float = 1e-8):
    """Probe spectrum minimizing the reachability defects over the simplex.

    Projected gradient descent from the uniform vector with fixed step
    0.1/L (L from the stacked system's spectral norm), then an exact
    active-set polish: every support subset is solved through its KKT
    system and the best feasible point kept.  Returns (w, residual) with
    residual the 2-norm of the stacked defect vector; residual <= tol
    certifies reachability.
    """
    m, b = _stacked_system(prob)
    n = prob.dim

    def residual(w):
        return float(np.linalg.norm(m @ w - b))

    lip = 2.0 * np.linalg.norm(m, 2) ** 2
    step = 0.1 / lip if lip > 0 else 1.0
    w = np.full(n, 1.0 / n)
    best_w, best_r = w.copy(), residual(w)
    for _ in range(max_iter):
        grad = 2.0 * m.T @ (m @ w - b)
        w = project_simplex(w - step * grad)
        r = residual(w)
        if r < best_r:
            best_r, best_w = r, w.copy()
        if best_r <= 1e-12:
            break

    # Exact polish: N is small, so enumerate supports.
    for size in range(1, n + 1):
        for support in combinations(range(n), size):
            s = list(support)
            ms = m[:, s]
            k = len(s)
            kkt = np.zeros((k + 1, k + 1))
            kkt[:k, :k] = 2.0 * ms.T @ ms
            kkt[:k, k] = 1.0
            kkt[k, :k] = 1.0
            rhs = np.concatenate([2.0 * ms.T @ b, [1.0]])
            try:
                sol = np.linalg.lstsq(kkt, rhs, rcond=None)[0]
            except np.linalg.LinAlgError:
                continue
            ws = sol[:k]
            if np.any(ws < -1e-10):
                continue
            cand = np.zeros(n)
            cand[s] = np.clip(ws, 0.0, None)
            total = cand.sum()
            if total <= 0:
                continue
            cand /= total
            r = residual(cand)
            if r < best_r:
                best_r, best_w = r, cand
    return best_w, best_r
