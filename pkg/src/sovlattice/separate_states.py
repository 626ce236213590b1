"""Separate states, the determinant pairing formula and eigenbasis identity decomposition."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .sov_basis import SovBasis
from .spectrum import EigenvaluePoly, SpectralRecord, assemble_state


@dataclass
class SeparateState:
    side: str          # "left" or "right"
    k: int
    tables: np.ndarray  # (N-1, p) values on the grid eta_a^(h)

    def __post_init__(self):
        if self.side not in ("left", "right"):
            raise ValueError(f"side must be left or right, got {self.side!r}")
        self.tables = np.asarray(self.tables, dtype=complex)
        if not np.all(np.isfinite(self.tables)):
            raise ValueError("non-finite separate-state table")


def make_separate_state(side: str, k: int, tables, basis: SovBasis):
    st = SeparateState(side, k, tables)
    p = basis.grid.p
    if st.tables.shape != (basis.params.n_sites - 1, p):
        raise ValueError(f"table shape {st.tables.shape} != {(basis.params.n_sites - 1, p)}")
    return st, assemble_state(basis, k % p, st.tables, side)


def random_tables(rng: np.random.Generator, basis: SovBasis):
    shape = (basis.params.n_sites - 1, basis.grid.p)
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


def pairing_matrix(alpha, beta, basis: SovBasis, shift: float = 0.0, cols=None, omega=None,
                   absolute=False) -> np.ndarray:
    """M[a, b] = sum_h alpha_a(h) beta_a(h) eta^(2b + shift) / omega(eta), b = 0..n-1.

    ``shift`` may be any (half-)integer power of eta; ``cols`` overrides the list of exponents.
    ``omega`` injects a different gauge function (default eta^(N-2)).
    ``absolute`` sums the moduli of the terms instead (cancellation-free scale).
    """
    g = basis.grid
    omega = omega or basis.omega
    n = len(g.eta0)
    cols = [2 * b + shift for b in range(n)] if cols is None else list(cols)
    out = np.zeros((n, len(cols)), dtype=complex)
    for a in range(n):
        e = g.eta0[a] * g.q ** np.arange(g.p)
        w = np.asarray(alpha[a]) * np.asarray(beta[a]) / omega(e)
        for j, c in enumerate(cols):
            terms = w * e ** c
            out[a, j] = np.sum(np.abs(terms)) if absolute else np.sum(terms)
    return out


def det_sign(N: int) -> int:
    """Relates prod_{i<j}(x_i - x_j) to det[x_a^(b-1)]."""
    return (-1) ** ((N - 1) * (N - 2) // 2)


def pairing_determinant(left: SeparateState, right: SeparateState, basis: SovBasis) -> complex:
    p = basis.grid.p
    if (left.k - right.k) % p:
        return 0j
    M = pairing_matrix(left.tables, right.tables, basis)
    return complex(det_sign(basis.params.n_sites) * np.linalg.det(M))


def record_states(rec: SpectralRecord):
    return (SeparateState("left", rec.k, rec.q_table.Qbar),
            SeparateState("right", rec.k, rec.q_table.Q))


def orthogonality_witness(t: EigenvaluePoly, t_prime: EigenvaluePoly, rec: SpectralRecord,
                          rec_prime: SpectralRecord, basis: SovBasis):
    """(M, V, scale): M from Qbar_t and Q_t', V_b = c'_b - c_b, and M V vanishes."""
    if t.k != t_prime.k:
        raise ValueError("witness needs two eigenvalues of one charge sector")
    V = t_prime.inner - t.inner
    if np.linalg.norm(V) < 1e-12 * max(np.linalg.norm(t.coef), 1.0):
        raise ValueError("identical eigenvalues give a zero witness")
    M = pairing_matrix(rec.q_table.Qbar, rec_prime.q_table.Q, basis)
    scale = pairing_matrix(rec.q_table.Qbar, rec_prime.q_table.Q, basis, absolute=True)
    return M, V, scale


def witness_residual(M, V, scale=None) -> float:
    """|M V| relative to the cancellation-free size |M_abs| |V|.

    For N = 2 the matrix is 1x1 and M V = 0 means M itself vanishes, so the scale must
    come from the moduli of the summed terms rather than from M.
    """
    scale = np.abs(M) if scale is None else scale
    return float(np.linalg.norm(M @ V) / (np.linalg.norm(scale @ np.abs(V))))


def eigen_identity_decomposition(records, basis: SovBasis):
    """(sum_t |t><t| / <t|t>, determinant norms)."""
    dim = len(records[0].right_state)
    out = np.zeros((dim, dim), dtype=complex)
    norms = []
    for r in records:
        l, rr = record_states(r)
        nrm = pairing_determinant(l, rr, basis)
        if abs(nrm) < 1e-300:
            raise ValueError("vanishing eigenstate norm: non-generic parameters")
        norms.append(nrm)
        out += np.outer(r.right_state, r.left_state) / nrm
    return out, np.array(norms)
