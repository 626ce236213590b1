"""Transfer-matrix spectrum, the SOV functional equation, Baxter Q tables and eigenstates."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra_core import (ModelParams, asymptotic_constants, laurent_grid, monodromy,
                           tau2_coefficients, theta_operator)
from .oracle import kernel_vector
from .sov_basis import SovBasis, vandermonde

DIM_CAP = 2000


@dataclass
class EigenvaluePoly:
    """t(lam) = sum_m coef[m] lam^(-N + 2m); coef[0], coef[N] are fixed by the charge k."""
    k: int
    coef: np.ndarray
    n_sites: int
    asym: tuple = ()

    def __call__(self, lam):
        N = self.n_sites
        return complex(sum(c * lam ** (-N + 2 * m) for m, c in enumerate(self.coef)))

    @property
    def inner(self) -> np.ndarray:
        """c_b for b = 1..N-1 (coefficient of lam^(-N + 2b))."""
        return self.coef[1:-1]

    @property
    def parity(self) -> str:
        return "even" if self.n_sites % 2 == 0 else "odd"

    def perturbed(self, b: int, delta: complex) -> "EigenvaluePoly":
        c = self.coef.copy()
        c[b] += delta
        return EigenvaluePoly(self.k, c, self.n_sites, self.asym)


def expected_asymptotics(params: ModelParams, k: int):
    """(coefficient of lam^N, coefficient of lam^-N) for charge k."""
    ap, am, dp, dm = asymptotic_constants(params)
    q = params.phase.q
    return q ** k * ap + q ** (-k) * dp, q ** (-k) * am + q ** k * dm


@dataclass
class EigenSystem:
    params: ModelParams
    values: list            # EigenvaluePoly
    right: np.ndarray       # columns
    left: np.ndarray        # rows, left @ right = I
    tau_coef: np.ndarray = field(repr=False, default=None)

    def __len__(self):
        return len(self.values)

    def sector(self, k):
        return [i for i, t in enumerate(self.values) if t.k == k]


def oracle_eigensystem(params: ModelParams, cap: int = DIM_CAP, seed_point=0.61 + 0.37j,
                       mix=0.1234) -> EigenSystem:
    """Joint eigenbasis of tau2 and Theta by dense diagonalisation."""
    if params.dim > cap:
        raise ValueError(f"dimension p^N = {params.dim} exceeds cap {cap}")
    N, p, q = params.n_sites, params.p, params.phase.q
    Tm = tau2_coefficients(params)
    Th = theta_operator(params.phase, N)
    H = sum(Tm[m] * seed_point ** (-N + 2 * m) for m in range(N + 1)) + mix * Th
    w, R = np.linalg.eig(H)
    gaps = np.abs(w[:, None] - w[None, :]) + np.eye(len(w)) * 1e300
    if gaps.min() < 1e-8 * np.abs(w).max():
        raise ValueError("tau2 spectrum not simple within tolerance")
    order = np.lexsort((np.round(w.imag, 9), np.round(w.real, 9)))
    R = R[:, order]
    R = R / np.linalg.norm(R, axis=0)
    L = np.linalg.inv(R)
    vals = []
    for j in range(len(w)):
        th = L[j] @ Th @ R[:, j]
        k = int(np.argmin([abs(th - q ** kk) for kk in range(p)]))
        c = np.array([L[j] @ Tm[m] @ R[:, j] for m in range(N + 1)])
        vals.append(EigenvaluePoly(k, c, N, expected_asymptotics(params, k)))
    return EigenSystem(params, vals, R, L, Tm)


def fit_eigenvalue_poly(samples, k: int, params: ModelParams) -> EigenvaluePoly:
    """Least-squares Laurent fit from (lam, t(lam)) samples with the lam^{+-N} terms pinned."""
    N = params.n_sites
    lams = np.array([s[0] for s in samples])
    vals = np.array([s[1] for s in samples], dtype=complex)
    if len(lams) < N + 1:
        raise ValueError(f"need at least {N + 1} samples")
    top, bot = expected_asymptotics(params, k)
    rhs = vals - top * lams ** N - bot * lams ** (-N)
    V = np.array([[l ** (-N + 2 * b) for b in range(1, N)] for l in lams])
    if N > 1:
        if np.linalg.cond(V) > 1e10:
            raise ValueError("ill-conditioned fit: add sample points")
        inner, *_ = np.linalg.lstsq(V, rhs, rcond=None)
    else:
        inner = np.zeros(0, complex)
    return EigenvaluePoly(k, np.concatenate([[bot], inner, [top]]), N, (top, bot))


def sample_eigenvalue(params: ModelParams, vec: np.ndarray, lams) -> list:
    """(lam, t(lam)) by Rayleigh quotient of tau2(lam) on an eigenvector."""
    out = []
    for l in lams:
        T = monodromy(params, l).tau2
        out.append((l, complex(np.vdot(vec, T @ vec) / np.vdot(vec, vec))))
    return out


# ----------------------------------------------------------------------------
# functional equation and Baxter tables

def build_D_matrix(t: EigenvaluePoly, amps, lam0: complex, p: int, q: complex) -> np.ndarray:
    """Cyclic tridiagonal matrix with rows t(q^j lam0) Q_j - abar Q_{j-1} - dbar Q_{j+1}."""
    D = np.zeros((p, p), dtype=complex)
    for j in range(p):
        l = q ** j * lam0
        D[j, j] = t(l)
        D[j, (j + 1) % p] -= amps.dbar(l)
        D[j, (j - 1) % p] -= amps.abar(l)
    return D


def build_D_matrix_left(t: EigenvaluePoly, amps, lam0: complex, p: int, q: complex) -> np.ndarray:
    """Left Baxter system: t(l) Qb(l) = dbar(l/q) Qb(l/q) + abar(q l) Qb(q l)."""
    D = np.zeros((p, p), dtype=complex)
    for j in range(p):
        l = q ** j * lam0
        D[j, j] = t(l)
        D[j, (j - 1) % p] -= amps.dbar(l / q)
        D[j, (j + 1) % p] -= amps.abar(q * l)
    return D


@dataclass
class FunctionalReport:
    ratios: list
    points: list
    tol: float

    @property
    def worst(self):
        return max(self.ratios)

    @property
    def passed(self):
        return self.worst < self.tol


def check_functional_equation(t: EigenvaluePoly, amps, p, q, points, tol=1e-8) -> FunctionalReport:
    """sigma_min/sigma_max of D(lam0) at each lam0 (one representative per orbit)."""
    ratios = [kernel_vector(build_D_matrix(t, amps, l, p, q))[1] for l in points]
    return FunctionalReport(ratios, list(points), tol)


def random_orbit_points(rng: np.random.Generator, n=10):
    r = rng.uniform(0.6, 1.6, n)
    return list(r * np.exp(2j * np.pi * rng.random(n)))


@dataclass
class QTable:
    Q: np.ndarray        # (N-1, p)
    Qbar: np.ndarray
    ratios: np.ndarray   # sigma_min/sigma_max per orbit and side
    gaps: np.ndarray     # second-smallest / largest singular value (kernel dimension probe)
    normalization: str = "largest entry = 1"


def _normalise(v):
    return v / v[int(np.argmax(np.abs(v)))]


def solve_q_tables(t: EigenvaluePoly, basis: SovBasis) -> QTable:
    g = basis.grid
    Q, Qb, rat, gap = [], [], [], []
    for a in range(len(g.eta0)):
        for build, store in ((build_D_matrix, Q), (build_D_matrix_left, Qb)):
            D = build(t, basis.amps, g.eta0[a], g.p, g.q)
            s = np.linalg.svd(D, compute_uv=False)
            v, r = kernel_vector(D)
            store.append(_normalise(v))
            rat.append(r)
            gap.append(s[-2] / s[0] if len(s) > 1 else 1.0)
    n = len(g.eta0)
    return QTable(np.array(Q).reshape(n, g.p), np.array(Qb).reshape(n, g.p),
                  np.array(rat), np.array(gap))


def baxter_residual(t: EigenvaluePoly, table: QTable, basis: SovBasis):
    """Max relative residual of both discrete Baxter systems over the grid."""
    g, amps = basis.grid, basis.amps
    out = 0.0
    for a in range(len(g.eta0)):
        Dr = build_D_matrix(t, amps, g.eta0[a], g.p, g.q)
        Dl = build_D_matrix_left(t, amps, g.eta0[a], g.p, g.q)
        out = max(out, np.linalg.norm(Dr @ table.Q[a]) / np.linalg.norm(Dr),
                  np.linalg.norm(Dl @ table.Qbar[a]) / np.linalg.norm(Dl))
    return float(out)


# ----------------------------------------------------------------------------
# eigenstates

@dataclass
class SpectralRecord:
    eigenvalue: EigenvaluePoly
    q_table: QTable
    right_state: np.ndarray
    left_state: np.ndarray
    oracle_vector: np.ndarray | None = None

    @property
    def k(self):
        return self.eigenvalue.k


def sov_weight(basis: SovBasis, h) -> complex:
    """V(eta^2)/prod omega(eta_a) for the label h (without the charge phase)."""
    e = basis.grid.eta(h)[:-1]
    return vandermonde(e ** 2) / np.prod(basis.omega(e))


def assemble_state(basis: SovBasis, k: int, tables: np.ndarray, side: str) -> np.ndarray:
    """Sum over the SOV basis with factorised wave function prod_a tables[a][h_a]."""
    g = basis.grid
    p, N = g.p, basis.params.n_sites
    sgn = -1 if side == "right" else 1
    coeffs = np.array([g.q ** (sgn * k * h[-1]) * sov_weight(basis, h) / np.sqrt(p)
                       * np.prod([tables[a][h[a]] for a in range(N - 1)])
                       for h in basis.labels])
    if side == "right":
        return basis.right @ coeffs
    return coeffs @ basis.left


def assemble_sov_eigenstates(t: EigenvaluePoly, table: QTable, basis: SovBasis,
                             oracle_vector=None) -> SpectralRecord:
    r = assemble_state(basis, t.k, table.Q, "right")
    l = assemble_state(basis, t.k, table.Qbar, "left")
    return SpectralRecord(t, table, r, l, oracle_vector)


def sov_spectrum(basis: SovBasis, es: EigenSystem | None = None) -> list:
    """SpectralRecord for every oracle eigenvalue, in oracle order."""
    es = es or oracle_eigensystem(basis.params)
    out = []
    for j, t in enumerate(es.values):
        out.append(assemble_sov_eigenstates(t, solve_q_tables(t, basis), basis, es.right[:, j]))
    return out


def eigen_residual(params: ModelParams, rec: SpectralRecord, lam) -> float:
    T = monodromy(params, lam).tau2
    v = rec.right_state
    return float(np.linalg.norm(T @ v - rec.eigenvalue(lam) * v) / (np.linalg.norm(T) * np.linalg.norm(v)))
