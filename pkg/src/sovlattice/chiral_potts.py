"""Chiral Potts curve, cyclic Boltzmann weights, transfer matrices, S-operator and propagator.

Weights are tabulated on z(n) = q^{-2n}; operators are assembled in the u-eigenbasis and
rotated to the v-diagonal computational basis used everywhere else.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, replace
from functools import reduce

import numpy as np

from .algebra_core import ModelParams, Phase, SiteParams, monodromy, omega_pair


@dataclass(frozen=True)
class CurvePoint:
    a: complex
    b: complex
    c: complex
    d: complex
    k: complex
    branch: tuple = (0, 0)

    @property
    def x(self):
        return self.a / self.d

    @property
    def y(self):
        return self.b / self.c

    @property
    def s(self):
        return self.d / self.c

    @property
    def t(self):
        return self.x * self.y

    @property
    def kp(self):
        return complex(np.sqrt(1 - self.k * self.k))

    def scaled(self, fx, fy=None) -> "CurvePoint":
        """Point with x -> fx x, y -> fy y (stays on the curve when fx^p = fy^p = 1)."""
        fy = fx if fy is None else fy
        return replace(self, a=self.a * fx, b=self.b * fy)


def curve_point(k: complex, s: complex, p: int, branch=(0, 0), c: complex = 1.0) -> CurvePoint:
    """Point of the curve with given s; x, y are p-th roots on the chosen branches."""
    if k == 0:
        raise ValueError("modulus k must be nonzero")
    kp = np.sqrt(1 - k * k)
    rx = (1 - kp / s ** p) / k
    ry = (1 - kp * s ** p) / k
    if abs(rx) < 1e-14 or abs(ry) < 1e-14:
        raise ValueError("zero radicand: degenerate curve point")
    om = np.exp(2j * np.pi / p)
    x = rx ** (1 / p) * om ** (branch[0] % p)
    y = ry ** (1 / p) * om ** (branch[1] % p)
    d = s * c
    return CurvePoint(complex(x * d), complex(y * c), complex(c), complex(d), complex(k),
                      (branch[0] % p, branch[1] % p))


def curve_residuals(pt: CurvePoint, p: int):
    x, y, s, k, kp = pt.x, pt.y, pt.s, pt.k, pt.kp
    return (abs(x ** p + y ** p - k * (1 + x ** p * y ** p)),
            abs(k * x ** p - 1 + kp / s ** p),
            abs(k * y ** p - 1 + kp * s ** p))


def random_curve_point(rng: np.random.Generator, k, p, rmin=0.7, rmax=1.3):
    s = rng.uniform(rmin, rmax) * np.exp(1j * rng.uniform(0, 2 * np.pi))
    return curve_point(k, s, p)


# ----------------------------------------------------------------------------
# Boltzmann weights

@dataclass
class WeightTable:
    W: np.ndarray       # W_qp(z(n)) / W_qp(z(0))
    Wbar: np.ndarray


def w_table(qp: CurvePoint, pp: CurvePoint, q: complex, p: int, wrap=False) -> np.ndarray:
    om = q ** -2
    out = [1.0 + 0j]
    for n in range(1, p + 1 if wrap else p):
        den = qp.y - om ** n * pp.x
        if abs(den) < 1e-14:
            raise ValueError("pole in W product: non-generic pair")
        out.append(out[-1] * (qp.s / pp.s) * (pp.y - om ** n * qp.x) / den)
    return np.array(out)


def wbar_table(qp: CurvePoint, pp: CurvePoint, q: complex, p: int, wrap=False) -> np.ndarray:
    om = q ** -2
    out = [1.0 + 0j]
    for n in range(1, p + 1 if wrap else p):
        den = pp.y - om ** n * qp.y
        if abs(den) < 1e-14:
            raise ValueError("pole in Wbar product: non-generic pair")
        out.append(out[-1] * (pp.s * qp.s) * (om * qp.x - om ** n * pp.x) / den)
    return np.array(out)


def boltzmann_ratios(qp: CurvePoint, pp: CurvePoint, phase: Phase) -> WeightTable:
    p, q = phase.p, phase.q
    return WeightTable(w_table(qp, pp, q, p), wbar_table(qp, pp, q, p))


def cyclicity_residual(qp, pp, phase: Phase) -> float:
    p, q = phase.p, phase.q
    return float(max(abs(w_table(qp, pp, q, p, True)[p] - 1),
                     abs(wbar_table(qp, pp, q, p, True)[p] - 1)))


def recursion_residual(qp: CurvePoint, pp: CurvePoint, phase: Phase) -> float:
    """Ratios W(zq)/W(zq^-1) against their closed forms, z = q^{-2m-1} for all m."""
    p, q = phase.p, phase.q
    tab = boltzmann_ratios(qp, pp, phase)
    worst = 0.0
    for m in range(p):
        z = q ** (-2 * m - 1)
        rw = tab.W[m] / tab.W[(m + 1) % p]
        cw = (-z * pp.s / qp.s * pp.x / pp.y / q
              * (1 - qp.y / pp.x * q / z) / (1 - qp.x / pp.y / q * z))
        rb = tab.Wbar[m] / tab.Wbar[(m + 1) % p]
        cb = (-q / z / (pp.s * qp.s) * pp.y / pp.x
              * (1 - qp.y / pp.y / q * z) / (1 - qp.x / pp.x / (q * z)))
        worst = max(worst, abs(rw / cw - 1), abs(rb / cb - 1))
    return float(worst)


# ----------------------------------------------------------------------------
# Lax parametrisation and transfer matrices

def chp_model(phase: Phase, qs, rs, c0: complex = 1.0, seed=None) -> ModelParams:
    """Site constants built from curve points q_n, r_n (same curve) and a scale c0."""
    qh = phase.qh
    g = lambda pts, f: np.array([getattr(P, f) for P in pts])
    aq, bq, cq, dq = (g(qs, f) for f in "abcd")
    ar, br, cr, dr = (g(rs, f) for f in "abcd")
    sites = SiteParams(alpha=-bq * br / c0, beta=-c0 * dq * dr,
                       a=-br * cq / qh, b=aq * dr / qh ** 3,
                       c=bq * cr * qh, d=-ar * dq / qh)
    return ModelParams(phase, sites, seed, curve=dict(qs=list(qs), rs=list(rs), c0=c0,
                                                      k=qs[0].k))


def sample_chp(phase: Phase, n_sites: int, rng: np.random.Generator, k=0.45 + 0.2j,
               c0=0.9 + 0.2j, homogeneous=False, seed=None) -> ModelParams:
    if homogeneous:
        Q0 = random_curve_point(rng, k, phase.p)
        qs = rs = [Q0] * n_sites
    else:
        qs = [random_curve_point(rng, k, phase.p) for _ in range(n_sites)]
        rs = [random_curve_point(rng, k, phase.p) for _ in range(n_sites)]
    return chp_model(phase, qs, rs, c0, seed)


def spectral_point(params: ModelParams, pp: CurvePoint) -> complex:
    """lambda_p = c0 t_p^{-1/2} (principal root)."""
    return complex(params.curve["c0"] / np.sqrt(pp.t))


def z_basis(phase: Phase) -> np.ndarray:
    """Columns: u-eigenvectors with eigenvalue z(m) = q^{-2m}."""
    p, q = phase.p, phase.q
    return np.array([[(q ** (-2 * m)) ** kk for m in range(p)] for kk in range(p)]) / np.sqrt(p)


def to_computational(Tz: np.ndarray, phase: Phase, n_sites: int) -> np.ndarray:
    U = reduce(np.kron, [z_basis(phase)] * n_sites)
    return U @ Tz @ U.conj().T


def _kernel(n_sites, p, factor):
    confs = np.array(list(itertools.product(range(p), repeat=n_sites)))
    T = np.ones((len(confs), len(confs)), dtype=complex)
    for n in range(n_sites):
        T *= factor(n, confs[:, None, :], confs[None, :, :])
    return T


def chp_transfer_pair(params: ModelParams, pp: CurvePoint):
    """(T(p), T_hat(p)) in the computational basis."""
    ph = params.phase
    p, q, N = ph.p, ph.q, params.n_sites
    qs, rs = params.curve["qs"], params.curve["rs"]
    Wq = [w_table(qs[n], pp, q, p) for n in range(N)]
    Wbr = [wbar_table(rs[n], pp, q, p) for n in range(N)]
    Wr = [w_table(rs[n], pp, q, p) for n in range(N)]
    Wbq = [wbar_table(qs[n], pp, q, p) for n in range(N)]
    nx = lambda n: (n + 1) % N
    T = _kernel(N, p, lambda n, z, zp: Wq[n][(z[..., n] - zp[..., n]) % p]
                * Wbr[n][(z[..., n] - zp[..., nx(n)]) % p])
    Th = _kernel(N, p, lambda n, z, zp: Wr[n][(z[..., nx(n)] - zp[..., n]) % p]
                 * Wbq[n][(z[..., n] - zp[..., n]) % p])
    return to_computational(T, ph, N), to_computational(Th, ph, N)


def s_operator(q1, r1, q2, r2, phase: Phase) -> np.ndarray:
    """Two-site kernel S with L_1(lam) L_0(lam) S = S L_0(lam) L_1(lam)."""
    p, q = phase.p, phase.q
    A = wbar_table(q2, q1, q, p)
    Bt = w_table(r2, q1, q, p)
    C = wbar_table(r2, r1, q, p)
    Dt = w_table(q2, r1, q, p)
    S = np.zeros((p * p, p * p), dtype=complex)
    for z1, z2, y1, y2 in itertools.product(range(p), repeat=4):
        S[z1 * p + z2, y1 * p + y2] = (A[(z1 - y2) % p] * Bt[(y1 - y2) % p]
                                        * C[(z2 - y1) % p] * Dt[(z2 - z1) % p])
    return to_computational(S, phase, 2)


def s_intertwining_residual(S, params: ModelParams, lam) -> float:
    M10 = monodromy(params, lam, order=[0, 1])   # L_1 L_0
    M01 = monodromy(params, lam, order=[1, 0])   # L_0 L_1
    num = max(np.linalg.norm(X @ S - S @ Y) for X, Y in zip(M10, M01))
    den = max(np.linalg.norm(X) for X in M10) * np.linalg.norm(S)
    return float(num / den)


def propagators(params: ModelParams) -> list:
    """[U_m^{-1} for m = 0..N-1]; U_0 = identity and U_m^{-1} = prod_{j<m} T(r_j) T_hat(q_j)."""
    qs, rs = params.curve["qs"], params.curve["rs"]
    out = [np.eye(params.dim, dtype=complex)]
    for j in range(params.n_sites - 1):
        T, _ = chp_transfer_pair(params, rs[j])
        _, Th = chp_transfer_pair(params, qs[j])
        out.append(out[-1] @ T @ Th)
    return out


def propagator(params: ModelParams, m: int) -> np.ndarray:
    """U_m^{-1} for the 0-based site m."""
    if not 0 <= m < params.n_sites:
        raise IndexError(m)
    return propagators(params)[m]


def propagator_residual(params: ModelParams, Uinv: np.ndarray, m: int, lam) -> float:
    """U_m M(lam) U_m^{-1} against the monodromy starting at site m."""
    N = params.n_sites
    order = list(range(m, N)) + list(range(m))
    Ms = monodromy(params, lam, order=order)
    M = monodromy(params, lam)
    U = np.linalg.inv(Uinv)
    return float(max(np.linalg.norm(U @ X @ Uinv - Y) / np.linalg.norm(Y) for X, Y in zip(M, Ms)))


# ----------------------------------------------------------------------------
# Q-operator property

@dataclass
class QOperatorReport:
    held_out_residual: float
    a_bs: list
    d_bs: list
    orbit_product: complex
    omega: tuple
    branch_error: float
    branch: int        # index into omega (0: tr + disc, 1: tr - disc)


def _joint_basis(ops, rng):
    H = sum(rng.normal() * X / np.linalg.norm(X) for X in ops)
    w, R = np.linalg.eig(H)
    return R, np.linalg.inv(R)


def verify_q_operator_property(params: ModelParams, pp: CurvePoint, rng: np.random.Generator):
    """Fit t(lam) q(lam) = a_BS q(lam/q) + d_BS q(q lam) on two eigenvectors, test the rest.

    q(lam) is T(p) with lam = c0 t_p^{-1/2}; lam/q and q lam correspond to x, y -> q^{+-1} x, y.
    The orbit product of the fitted a_BS is compared with the average-value eigenvalues.
    """
    ph = params.phase
    p, q = ph.p, ph.q
    lam0 = spectral_point(params, pp)
    pts = [pp.scaled(q ** (-n)) for n in range(p + 1)]   # pts[n] at lam0 q^n
    Ts = [chp_transfer_pair(params, P)[0] for P in pts[:p]]
    Ts.append(Ts[0])
    Tm = chp_transfer_pair(params, pp.scaled(q))[0]     # lam0 / q
    R, L = _joint_basis([monodromy(params, 0.7 + 0.2j).tau2, Ts[0]], rng)
    ev = lambda X: np.einsum("ij,jk,ki->i", L, X, R)
    held, a_fit, d_fit = 0.0, [], []
    for n in range(p):
        lam = lam0 * q ** n
        tv = ev(monodromy(params, lam).tau2)
        q0 = ev(Ts[n])
        qm = ev(Tm if n == 0 else Ts[n - 1])
        qp = ev(Ts[n + 1])
        A = np.column_stack([qm, qp])
        b = tv * q0
        train = [0, 1]
        sol = np.linalg.solve(A[train], b[train])
        rest = np.setdiff1d(np.arange(len(b)), train)
        held = max(held, float(np.linalg.norm(A[rest] @ sol - b[rest]) / np.linalg.norm(b[rest])))
        a_fit.append(sol[0])
        d_fit.append(sol[1])
    prod_a = complex(np.prod(a_fit))
    om = omega_pair(params, lam0 ** p)
    errs = [abs(prod_a - o) / abs(o) for o in om]
    br = int(np.argmin(errs))
    return QOperatorReport(held, a_fit, d_fit, prod_a, om, float(errs[br]), br)


def chp_commutators(params: ModelParams, pp: CurvePoint, pp2: CurvePoint, lam):
    """Relative [T(p), tau2], [T(p), T(p')] and [Theta, T(p)] residuals."""
    from .algebra_core import theta_operator
    from .oracle import commutator_residual
    T1 = chp_transfer_pair(params, pp)[0]
    T2 = chp_transfer_pair(params, pp2)[0]
    tau = monodromy(params, lam).tau2
    Th = theta_operator(params.phase, params.n_sites)
    return (commutator_residual(T1, tau).relative, commutator_residual(T1, T2).relative,
            commutator_residual(Th, T1).relative)
