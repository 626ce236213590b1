"""Inverse problem: local Weyl operators from monodromy entries, and the elementary operator basis."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .algebra_core import (ModelParams, asymptotic_constants, average_matrix, embed, monodromy,
                           qdet_zeros, weyl_pair)
from .chiral_potts import propagators
from .sov_basis import SovBasis

inv = np.linalg.inv
mpow = np.linalg.matrix_power


@dataclass
class ReconstructionContext:
    params: ModelParams
    Uinv: list               # U_n^{-1}, n = 0..N-1
    mu_plus: np.ndarray
    mu_minus: np.ndarray

    def conj(self, n, X):
        """U_n X U_n^{-1}."""
        return inv(self.Uinv[n]) @ X @ self.Uinv[n]

    def local(self, n, op):
        return embed(op, n, self.params.n_sites)

    def consts(self, n):
        s = self.params.sites.site(n)
        return s["alpha"], s["beta"], s["a"], s["b"], s["c"], s["d"]


def make_context(params: ModelParams) -> ReconstructionContext:
    if params.curve is None:
        raise ValueError("the reconstruction needs the chiral Potts parametrisation (propagators)")
    mup, mum, _ = qdet_zeros(params)
    return ReconstructionContext(params, propagators(params), mup, mum)


def _local_ratio_scale(params, n, lam):
    """s with (L_12^{-1} L_11)(lam) = s u^{-1} for the single-site Lax operator."""
    from .algebra_core import lax_local
    L = lax_local(params, n, lam)
    u, _ = weyl_pair(params.phase)
    Y = inv(L[0][1]) @ L[0][0]
    s = np.trace(Y @ u) / params.p
    return complex(s), float(np.linalg.norm(Y - s * u.T) / np.linalg.norm(Y))


def u_inverse_prefactor(params, n):
    """Prefactor c with c^2 = -a b/(alpha beta); the branch is read off the local Lax operator."""
    s, _ = _local_ratio_scale(params, n, qdet_zeros(params)[0][n])
    return 1 / s


def reconstruct_u_inverse(ctx: ReconstructionContext, n: int, form: str = "BA") -> np.ndarray:
    M = monodromy(ctx.params, ctx.mu_plus[n])
    X = inv(M.B) @ M.A if form == "BA" else inv(M.D) @ M.C
    return u_inverse_prefactor(ctx.params, n) * ctx.conj(n, X)


def reconstruct_alpha0(ctx: ReconstructionContext, n: int, form: str = "AB") -> np.ndarray:
    M = monodromy(ctx.params, ctx.mu_minus[n])
    X = inv(M.A) @ M.B if form == "AB" else inv(M.C) @ M.D
    return ctx.conj(n, X)


def alpha0_closed_form(params: ModelParams, n: int, qpow: int = 1, sign: int | None = None) -> np.ndarray:
    """sign * (-c b^2/(alpha beta d))^{1/2} (1 + q^qpow (a/b) v^2)(1 + q^qpow (c/d) v^2)^{-1} u.

    ``sign=None`` picks the square-root branch that matches the single-site ratio
    (L_11^{-1} L_12)(mu_-), the same way the u^{-1} prefactor is fixed.
    """
    from .algebra_core import lax_local
    s = params.sites.site(n)
    q = params.phase.q
    u, v = weyl_pair(params.phase)
    I = np.eye(params.p)
    pref = np.sqrt(-s["c"] * s["b"] ** 2 / (s["alpha"] * s["beta"] * s["d"]))
    loc = pref * (I + q ** qpow * s["a"] / s["b"] * v @ v) @ inv(I + q ** qpow * s["c"] / s["d"] * v @ v) @ u
    if sign is None:
        L = lax_local(params, n, qdet_zeros(params)[1][n])
        Y = inv(L[0][0]) @ L[0][1]
        sign = 1 if np.linalg.norm(Y - loc) <= np.linalg.norm(Y + loc) else -1
    return embed(sign * loc, n, params.n_sites)


def g_operator(ctx, n):
    """U_n A^{-1}(mu_+) B(mu_+) U_n^{-1}."""
    M = monodromy(ctx.params, ctx.mu_plus[n])
    return ctx.conj(n, inv(M.A) @ M.B)


def beta_operators(ctx, n, alpha0=None):
    """beta_{k,n} = G^{-(k+1)} alpha_0 G^k, k = 0..p-1."""
    G = g_operator(ctx, n)
    Gi = inv(G)
    a0 = reconstruct_alpha0(ctx, n) if alpha0 is None else alpha0
    return [mpow(Gi, k + 1) @ a0 @ mpow(G, k) for k in range(ctx.params.p)]


def _ratios(ctx, n):
    _, _, a, b, c, d = ctx.consts(n)
    r1 = np.sqrt(b * c / (a * d))
    return r1, 1 / r1, c / d


def beta_sum_rule(ctx, n):
    """(sum_k beta_k, predicted scalar)."""
    p = ctx.params.p
    r1, r2, cd = _ratios(ctx, n)
    return sum(beta_operators(ctx, n)), p * (r1 + r2 * cd ** p) / (1 + cd ** p)


def reconstruct_v_even_power(ctx: ReconstructionContext, n: int, k: int, betas=None) -> np.ndarray:
    """v_n^{2k} as a discrete Fourier combination of the beta_{a,n}."""
    p, q = ctx.params.p, ctx.params.phase.q
    _, _, a, b, c, d = ctx.consts(n)
    r1, r2, cd = _ratios(ctx, n)
    if abs(r1 - r2) < 1e-12:
        raise ValueError("vanishing prefactor (bc/ad)^{1/2} = (ad/bc)^{1/2}")
    betas = beta_operators(ctx, n) if betas is None else betas
    pref = (-d / c) ** k * (1 + cd ** p) / (r1 - r2) / p
    return pref * sum(q ** (k * (2 * j + 1)) * betas[j] for j in range(p))


def reconstruct_v_power(ctx, n, k, betas=None):
    """Any power v_n^k: odd k uses v^k = v^{2h} with 2h = k + p."""
    p = ctx.params.p
    k %= p
    if k == 0:
        return np.eye(ctx.params.dim, dtype=complex)
    h = k // 2 if k % 2 == 0 else (k + p) // 2
    return reconstruct_v_even_power(ctx, n, h % p, betas)


def beta_expansion(ctx, n, k):
    """beta_{k,n} rebuilt from A, B products at mu_{n,+-} and the average values."""
    P, p, q = ctx.params, ctx.params.p, ctx.params.phase.q
    mup, mum = ctx.mu_plus[n], ctx.mu_minus[n]
    Aav = lambda L: average_matrix(P, L)[0, 0]
    Bav = lambda L: average_matrix(P, L)[0, 1]
    r = mup / mum
    den = q ** k * r - q ** (-k) / r
    c1 = Bav(mum ** p) / (Aav(mum ** p) * Bav(mup ** p)) * (r - 1 / r) / den
    c2 = (q ** k - q ** (-k)) / den
    Mp, Mm = monodromy(P, mup), monodromy(P, mum)
    X = inv(Mp.B) @ Mp.A
    for i in range(1, p - k + 1):
        X = X @ monodromy(P, q ** (-i) * mup).B
    X = X @ mpow(inv(Mm.B) @ Mm.A, p - 1)
    for i in range(p - k + 1, p + 1):
        X = X @ monodromy(P, q ** (-i) * mup).B
    return c1 * ctx.conj(n, X) + c2 * np.eye(P.dim)


def local_factorization_ranks(params: ModelParams, n: int, tol=1e-10):
    """Numerical rank of the 2p x 2p local Lax matrix at mu_{n,+} and mu_{n,-} (expected p)."""
    from .algebra_core import lax_local
    mup, mum, _ = qdet_zeros(params)
    out = []
    for lam in (mup[n], mum[n]):
        L = np.block(lax_local(params, n, lam))
        s = np.linalg.svd(L, compute_uv=False)
        out.append(int(np.sum(s > tol * s[0])))
    return out


# ----------------------------------------------------------------------------
# quantum numbers and the SOV expansion of powers of B^{-1} A

def q_number(a: int, q: complex) -> complex:
    return (q ** a - q ** (-a)) / (q - 1 / q)


def q_factorial(a: int, q: complex) -> complex:
    out = 1.0 + 0j
    for j in range(1, a + 1):
        out *= q_number(j, q)
    return out


def q_multinomial(k: int, alphas, q: complex) -> complex:
    """[k]!/prod [alpha_j]! evaluated as a product of q-binomials (finite at roots of unity)."""
    if sum(alphas) != k:
        raise ValueError("alphas must sum to k")
    out, rest = 1.0 + 0j, k
    for a in alphas:
        # [rest choose a] via the q-Pascal recursion, exact at roots of unity
        out *= _q_binomial(rest, a, q)
        rest -= a
    return out


@lru_cache(maxsize=None)
def _q_binomial(n: int, k: int, q: complex) -> complex:
    if k < 0 or k > n:
        return 0j
    if k == 0 or k == n:
        return 1 + 0j
    # [n, k] = q^{-(n-k)} [n-1, k-1] + q^k [n-1, k]  (symmetric q-numbers)
    return q ** (k - n) * _q_binomial(n - 1, k - 1, q) + q ** k * _q_binomial(n - 1, k, q)


def compositions(k: int, parts: int):
    if parts == 0:
        if k == 0:
            yield ()
        return
    for a in range(k + 1):
        for rest in compositions(k - a, parts - 1):
            yield (a,) + rest


def _diag(basis, fn):
    return np.diag([fn(basis.grid.eta(h)) for h in basis.labels])


def omega_power(basis: SovBasis, f, k: int) -> np.ndarray:
    """Label-space matrix of (sum_a prod_{b!=a} f(eta_a) T_a^- / (eta_a/eta_b - eta_b/eta_a))^k."""
    g = basis.grid
    n = len(g.eta0)
    q = g.q
    T = [basis.shift_matrix(a, -1) for a in range(n)]
    out = np.zeros((basis.dim, basis.dim), dtype=complex)
    for alphas in compositions(k, n):
        cf = q_multinomial(k, alphas, q)
        if abs(cf) < 1e-13:
            continue

        def coef(e, alphas=alphas):
            ea = e[:-1]
            val = 1 + 0j
            for i in range(n):
                for h in range(alphas[i]):
                    val *= f(q ** (-h) * ea[i])
                    for j in range(n):
                        if j != i:
                            z = q ** (alphas[j] - h) * ea[i] / ea[j]
                            val /= z - 1 / z
            return val

        shift = np.eye(basis.dim)
        for i in range(n):
            shift = shift @ mpow(T[i], alphas[i])
        out += cf * _diag(basis, coef) @ shift
    return out


def power_expansion_binvA(basis: SovBasis, lam: complex, m: int) -> np.ndarray:
    """Physical operator (B^{-1}(lam) A(lam))^m assembled from the SOV expansion."""
    P = basis.params
    q = P.phase.q
    ap, am, _, _ = asymptotic_constants(P)
    sigma_f = lambda x: basis.amps.abar(x) / (lam / x - x / lam)
    TN = basis.shift_matrix(P.n_sites - 1, -1)
    TNp = basis.shift_matrix(P.n_sites - 1, 1)
    etaN_inv = _diag(basis, lambda e: 1 / e[-1])
    prod_eta = _diag(basis, lambda e: lam * np.prod(e[:-1]))
    out = np.zeros((basis.dim, basis.dim), dtype=complex)
    sig = {k: omega_power(basis, sigma_f, k) for k in range(m + 1)}
    for i in range(m + 1):
        for j in range(m + 1 - i):
            k = m - i - j
            cf = q_factorial(m, q) / (q_factorial(i, q) * q_factorial(j, q) * q_factorial(k, q)) \
                if m < P.p else _multi3(m, i, j, k, q)
            if abs(cf) < 1e-13:
                continue
            sh = mpow(TN, i - j) if i >= j else mpow(TNp, j - i)
            term = ((-1) ** ((P.n_sites - 1) * j) * cf * ap ** i * am ** j * q ** ((i * (i - 1) - j * (j - 1)) / 2)
                    * mpow(etaN_inv, m) @ _mat_power(prod_eta, i - j) @ sig[k] @ sh)
            out += term
    return basis.to_physical(out)


def _multi3(m, i, j, k, q):
    return q_multinomial(m, (i, j, k), q)


def _mat_power(D, e):
    return mpow(D, e) if e >= 0 else mpow(inv(D), -e)


# ----------------------------------------------------------------------------
# elementary operators

def _prod_zz(basis: SovBasis, a: int) -> complex:
    Z = basis.grid.Z
    return complex(np.prod([Z[a] / Z[b] - Z[b] / Z[a] for b in range(len(Z)) if b != a]))


class ElementaryOperators:
    """Cache of O_{a,k} and the SOV diagonal / shift operators used to dress them."""

    def __init__(self, basis: SovBasis):
        self.basis = basis
        P = basis.params
        self.p, self.N = P.p, P.n_sites
        self.etaN = basis.diag_op(lambda e: e[-1])
        ap = asymptotic_constants(P)[0]
        self.etaAp = basis.diag_op(lambda e: ap * np.prod(e[:-1]))
        self.TN = basis.to_physical(basis.shift_matrix(self.N - 1, -1))
        self._O = {}
        self._etaN_pinv = inv(mpow(self.etaN, self.p - 1))

    def O(self, a: int, k: int) -> np.ndarray:
        k %= self.p
        if (a, k) not in self._O:
            g = self.basis.grid
            e = lambda j: g.eta0[a] * g.q ** j
            P = self.basis.params
            num = monodromy(P, e(k)).A
            for j in range(k + 1, self.p + k):
                num = monodromy(P, e(j)).B @ num
            self._O[(a, k)] = num @ self._etaN_pinv / (self.p * _prod_zz(self.basis, a))
        return self._O[(a, k)]

    def O_power(self, a, k, alpha):
        """O^{(alpha)}_{a,k} = O_{a,k} O_{a,k-1} ... O_{a,k-alpha+1}."""
        out = np.eye(self.basis.dim, dtype=complex)
        for j in range(alpha):
            out = out @ self.O(a, k - j)
        return out

    def predicted_action(self, a, k):
        """Label-space left action: <h| O_{a,k} = delta_{h_a,k} c(h) <h - e_a|."""
        b = self.basis
        g = b.grid
        S = np.zeros((b.dim, b.dim), dtype=complex)
        for h in b.labels:
            if h[a] != k % self.p:
                continue
            e = g.eta(h)[:-1]
            c = b.amps.abar(e[a]) / np.prod([e[a] / e[j] - e[j] / e[a] for j in range(len(e)) if j != a])
            h2 = list(h)
            h2[a] = (h2[a] - 1) % self.p
            S[g.index[h], g.index[tuple(h2)]] = c
        return S

    def mean_value_coefficient(self, a):
        return average_matrix(self.basis.params, self.basis.grid.Z[a])[0, 0] / _prod_zz(self.basis, a)

    def exchange_coefficient(self, a, k, b, h):
        g = self.basis.grid
        ea = lambda j: g.eta0[a] * g.q ** j
        eb = g.eta0[b]
        z1, z2 = ea(k - h + 1) / eb, ea(k - h - 1) / eb
        return (z1 - 1 / z1) / (z2 - 1 / z2)


@dataclass(frozen=True)
class ElementaryIndex:
    hh: int                      # power of eta_N^{-1} (charge shift)
    h0: int                      # power of eta_A^+ T_N
    frozen: tuple = ()           # ((a_i, k_i, alpha_i), ...) with a_i increasing

    def __post_init__(self):
        a_s = [f[0] for f in self.frozen]
        if a_s != sorted(set(a_s)):
            raise ValueError("site variables a_i must be strictly increasing")
        if sum(f[2] for f in self.frozen) > 0 and any(f[2] < 1 for f in self.frozen):
            raise ValueError("powers alpha_i must be positive")

    @property
    def g(self):
        return sum(f[2] for f in self.frozen)


def elementary_monomial(idx: ElementaryIndex, ops: ElementaryOperators) -> np.ndarray:
    E = mpow(inv(ops.etaN), idx.hh) @ mpow(ops.etaAp @ ops.TN, idx.h0)
    for a, k, al in idx.frozen:
        E = E @ ops.O_power(a, k, al)
    return E


def elementary_indices(p: int, N: int, max_frozen: int | None = None):
    """All indices with single-variable powers alpha in 1..p and pairs with alpha sum <= p."""
    n = N - 1
    out = []
    for hh, h0 in itertools.product(range(p), repeat=2):
        out.append(ElementaryIndex(hh, h0))
        for a, k, al in itertools.product(range(n), range(p), range(1, p + 1)):
            out.append(ElementaryIndex(hh, h0, ((a, k, al),)))
        if n >= 2 and (max_frozen is None or max_frozen >= 2):
            for k1, k2 in itertools.product(range(p), repeat=2):
                for a1 in range(1, p):
                    for a2 in range(1, p + 1 - a1):
                        out.append(ElementaryIndex(hh, h0, ((0, k1, a1), (1, k2, a2))))
    return out


@dataclass
class SpanReport:
    rank: int
    full_dim: int
    local_rank: int
    residuals: dict


def dressed_span(ctx: ReconstructionContext, ops: ElementaryOperators, n: int = 0, indices=None) -> SpanReport:
    """Express site-n Weyl monomials in the U_n-dressed elementary family by least squares."""
    P = ctx.params
    idx = indices or elementary_indices(P.p, P.n_sites)
    fam = np.array([ctx.conj(n, elementary_monomial(i, ops)).ravel() for i in idx]).T
    rank = int(np.linalg.matrix_rank(fam, tol=1e-9 * np.linalg.norm(fam, 2)))
    u, v = weyl_pair(P.phase)
    targets = {"u": u, "u^-1": u.T, "v^2": v @ v}
    res = {}
    for name, op in targets.items():
        t = embed(op, n, P.n_sites).ravel()
        c, *_ = np.linalg.lstsq(fam, t, rcond=None)
        res[name] = float(np.linalg.norm(fam @ c - t) / np.linalg.norm(t))
    locs = np.array([embed(mpow(u, i) @ mpow(v, j), n, P.n_sites).ravel()
                     for i in range(P.p) for j in range(P.p)]).T
    coef, *_ = np.linalg.lstsq(fam, locs, rcond=None)
    gram = coef.conj().T @ coef
    lr = int(np.linalg.matrix_rank(gram, tol=1e-9 * np.linalg.norm(gram, 2)))
    return SpanReport(rank, P.dim ** 2, lr, res)
