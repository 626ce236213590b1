"""Cyclic Weyl representations, Lax operators, monodromy and its central elements.

Conventions used throughout the package
--------------------------------------
* sites are 0-based; the Kronecker product puts site 0 leftmost
* ``u|k> = |k-1>`` and ``v|k> = q^k |k>`` on each site, so ``u v = q v u``
* the monodromy is ``M(lam) = L_{N-1}(lam) ... L_0(lam)``
* ``q = exp(-i pi p'/p)`` and ``qh = exp(-i pi p'/(2p))`` is the fixed square root
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import reduce
from typing import Callable, NamedTuple, Sequence

import numpy as np

PHASE_CONSTRAINT = "p odd, p' even, co-prime"


class NonGenericError(RuntimeError):
    """Raised when sampled parameters hit a degenerate (non-generic) configuration."""


@dataclass(frozen=True)
class Phase:
    p: int
    p_prime: int = 2

    def __post_init__(self):
        p, pp = self.p, self.p_prime
        if p < 3 or p % 2 == 0 or pp <= 0 or pp % 2 or math.gcd(p, pp) != 1:
            raise ValueError(f"invalid phase (p={p}, p'={pp}): need {PHASE_CONSTRAINT}")

    @property
    def q(self) -> complex:
        return complex(np.exp(-1j * np.pi * self.p_prime / self.p))

    @property
    def qh(self) -> complex:
        return complex(np.exp(-0.5j * np.pi * self.p_prime / self.p))

    @property
    def l(self) -> int:
        return (self.p - 1) // 2

    @property
    def beta2(self) -> float:
        return self.p_prime / self.p


@dataclass(frozen=True)
class SiteParams:
    """Per-site Lax constants; gamma and delta are solved from the two constraints."""
    alpha: np.ndarray
    beta: np.ndarray
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray
    gamma: np.ndarray = field(init=False)
    delta: np.ndarray = field(init=False)

    def __post_init__(self):
        for name in ("alpha", "beta", "a", "b", "c", "d"):
            arr = np.atleast_1d(np.asarray(getattr(self, name), dtype=complex))
            object.__setattr__(self, name, arr)
        n = len(self.alpha)
        if any(len(getattr(self, k)) != n for k in ("beta", "a", "b", "c", "d")):
            raise ValueError("site parameter arrays must share one length")
        if np.any(self.alpha == 0) or np.any(self.beta == 0):
            raise ValueError("alpha and beta must be nonzero")
        object.__setattr__(self, "gamma", self.a * self.c / self.alpha)
        object.__setattr__(self, "delta", self.b * self.d / self.beta)

    def __len__(self):
        return len(self.alpha)

    def site(self, n):
        return {k: getattr(self, k)[n] for k in
                ("alpha", "beta", "gamma", "delta", "a", "b", "c", "d")}

    def permuted(self, order: Sequence[int]) -> "SiteParams":
        order = list(order)
        return SiteParams(*(getattr(self, k)[order] for k in ("alpha", "beta", "a", "b", "c", "d")))


@dataclass(frozen=True)
class ModelParams:
    phase: Phase
    sites: SiteParams
    seed: int | None = None
    # chiral Potts data (curve points and normalisation) when the sites come from C_k
    curve: dict | None = None

    @property
    def n_sites(self) -> int:
        return len(self.sites)

    @property
    def p(self) -> int:
        return self.phase.p

    @property
    def dim(self) -> int:
        return self.p ** self.n_sites

    def permuted(self, order):
        return ModelParams(self.phase, self.sites.permuted(order), self.seed, self.curve)


def _annulus(rng, n, rmin=0.5, rmax=2.0):
    r = rng.uniform(rmin, rmax, size=n)
    return r * np.exp(2j * np.pi * rng.random(n))


def sample_generic(phase: Phase, n_sites: int, rng: np.random.Generator, seed=None) -> ModelParams:
    """Generic complex site constants drawn from the annulus 0.5 <= |z| <= 2."""
    vals = [_annulus(rng, n_sites) for _ in range(6)]
    return ModelParams(phase, SiteParams(*vals), seed)


def sample_self_adjoint(phase: Phase, n_sites: int, rng: np.random.Generator, eps: int = 1,
                        seed=None) -> ModelParams:
    """Constants obeying c = -eps b*, d = -eps a*, beta = eps a* b / alpha*."""
    al, a, b = (_annulus(rng, n_sites) for _ in range(3))
    c = -eps * b.conj()
    d = -eps * a.conj()
    be = eps * a.conj() * b / al.conj()
    return ModelParams(phase, SiteParams(al, be, a, b, c, d), seed)


# ----------------------------------------------------------------------------
# Weyl algebra

def weyl_pair(phase: Phase):
    """Single-site clock and shift matrices (u, v)."""
    p = phase.p
    u = np.roll(np.eye(p, dtype=complex), -1, axis=0)
    v = np.diag(phase.q ** np.arange(p))
    return u, v


def embed(op: np.ndarray, site: int, n_sites: int) -> np.ndarray:
    """Place a single-site operator at ``site`` (0-based) of an ``n_sites`` chain."""
    if not 0 <= site < n_sites:
        raise IndexError(f"site {site} outside 0..{n_sites - 1}")
    p = op.shape[0]
    left = np.eye(p ** site)
    right = np.eye(p ** (n_sites - site - 1))
    return np.kron(np.kron(left, op), right)


def weyl_generators(phase: Phase, site: int, n_sites: int):
    u, v = weyl_pair(phase)
    return embed(u, site, n_sites), embed(v, site, n_sites)


def theta_operator(phase: Phase, n_sites: int) -> np.ndarray:
    """Grading operator prod_n v_n (diagonal in the computational basis)."""
    _, v = weyl_pair(phase)
    return np.diag(reduce(np.kron, [np.diag(v)] * n_sites))


# ----------------------------------------------------------------------------
# Lax operator and monodromy

def lax_local(params: ModelParams, site: int, lam: complex):
    """2x2 nested list of p x p blocks of L_site(lam)."""
    if lam == 0:
        raise ValueError("spectral parameter must be nonzero")
    ph = params.phase
    qh = ph.qh
    u, v = weyl_pair(ph)
    ui, vi = u.T, v.conj()
    s = params.sites.site(site)
    return [[lam * s["alpha"] * v - s["beta"] * vi / lam, u @ (s["a"] * v / qh + qh * s["b"] * vi)],
            [ui @ (qh * s["c"] * v + s["d"] * vi / qh), s["gamma"] * v / lam - s["delta"] * lam * vi]]


def build_lax(params: ModelParams, site: int, lam: complex):
    loc = lax_local(params, site, lam)
    N = params.n_sites
    return [[embed(loc[i][j], site, N) for j in range(2)] for i in range(2)]


class Monodromy(NamedTuple):
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray

    @property
    def tau2(self):
        return self.A + self.D

    def as_list(self):
        return [[self.A, self.B], [self.C, self.D]]


def monodromy(params: ModelParams, lam: complex, order: Sequence[int] | None = None) -> Monodromy:
    """Ordered product of Lax operators; ``order`` lists sites rightmost first."""
    N = params.n_sites
    order = list(range(N)) if order is None else list(order)
    M = None
    for n in order:
        L = build_lax(params, n, lam)
        if M is None:
            M = L
        else:
            M = [[L[i][0] @ M[0][j] + L[i][1] @ M[1][j] for j in range(2)] for i in range(2)]
    return Monodromy(M[0][0], M[0][1], M[1][0], M[1][1])


def build_monodromy(params: ModelParams, lam: complex):
    """(A, B, C, D, tau2, theta) at lam."""
    M = monodromy(params, lam)
    return M.A, M.B, M.C, M.D, M.tau2, theta_operator(params.phase, params.n_sites)


def r_matrix(phase: Phase, lam: complex) -> np.ndarray:
    """Six-vertex R-matrix in the basis (11, 12, 21, 22)."""
    q = phase.q
    R = np.zeros((4, 4), dtype=complex)
    R[0, 0] = R[3, 3] = q * lam - 1 / (q * lam)
    R[1, 1] = R[2, 2] = lam - 1 / lam
    R[1, 2] = R[2, 1] = q - 1 / q
    return R


def yba_residual(params: ModelParams, lam: complex, mu: complex) -> float:
    """Relative residual of R(lam/mu) M1(lam) M2(mu) = M2(mu) M1(lam) R(lam/mu)."""
    D = params.dim
    Ml = monodromy(params, lam).as_list()
    Mm = monodromy(params, mu).as_list()
    # auxiliary index (i1, i2) -> 2*i1 + i2, operator blocks of size D
    big = lambda f: np.block([[f(i1, i2, j1, j2) for j1 in range(2) for j2 in range(2)]
                              for i1 in range(2) for i2 in range(2)])
    eye = np.eye(D)
    M1 = big(lambda i1, i2, j1, j2: Ml[i1][j1] * (i2 == j2))
    M2 = big(lambda i1, i2, j1, j2: Mm[i2][j2] * (i1 == j1))
    R = np.kron(r_matrix(params.phase, lam / mu), eye)
    lhs = R @ M1 @ M2
    rhs = M2 @ M1 @ R
    return float(np.linalg.norm(lhs - rhs) / max(np.linalg.norm(lhs), 1e-300))


# ----------------------------------------------------------------------------
# Laurent reconstruction of operator families

def laurent_grid(n_points: int) -> np.ndarray:
    """Evaluation points on the two circles |lam| = 0.9 and 1.3."""
    n1 = n_points // 2
    n2 = n_points - n1
    t1 = 2 * np.pi * (np.arange(n1) + 0.31) / n1
    t2 = 2 * np.pi * (np.arange(n2) + 0.77) / n2
    return np.concatenate([0.9 * np.exp(1j * t1), 1.3 * np.exp(1j * t2)])


def laurent_fit(fn: Callable[[complex], np.ndarray], powers: Sequence[int], n_points=None):
    """Operator coefficients ``X_m`` with ``fn(lam) = sum_m X_m lam**powers[m]``."""
    powers = list(powers)
    n_points = n_points or 2 * len(powers) + 2
    lams = laurent_grid(n_points)
    vals = np.array([fn(l) for l in lams])
    V = np.array([[l ** e for e in powers] for l in lams])
    flat = vals.reshape(len(lams), -1)
    coef, *_ = np.linalg.lstsq(V, flat, rcond=None)
    return coef.reshape((len(powers),) + vals.shape[1:])


def tau2_coefficients(params: ModelParams) -> np.ndarray:
    """tau2(lam) = sum_m T[m] lam^(-N + 2m), m = 0..N."""
    N = params.n_sites
    return laurent_fit(lambda l: monodromy(params, l).tau2, range(-N, N + 1, 2))


def b_coefficients(params: ModelParams) -> np.ndarray:
    """B(lam) = sum_m B[m] lam^(-(N-1) + 2m), m = 0..N-1."""
    N = params.n_sites
    return laurent_fit(lambda l: monodromy(params, l).B, range(-(N - 1), N, 2))


def asymptotic_constants(params: ModelParams):
    """(a_+, a_-, d_+, d_-) governing the lam^{+-N} behaviour of A and D."""
    s = params.sites
    N = params.n_sites
    return (np.prod(s.alpha), (-1) ** N * np.prod(s.beta),
            (-1) ** N * np.prod(s.delta), np.prod(s.gamma))


# ----------------------------------------------------------------------------
# quantum determinant and amplitudes

def qdet_zeros(params: ModelParams):
    """(mu_plus, mu_minus, k_n) per site, principal branches."""
    s = params.sites
    q, qh = params.phase.q, params.phase.qh
    mup = 1j * qh * np.sqrt(s.a * s.beta / (s.alpha * s.b))
    mum = 1j * qh * np.sqrt(s.c * s.beta / (s.alpha * s.d))
    kn = -q * s.beta * s.a * s.c / (s.alpha * mup * mum)
    return mup, mum, kn


def a_function(params: ModelParams):
    mup, _, _ = qdet_zeros(params)
    s = params.sites
    sab = np.sqrt(s.alpha * s.beta)
    return lambda lam: complex(np.prod(sab * (lam / mup - mup / lam)))


def d_function(params: ModelParams):
    _, mum, kn = qdet_zeros(params)
    s = params.sites
    q = params.phase.q
    sab = np.sqrt(s.alpha * s.beta)
    return lambda lam: complex(np.prod(kn / sab * (q * lam / mum - mum / (q * lam))))


def quantum_determinant(params: ModelParams, lam: complex):
    """(A(lam)D(lam/q) - B(lam)C(lam/q), closed-form scalar a(lam) d(lam/q))."""
    q = params.phase.q
    M1 = monodromy(params, lam)
    M2 = monodromy(params, lam / q)
    op = M1.A @ M2.D - M1.B @ M2.C
    scalar = a_function(params)(lam) * d_function(params)(lam / q)
    return op, scalar


def average_lax(params: ModelParams, site: int, Lam: complex) -> np.ndarray:
    """Average (orbit-product) values of the four Lax entries at Lambda = lam^p."""
    s = params.sites.site(site)
    p = params.p
    qp = params.phase.qh ** p
    return np.array([[Lam * s["alpha"] ** p - s["beta"] ** p / Lam, qp * (s["a"] ** p + s["b"] ** p)],
                     [qp * (s["c"] ** p + s["d"] ** p), s["gamma"] ** p / Lam - Lam * s["delta"] ** p]])


def average_matrix(params: ModelParams, Lam: complex) -> np.ndarray:
    """2x2 matrix of the average values, built as L_{N-1}(Lam)...L_0(Lam)."""
    if Lam == 0:
        raise ValueError("Lambda must be nonzero")
    out = np.eye(2, dtype=complex)
    for n in range(params.n_sites):
        out = average_lax(params, n, Lam) @ out
    return out


def average_matrix_direct(params: ModelParams, lam: complex):
    """Average values from the operator products prod_k O(q^k lam); returns the 4 operators."""
    q = params.phase.q
    ops = None
    for k in range(1, params.p + 1):
        M = monodromy(params, q ** k * lam)
        cur = [M.A, M.B, M.C, M.D]
        ops = cur if ops is None else [o @ c for o, c in zip(ops, cur)]
    return ops


def omega_pair(params: ModelParams, Lam: complex):
    """Eigenvalues (Omega_+, Omega_-) of the average matrix."""
    M = average_matrix(params, Lam)
    tr = M[0, 0] + M[1, 1]
    disc = np.sqrt(tr * tr - 4 * np.linalg.det(M))
    return (tr + disc) / 2, (tr - disc) / 2


@dataclass
class AmplitudeTables:
    """a, d, and their gauge-dressed versions abar, dbar realised orbit by orbit."""
    params: ModelParams
    a_fn: Callable
    d_fn: Callable
    mu_plus: np.ndarray
    mu_minus: np.ndarray
    k_n: np.ndarray
    epsilon_branch: int = 1
    # (Lambda, alpha) pairs; orbits where B's average vanishes get pinned to the A average
    orbit_alpha: list = field(default_factory=list)

    def _lookup(self, Lam):
        for L0, al in self.orbit_alpha:
            if abs(L0 - Lam) <= 1e-9 * max(abs(L0), 1.0):
                return al
        return None

    def pin_orbit(self, Lam: complex, target: complex):
        """Fix alpha on the orbit of Lambda so that prod abar = target."""
        Lam = complex(Lam)
        lam0 = Lam ** (1 / self.params.p)
        pa = np.prod([self.a_fn(self.params.phase.q ** k * lam0) for k in range(self.params.p)])
        self.orbit_alpha = [(L0, al) for L0, al in self.orbit_alpha
                            if abs(L0 - Lam) > 1e-9 * max(abs(L0), 1.0)]
        self.orbit_alpha.append((Lam, complex((target / pa) ** (1 / self.params.p))))

    def alpha(self, lam: complex) -> complex:
        Lam = complex(lam) ** self.params.p
        al = self._lookup(Lam)
        if al is None:
            om = omega_pair(self.params, Lam)[0 if self.epsilon_branch > 0 else 1]
            self.pin_orbit(Lam, om)
            al = self._lookup(Lam)
        return al

    def omega(self, Lam):
        return omega_pair(self.params, Lam)

    def abar(self, lam):
        return self.alpha(lam) * self.a_fn(lam)

    def dbar(self, lam):
        return self.d_fn(lam) / self.alpha(self.params.phase.q * lam)


def amplitude_tables(params: ModelParams, epsilon_branch: int = 1) -> AmplitudeTables:
    mup, mum, kn = qdet_zeros(params)
    return AmplitudeTables(params, a_function(params), d_function(params), mup, mum, kn,
                           epsilon_branch)
