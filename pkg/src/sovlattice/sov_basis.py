"""Left/right B-eigenbases (SOV representations), grid, measure and identity decomposition.

Label convention: ``h = (h_1, ..., h_{N-1}, h_N)`` with ``eta_a = q^{h_a} eta_a^(0)`` and
``eta_N = q^{h_N} eta_N^(0)``.  Left covectors obey

    <h| B(lam) = eta_N prod_a (lam/eta_a - eta_a/lam) <h|
    <h| A(eta_a) = abar(eta_a) <h - e_a|,      <h| Theta = <h - e_N|

and right vectors ``A(eta_a)|h> = abar(q eta_a)|h + e_a>``, ``Theta|h> = |h + e_N>``.
"""
from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .algebra_core import (AmplitudeTables, ModelParams, NonGenericError, amplitude_tables,
                           asymptotic_constants, average_matrix, b_coefficients, monodromy,
                           theta_operator)


def vandermonde(x) -> complex:
    """prod_{i<j} (x_i - x_j); empty product is 1."""
    x = np.asarray(x)
    n = len(x)
    return complex(np.prod([x[i] - x[j] for i in range(n) for j in range(i + 1, n)]))


@dataclass
class SovGrid:
    p: int
    q: complex
    eta0: np.ndarray          # eta_a^(0), a = 1..N-1
    etaN0: complex
    labels: list             # sorted label tuples
    lam0: complex = 0j

    def __post_init__(self):
        self.index = {h: i for i, h in enumerate(self.labels)}

    @property
    def Z(self):
        return self.eta0 ** self.p

    @property
    def n_sites(self):
        return len(self.eta0) + 1

    def eta(self, h) -> np.ndarray:
        h = np.asarray(h)
        return np.append(self.eta0 * self.q ** h[:-1], self.etaN0 * self.q ** h[-1])

    def point(self, a: int, k: int) -> complex:
        return self.eta0[a] * self.q ** k

    def b_eigenvalue(self, h, lam):
        e = self.eta(h)
        return e[-1] * np.prod(lam / e[:-1] - e[:-1] / lam)


@dataclass
class SovBasis:
    params: ModelParams
    grid: SovGrid
    amps: AmplitudeTables
    left: np.ndarray          # rows <h|
    right: np.ndarray         # columns |h>
    right_independent: np.ndarray | None = None
    C_N: complex = 1.0
    _left_inv: np.ndarray | None = field(default=None, repr=False)

    @property
    def labels(self):
        return self.grid.labels

    @property
    def dim(self):
        return len(self.grid.labels)

    def omega(self, eta):
        return eta ** (self.params.n_sites - 2)

    def abar_sov(self, lam):
        """Right-gauge amplitude abar(q lam)."""
        return self.amps.abar(self.params.phase.q * lam)

    @property
    def left_inv(self):
        if self._left_inv is None:
            self._left_inv = np.linalg.inv(self.left)
        return self._left_inv

    def to_physical(self, S: np.ndarray) -> np.ndarray:
        """Operator whose left action on covectors is the label-space matrix S."""
        return self.left_inv @ S @ self.left

    def to_sov(self, op: np.ndarray) -> np.ndarray:
        return self.left @ op @ self.left_inv

    def diag_op(self, fn) -> np.ndarray:
        """Physical operator acting as fn(eta) on each covector <eta|."""
        vals = np.array([fn(self.grid.eta(h)) for h in self.labels])
        return self.left_inv @ (vals[:, None] * self.left)

    def shift_matrix(self, a: int, step: int = -1) -> np.ndarray:
        """Label-space matrix of T_a^{+-}: <h| T = <h + step e_a|."""
        S = np.zeros((self.dim, self.dim), dtype=complex)
        p = self.grid.p
        for h in self.labels:
            h2 = list(h)
            h2[a] = (h2[a] + step) % p
            S[self.grid.index[h], self.grid.index[tuple(h2)]] = 1
        return S


def _orbit_key(z):
    return (round(abs(z), 8), round(float(np.angle(z)), 8))


def diagonalize_b_family(params: ModelParams, rng: np.random.Generator, retries: int = 5):
    """Diagonalize B(lam0) and read off the separate variables of every eigenvector."""
    N, p = params.n_sites, params.p
    q = params.phase.q
    Bm = b_coefficients(params)
    last = None
    for _ in range(retries + 1):
        lam0 = 1.1 * np.exp(2j * np.pi * rng.random())
        B0 = sum(Bm[m] * lam0 ** (-(N - 1) + 2 * m) for m in range(N))
        w, R = np.linalg.eig(B0)
        gaps = np.abs(w[:, None] - w[None, :]) + np.eye(len(w)) * 1e300
        if gaps.min() < 1e-6 * np.abs(w).max():
            last = "eigenvalue collision"
            continue
        L = np.linalg.inv(R)
        coef = np.einsum("jk,mkl,lj->jm", L, Bm, R)
        try:
            grid, raw = _assign_labels(coef, L, R, N, p, q, lam0)
        except NonGenericError as err:
            last = str(err)
            continue
        return grid, raw
    raise NonGenericError(f"non-simple B spectrum ({last})")


def _assign_labels(coef, L, R, N, p, q, lam0):
    D = p ** N
    roots = [np.roots(c[::-1]) if N > 1 else np.array([]) for c in coef]
    lead = coef[:, N - 1]
    Zs = []
    for z in np.concatenate(roots) ** p if N > 1 else []:
        if not any(abs(z - y) < 1e-6 * max(1, abs(y)) for y in Zs):
            Zs.append(z)
    if len(Zs) != N - 1:
        raise NonGenericError(f"found {len(Zs)} separate-variable orbits, expected {N - 1}")
    Zs = sorted(Zs, key=_orbit_key)
    # x = eta^2 so Z^2 = x^p; eta0 = principal sqrt of the principal p-th root of Z^2
    eta0 = np.array([np.sqrt(z ** (1 / p)) for z in Zs])
    labels, etaN = [], []
    for j in range(D):
        ks = []
        for a in range(N - 1):
            cands = [x for x in roots[j] if abs(x ** p - Zs[a]) < 1e-6 * max(1, abs(Zs[a]))]
            if len(cands) != 1:
                raise NonGenericError("ambiguous orbit assignment")
            ratio = cands[0] / eta0[a] ** 2
            kk = int(np.argmin([abs(ratio - q ** (2 * k)) for k in range(p)]))
            if abs(ratio - q ** (2 * kk)) > 1e-6:
                raise NonGenericError("zero off the q-grid")
            ks.append(kk)
        etas = eta0 * q ** np.array(ks)
        etaN.append(lead[j] * np.prod(etas))
        labels.append(ks)
    etaN = np.array(etaN)
    eN0 = complex(etaN[0] ** p) ** (1 / p)
    full = {}
    for j in range(D):
        r = etaN[j] / eN0
        kN = int(np.argmin([abs(r - q ** k) for k in range(p)]))
        if abs(r - q ** kN) > 1e-6:
            raise NonGenericError("eta_N off the q-grid")
        full[tuple(labels[j]) + (kN,)] = j
    if len(full) != D:
        raise NonGenericError("repeated SOV label")
    grid = SovGrid(p, q, eta0, eN0, sorted(full), lam0)
    order = [full[h] for h in grid.labels]
    return grid, (L[order], R[:, order])


def build_sov_bases(params: ModelParams, grid: SovGrid, raw, amps: AmplitudeTables | None = None):
    """Gauge-fixed left and right bases, built recursively from A and Theta actions."""
    amps = amps or amplitude_tables(params)
    N, p, q = params.n_sites, params.p, params.phase.q
    # abar on the separate-variable orbits: B's average vanishes there, so pin to A's average
    for a in range(N - 1):
        M = average_matrix(params, grid.Z[a])
        if abs(M[0, 1]) > 1e-7 * np.abs(M).max():
            raise NonGenericError("B average does not vanish on the SOV orbit")
        amps.pin_orbit(grid.Z[a], M[0, 0])
    Lraw, Rraw = raw
    Th = theta_operator(params.phase, N)
    ref = (0,) * N
    iref = grid.index[ref]
    r0 = Rraw[:, iref]
    nz = np.flatnonzero(np.abs(r0) > 1e-8 * np.abs(r0).max())[0]
    r0 = r0 / r0[nz]
    e = grid.eta(ref)
    w0 = np.prod(e[:-1] ** (N - 2)) / vandermonde(e[:-1] ** 2)
    l0 = Lraw[iref] * w0 / (Lraw[iref] @ r0)
    Acache = {}

    def A_at(lam):
        key = (round(lam.real, 12), round(lam.imag, 12))
        if key not in Acache:
            Acache[key] = monodromy(params, lam).A
        return Acache[key]

    left = {ref: l0}
    right = {ref: r0}
    for store, is_left in ((left, True), (right, False)):
        todo = deque([ref])
        while todo:
            h = todo.popleft()
            e = grid.eta(h)
            for a in range(N):
                hn = list(h)
                hn[a] = (hn[a] + (-1 if is_left else 1)) % p
                hn = tuple(hn)
                if hn in store:
                    continue
                if a < N - 1:
                    if is_left:
                        vec = store[h] @ A_at(e[a]) / amps.abar(e[a])
                    else:
                        vec = A_at(e[a]) @ store[h] / amps.abar(q * e[a])
                else:
                    vec = store[h] @ Th if is_left else Th @ store[h]
                store[hn] = vec
                todo.append(hn)
    Lrows = np.array([left[h] for h in grid.labels])
    Rind = np.array([right[h] for h in grid.labels]).T
    # the right basis used downstream is the dual of the left one with the measure weights;
    # the recursion-built right basis is kept for the independent consistency check
    w = np.array([np.prod(grid.eta(h)[:-1] ** (N - 2)) / vandermonde(grid.eta(h)[:-1] ** 2)
                  for h in grid.labels])
    Rcols = np.linalg.inv(Lrows) * w[None, :]
    return SovBasis(params, grid, amps, Lrows, Rcols, Rind)


def make_sov_basis(params: ModelParams, rng: np.random.Generator, amps=None) -> SovBasis:
    grid, raw = diagonalize_b_family(params, rng)
    return build_sov_bases(params, grid, raw, amps)


# ----------------------------------------------------------------------------
# measure and identity

def sov_measure(basis: SovBasis) -> np.ndarray:
    """mu_h = V(eta^2) / (C_N prod omega) for every label, in label order."""
    out = []
    for h in basis.labels:
        e = basis.grid.eta(h)[:-1]
        out.append(vandermonde(e ** 2) / (basis.C_N * np.prod(basis.omega(e))))
    return np.array(out)


def direct_measure(basis: SovBasis, right=None) -> np.ndarray:
    right = basis.right if right is None else right
    return 1 / np.einsum("ij,ji->i", basis.left, right)


def decompose_identity(basis: SovBasis) -> np.ndarray:
    mu = sov_measure(basis)
    return (basis.right * mu[None, :]) @ basis.left


# ----------------------------------------------------------------------------
# explicit SOV actions of A and D (label space, left action)

def _interp_weights(e, lam):
    """Lagrange weights prod_{b!=a}(lam/e_b - e_b/lam)/(e_a/e_b - e_b/e_a)."""
    n = len(e)
    out = np.ones(n, dtype=complex)
    for a in range(n):
        for b in range(n):
            if b != a:
                out[a] *= (lam / e[b] - e[b] / lam) / (e[a] / e[b] - e[b] / e[a])
    return out


def sov_action(basis: SovBasis, which: str, lam: complex, side: str = "left") -> np.ndarray:
    """Label-space matrix of A(lam) or D(lam) predicted by the SOV representation.

    Left: ``<h| X = sum_h' S[h, h'] <h'|``.  Right: ``X |h> = sum_h' S[h', h] |h'>``.
    """
    g = basis.grid
    N, p, q = basis.params.n_sites, g.p, g.q
    ap, am, dp, dm = asymptotic_constants(basis.params)
    amps = basis.amps
    sgn = (-1) ** (N - 1)
    S = np.zeros((basis.dim, basis.dim), dtype=complex)

    def put(h, shift_axis, step, val):
        h2 = list(h)
        h2[shift_axis] = (h2[shift_axis] + step) % p
        i, j = g.index[h], g.index[tuple(h2)]
        if side == "left":
            S[i, j] += val
        else:
            S[j, i] += val

    for h in basis.labels:
        e = g.eta(h)
        ea = e[:-1]
        wts = _interp_weights(ea, lam)
        full = np.prod(lam / ea - ea / lam)
        P, Pi = np.prod(ea), np.prod(1 / ea)
        # on the left the covector moves opposite to the right vector
        s_dn = -1 if side == "left" else 1
        if which == "A":
            for a in range(N - 1):
                amp = amps.abar(ea[a]) if side == "left" else amps.abar(q * ea[a])
                put(h, a, s_dn, wts[a] * amp)
            put(h, N - 1, s_dn, full * ap * P * lam)
            put(h, N - 1, -s_dn, full * sgn * am * Pi / lam)
        elif which == "D":
            for a in range(N - 1):
                amp = amps.dbar(ea[a]) if side == "left" else amps.dbar(ea[a] / q)
                put(h, a, -s_dn, wts[a] * amp)
            put(h, N - 1, -s_dn, full * dp * P * lam)
            put(h, N - 1, s_dn, full * sgn * dm * Pi / lam)
        else:
            raise ValueError(which)
    return S
