import numpy as np
import pytest

from conftest import rel
from sovlattice import form_factors as ff
from sovlattice import local_operators as lo
from sovlattice.algebra_core import Phase, embed, theta_operator, weyl_pair
from sovlattice import chiral_potts as chp


def test_u_inverse_sweep_n2(chp32):
    b = chp32
    for n in range(2):
        res, phis, sres = ff.u_inverse_sweep(b.basis, b.records, b.ctx, n)
        assert len(res) == 81 and sres < 1e-7
        assert max(r.rel_err for r in res) < 1e-7
        for r in res:
            assert (r.det_value == 0) == ((r.k - r.k_prime - 1) % 3 != 0)
        row = res[0].row()
        assert list(row)[:4] == ["left_index", "right_index", "k", "k_prime"]
        a0 = ff.alpha0_inverse_sweep(b.basis, b.records, b.ctx, n, phis)
        assert max(r.rel_err for r in a0) < 1e-7


def test_shift_cycle_product(chp32):
    """prod_n phi_n over the chain equals the eigenvalue of the full translation."""
    b = chp32
    r = b.records[3]
    phis = [ff.shift_eigenvalue(r, U)[0] for U in b.ctx.Uinv[1:]]
    from sovlattice.chiral_potts import chp_transfer_pair
    P = b.params
    T, _ = chp_transfer_pair(P, P.curve["rs"][-1])
    _, Th = chp_transfer_pair(P, P.curve["qs"][-1])
    full = b.ctx.Uinv[-1] @ T @ Th
    w = np.linalg.solve(full, r.right_state)
    lam_full = (r.left_state @ w) / (r.left_state @ r.right_state)
    assert rel(w, lam_full * r.right_state) < 1e-7
    assert np.isfinite(np.prod(phis))


def test_elementary_sweep_n2(chp32):
    b = chp32
    ops = lo.ElementaryOperators(b.basis)
    res = ff.elementary_sweep(b.basis, b.records, ops, lo.elementary_indices(3, 2)[:20])
    assert max(r.rel_err for r in res) < 1e-7


def test_spot_checks_n3(chp33):
    b = chp33
    rng = np.random.default_rng(1)
    pairs = [(int(i), int(j)) for i, j in zip(rng.integers(27, size=25), rng.integers(27, size=25))]
    ops = lo.ElementaryOperators(b.basis)
    idx = [lo.ElementaryIndex(0, 0, ((0, 1, 1),)), lo.ElementaryIndex(1, 2, ((1, 0, 2),)),
           lo.ElementaryIndex(2, 1, ((0, 2, 1), (1, 1, 1)))]
    res = ff.elementary_sweep(b.basis, b.records, ops, idx, pairs)
    assert max(r.rel_err for r in res) < 1e-6
    res, _, _ = ff.u_inverse_sweep(b.basis, b.records, b.ctx, 2)
    assert max(r.rel_err for r in res) < 1e-6


def test_normalisation_invariance(chp32):
    b = chp32
    res, phis, _ = ff.u_inverse_sweep(b.basis, b.records, b.ctx, 0)
    scaled = ff.rescaled(b.records, np.random.default_rng(5))
    u = embed(weyl_pair(b.params.phase)[0].T, 0, 2)
    for r in [r for r in res if r.det_value != 0][:5]:
        a = ff.invariant_u_ratio(b.basis, b.records, b.ctx, 0, phis, r.left, r.right)
        c = ff.invariant_u_ratio(b.basis, scaled, b.ctx, 0, phis, r.left, r.right)
        o = ff.invariant_oracle(u, b.es.left, b.es.right, r.left, r.right, 3)
        assert abs(a - c) < 1e-8 * abs(a)
        assert abs(a - o) < 1e-7 * abs(o)


def test_compare_zero_pattern():
    assert ff.compare(0, 1e-15, 1.0) == 0.0
    assert ff.compare(0, 0.5, 1.0) == 0.5
    assert ff.compare(1.0, 1.0, 1.0) == 0.0


def test_hamiltonian_homogeneous():
    ph = Phase(3, 4)
    Q0 = chp.curve_point(0.6, np.exp(0.7j), 3)
    P = chp.chp_model(ph, [Q0] * 3, [Q0] * 3, 1.0)
    H, H0, H1 = ff.build_vgr_hamiltonian(P)
    T = chp.chp_transfer_pair(P, chp.curve_point(0.6, np.exp(1.9j), 3))[0]
    assert np.linalg.norm(H @ T - T @ H) < 1e-6 * np.linalg.norm(H) * np.linalg.norm(T)
    Th = theta_operator(ph, 3)
    assert np.linalg.norm(H @ Th - Th @ H) < 1e-10 * np.linalg.norm(H)
    assert ff.hermiticity_residual(H) < 1e-10


def test_hamiltonian_constraint():
    Q0 = chp.curve_point(0.6, np.exp(0.7j), 3)
    P = chp.chp_model(Phase(3, 2), [Q0] * 2, [Q0] * 2, 1.0)
    with pytest.raises(ValueError, match="mod p"):
        ff.build_vgr_hamiltonian(P)


def test_super_integrable_angles():
    f = [ff.f_r(r, np.pi / 2, 3) for r in (1, 2)]
    for r, v in zip((1, 2), f):
        assert abs(v / np.exp(1j * (2 * r - 3) * np.pi / 6) - abs(v)) < 1e-12
