import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import rel
from sovlattice import local_operators as lo
from sovlattice.algebra_core import Phase, average_matrix, embed, monodromy, weyl_pair

mp = np.linalg.matrix_power


@pytest.mark.parametrize("name", ["chp32", "chp33"])
def test_reconstructions(name, request):
    b = request.getfixturevalue(name)
    ctx, P = b.ctx, b.params
    u, v = weyl_pair(P.phase)
    for n in range(P.n_sites):
        ui = embed(u.T, n, P.n_sites)
        assert rel(lo.reconstruct_u_inverse(ctx, n), ui) < 1e-7
        assert rel(lo.reconstruct_u_inverse(ctx, n, "DC"), lo.reconstruct_u_inverse(ctx, n)) < 1e-9
        a0 = lo.reconstruct_alpha0(ctx, n)
        assert rel(lo.reconstruct_alpha0(ctx, n, "CD"), a0) < 1e-9
        assert rel(lo.alpha0_closed_form(P, n), a0) < 1e-7
        S, pred = lo.beta_sum_rule(ctx, n)
        assert rel(S, pred * np.eye(P.dim)) < 1e-7
        betas = lo.beta_operators(ctx, n)
        vn = embed(v, n, P.n_sites)
        for k in range(1, P.p):
            assert rel(lo.reconstruct_v_even_power(ctx, n, k, betas), mp(vn, 2 * k)) < 1e-7
            assert rel(lo.reconstruct_v_power(ctx, n, k, betas), mp(vn, k)) < 1e-7
        for k in range(P.p):
            assert rel(lo.beta_expansion(ctx, n, k), betas[k]) < 1e-7
        assert lo.local_factorization_ranks(P, n) == [P.p, P.p]


def test_context_requires_chiral(generic32):
    with pytest.raises(ValueError):
        lo.make_context(generic32.params)


@pytest.mark.parametrize("name", ["chp32", "chp33", "generic33"])
def test_power_expansion(name, request):
    b = request.getfixturevalue(name)
    X, P = b.basis, b.params
    lam = 0.7 + 0.3j
    M = monodromy(P, lam)
    BA = np.linalg.inv(M.B) @ M.A
    for m in (1, 2, P.p):
        assert rel(lo.power_expansion_binvA(X, lam, m), mp(BA, m)) < 1e-7
    avg = average_matrix(P, lam ** P.p)
    assert rel(mp(BA, P.p), avg[0, 0] / avg[0, 1] * np.eye(P.dim)) < 1e-7


@given(st.sampled_from([3, 5, 7]), st.integers(1, 3), st.data())
@settings(max_examples=40, deadline=None)
def test_q_number_additivity(p, parts, data):
    """sum_a [alpha_a] prod_{b<a} q^{-alpha_b} prod_{b>a} q^{alpha_b} = [sum alpha]."""
    q = Phase(p).q
    al = data.draw(st.lists(st.integers(0, 2 * p), min_size=parts, max_size=parts))
    lhs = 0
    for a in range(parts):
        lhs += (lo.q_number(al[a], q) * q ** (-sum(al[:a])) * q ** sum(al[a + 1:]))
    assert abs(lhs - lo.q_number(sum(al), q)) < 1e-10 * max(1, abs(lhs))


@pytest.mark.parametrize("parts", [1, 2, 3, 4])
def test_q_multinomial_root_of_unity(parts):
    q = Phase(3).q
    for al in lo.compositions(3, parts):
        expect = 1.0 if 3 in al else 0.0
        assert abs(lo.q_multinomial(3, al, q) - expect) < 1e-12


@given(st.integers(0, 6), st.integers(1, 4))
def test_compositions_count(k, parts):
    from math import comb
    comps = list(lo.compositions(k, parts))
    assert len(comps) == comb(k + parts - 1, parts - 1)
    assert all(sum(c) == k and len(c) == parts for c in comps)


@given(st.integers(0, 5), st.integers(0, 5))
def test_q_binomial_generic_q_matches_factorials(n, k):
    q = np.exp(0.37j)
    if k > n:
        return
    direct = lo.q_factorial(n, q) / (lo.q_factorial(k, q) * lo.q_factorial(n - k, q))
    assert abs(lo.q_multinomial(n, (k, n - k), q) - direct) < 1e-9 * max(1, abs(direct))


@pytest.mark.parametrize("name", ["chp32", "chp33"])
def test_elementary_operator_properties(name, request):
    b = request.getfixturevalue(name)
    X, P = b.basis, b.params
    p, N = P.p, P.n_sites
    ops = lo.ElementaryOperators(X)
    sc = max(np.linalg.norm(ops.O(a, k)) for a in range(N - 1) for k in range(p))
    for a in range(N - 1):
        for k in range(p):
            O = ops.O(a, k)
            assert rel(X.left @ O @ X.left_inv, ops.predicted_action(a, k)) < 1e-7
            for h in range(p):
                if h != (k - 1) % p:
                    assert np.linalg.norm(O @ ops.O(a, h)) < 1e-9 * sc ** 2
            cyc = np.eye(P.dim)
            for j in range(p + 1):
                cyc = cyc @ ops.O(a, k - j)
            assert rel(cyc, ops.mean_value_coefficient(a) * O) < 1e-7
    for a, c in itertools.permutations(range(N - 1), 2):
        for k, h in itertools.product(range(p), repeat=2):
            lhs = ops.O(a, k) @ ops.O(c, h)
            rhs = ops.exchange_coefficient(a, k, c, h) * ops.O(c, h) @ ops.O(a, k)
            assert np.linalg.norm(lhs - rhs) < 1e-7 * sc ** 2


def test_dressed_span_n2(chp32):
    ops = lo.ElementaryOperators(chp32.basis)
    rep = lo.dressed_span(chp32.ctx, ops, 0)
    assert rep.rank == rep.full_dim == 81
    assert rep.local_rank == 9
    assert max(rep.residuals.values()) < 1e-8


def test_elementary_index_validation():
    with pytest.raises(ValueError):
        lo.ElementaryIndex(0, 0, ((1, 0, 1), (0, 0, 1)))
    idx = lo.elementary_indices(3, 2)
    assert len(idx) == 9 * (1 + 9)


@pytest.mark.parametrize("N", [2, 3])
def test_power_expansion_p5(N):
    """m = 3, 4 use q-multinomials with entries above 2."""
    from sovlattice.algebra_core import sample_generic
    from sovlattice.sov_basis import make_sov_basis
    rng = np.random.default_rng(4)
    P = sample_generic(Phase(5), N, rng)
    X = make_sov_basis(P, rng)
    lam = 0.7 + 0.3j
    M = monodromy(P, lam)
    BA = np.linalg.inv(M.B) @ M.A
    for m in (3, 4):
        assert rel(lo.power_expansion_binvA(X, lam, m), mp(BA, m)) < 1e-9
