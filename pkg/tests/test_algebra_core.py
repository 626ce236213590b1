import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import rel
from sovlattice.algebra_core import (PHASE_CONSTRAINT, ModelParams, Phase, SiteParams,
                                     amplitude_tables, asymptotic_constants, average_matrix,
                                     average_matrix_direct, embed, monodromy, qdet_zeros,
                                     quantum_determinant, sample_generic, sample_self_adjoint,
                                     tau2_coefficients, theta_operator, weyl_generators, weyl_pair,
                                     yba_residual)

phases = st.sampled_from([(3, 2), (3, 4), (5, 2), (5, 4), (7, 2), (5, 6)])


@pytest.mark.parametrize("p,pp", [(4, 2), (3, 3), (3, 6), (2, 4), (1, 2)])
def test_phase_rejects_invalid(p, pp):
    with pytest.raises(ValueError, match=PHASE_CONSTRAINT):
        Phase(p, pp)


def test_v_eigenbasis_and_cyclicity():
    ph = Phase(3)
    u, v = weyl_pair(ph)
    e1 = np.eye(3)[:, 1]
    assert np.allclose(v @ e1, ph.q * e1)
    assert np.allclose(np.linalg.matrix_power(u, 3), np.eye(3))
    assert np.allclose(np.linalg.matrix_power(v, 3), np.eye(3))


@given(phases, st.integers(2, 3), st.data())
@settings(max_examples=20, deadline=None)
def test_weyl_relations_property(ph_pair, N, data):
    ph = Phase(*ph_pair)
    if ph.p ** N > 400:
        N = 2
    n = data.draw(st.integers(0, N - 1))
    m = data.draw(st.integers(0, N - 1))
    un, vn = weyl_generators(ph, n, N)
    um, vm = weyl_generators(ph, m, N)
    expect = ph.q if n == m else 1.0
    assert rel(un @ vm, expect * vm @ un) < 1e-12
    assert rel(un @ um, um @ un) < 1e-12


@pytest.mark.parametrize("p,N", [(3, 2), (3, 3), (5, 2)])
def test_yang_baxter_and_commutativity(p, N):
    rng = np.random.default_rng(p * 10 + N)
    P = sample_generic(Phase(p), N, rng)
    l1, l2 = 0.8 + 0.3j, -0.4 + 1.1j
    assert yba_residual(P, l1, l2) < 1e-9
    T1, T2 = monodromy(P, l1).tau2, monodromy(P, l2).tau2
    assert np.linalg.norm(T1 @ T2 - T2 @ T1) < 1e-10 * np.linalg.norm(T1) * np.linalg.norm(T2)


def test_theta_relations():
    rng = np.random.default_rng(1)
    P = sample_generic(Phase(3), 2, rng)
    Th = theta_operator(P.phase, 2)
    M = monodromy(P, 0.9 + 0.2j)
    assert rel(Th @ M.tau2, M.tau2 @ Th) < 1e-12
    assert rel(Th @ M.C, P.phase.q * M.C @ Th) < 1e-12


def test_quantum_determinant_central_and_zero():
    rng = np.random.default_rng(2)
    P = sample_generic(Phase(3), 2, rng)
    op, sc = quantum_determinant(P, 0.7 - 0.5j)
    assert rel(op, sc * np.eye(P.dim)) < 1e-9
    mup = qdet_zeros(P)[0]
    _, z = quantum_determinant(P, mup[0])
    assert abs(z) < 1e-12


def test_average_values_match_products():
    rng = np.random.default_rng(3)
    P = sample_generic(Phase(3), 2, rng)
    lam = 1.2 * np.exp(0.4j)
    avg = average_matrix(P, lam ** 3)
    for op, val in zip(average_matrix_direct(P, lam), avg.ravel()):
        assert rel(op, val * np.eye(P.dim)) < 1e-8


def test_amplitude_relations():
    rng = np.random.default_rng(4)
    P = sample_generic(Phase(3), 2, rng)
    amps = amplitude_tables(P)
    q = P.phase.q
    for lam in 0.5 + rng.random(20) * np.exp(2j * np.pi * rng.random(20)):
        _, det = quantum_determinant(P, lam)
        assert abs(amps.abar(lam) * amps.dbar(lam / q) - det) < 1e-9 * abs(det)
    lam = 0.9 + 0.4j
    avg = average_matrix(P, lam ** 3)
    pa = np.prod([amps.abar(q ** n * lam) for n in range(1, 4)])
    pd = np.prod([amps.dbar(q ** n * lam) for n in range(1, 4)])
    assert abs(pa + pd - (avg[0, 0] + avg[1, 1])) < 1e-9 * abs(avg).max()


@pytest.mark.parametrize("N", [2, 3])
def test_tau2_asymptotics_and_parity(N):
    rng = np.random.default_rng(5)
    P = sample_generic(Phase(3), N, rng)
    ap, am, dp, dm = asymptotic_constants(P)
    Th = theta_operator(P.phase, N)
    Thi = np.linalg.inv(Th)
    small = monodromy(P, 1e-4).tau2 * 1e-4 ** N
    assert rel(small, am * Thi + dm * Th) < 1e-6
    big = monodromy(P, 1e3).tau2 / 1e3 ** N
    assert rel(big, ap * Th + dp * Thi) < 1e-5
    T = tau2_coefficients(P)
    assert T.shape == (N + 1, P.dim, P.dim)
    lam = 0.8 + 0.6j
    sgn = (-1) ** N
    assert rel(monodromy(P, -lam).tau2, sgn * monodromy(P, lam).tau2) < 1e-12


@pytest.mark.parametrize("eps", [1, -1])
def test_self_adjoint_sampling(eps):
    rng = np.random.default_rng(6)
    P = sample_self_adjoint(Phase(3), 2, rng, eps)
    for lam in (0.7, 1.6):
        T = monodromy(P, lam).tau2
        assert rel(T.conj().T, T) < 1e-12


def test_embed_rejects_bad_site():
    with pytest.raises((IndexError, ValueError)):
        embed(np.eye(3), 3, 2)


def test_site_params_validation():
    with pytest.raises(ValueError):
        SiteParams(*[np.ones(2)] * 5, np.ones(3))
    P = ModelParams(Phase(3), SiteParams(*[np.full(2, 1.1 + 0.2j)] * 6))
    assert P.dim == 9 and P.n_sites == 2
