import numpy as np
import pytest

from conftest import rel
from sovlattice.algebra_core import ModelParams, NonGenericError, Phase, SiteParams, monodromy
from sovlattice.sov_basis import (decompose_identity, direct_measure, make_sov_basis, sov_action,
                                  sov_measure)


@pytest.mark.parametrize("name", ["generic32", "generic33", "chp32"])
def test_b_spectrum_simple_and_actions(name, request):
    X = request.getfixturevalue(name).basis
    P = X.params
    assert X.dim == P.dim == len(set(X.labels))
    for lam in (0.83 + 0.4j, -1.2 + 0.1j):
        M = monodromy(P, lam)
        b = np.array([X.grid.b_eigenvalue(h, lam) for h in X.labels])
        assert len(np.unique(np.round(b, 8))) == P.dim
        assert rel(X.left @ M.B, b[:, None] * X.left) < 1e-8
        for which, op in (("A", M.A), ("D", M.D)):
            assert rel(X.left @ op, sov_action(X, which, lam) @ X.left) < 1e-8
            assert rel(op @ X.right, X.right @ sov_action(X, which, lam, "right")) < 1e-8


@pytest.mark.parametrize("name", ["generic32", "generic33"])
def test_measure_and_identity(name, request):
    X = request.getfixturevalue(name).basis
    ratio = direct_measure(X, X.right_independent) / sov_measure(X)
    assert np.abs(ratio / ratio[0] - 1).max() < 1e-8
    assert rel(decompose_identity(X), np.eye(X.dim)) < 1e-7


def test_amplitudes_satisfy_qdet_on_grid(generic32):
    from sovlattice.algebra_core import quantum_determinant
    X = generic32.basis
    q = X.params.phase.q
    for e in X.grid.eta0:
        _, det = quantum_determinant(X.params, e)
        assert abs(X.amps.abar(e) * X.amps.dbar(e / q) - det) < 1e-9 * abs(det)


def test_degenerate_parameters_raise():
    P = ModelParams(Phase(3), SiteParams(*[np.full(2, 1.0 + 0j)] * 6))
    with pytest.raises(NonGenericError):
        make_sov_basis(P, np.random.default_rng(0))
