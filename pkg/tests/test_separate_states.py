import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import rel
from sovlattice.separate_states import (SeparateState, det_sign, eigen_identity_decomposition,
                                        make_separate_state, orthogonality_witness, pairing_determinant,
                                        random_tables, record_states, witness_residual)
from sovlattice.spectrum import sov_weight


def test_constant_tables_hand_sum(generic32):
    X = generic32.basis
    _, vec = make_separate_state("right", 0, np.ones((1, 3)), X)
    hand = sum(sov_weight(X, h) / np.sqrt(3) * X.right[:, i] for i, h in enumerate(X.labels))
    assert rel(vec, hand) < 1e-12


@pytest.mark.parametrize("name", ["generic32", "generic33"])
@given(seed=st.integers(0, 2 ** 32 - 1), k1=st.integers(0, 2), k2=st.integers(0, 2))
@settings(max_examples=25, deadline=None)
def test_pairing_determinant_property(name, request, seed, k1, k2):
    X = request.getfixturevalue(name).basis
    rng = np.random.default_rng(seed)
    l, lv = make_separate_state("left", k1, random_tables(rng, X), X)
    r, rv = make_separate_state("right", k2, random_tables(rng, X), X)
    d = pairing_determinant(l, r, X)
    o = lv @ rv
    if k1 == k2:
        assert abs(d - o) < 1e-9 * abs(o)
    else:
        assert d == 0
        assert abs(o) < 1e-10 * np.linalg.norm(lv) * np.linalg.norm(rv)


@pytest.mark.parametrize("name", ["generic32", "generic33"])
def test_witness_and_identity(name, request):
    b = request.getfixturevalue(name)
    recs = b.records
    for a in recs:
        for c in recs:
            if a is not c and a.k == c.k:
                assert witness_residual(*orthogonality_witness(a.eigenvalue, c.eigenvalue, a, c, b.basis)) < 1e-8
    I, norms = eigen_identity_decomposition(recs, b.basis)
    assert rel(I, np.eye(b.params.dim)) < 1e-7
    assert rel(norms, [r.left_state @ r.right_state for r in recs]) < 1e-8


def test_witness_rejects_cross_sector(generic32):
    r = generic32.records
    a = next(x for x in r if x.k == 0)
    c = next(x for x in r if x.k == 1)
    with pytest.raises(ValueError):
        orthogonality_witness(a.eigenvalue, c.eigenvalue, a, c, generic32.basis)


def test_validation():
    with pytest.raises(ValueError):
        SeparateState("up", 0, np.ones((1, 3)))
    with pytest.raises(ValueError):
        SeparateState("left", 0, np.array([[np.nan, 1, 1]]))
    assert [det_sign(n) for n in (2, 3, 4, 5)] == [1, -1, -1, 1]
