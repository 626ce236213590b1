import numpy as np
import pytest

from sovlattice import chiral_potts as chp
from sovlattice.algebra_core import Phase, sample_generic
from sovlattice.local_operators import make_context
from sovlattice.sov_basis import make_sov_basis
from sovlattice.spectrum import oracle_eigensystem, sov_spectrum


def rel(a, b):
    return float(np.linalg.norm(np.asarray(a) - np.asarray(b)) / np.linalg.norm(b))


class Bundle:
    """Model + SOV basis + spectral records, built once per session."""

    def __init__(self, params, rng):
        self.params = params
        self.basis = make_sov_basis(params, rng)
        self.es = oracle_eigensystem(params)
        self.records = sov_spectrum(self.basis, self.es)
        self.ctx = make_context(params) if params.curve is not None else None


@pytest.fixture(scope="session")
def generic32():
    rng = np.random.default_rng(11)
    return Bundle(sample_generic(Phase(3), 2, rng), rng)


@pytest.fixture(scope="session")
def generic33():
    rng = np.random.default_rng(12)
    return Bundle(sample_generic(Phase(3), 3, rng), rng)


@pytest.fixture(scope="session")
def chp32():
    rng = np.random.default_rng(7)
    return Bundle(chp.sample_chp(Phase(3), 2, rng), rng)


@pytest.fixture(scope="session")
def chp33():
    rng = np.random.default_rng(7)
    return Bundle(chp.sample_chp(Phase(3), 3, rng), rng)
