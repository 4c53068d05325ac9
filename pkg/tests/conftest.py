import pytest

from skewrank.field import PrimeField
from skewrank.oracles import TrialPolicy

M61 = 2**61 - 1


@pytest.fixture(scope="session")
def fld():
    return PrimeField(M61)


@pytest.fixture(scope="session")
def f7():
    return PrimeField(7)


@pytest.fixture()
def policy(fld):
    return TrialPolicy(field=fld, seed=1234)
