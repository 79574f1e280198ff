import pytest

from commcayley.metric import CommutatorAlphabet
from commcayley.quasimorphism import Pattern, defect_bound
from commcayley.words import parse_word


@pytest.fixture(scope="session")
def A2_L2():
    return CommutatorAlphabet.build(2, 2)


@pytest.fixture(scope="session")
def A2_L4():
    return CommutatorAlphabet.build(2, 4)


@pytest.fixture(scope="session")
def A2_L6():
    return CommutatorAlphabet.build(2, 6)


@pytest.fixture(scope="session")
def A3_L4():
    return CommutatorAlphabet.build(3, 4)


@pytest.fixture(scope="session")
def defect_ab():
    return defect_bound(Pattern(parse_word("ab", 2)), 500, seed=9)


@pytest.fixture(scope="session")
def defect_abAB():
    return defect_bound(Pattern(parse_word("abAB", 2)), 500, seed=9)
