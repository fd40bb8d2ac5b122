import hypothesis
import pytest

from lapsekit import Basis, Contract, G82M, LapseModel

hypothesis.settings.register_profile(
    "suite", deadline=None, max_examples=100, derandomize=True
)
hypothesis.settings.load_profile("suite")


@pytest.fixture(scope="session")
def term_to_100():
    """Baseline 65-year endowment: male 35, cover and maturity 250k."""
    return Contract(entry_age=35.0, term=65.0, sum_insured=250_000.0, maturity=250_000.0)


@pytest.fixture(scope="session")
def plain_basis():
    return Basis(0.03, G82M, LapseModel.zero())


@pytest.fixture(scope="session")
def supported_basis():
    return Basis(0.03, G82M, LapseModel.constant(0.06))
