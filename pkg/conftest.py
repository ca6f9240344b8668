import pytest
from django.conf import settings


def pytest_configure(config):
    if not settings.configured:
        settings.configure(
            INSTALLED_APPS=["large_n", "rest_framework"],
            LARGE_N_DEFAULT_DIGITS=50,
        )


@pytest.fixture
def context():
    from large_n.arith import PrecisionContext
    return PrecisionContext(50, 10)
