import pytest

from folio.rules import load_rules
from folio import fonts


@pytest.fixture(scope="session")
def rules():
    return load_rules()


@pytest.fixture(scope="session")
def serif_metrics():
    return fonts.metrics_for("Adobe Caslon", "regular")


@pytest.fixture(scope="session")
def sans_metrics():
    return fonts.metrics_for("Akkurat", "regular")
