from __future__ import annotations

import pytest

from evdispatch.analysis import generate_price_set
from evdispatch.domain import Scenario, example_scenario_path, load_scenario


@pytest.fixture(scope="session")
def example_scenario() -> Scenario:
    return load_scenario(example_scenario_path())


@pytest.fixture(scope="session")
def high_prices():
    return generate_price_set("high", seed=1)


@pytest.fixture(scope="session")
def example_with_high(example_scenario, high_prices) -> Scenario:
    return example_scenario.with_prices(high_prices)
