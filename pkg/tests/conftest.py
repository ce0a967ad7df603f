import pytest

from minidyn.bench import running_example
from minidyn.engine import EngineConfig, analyze_source


@pytest.fixture(scope="session")
def example_source():
    return running_example()


@pytest.fixture(scope="session")
def example_result(example_source):
    return analyze_source(example_source, EngineConfig(check_invariants=True))


def values(result, at, path):
    from minidyn.core import sorted_values

    return sorted_values(result.eval(at, path))
