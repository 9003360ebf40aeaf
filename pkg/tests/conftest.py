import numpy as np
import pytest

from sevlab.experiment import encode_table
from sevlab.synthgen import SyntheticConfig, load_marginal_spec, sample_dataset


@pytest.fixture(scope="session")
def spec():
    return load_marginal_spec()


@pytest.fixture(scope="session")
def small_data(spec):
    """One-hot matrix and labels for a 10% scale synthetic table."""
    table, labels = sample_dataset(spec, SyntheticConfig(n_ls=422, n_hs=113, seed=11))
    return encode_table(table, labels)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def small_prepared(small_data):
    from sevlab.experiment import PipelineOptions, prepare_data
    from sevlab.tabular import SplitConfig

    matrix, y = small_data
    return prepare_data(matrix, y, SplitConfig(seed=11), PipelineOptions(rfe_step=10), seed=11)


ACCEPTANCE_LINES: list = []


@pytest.fixture
def record():
    """Collect one PASS/FAIL line per acceptance criterion."""

    def _record(number, passed, detail):
        line = f"{'PASS' if passed else 'FAIL'} criterion {number:>2}: {detail}"
        ACCEPTANCE_LINES.append((number, line))
        print(line)
        return passed

    return _record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
