import pytest

from iaefilter.data import SplitSpec, SynthParams, build_dataset, normalize, synth_generate


@pytest.fixture(scope="session")
def synthetic_raw():
    return synth_generate(SynthParams())


@pytest.fixture(scope="session")
def synthetic_norm(synthetic_raw):
    ds = build_dataset(synthetic_raw, SplitSpec(80, 0))
    return normalize(ds, "zscore", "zscore")[0]


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(RESULTS):
        terminalreporter.write_line(RESULTS[n])
