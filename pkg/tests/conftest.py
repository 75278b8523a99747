import pytest

from pomdp_cegar import coarsest_partition, corresponding_waz, parity_chain, parse_spec, quotient

ACCEPTANCE_RESULTS = {}


@pytest.fixture(scope="session")
def chain20():
    return parity_chain(20)


@pytest.fixture(scope="session")
def concrete20(chain20):
    return corresponding_waz(chain20)


@pytest.fixture(scope="session")
def pi0(concrete20):
    return coarsest_partition(concrete20)


@pytest.fixture(scope="session")
def m0(concrete20, pi0):
    return quotient(concrete20, pi0)


@pytest.fixture(scope="session")
def spec20():
    return parse_spec('P<=0.45 [ true U<=20 "fail" ]')


@pytest.fixture(scope="session")
def record_criterion():
    def record(key, result):
        ACCEPTANCE_RESULTS[key] = result
        return result
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_RESULTS):
        ok, detail = ACCEPTANCE_RESULTS[key]
        terminalreporter.write_line(f"criterion {key}: {'PASS' if ok else 'FAIL'} - {detail}")
