import hypothesis
import numpy as np
import pytest

np.seterr(all="warn", under="ignore")

hypothesis.settings.register_profile("ci", deadline=None, max_examples=60)
hypothesis.settings.load_profile("ci")

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(num, title): numbered acceptance criterion")
    config.addinivalue_line("markers", "slow: takes more than a few seconds")


@pytest.fixture
def report(request):
    """Collects free-text details shown next to the criterion verdict."""
    details = []
    request.node._criterion_details = details
    return details.append


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        details = "; ".join(getattr(item, "_criterion_details", []))
        _CRITERIA[mark.args[0]] = (mark.args[1], rep.passed, details)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_CRITERIA):
        title, passed, details = _CRITERIA[num]
        line = f"{'PASS' if passed else 'FAIL'} {num:>2}. {title}"
        if details:
            line += f"  [{details}]"
        terminalreporter.write_line(line)
