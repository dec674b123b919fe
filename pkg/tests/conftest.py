import pytest


def pytest_configure(config):
    config.addinivalue_line(
        "markers",
        "criterion(number, label, budget): acceptance criterion metadata")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    setattr(item, f"rep_{report.when}", report)
