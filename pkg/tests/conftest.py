import pytest


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "acceptance: criteria-level tests that train models (slower)"
    )
