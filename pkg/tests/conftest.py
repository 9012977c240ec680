import pytest


def pytest_configure(config):
    config.addinivalue_line(
        "markers",
        "slow: criteria that consume (or train) the 18K-episode acceptance runs")
