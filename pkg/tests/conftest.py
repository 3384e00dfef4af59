"""
Shared pytest configuration.
"""


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: full experiment runs on the default grids")
