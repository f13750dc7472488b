"""Shared pytest setup for reflectfpt."""


def pytest_configure(config):
    config.addinivalue_line('markers', 'slow: Monte Carlo runs with 10^4 paths (deselect with -m "not slow")')
