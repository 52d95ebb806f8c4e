import os
import sys

import pytest
from hypothesis import settings

sys.path.insert(0, os.path.dirname(__file__))

from oracles import DOMAINS  # noqa: E402

from serrin_lab.geometry import domain_from_config, symmetry_planes  # noqa: E402

settings.register_profile("repro", derandomize=True, deadline=None, max_examples=60)
settings.load_profile("repro")

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def domains():
    return {name: domain_from_config(cfg) for name, cfg in DOMAINS.items()}


class _SweepCache:
    def __init__(self, domains):
        self.domains = domains
        self.cache = {}

    def __call__(self, name, n=64):
        key = (name, n)
        if key not in self.cache:
            self.cache[key] = symmetry_planes(self.domains[name], n)
        return self.cache[key]


@pytest.fixture(scope="session")
def sweeps(domains):
    """64-direction sweeps shared by the geometry and acceptance tests."""
    return _SweepCache(domains)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
