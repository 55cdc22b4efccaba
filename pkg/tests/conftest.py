"""Shared fixtures: the genus-2 group and censuses reused across modules.

The t = 13 census is the workhorse (about 1.1e5 records); it is built once
per session, together with its build time so the acceptance suite can check
the runtime budget without rebuilding.
"""

import time

import pytest

from loopcensus import build_surface_group, enumerate_orbit, save_census


@pytest.fixture(scope="session")
def group():
    return build_surface_group(2)


@pytest.fixture(scope="session")
def census13_timed(group):
    started = time.perf_counter()
    census = enumerate_orbit(group, 13.0)
    return census, time.perf_counter() - started


@pytest.fixture(scope="session")
def census13(census13_timed):
    return census13_timed[0]


@pytest.fixture(scope="session")
def census8(group):
    return enumerate_orbit(group, 8.0)


@pytest.fixture(scope="session")
def census13_file(census13, tmp_path_factory):
    path = tmp_path_factory.mktemp("census") / "census13.bin"
    save_census(census13, str(path))
    return str(path)
