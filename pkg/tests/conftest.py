"""Shared fixtures.

The expensive objects (periodic oracle runs, large root sets) are built once
per session.  Timed acceptance tests construct their own instances so the
measured runtimes are honest; everything else reuses these.
"""

import numpy as np
import pytest

from ekemq import (
    ModelSpec,
    RateFunction,
    build_root_set,
    extract_boundary,
    integrate_periodic,
)


@pytest.fixture(scope="session")
def mm1_spec():
    return ModelSpec(1, 1, RateFunction(3.0), RateFunction(5.0))


@pytest.fixture(scope="session")
def periodic74_spec():
    """Erlang-7 arrivals, Erlang-4 service, sinusoidal rates."""
    return ModelSpec(
        7, 4,
        RateFunction(3.0, sin=((1, -2.0),)),
        RateFunction(5.0, sin=((1, 4.0),)),
    )


@pytest.fixture(scope="session")
def flat74_spec():
    """Same stage structure with the harmonics removed."""
    return ModelSpec(7, 4, RateFunction(3.0), RateFunction(5.0))


@pytest.fixture(scope="session")
def mm1_dist(mm1_spec):
    return integrate_periodic(mm1_spec, level_cap=60, grid_size=64, tol=1e-12)


@pytest.fixture(scope="session")
def mm1_boundary(mm1_dist):
    return extract_boundary(mm1_dist)


@pytest.fixture(scope="session")
def mm1_roots(mm1_spec):
    return build_root_set(mm1_spec, 0)


@pytest.fixture(scope="session")
def periodic74_dist(periodic74_spec):
    return integrate_periodic(periodic74_spec, level_cap=50, grid_size=512,
                              tol=1e-10)


@pytest.fixture(scope="session")
def periodic74_boundary(periodic74_dist):
    return extract_boundary(periodic74_dist)


@pytest.fixture(scope="session")
def periodic74_roots10(periodic74_spec):
    return build_root_set(periodic74_spec, 10)


@pytest.fixture(scope="session")
def periodic74_roots40(periodic74_spec):
    return build_root_set(periodic74_spec, 40)


@pytest.fixture(scope="session")
def grid16():
    return np.arange(16) / 16.0
