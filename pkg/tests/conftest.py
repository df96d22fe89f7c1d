import os
import sys

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile(
    "quadlat",
    deadline=None,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("quadlat")


@pytest.fixture(scope="session")
def i9_record():
    from quadlat.genus import enumerate_genus
    from quadlat.lattice import identity_lattice

    return enumerate_genus(identity_lattice(9))
