import numpy as np
import pytest
from hypothesis import HealthCheck, settings, strategies as st

from weldnorm.sphere import Mobius

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

coord = st.floats(-2.0, 2.0, allow_nan=False, allow_infinity=False)
complex_coord = st.builds(complex, coord, coord)


def _mobius(entries):
    a, b, c, d = entries
    return Mobius(a, b, c, d)


# well-conditioned maps only: |det| bounded away from zero before normalization
complex_mobius = st.tuples(complex_coord, complex_coord, complex_coord, complex_coord).filter(
    lambda v: abs(v[0] * v[3] - v[1] * v[2]) > 0.2).map(_mobius)
real_mobius = st.tuples(coord, coord, coord, coord).filter(
    lambda v: v[0] * v[3] - v[1] * v[2] > 0.2).map(_mobius)


def random_real_mobius(rng) -> Mobius:
    while True:
        a, b, c, d = rng.uniform(-2, 2, 4)
        if a * d - b * c > 0.2:
            return Mobius(a, b, c, d)


def disk_automorphism(rng) -> Mobius:
    a = 0.6 * rng.uniform() * np.exp(2j * np.pi * rng.uniform())
    rot = np.exp(2j * np.pi * rng.uniform())
    return Mobius(rot, -rot * a, -np.conj(a), 1.0)



# one summary line per acceptance criterion, combining all tests that carry its marker
_criteria: dict[int, bool] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is not None and (report.when == "call" or report.failed):
        n = marker.args[0]
        _criteria[n] = _criteria.get(n, True) and report.passed


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if _criteria[n] else 'FAIL'}")
