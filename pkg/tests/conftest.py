import os
import sys

sys.path.insert(0, os.path.dirname(__file__))

import pytest  # noqa: E402

from immunization import graphs  # noqa: E402
from immunization.engine import ModelParams, Protocol  # noqa: E402

ALL_PARAMS = [ModelParams(r, s) for r in (1, 2) for s in (1, 2)]


def star_protocol(m: int) -> Protocol:
    """({a1}, {x}, {a2}, {x}, ..., {x}, {am}) on star(m)."""
    steps = []
    for j in range(1, m + 1):
        steps.append({j})
        if j < m:
            steps.append({0})
    return Protocol(ModelParams(1, 1), tuple(steps))


def caterpillar_figure_protocol() -> Protocol:
    """Singleton protocol for caterpillar([3, 1, 2]): a1 x a2 x a3 x y b1 y z c1 z c2."""
    order = [3, 0, 4, 0, 5, 0, 1, 6, 1, 2, 7, 2, 8]
    return Protocol(ModelParams(1, 1), tuple({v} for v in order))


PETERSEN_PROTOCOL_LABELS = [
    ["12", "34", "35"], ["15", "25", "45"], ["13", "23", "35"], ["14", "24", "25"], ["15", "23", "34"],
]


def petersen_protocol() -> Protocol:
    g = graphs.petersen()
    by_label = {name: v for v, name in g.labels.items()}
    return Protocol(ModelParams(1, 1), tuple({by_label[x] for x in step} for step in PETERSEN_PROTOCOL_LABELS))


@pytest.fixture
def unit():
    return ModelParams(1, 1)


# acceptance summary -------------------------------------------------------

ACCEPTANCE_RESULTS: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_RESULTS):
        ok, title = ACCEPTANCE_RESULTS[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {title}")
