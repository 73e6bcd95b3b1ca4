import pytest

from coopsim.world import LaneGraph, WorldState

# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def straight_graph(length: float = 200.0, y: float = 0.0) -> LaneGraph:
    pts = [(float(x), y) for x in range(0, int(length) + 1, 10)]
    return LaneGraph.from_polylines({"A": pts})


def two_lane_graph(length: float = 300.0) -> LaneGraph:
    xs = range(0, int(length) + 1, 10)
    return LaneGraph.from_polylines(
        {"R": [(float(x), 0.0) for x in xs], "L": [(float(x), 3.5) for x in xs]},
        neighbors={"R": ("L", None), "L": (None, "R")})


@pytest.fixture
def world() -> WorldState:
    return WorldState(straight_graph())


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
