import functools

import numpy as np
import pytest

from regdisk.domain import make_field
from regdisk.regularity import decompose_boundary

N = 129

FIELDS = {
    "square_y": ("square", lambda x, y: y),
    "square_y2": ("square", lambda x, y: y * y),
    "square_xy": ("square", lambda x, y: x * y),
    "square_warped": ("square", lambda x, y: y + 0.15 * np.sin(np.pi * x) * y * (1 - y)),
    "half_y": ("half_disk", lambda x, y: y),
    "half_y15": ("half_disk", lambda x, y: np.maximum(y, 0.0) ** 1.5),
    "disk_y": ("disk", lambda x, y: y),
    "disk_perturbed": ("disk", lambda x, y: y + 0.1 * x * (1 - y * y)),
    "disk_y3": ("disk", lambda x, y: y**3),
    "plateau": ("square", lambda x, y: np.minimum(y, 0.8)),
    "bowl": ("square", lambda x, y: (x - 0.5) ** 2 + (y - 0.5) ** 2),
}

WEAKLY_REGULAR = ["square_y", "square_y2", "square_xy", "square_warped", "half_y", "disk_y"]


@functools.lru_cache(maxsize=None)
def get_field(name, n=N):
    kind, func = FIELDS[name]
    return make_field(kind, func, n)


@functools.lru_cache(maxsize=None)
def get_deco(name, n=N):
    return decompose_boundary(get_field(name, n))


@pytest.fixture
def field():
    return get_field


@pytest.fixture
def deco():
    return get_deco


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(line)
