"""Shared builders for small base geometries written as dictionaries of expression strings."""
from __future__ import annotations

import pytest
from hypothesis import settings

from mrext.basegeo import BaseGeometry, levi_civita_base
from mrext.symexpr import parse_field
from mrext.tensor import DOWN, UP, Frame, TensorField, coordinates

settings.register_profile("repo", deadline=None, max_examples=40)
settings.load_profile("repo")

# 0-based (h, i, j) entries of the upper-half-space hyperbolic connection in dimension 3
H3_GAMMA = {(0, 0, 2): "-1/x3", (0, 2, 0): "-1/x3", (1, 1, 2): "-1/x3", (1, 2, 1): "-1/x3",
            (2, 0, 0): "1/x3", (2, 1, 1): "1/x3", (2, 2, 2): "-1/x3"}
STANDARD_J4 = {(1, 0): "1", (0, 1): "-1", (3, 2): "1", (2, 3): "-1"}
NEUTRAL_G4 = {(0, 0): "1", (1, 1): "-1", (2, 2): "1", (3, 3): "-1"}


def field(n: int, valence, entries=None, symmetric: bool = False, frame: Frame = Frame.BASE) -> TensorField:
    """Tensor field over x1..xn, p1..pn from 0-based index keys and expression strings."""
    v = coordinates(n)
    dim = n if frame is Frame.BASE else 2 * n
    out = {}
    for key, text in (entries or {}).items():
        value = parse_field(text, v) if isinstance(text, str) else text
        out[key] = value
        if symmetric:
            out[key[::-1]] = value
    return TensorField.from_entries(dim, tuple(valence), frame, v, out)


def geometry(n: int, gamma=None, c=None, metric=None, J=None) -> BaseGeometry:
    """Gamma entries are given once per unordered (i, j) pair and mirrored."""
    mirrored = {}
    for (h, i, j), text in (gamma or {}).items():
        mirrored[h, i, j] = text
        mirrored[h, j, i] = text
    g = field(n, (DOWN, DOWN), metric, symmetric=True) if metric is not None else None
    gamma_field = field(n, (UP, DOWN, DOWN), mirrored)
    return BaseGeometry(n, gamma_field, field(n, (DOWN, DOWN), c, symmetric=True), g,
                        field(n, (UP, DOWN), J) if J is not None else None)


def metric_geometry(n: int, metric, c=None, J=None) -> BaseGeometry:
    g = field(n, (DOWN, DOWN), metric, symmetric=True)
    return BaseGeometry(n, levi_civita_base(g), field(n, (DOWN, DOWN), c, symmetric=True), g,
                        field(n, (UP, DOWN), J) if J is not None else None)


def rf(text: str, n: int = 2):
    return parse_field(text, coordinates(n))


@pytest.fixture
def flat2():
    return geometry(2)


@pytest.fixture
def desk():
    """Gamma^1_22 = x1 and c_11 = x2: the small nonflat instance used throughout."""
    return geometry(2, {(0, 1, 1): "x1"}, {(0, 0): "x2"})


def pytest_terminal_summary(terminalreporter):
    import sys
    module = sys.modules.get("test_acceptance")
    if module is None or not module.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(module.RESULTS):
        terminalreporter.write_line(module.RESULTS[number])
