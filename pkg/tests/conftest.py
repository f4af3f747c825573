"""Shared fixtures: assembled systems are immutable, so cache per session."""

import pytest

from momentbc.system import assemble_system, grad_theory

_CACHE = {}


def cached_system(degree, reduction="planar", normal="x", axes=("x", "y", "z")):
    key = (degree, reduction, normal, tuple(axes))
    if key not in _CACHE:
        theory = grad_theory(degree, reduction)
        _CACHE[key] = assemble_system(theory, normal_axis=normal, axes=axes)
    return _CACHE[key]


@pytest.fixture(scope="session")
def g20x():
    # 13 planar moments, wall normal along x
    return cached_system(3)


@pytest.fixture(scope="session")
def g20y():
    # channel orientation: wall normal along y, only the y flux assembled
    return cached_system(3, normal="y", axes=("y",))
