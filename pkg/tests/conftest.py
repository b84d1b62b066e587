import pytest

from umlpp import fixtures


@pytest.fixture
def cinema():
    project, layouts = fixtures.build_cinema()
    return project


@pytest.fixture
def cinema_with_layouts():
    return fixtures.build_cinema()


@pytest.fixture
def staffing():
    project, layouts = fixtures.build_staffing()
    return project
