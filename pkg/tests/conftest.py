import pytest

from corpus import SCENE_NAMES, build


@pytest.fixture(scope="session", params=SCENE_NAMES)
def scene(request):
    """One corpus scene per parametrization."""
    return build(request.param)
