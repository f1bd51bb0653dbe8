import pytest

from spinscape.cli import bundled_fixtures
from spinscape.triangulation import load_triangulation

FIXTURE_PATHS = bundled_fixtures()
FIXTURE_NAMES = sorted(FIXTURE_PATHS)


def load(name: str):
    return load_triangulation(FIXTURE_PATHS[name])


@pytest.fixture(params=FIXTURE_NAMES)
def fixture_tri(request):
    return request.param, load(request.param)


def random_four_valent_graph(rng, max_vertices: int = 12):
    """Random connected 4-valent multigraph (loops allowed) by pairing stubs."""
    from spinscape.triangulation import GluingGraph

    while True:
        n = rng.randint(1, max_vertices)
        stubs = [(v, s) for v in range(n) for s in range(4)]
        rng.shuffle(stubs)
        graph = GluingGraph(n, tuple((stubs[i], stubs[i + 1]) for i in range(0, len(stubs), 2)))
        if graph.is_connected():
            return graph
