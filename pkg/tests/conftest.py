import numpy as np
import pytest

from jscc_mac.model import ClassPolicy, InputDistribution, MacChannel, SourceSpec, SystemModel
from jscc_mac.paperex import build_paper_model

DATA = __import__("pathlib").Path(__file__).parent / "data"


def _dist(rng, n):
    v = rng.dirichlet(np.ones(n))
    v[-1] = 1.0 - v[:-1].sum()
    return tuple(float(x) for x in v)


def random_model(rng, n_in=(2, 3), ny=2, identical=False, p_range=(0.01, 0.5)) -> SystemModel:
    """Binary sources, small random MAC, random class distributions."""
    n1, n2 = (int(rng.integers(n_in[0], n_in[1] + 1)) for _ in range(2))
    sources = []
    for _ in range(2):
        p = float(rng.uniform(*p_range))
        sources.append(SourceSpec((p, 1.0 - p)))
    w = np.array([_dist(rng, ny) for _ in range(n1 * n2)])
    q = []
    for n in (n1, n2):
        a = InputDistribution(_dist(rng, n))
        b = a if identical else InputDistribution(_dist(rng, n))
        q.append((a, b))
    return SystemModel(sources[0], sources[1], MacChannel.from_array(w, n1, n2), ClassPolicy(tuple(q)))


@pytest.fixture(scope="session")
def paper_model():
    return build_paper_model()
