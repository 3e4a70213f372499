import numpy as np
import pytest

from evaffect.events import EventStream, SensorGeometry


def random_stream(rng: np.random.Generator, geometry: SensorGeometry,
                  n_events: int, t_max: int = 100_000) -> EventStream:
    """Uniformly random sorted stream over the geometry."""
    t = np.sort(rng.integers(0, t_max, size=n_events))
    x = rng.integers(0, geometry.width, size=n_events)
    y = rng.integers(0, geometry.height, size=n_events)
    p = rng.choice([-1, 1], size=n_events)
    return EventStream(geometry, t, x, y, p)


@pytest.fixture
def rng():
    return np.random.default_rng(0xE5FEC7)
