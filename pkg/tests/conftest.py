import itertools

import numpy as np
import pytest

from core.hubo import HuboInstance, random_instance


def all_spins(n: int) -> np.ndarray:
    """Every configuration of n spins, qubit 0 first, in lexicographic bitstring order."""
    bits = np.array(list(itertools.product((0, 1), repeat=n)), dtype=np.int64)
    return 1 - 2 * bits


@pytest.fixture
def small_instance() -> HuboInstance:
    return HuboInstance.build(
        3,
        linear={0: 1.0},
        quadratic={(0, 1): 2.0},
        cubic={(0, 1, 2): -1.0},
        offset=0.5,
    )


@pytest.fixture
def random_six() -> HuboInstance:
    return random_instance(6, seed=11, pair_density=0.6, triple_density=0.3)


@pytest.fixture
def queue(tmp_path):
    from services.bench_queue import BenchJobQueue, use_bench_queue
    q = BenchJobQueue(str(tmp_path / "bench_queue.sqlite3"))
    use_bench_queue(q)
    yield q
    use_bench_queue(None)
