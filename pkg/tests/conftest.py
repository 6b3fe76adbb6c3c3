import pytest

from record_election.rng import make_rng


@pytest.fixture
def rng():
    """Deterministic generator; independent per test via the fixture scope."""
    return make_rng(987654321, 0)


def two_sample_hist(a, b):
    """Aligned integer histograms for two integer-valued sample arrays."""
    import numpy as np

    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    lo = int(min(a.min(), b.min()))
    hi = int(max(a.max(), b.max()))
    return (np.bincount(a - lo, minlength=hi - lo + 1),
            np.bincount(b - lo, minlength=hi - lo + 1))
