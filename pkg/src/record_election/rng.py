"""Counter-based random streams.

All samplers take a ``numpy.random.Generator``.  Reproducible substreams
come from the Philox counter-based bit generator keyed by
``(seed, stream_id)``: distinct stream ids give statistically independent
streams under the same seed, and results are independent of scheduling.
"""

from __future__ import annotations

import os

import numpy as np

__all__ = ["make_rng", "seed_from_env", "DEFAULT_SEED"]

DEFAULT_SEED = 20260826
_MASK64 = (1 << 64) - 1


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Generator on the Philox substream ``(seed, stream)``."""
    if seed < 0 or stream < 0:
        raise ValueError("seed and stream must be nonnegative")
    key = np.array([seed & _MASK64, stream & _MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def seed_from_env(cli_seed: int | None) -> int:
    """CLI seed, falling back to ``RE_SEED`` and then a fixed default."""
    if cli_seed is not None:
        return cli_seed
    env = os.environ.get("RE_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise ValueError(f"RE_SEED must be an integer, got {env!r}") from exc
    return DEFAULT_SEED
