from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np


@dataclass
class RngStream:
    """
    Reproducible random stream keyed by (seed, stream_id).

    Identical keys replay identical draws; distinct stream ids are spawned from the
    same SeedSequence and are statistically independent. A stream owns mutable
    generator state and must not be shared between concurrent workers.
    """
    seed: int
    stream_id: int = 0
    _generator: Optional[np.random.Generator] = field(default=None, init=False, repr=False, compare=False)

    @property
    def generator(self) -> np.random.Generator:
        if self._generator is None:
            seq = np.random.SeedSequence(entropy=int(self.seed), spawn_key=(int(self.stream_id),))
            self._generator = np.random.Generator(np.random.PCG64(seq))
        return self._generator

    def child(self, index: int) -> "RngStream":
        """Independent stream for sub-task `index` (e.g. one simulation replicate)."""
        return RngStream(seed=self.seed, stream_id=(int(self.stream_id) << 20) + int(index) + 1)


RngLike = Union[RngStream, np.random.Generator]


def resolve_rng(rng: RngLike) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator
    return rng
