"""Counter-based space-time white noise.

Each (seed, stream) pair keys a Philox generator. The row of standard normals
for time step m starts at counter [0, 0, m, purpose], so any row can be
regenerated on its own and a replica's noise does not depend on how many
other replicas run.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

FIELD_NOISE = 0
PARTICLE_NOISE = 1

_MASK64 = (1 << 64) - 1


def _key(seed: int, stream: int) -> int:
    return (int(seed) & _MASK64) | ((int(stream) & _MASK64) << 64)


def philox_generator(seed: int, stream: int, m: int = 0, purpose: int = FIELD_NOISE) -> np.random.Generator:
    """Return a generator positioned at the start of row ``m`` for ``purpose``."""
    bit_generator = np.random.Philox(key=_key(seed, stream), counter=[0, 0, int(m), int(purpose)])
    return np.random.Generator(bit_generator)


def noise_row(seed: int, stream: int, m: int, size: int) -> np.ndarray:
    """Standard normals xi_{m,0..size-1}; prefix-stable in ``size``."""
    return philox_generator(seed, stream, m).standard_normal(size)


def sample_noise(seed: int, stream: int, m: int, j: int) -> float:
    return float(noise_row(seed, stream, m, j + 1)[j])


@dataclass(frozen=True)
class NoiseRealization:
    """Lazily generated variates xi_{m,j} for one (seed, stream)."""

    seed: int
    stream: int

    def row(self, m: int, size: int) -> np.ndarray:
        return noise_row(self.seed, self.stream, m, size)

    def sample(self, m: int, j: int) -> float:
        return sample_noise(self.seed, self.stream, m, j)

    def particle_generator(self) -> np.random.Generator:
        return philox_generator(self.seed, self.stream, 0, PARTICLE_NOISE)
