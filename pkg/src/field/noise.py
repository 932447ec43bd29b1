"""
Seeded noise sources.

Every random draw in the simulator comes from an independent numpy
Generator keyed by (seed, role, *indices) so that runs are reproducible
and streams for different actors, databases and rounds never overlap.
"""

import zlib
from dataclasses import dataclass
from itertools import product

import galois
import numpy as np

from field.prime_field import PrimeField


def noise_stream(seed: int, role: str, *indices: int) -> np.random.Generator:
    """Independent generator for one (role, index...) stream."""
    key = (zlib.crc32(role.encode('utf-8')),) + tuple(int(i) for i in indices)
    return np.random.default_rng(np.random.SeedSequence(entropy=int(seed), spawn_key=key))


SABOTAGE_MODES = (
    'zero-query-noise',
    'zero-storage-noise',
    'zero-update-noise',
    'published-permutation',
)


@dataclass(frozen=True)
class NoisePolicy:
    """
    Which noise channels are live. The default is the honest scheme;
    sabotaged policies exist only to drive negative controls.
    """
    zero_query_noise: bool = False
    zero_storage_noise: bool = False
    zero_update_noise: bool = False
    published_permutation: bool = False

    @classmethod
    def from_sabotage(cls, mode: str = None) -> 'NoisePolicy':
        if not mode:
            return cls()
        if mode not in SABOTAGE_MODES:
            raise ValueError(f"Unknown sabotage mode '{mode}' (expected one of {', '.join(SABOTAGE_MODES)})")
        return cls(**{mode.replace('-', '_'): True})

    @property
    def is_honest(self) -> bool:
        return not (self.zero_query_noise or self.zero_storage_noise
                    or self.zero_update_noise or self.published_permutation)

    def _zeroed(self, channel: str) -> bool:
        return {
            'query': self.zero_query_noise,
            'storage': self.zero_storage_noise,
            'reversing': self.published_permutation,
            'update': self.zero_update_noise,
        }.get(channel, False)

    def filter(self, channel: str, noise: galois.FieldArray) -> galois.FieldArray:
        """Pass noise through, or zero it if the channel is sabotaged."""
        if self._zeroed(channel):
            return type(noise).Zeros(noise.shape)
        return noise

    def sample(self, channel: str, field: PrimeField, rng: np.random.Generator, shape) -> galois.FieldArray:
        return self.filter(channel, field.random_array(rng, shape))

    def support(self, channel: str, field: PrimeField, size: int) -> galois.FieldArray:
        """Every noise realization a channel can take, one per row (K, size)."""
        if self._zeroed(channel) or size == 0:
            return field.GF.Zeros((1, size))
        return field.array(np.array(list(product(range(field.q), repeat=size)), dtype=np.int64))
