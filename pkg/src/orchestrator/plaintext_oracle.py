"""
Plaintext oracle: the true submodel contents, updated in the clear.
"""

import galois

from client.update_encoder import SparseUpdate
from field.prime_field import DimensionError, as_field_array


class PlaintextOracle:
    """M x P x ell array of submodel symbols with no privacy machinery."""

    def __init__(self, models, modulus: int):
        models = as_field_array(models, modulus)
        if models.ndim != 3:
            raise DimensionError(f"Oracle needs an (M, P, ell) array, got shape {models.shape}")
        self.modulus = modulus
        self.models = models

    @property
    def shape(self):
        return self.models.shape

    def apply(self, theta: int, update: SparseUpdate):
        for s in update.subpackets:
            row = as_field_array(update.deltas[s], self.modulus)
            self.models[theta - 1, s - 1] = self.models[theta - 1, s - 1] + row

    def subpacket(self, theta: int, s: int) -> galois.FieldArray:
        return self.models[theta - 1, s - 1].copy()

    def submodel(self, theta: int) -> galois.FieldArray:
        return self.models[theta - 1].copy()

    def snapshot(self) -> galois.FieldArray:
        return self.models.copy()

    def restore(self, snapshot: galois.FieldArray):
        self.models = snapshot.copy()
