"""
Prime-field arithmetic, exact linear algebra and seeded noise streams.
"""

from .prime_field import (
    FieldElement,
    FieldError,
    FieldMatrix,
    FieldVector,
    PrimeField,
    SingularMatrixError,
)

__all__ = [
    'FieldElement', 'FieldError', 'FieldMatrix', 'FieldVector',
    'PrimeField', 'SingularMatrixError',
]
