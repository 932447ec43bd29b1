"""
Prime-field arithmetic for the PRUW simulator.
All arithmetic runs on galois FieldArrays over GF(q). Scalars are
FieldElement values; vectors and matrices wrap read-only FieldArrays and
export their symbols as plain int64 arrays for transcripts and reports.
"""

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, List, Sequence, Tuple, Union

import galois
import numpy as np


# Symbols are exported as int64; products of two symbols must fit.
FIELD_MODULUS_LIMIT = 2 ** 31


class FieldError(ValueError):
    """Base class for field arithmetic errors."""


class ModulusMismatchError(FieldError):
    """Operands belong to different fields."""

    def __init__(self, left: int, right: int):
        super().__init__(f"Modulus mismatch: {left} vs {right}")
        self.left = left
        self.right = right


class NonInvertibleError(FieldError):
    """Zero has no multiplicative inverse."""


class DimensionError(FieldError):
    """Vector/matrix shapes do not line up."""


class SingularMatrixError(FieldError):
    """Gaussian elimination found no pivot in a column."""

    def __init__(self, pivot_column: int):
        super().__init__(f"Singular matrix: no nonzero pivot in column {pivot_column}")
        self.pivot_column = pivot_column


def is_prime(n: int) -> bool:
    return n > 1 and galois.is_prime(n)


@lru_cache(maxsize=None)
def galois_field(modulus: int) -> type:
    """The galois FieldArray class for GF(modulus)."""
    return galois.GF(modulus)


def to_ints(array) -> np.ndarray:
    """Plain int64 copy of field symbols."""
    if isinstance(array, galois.FieldArray):
        array = array.view(np.ndarray)
    return np.array(array, dtype=np.int64)


def as_field_array(values, modulus: int) -> galois.FieldArray:
    """
    Copy `values` into GF(modulus). Plain integers are reduced first;
    FieldArrays must already belong to this field.
    """
    GF = galois_field(modulus)
    if isinstance(values, galois.FieldArray):
        if type(values).order != modulus:
            raise ModulusMismatchError(modulus, type(values).order)
        return values.copy()
    return GF(np.mod(np.asarray(values, dtype=np.int64), modulus))


@dataclass(frozen=True)
class FieldElement:
    """Element of F_q."""
    value: int
    modulus: int

    def __post_init__(self):
        if not 0 <= self.value < self.modulus:
            raise FieldError(f"Value {self.value} outside [0, {self.modulus})")

    @property
    def symbol(self) -> galois.FieldArray:
        return galois_field(self.modulus)(self.value)

    def _coerce(self, other: Union['FieldElement', int]) -> galois.FieldArray:
        if isinstance(other, FieldElement):
            if other.modulus != self.modulus:
                raise ModulusMismatchError(self.modulus, other.modulus)
            return other.symbol
        return galois_field(self.modulus)(int(other) % self.modulus)

    def _make(self, symbol: galois.FieldArray) -> 'FieldElement':
        return FieldElement(int(symbol), self.modulus)

    def __add__(self, other):
        return self._make(self.symbol + self._coerce(other))

    __radd__ = __add__

    def __sub__(self, other):
        return self._make(self.symbol - self._coerce(other))

    def __rsub__(self, other):
        return self._make(self._coerce(other) - self.symbol)

    def __mul__(self, other):
        return self._make(self.symbol * self._coerce(other))

    __rmul__ = __mul__

    def __neg__(self):
        return self._make(-self.symbol)

    def __truediv__(self, other):
        divisor = self._coerce(other)
        if int(divisor) == 0:
            raise NonInvertibleError(f"0 has no inverse in F_{self.modulus}")
        return self._make(self.symbol / divisor)

    def __pow__(self, exponent: int):
        if exponent < 0 and self.value == 0:
            raise NonInvertibleError(f"0 has no inverse in F_{self.modulus}")
        return self._make(self.symbol ** int(exponent))

    def __int__(self):
        return self.value

    def __bool__(self):
        return self.value != 0

    def inverse(self) -> 'FieldElement':
        return self ** -1

    def __repr__(self):
        return f"FieldElement({self.value} mod {self.modulus})"


class FieldVector:
    """Immutable vector over F_q backed by a galois FieldArray."""

    __slots__ = ('array', 'modulus')

    def __init__(self, values: Union[galois.FieldArray, np.ndarray, Sequence[int]], modulus: int):
        array = as_field_array(values, modulus)
        if array.ndim != 1 or array.size == 0:
            raise DimensionError(f"FieldVector needs a non-empty 1-D array, got shape {array.shape}")
        array.setflags(write=False)
        object.__setattr__(self, 'array', array)
        object.__setattr__(self, 'modulus', modulus)

    def __setattr__(self, name, value):
        raise AttributeError("FieldVector is immutable")

    @property
    def values(self) -> np.ndarray:
        """Read-only int64 view of the symbols."""
        ints = to_ints(self.array)
        ints.setflags(write=False)
        return ints

    def __len__(self):
        return int(self.array.shape[0])

    def __getitem__(self, index: int) -> FieldElement:
        return FieldElement(int(self.array[index]), self.modulus)

    def __iter__(self):
        for v in self.to_list():
            yield FieldElement(v, self.modulus)

    def __eq__(self, other):
        if not isinstance(other, FieldVector):
            return NotImplemented
        return self.modulus == other.modulus and np.array_equal(self.values, other.values)

    def __hash__(self):
        return hash((self.modulus, self.values.tobytes()))

    def _check(self, other: 'FieldVector'):
        if other.modulus != self.modulus:
            raise ModulusMismatchError(self.modulus, other.modulus)
        if len(other) != len(self):
            raise DimensionError(f"Length mismatch: {len(self)} vs {len(other)}")

    def __add__(self, other: 'FieldVector') -> 'FieldVector':
        self._check(other)
        return FieldVector(self.array + other.array, self.modulus)

    def __sub__(self, other: 'FieldVector') -> 'FieldVector':
        self._check(other)
        return FieldVector(self.array - other.array, self.modulus)

    def scale(self, scalar: Union[FieldElement, int]) -> 'FieldVector':
        GF = type(self.array)
        return FieldVector(self.array * GF(int(scalar) % self.modulus), self.modulus)

    def dot(self, other: 'FieldVector') -> FieldElement:
        self._check(other)
        product = self.array[np.newaxis, :] @ other.array[:, np.newaxis]
        return FieldElement(int(product[0, 0]), self.modulus)

    def to_list(self) -> List[int]:
        return [int(v) for v in self.values]

    def __repr__(self):
        return f"FieldVector({self.to_list()} mod {self.modulus})"


class FieldMatrix:
    """Immutable row-major matrix over F_q backed by a galois FieldArray."""

    __slots__ = ('array', 'modulus')

    def __init__(self, values: Union[galois.FieldArray, np.ndarray, Sequence[Sequence[int]]], modulus: int):
        array = as_field_array(values, modulus)
        if array.ndim != 2 or array.shape[0] == 0 or array.shape[1] == 0:
            raise DimensionError(f"FieldMatrix needs a non-empty 2-D array, got shape {array.shape}")
        array.setflags(write=False)
        object.__setattr__(self, 'array', array)
        object.__setattr__(self, 'modulus', modulus)

    def __setattr__(self, name, value):
        raise AttributeError("FieldMatrix is immutable")

    @property
    def values(self) -> np.ndarray:
        ints = to_ints(self.array)
        ints.setflags(write=False)
        return ints

    @property
    def rows(self) -> int:
        return int(self.array.shape[0])

    @property
    def cols(self) -> int:
        return int(self.array.shape[1])

    @property
    def shape(self) -> Tuple[int, int]:
        return self.rows, self.cols

    def __getitem__(self, index: Tuple[int, int]) -> FieldElement:
        row, col = index
        return FieldElement(int(self.array[row, col]), self.modulus)

    def __eq__(self, other):
        if not isinstance(other, FieldMatrix):
            return NotImplemented
        return self.modulus == other.modulus and np.array_equal(self.values, other.values)

    def __hash__(self):
        return hash((self.modulus, self.shape, self.values.tobytes()))

    def column(self, col: int) -> FieldVector:
        return FieldVector(self.array[:, col], self.modulus)

    def row(self, row: int) -> FieldVector:
        return FieldVector(self.array[row, :], self.modulus)

    def _check_same_shape(self, other: 'FieldMatrix'):
        if other.modulus != self.modulus:
            raise ModulusMismatchError(self.modulus, other.modulus)
        if other.shape != self.shape:
            raise DimensionError(f"Shape mismatch: {self.shape} vs {other.shape}")

    def __add__(self, other: 'FieldMatrix') -> 'FieldMatrix':
        self._check_same_shape(other)
        return FieldMatrix(self.array + other.array, self.modulus)

    def __sub__(self, other: 'FieldMatrix') -> 'FieldMatrix':
        self._check_same_shape(other)
        return FieldMatrix(self.array - other.array, self.modulus)

    def scale(self, scalar: Union[FieldElement, int]) -> 'FieldMatrix':
        GF = type(self.array)
        return FieldMatrix(self.array * GF(int(scalar) % self.modulus), self.modulus)

    def matvec(self, vector: FieldVector) -> FieldVector:
        if vector.modulus != self.modulus:
            raise ModulusMismatchError(self.modulus, vector.modulus)
        if len(vector) != self.cols:
            raise DimensionError(f"Cannot multiply {self.shape} matrix by length-{len(vector)} vector")
        return FieldVector((self.array @ vector.array[:, np.newaxis])[:, 0], self.modulus)

    def matmul(self, other: 'FieldMatrix') -> 'FieldMatrix':
        if other.modulus != self.modulus:
            raise ModulusMismatchError(self.modulus, other.modulus)
        if other.rows != self.cols:
            raise DimensionError(f"Cannot multiply {self.shape} by {other.shape}")
        return FieldMatrix(self.array @ other.array, self.modulus)

    def transpose(self) -> 'FieldMatrix':
        return FieldMatrix(self.array.T, self.modulus)

    def to_lists(self) -> List[List[int]]:
        return self.values.tolist()

    def __repr__(self):
        return f"FieldMatrix({self.to_lists()} mod {self.modulus})"


@dataclass(frozen=True)
class PrimeField:
    """The field F_q for a prime q; factory for elements, vectors, matrices and FieldArrays."""
    modulus: int

    def __post_init__(self):
        if not is_prime(self.modulus):
            raise FieldError(f"Modulus {self.modulus} is not prime")
        if self.modulus >= FIELD_MODULUS_LIMIT:
            raise FieldError(f"Modulus {self.modulus} exceeds limit {FIELD_MODULUS_LIMIT}")

    @property
    def q(self) -> int:
        return self.modulus

    @property
    def GF(self) -> type:
        return galois_field(self.modulus)

    def element(self, value: int) -> FieldElement:
        return FieldElement(int(value) % self.modulus, self.modulus)

    @property
    def zero(self) -> FieldElement:
        return self.element(0)

    @property
    def one(self) -> FieldElement:
        return self.element(1)

    def _own(self, a: FieldElement) -> FieldElement:
        if a.modulus != self.modulus:
            raise ModulusMismatchError(self.modulus, a.modulus)
        return a

    def add(self, a: FieldElement, b: FieldElement) -> FieldElement:
        return self._own(a) + self._own(b)

    def sub(self, a: FieldElement, b: FieldElement) -> FieldElement:
        return self._own(a) - self._own(b)

    def mul(self, a: FieldElement, b: FieldElement) -> FieldElement:
        return self._own(a) * self._own(b)

    def neg(self, a: FieldElement) -> FieldElement:
        return -self._own(a)

    def inverse(self, a: FieldElement) -> FieldElement:
        return self._own(a).inverse()

    def inv(self, value: int) -> int:
        return int(self.element(value).inverse())

    def array(self, values) -> galois.FieldArray:
        """Any integers or FieldArray of this field, as a fresh GF(q) array."""
        return as_field_array(values, self.modulus)

    def vector(self, values: Iterable[int]) -> FieldVector:
        if not isinstance(values, (np.ndarray, galois.FieldArray)):
            values = [int(v) for v in values]
        return FieldVector(values, self.modulus)

    def zeros_vector(self, length: int) -> FieldVector:
        return FieldVector(self.GF.Zeros(length), self.modulus)

    def matrix(self, rows: Union[galois.FieldArray, np.ndarray, Sequence[Sequence[int]]]) -> FieldMatrix:
        return FieldMatrix(rows, self.modulus)

    def zeros_matrix(self, rows: int, cols: int) -> FieldMatrix:
        return FieldMatrix(self.GF.Zeros((rows, cols)), self.modulus)

    def identity(self, size: int) -> FieldMatrix:
        return FieldMatrix(self.GF.Identity(size), self.modulus)

    def random_array(self, rng: np.random.Generator, shape) -> galois.FieldArray:
        """Uniform i.i.d. symbols of F_q."""
        return self.GF.Random(shape, seed=rng)

    def random_nonzero_array(self, rng: np.random.Generator, shape) -> galois.FieldArray:
        return self.GF.Random(shape, low=1, seed=rng)
