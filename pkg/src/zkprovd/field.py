"""Prime-field arithmetic."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from sympy import isprime

from .errors import FieldConfigError, FieldDivisionByZero

# Scalar field of the ALT_BN128 (BN254) curve.
BN254_MODULUS = 21888242871839275222246405745257275088548364400416034343698204186575808495617

MAX_MODULUS_BITS = 256


@lru_cache(maxsize=64)
def _checked_prime(modulus: int) -> bool:
    return isprime(modulus)


@dataclass(frozen=True)
class FieldConfig:
    modulus: int = BN254_MODULUS

    def __post_init__(self):
        m = self.modulus
        if isinstance(m, bool) or not isinstance(m, int):
            raise FieldConfigError(f"modulus must be an integer, got {type(m).__name__}")
        if m < 3:
            raise FieldConfigError(f"modulus must be >= 3, got {m}")
        if m.bit_length() > MAX_MODULUS_BITS:
            raise FieldConfigError(f"modulus exceeds {MAX_MODULUS_BITS} bits")
        if not _checked_prime(m):
            raise FieldConfigError(f"modulus {m} is not prime")

    @property
    def byte_length(self) -> int:
        return 32

    def __call__(self, value: int) -> FieldElement:
        return FieldElement(value % self.modulus, self)

    def element(self, value: int) -> FieldElement:
        """Strict constructor: rejects non-canonical representatives."""
        if not 0 <= value < self.modulus:
            raise FieldConfigError(f"{value} is not a canonical element mod {self.modulus}")
        return FieldElement(value, self)

    def is_canonical(self, value: int) -> bool:
        return 0 <= value < self.modulus

    def add(self, a: int, b: int) -> int:
        return (a + b) % self.modulus

    def sub(self, a: int, b: int) -> int:
        return (a - b) % self.modulus

    def mul(self, a: int, b: int) -> int:
        return (a * b) % self.modulus

    def inv(self, a: int) -> int:
        if a % self.modulus == 0:
            raise FieldDivisionByZero("inverse of zero")
        return pow(a, -1, self.modulus)


@dataclass(frozen=True)
class FieldElement:
    value: int
    field: FieldConfig

    def __post_init__(self):
        if not 0 <= self.value < self.field.modulus:
            raise FieldConfigError(f"{self.value} out of range for modulus {self.field.modulus}")

    def _check(self, other: FieldElement) -> None:
        if not isinstance(other, FieldElement):
            raise TypeError(f"expected FieldElement, got {type(other).__name__}")
        if other.field != self.field:
            raise FieldConfigError("operands belong to different fields")

    def __add__(self, other: FieldElement) -> FieldElement:
        self._check(other)
        return FieldElement(self.field.add(self.value, other.value), self.field)

    def __sub__(self, other: FieldElement) -> FieldElement:
        self._check(other)
        return FieldElement(self.field.sub(self.value, other.value), self.field)

    def __mul__(self, other: FieldElement) -> FieldElement:
        self._check(other)
        return FieldElement(self.field.mul(self.value, other.value), self.field)

    def __truediv__(self, other: FieldElement) -> FieldElement:
        return self * other.inverse()

    def __neg__(self) -> FieldElement:
        return FieldElement((-self.value) % self.field.modulus, self.field)

    def inverse(self) -> FieldElement:
        return FieldElement(self.field.inv(self.value), self.field)

    def to_bytes(self) -> bytes:
        """32-byte little-endian encoding."""
        return self.value.to_bytes(32, "little")

    def __int__(self) -> int:
        return self.value

    def __str__(self) -> str:
        return str(self.value)


def field_arithmetic(op: str, a: FieldElement, b: FieldElement) -> FieldElement:
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise ValueError(f"unknown field operation {op!r}")


def field_inverse(a: FieldElement) -> FieldElement:
    return a.inverse()


def encode_element(value: int) -> bytes:
    return value.to_bytes(32, "little")
