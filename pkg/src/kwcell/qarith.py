"""Root-of-unity parameters and quantum integer arithmetic."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field


@dataclass(frozen=True)
class Params:
    """Rank ``N``, level ``k`` and the twist index of ``omega``.

    ``q`` defaults to the unitary root ``exp(2 pi i / (2(N+k)))``.  A
    different ``q_exponent`` (possibly non-integer) replaces the numerator
    ``1`` of that exponent; this is only used by negative controls that
    move ``q`` off the root of unity.
    """

    N: int
    k: int
    omega_index: int = 0
    q_exponent: float = 1.0
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self) -> None:
        if self.N < 2:
            raise ValueError("N must be at least 2")
        if self.k < 1:
            raise ValueError("k must be at least 1")
        if not 0 <= self.omega_index < self.N:
            raise ValueError(f"omega_index must lie in 0..{self.N - 1}")

    @property
    def level_sum(self) -> int:
        return self.N + self.k

    @property
    def q(self) -> complex:
        return cmath.exp(2j * math.pi * self.q_exponent / (2 * self.level_sum))

    @property
    def omega(self) -> complex:
        return cmath.exp(2j * math.pi * self.omega_index / self.N)

    def with_omega(self, omega_index: int) -> "Params":
        return Params(self.N, self.k, omega_index, self.q_exponent)

    def with_q_exponent(self, q_exponent: float) -> "Params":
        return Params(self.N, self.k, self.omega_index, q_exponent)

    def to_dict(self) -> dict[str, int]:
        return {"N": self.N, "k": self.k, "omega_index": self.omega_index}


def quantum_integer(n: int, params: Params) -> float:
    """``[n]_q`` as the ratio of sines, which is real for unimodular ``q``."""
    theta = math.pi * params.q_exponent / params.level_sum
    value = math.sin(n * theta) / math.sin(theta)
    # sin(m*pi) is not exactly zero in floating point; snap the exact zeros
    if params.q_exponent == 1.0 and n % params.level_sum == 0:
        return 0.0
    return value


def quantum_integer_complex(n: int, q: complex) -> complex:
    """Reference form ``(q^n - q^-n)/(q - q^-1)`` for cross-checks."""
    return (q**n - q ** (-n)) / (q - 1 / q)


def quantum_factorial(n: int, params: Params) -> float:
    if n < 0:
        raise ValueError("quantum factorial needs n >= 0")
    result = 1.0
    for j in range(1, n + 1):
        result *= quantum_integer(j, params)
    return result


def galois_exponent(N: int, k: int, r: int) -> int:
    """Exponent ``l`` turning ``exp(2 pi i r/(2(N+k)))`` back into the unitary root.

    Returns the smallest positive ``l`` with ``r*l = 1 mod 2(N+k)`` that is
    also a unit modulo ``lcm(2(N+k), N)``.  The twist transforms as
    ``omega -> omega**l``; callers reduce ``l`` modulo ``N`` themselves.
    """
    order = 2 * (N + k)
    if math.gcd(r, order) != 1:
        raise ValueError("not a primitive root")
    inverse = pow(r, -1, order)
    modulus = math.lcm(order, N)
    for candidate in range(inverse, modulus + 1, order):
        if math.gcd(candidate, modulus) == 1:
            return candidate
    raise ValueError("no unit lift exists")  # unreachable: CRT always provides one
