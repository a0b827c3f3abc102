"""
Residue Core
模运算与整数分解：所有模块共享的精确算术基础
"""

from dataclasses import dataclass, field
from functools import lru_cache
from math import gcd as _gcd
from typing import Iterable, List, Tuple


@dataclass(frozen=True)
class Modulus:
    """
    群的阶 m 及其分解 m = 2^k · n (n 为奇数)
    """
    m: int
    factors: Tuple[Tuple[int, int], ...] = field(default=())
    k: int = 0
    n: int = 1

    def __post_init__(self):
        product = 1
        last_prime = 1
        for prime, exponent in self.factors:
            if prime <= last_prime or exponent < 1:
                raise ValueError(f"invalid factorization of {self.m}: {self.factors}")
            product *= prime ** exponent
            last_prime = prime
        if product != self.m:
            raise ValueError(f"factors {self.factors} do not recompose {self.m}")
        if self.n % 2 == 0 or (2 ** self.k) * self.n != self.m:
            raise ValueError(f"bad 2-adic split k={self.k}, n={self.n} for {self.m}")

    @property
    def primes(self) -> List[int]:
        return [p for p, _ in self.factors]

    @property
    def omega(self) -> int:
        """Ω(m): 素因子总个数（计重数）"""
        return sum(e for _, e in self.factors)

    @property
    def is_prime(self) -> bool:
        return len(self.factors) == 1 and self.factors[0][1] == 1

    @property
    def is_even(self) -> bool:
        return self.k > 0

    def exponent(self, p: int) -> int:
        for prime, exponent in self.factors:
            if prime == p:
                return exponent
        return 0

    def prime_power(self, p: int) -> int:
        return p ** self.exponent(p)

    def __int__(self) -> int:
        return self.m


@dataclass(frozen=True)
class Residue:
    """Z_m 中的规范代表元，构造时归一化到 [0, m)"""
    value: int
    m: int

    def __post_init__(self):
        if self.m < 1:
            raise ValueError(f"modulus must be positive, got {self.m}")
        object.__setattr__(self, "value", self.value % self.m)

    def _other(self, other) -> int:
        if isinstance(other, Residue):
            if other.m != self.m:
                raise ValueError(f"mixed moduli {self.m} and {other.m}")
            return other.value
        return int(other)

    def __add__(self, other) -> "Residue":
        return Residue(self.value + self._other(other), self.m)

    def __sub__(self, other) -> "Residue":
        return Residue(self.value - self._other(other), self.m)

    def __mul__(self, other) -> "Residue":
        return Residue(self.value * self._other(other), self.m)

    __radd__ = __add__
    __rmul__ = __mul__

    def __neg__(self) -> "Residue":
        return Residue(-self.value, self.m)

    def __int__(self) -> int:
        return self.value

    def __index__(self) -> int:
        return self.value

    def __eq__(self, other) -> bool:
        if isinstance(other, Residue):
            return self.m == other.m and self.value == other.value
        if isinstance(other, int):
            return self.value == other % self.m
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.value, self.m))

    def __repr__(self) -> str:
        return f"{self.value} (mod {self.m})"


@lru_cache(maxsize=4096)
def factorize(m: int) -> Modulus:
    """
    试除法分解 m

    Args:
        m: 群的阶，必须 ≥ 1

    Returns:
        满足全部不变量的 Modulus
    """
    if m < 1:
        raise ValueError(f"modulus must be a positive integer, got {m}")

    factors: List[Tuple[int, int]] = []
    rest = m
    divisor = 2
    while divisor * divisor <= rest:
        if rest % divisor == 0:
            exponent = 0
            while rest % divisor == 0:
                rest //= divisor
                exponent += 1
            factors.append((divisor, exponent))
        divisor += 1 if divisor == 2 else 2
    if rest > 1:
        factors.append((rest, 1))

    k = factors[0][1] if factors and factors[0][0] == 2 else 0
    return Modulus(m=m, factors=tuple(factors), k=k, n=m >> k)


def gcd(a: int, b: int) -> int:
    """最大公约数，gcd(0, 0) = 0"""
    return _gcd(a, b)


def triangular_sum_mod(m) -> Residue:
    """(1 + 2 + ... + m) mod m：m 为奇数时为 0，偶数时为 m/2"""
    order = int(m)
    return Residue(order * (order + 1) // 2, order)


def mod_inverse(a: int, m: int) -> int:
    if gcd(a % m, m) != 1:
        raise ValueError(f"{a} is not a unit modulo {m}")
    return pow(a, -1, m) if m > 1 else 0


def valuation(x: int, p: int) -> int:
    """p-adic valuation of a nonzero integer; 0 maps to a large sentinel"""
    if x == 0:
        return 1 << 30
    count = 0
    while x % p == 0:
        x //= p
        count += 1
    return count


def crt(residues: Iterable[int], moduli: Iterable[int]) -> Tuple[int, int]:
    """
    中国剩余定理（模两两互素）

    Returns:
        (x, M) 其中 x ≡ r_i (mod m_i)，M 为模的乘积
    """
    x, modulus = 0, 1
    for r, q in zip(residues, moduli):
        if gcd(modulus, q) != 1:
            raise ValueError(f"moduli {modulus} and {q} are not coprime")
        step = ((r - x) * mod_inverse(modulus, q)) % q if q > 1 else 0
        x += modulus * step
        modulus *= q
        x %= modulus
    return x, modulus


def units(m: int) -> List[int]:
    """Z_m 的单位元列表（m = 1 时为 [0]）"""
    if m == 1:
        return [0]
    return [u for u in range(1, m) if gcd(u, m) == 1]

