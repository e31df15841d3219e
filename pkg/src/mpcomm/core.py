"""Promise predicates and target functions.

Three functions live here:

* ``f_mod4`` -- the modulo-4 sum bit on a triple over U = {0,1,2,3},
* ``g_m``    -- the AND of ``f_mod4`` over m parallel triples,
* ``f_big``  -- the n-th least significant bit of the sum of k values in
  V = {0, ..., 2**n - 1}.

Each is defined only on inputs satisfying its promise.  Input containers
check the promise eagerly and cache the result in ``is_valid``; calling a
target function on an invalid input raises :class:`PromiseViolation`.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

U = (0, 1, 2, 3)

# all sums must fit a signed 64-bit integer
MAX_SUM = 2**63

DEFAULT_ENUM_BUDGET = 1 << 22


class PromiseViolation(ValueError):
    """Target function evaluated on an input outside its promise."""


class BudgetExceeded(RuntimeError):
    """An exhaustive enumeration would exceed its configured budget."""


def _check_u(values: Sequence[int], name: str) -> tuple[int, ...]:
    values = tuple(int(v) for v in values)
    for v in values:
        if v not in U:
            raise ValueError(f"{name} coordinate {v} not in U = {{0,1,2,3}}")
    return values


# ---------------------------------------------------------------------------
# modulo-4 sum problem


@dataclass(frozen=True)
class ModFourTriple:
    x: int
    y: int
    z: int
    is_valid: bool = field(init=False)

    def __post_init__(self):
        _check_u((self.x, self.y, self.z), "triple")
        object.__setattr__(self, "is_valid", (self.x + self.y + self.z) % 2 == 0)


def is_valid_triple(t: ModFourTriple) -> bool:
    return (t.x + t.y + t.z) % 2 == 0


def f_mod4(t: ModFourTriple) -> int:
    """Second-least significant bit of ``x + y + z``."""
    if not t.is_valid:
        raise PromiseViolation(f"odd sum in {t}")
    return ((t.x + t.y + t.z) % 4) // 2


def unique_completion(y: int, z: int) -> int:
    """The only ``x`` in U making ``(x, y, z)`` valid with ``f_mod4 == 1``."""
    hits = [x for x in U if (x + y + z) % 2 == 0 and ((x + y + z) % 4) // 2 == 1]
    if len(hits) != 1:
        raise AssertionError(f"expected exactly one completion for y={y}, z={z}, got {hits}")
    return hits[0]


@dataclass(frozen=True)
class HighLowSplit:
    """A U-vector seen as two bit vectors: ``u_i = 2*high_i + low_i``."""

    high: tuple[int, ...]
    low: tuple[int, ...]

    @classmethod
    def of(cls, values: Sequence[int]) -> "HighLowSplit":
        values = _check_u(values, "vector")
        return cls(tuple(v >> 1 for v in values), tuple(v & 1 for v in values))

    def combine(self) -> tuple[int, ...]:
        return tuple(2 * h + l for h, l in zip(self.high, self.low))

    @property
    def high_bits(self) -> str:
        return "".join(map(str, self.high))

    @property
    def low_bits(self) -> str:
        return "".join(map(str, self.low))


@dataclass(frozen=True)
class TripleVector:
    """m parallel instances: Alice holds ``xs``, Bob ``ys``, Carol ``zs``."""

    xs: tuple[int, ...]
    ys: tuple[int, ...]
    zs: tuple[int, ...]
    is_valid: bool = field(init=False)

    def __post_init__(self):
        xs, ys, zs = (_check_u(v, n) for v, n in ((self.xs, "xs"), (self.ys, "ys"), (self.zs, "zs")))
        if not (len(xs) == len(ys) == len(zs)) or not xs:
            raise ValueError("xs, ys, zs must share a positive length m")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)
        object.__setattr__(self, "zs", zs)
        valid = all((a + b + c) % 2 == 0 for a, b, c in zip(xs, ys, zs))
        object.__setattr__(self, "is_valid", valid)

    @property
    def m(self) -> int:
        return len(self.xs)

    def triples(self) -> list[ModFourTriple]:
        return [ModFourTriple(a, b, c) for a, b, c in zip(self.xs, self.ys, self.zs)]

    def to_json(self) -> dict:
        return {"xs": list(self.xs), "ys": list(self.ys), "zs": list(self.zs)}


def g_m(v: TripleVector) -> int:
    if not v.is_valid:
        raise PromiseViolation(f"some coordinate of {v} has odd sum")
    return int(all(f_mod4(t) == 1 for t in v.triples()))


def enumerate_valid_triple_vectors(m: int, budget: int = DEFAULT_ENUM_BUDGET) -> Iterator[TripleVector]:
    if 32**m > budget:
        raise BudgetExceeded(f"32**{m} valid triple vectors exceed budget {budget}")
    valid = [(x, y, z) for x, y, z in itertools.product(U, repeat=3) if (x + y + z) % 2 == 0]
    for combo in itertools.product(valid, repeat=m):
        xs, ys, zs = zip(*combo)
        yield TripleVector(xs, ys, zs)


def sample_valid_triple_vector(m: int, seed) -> TripleVector:
    rng = np.random.default_rng(seed)
    ys = rng.integers(0, 4, size=m)
    zs = rng.integers(0, 4, size=m)
    # x low bit is forced by the promise, x high bit is free
    xs = 2 * rng.integers(0, 2, size=m) + (ys + zs) % 2
    return TripleVector(tuple(xs.tolist()), tuple(ys.tolist()), tuple(zs.tolist()))


# ---------------------------------------------------------------------------
# the k-party function F


@dataclass(frozen=True)
class FInput:
    k: int
    n: int
    values: tuple[int, ...]
    is_valid: bool = field(init=False)

    def __post_init__(self):
        if self.k < 2:
            raise ValueError(f"need k >= 2 parties, got {self.k}")
        if self.n < 1:
            raise ValueError(f"need n >= 1 bits, got {self.n}")
        if self.k * 2**self.n >= MAX_SUM:
            raise ValueError(f"k * 2**n must stay below 2**63 (k={self.k}, n={self.n})")
        values = tuple(int(v) for v in self.values)
        if len(values) != self.k:
            raise ValueError(f"expected {self.k} values, got {len(values)}")
        top = 2**self.n
        for v in values:
            if not 0 <= v < top:
                raise ValueError(f"value {v} outside V = [0, {top - 1}]")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "is_valid", sum(values) % 2 ** (self.n - 1) == 0)

    def __str__(self) -> str:
        return f"k={self.k} n={self.n} xs=[{','.join(map(str, self.values))}]"

    @classmethod
    def parse(cls, text: str) -> "FInput":
        """Inverse of ``str()``: ``k=K n=N xs=[a,b,...]``."""
        parts = dict(tok.split("=", 1) for tok in text.split())
        xs = parts["xs"].strip("[]")
        values = tuple(int(v) for v in xs.split(",")) if xs else ()
        return cls(int(parts["k"]), int(parts["n"]), values)

    def with_value(self, index: int, value: int) -> "FInput":
        values = list(self.values)
        values[index] = value
        return FInput(self.k, self.n, tuple(values))

    def to_json(self) -> dict:
        return {"k": self.k, "n": self.n, "xs": list(self.values)}


def f_big(inp: FInput) -> int:
    if not inp.is_valid:
        raise PromiseViolation(f"{inp}: sum not divisible by 2**{inp.n - 1}")
    return (sum(inp.values) % 2**inp.n) >> (inp.n - 1)


def count_valid_inputs(k: int, n: int) -> int:
    return 2 ** (n * k) // 2 ** (n - 1)


def enumerate_valid_inputs(k: int, n: int, budget: int = DEFAULT_ENUM_BUDGET) -> Iterator[FInput]:
    """Every valid input exactly once, in lexicographic order of values.

    The first k-1 values range over V freely; the last one is pinned modulo
    2**(n-1), leaving two choices (its top bit).
    """
    if 2 ** (n * k) > budget:
        raise BudgetExceeded(f"2**{n * k} inputs exceed enumeration budget {budget}")
    half = 2 ** (n - 1)
    for head in itertools.product(range(2**n), repeat=k - 1):
        low = -sum(head) % half
        for last in sorted({low, low + half}):
            yield FInput(k, n, head + (last,))


def sample_valid_input(k: int, n: int, seed) -> FInput:
    """Uniform over the valid inputs; deterministic in ``seed``."""
    rng = np.random.default_rng(seed)
    head = [int(v) for v in rng.integers(0, 2**n, size=k - 1)]
    half = 2 ** (n - 1)
    low = -sum(head) % half
    top = int(rng.integers(0, 2))
    return FInput(k, n, tuple(head) + (low + top * half,))


def toggle_msb(inp: FInput, index: int) -> FInput:
    return inp.with_value(index, inp.values[index] ^ 2 ** (inp.n - 1))
