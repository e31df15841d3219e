"""Desk-scale checks of the lower-bound machinery.

Subsets of a cyclic group Z_m are int bitmasks (bit j set iff j is a
member).  Sumsets are unions of rotations; a stabilizer is the set of
rotations fixing a mask.

The one-round search works on explicit message tables.  It relies on the
fact that a candidate protocol is correct iff, for every message Bob may
send, Carol's table restricted to that message separates what Alice needs:
the slices are independent, so the search checks them one at a time.
"""

from __future__ import annotations

import enum
import itertools
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Optional

from .core import U, BudgetExceeded, enumerate_valid_triple_vectors, g_m
from .protocols import OneRoundProtocolTable, ceil_log2, highbits_width, to_bits

RECTANGLE_BUDGET = 10**7
# (2**10 - 1)**2 ordered pairs at order 10 must fit
KNESER_PAIR_BUDGET = 1 << 20
SEARCH_MAX_BUDGET = 4


# ---------------------------------------------------------------------------
# closed-form bounds


def cardinality_bound(n: int, k: int) -> Fraction:
    """Largest possible size of a monochromatic rectangle holding a valid input."""
    if n < 1 or k < 2:
        raise ValueError(f"need n >= 1 and k >= 2, got n={n}, k={k}")
    return (Fraction(2**n - 2, k) + 1) ** k


def ceil_log2_fraction(t: Fraction) -> int:
    """Smallest integer ``c`` with ``2**c >= t``, computed exactly."""
    if t <= 0:
        raise ValueError("log of a non-positive number")
    if t >= 1:
        return ceil_log2(math.ceil(t))
    return 1 - math.floor(1 / t).bit_length()


def log2_fraction(t: Fraction) -> float:
    return math.log2(t.numerator) - math.log2(t.denominator)


@dataclass(frozen=True)
class BoundReport:
    n: int
    k: int
    r: Fraction
    t: Fraction
    log2_t: float
    rhs: float
    holds: bool
    lower_bits: int
    observed_max: Optional[int] = None

    def to_json(self) -> dict:
        out = {
            "n": self.n,
            "k": self.k,
            "r": f"{self.r.numerator}/{self.r.denominator}",
            "t": f"{self.t.numerator}/{self.t.denominator}",
            "log2_t": self.log2_t,
            "rhs": self.rhs,
            "holds": self.holds,
            "lower_bits": self.lower_bits,
        }
        if self.observed_max is not None:
            out["observed_max"] = self.observed_max
        return out


def lower_bound_bits(n: int, k: int, observed_max: Optional[int] = None) -> BoundReport:
    """Partition-size lower bound ``t = 2**(nk) / r`` and its comparison with ``k log k - k``.

    ``holds`` is decided exactly: ``log2 t > k log2 k - k`` iff
    ``t * 2**k > k**k``.
    """
    r = cardinality_bound(n, k)
    t = Fraction(2 ** (n * k)) / r
    holds = t * 2**k > k**k
    return BoundReport(
        n=n,
        k=k,
        r=r,
        t=t,
        log2_t=log2_fraction(t),
        rhs=k * math.log2(k) - k,
        holds=holds,
        lower_bits=ceil_log2_fraction(t),
        observed_max=observed_max,
    )


def upper_bound_bits(n: int, k: int) -> int:
    if k < 2:
        raise ValueError(f"need k >= 2, got {k}")
    return (k - 1) * (ceil_log2(k - 1) + 1) + 1


def classical_upper(n: int, k: int) -> tuple[int, str]:
    """Best bundled classical cost: the high-bits protocol when ``n >= d``, else naive."""
    if n >= highbits_width(k):
        return upper_bound_bits(n, k), "highbits"
    return (k - 1) * n + 1, "naive"


# ---------------------------------------------------------------------------
# cyclic subsets, sumsets, stabilizers


def members(mask: int) -> list[int]:
    out = []
    j = 0
    while mask:
        if mask & 1:
            out.append(j)
        mask >>= 1
        j += 1
    return out


def mask_of(elements: Iterable[int], modulus: int) -> int:
    mask = 0
    for e in elements:
        mask |= 1 << (e % modulus)
    return mask


def rotate(mask: int, h: int, modulus: int) -> int:
    """The translate ``mask + h`` in Z_modulus."""
    h %= modulus
    full = (1 << modulus) - 1
    return ((mask << h) | (mask >> (modulus - h))) & full


def sumset_mask(a: int, b: int, modulus: int) -> int:
    out = 0
    for h in members(b):
        out |= rotate(a, h, modulus)
    return out


def stabilizer_mask(s: int, modulus: int) -> int:
    return mask_of((h for h in range(modulus) if rotate(s, h, modulus) == s), modulus)


@dataclass(frozen=True)
class CyclicSubset:
    modulus: int
    members: int

    def __post_init__(self):
        if self.modulus < 1:
            raise ValueError(f"group order must be positive, got {self.modulus}")
        if self.members >> self.modulus:
            raise ValueError(f"mask {self.members:#x} has bits beyond Z_{self.modulus}")

    @classmethod
    def of(cls, elements: Iterable[int], modulus: int) -> "CyclicSubset":
        return cls(modulus, mask_of(elements, modulus))

    def elements(self) -> list[int]:
        return members(self.members)

    def __len__(self) -> int:
        return bin(self.members).count("1")

    def __contains__(self, x: int) -> bool:
        return bool(self.members >> (x % self.modulus) & 1)

    def __add__(self, other: "CyclicSubset") -> "CyclicSubset":
        if other.modulus != self.modulus:
            raise ValueError("sumset of subsets of different groups")
        return CyclicSubset(self.modulus, sumset_mask(self.members, other.members, self.modulus))

    def __le__(self, other: "CyclicSubset") -> bool:
        return self.members & ~other.members == 0

    def is_subgroup(self) -> bool:
        return 0 in self and (self + self) == self


def stabilizer(s: CyclicSubset) -> CyclicSubset:
    """All ``h`` with ``s + h == s``; always a subgroup."""
    if not s.members:
        raise ValueError("stabilizer of the empty set")
    return CyclicSubset(s.modulus, stabilizer_mask(s.members, s.modulus))


def verify_kneser(a: CyclicSubset, b: CyclicSubset) -> bool:
    """Check Kneser's inequality with ``H`` the stabilizer of ``a + b``."""
    if not a.members or not b.members:
        raise ValueError("Kneser's theorem is about nonempty sets")
    s = a + b
    h = stabilizer(s)
    return (s + h) == s and len(s) >= len(a + h) + len(b + h) - len(h)


@dataclass
class KneserSweep:
    modulus: int
    pairs: int
    failures: list[tuple[int, int]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures


def kneser_sweep(modulus: int, budget: int = KNESER_PAIR_BUDGET) -> KneserSweep:
    """Every ordered pair of nonempty subsets of Z_modulus.

    Sumsets are built incrementally over B (adding its lowest element each
    time), so each pair costs a handful of table lookups.
    """
    size = 1 << modulus
    pairs = (size - 1) ** 2
    if pairs > budget:
        raise BudgetExceeded(f"{pairs} subset pairs at order {modulus} exceed budget {budget}")
    full = size - 1
    rot = [[((a << h) | (a >> (modulus - h))) & full for a in range(size)] for h in range(modulus)]
    pop = [bin(a).count("1") for a in range(size)]
    low_index = [0] * size
    for b in range(1, size):
        low_index[b] = (b & -b).bit_length() - 1
    stab = [0] * size
    for s in range(1, size):
        stab[s] = mask_of((h for h in range(modulus) if rot[h][s] == s), modulus)
    plus_h: dict[int, list[int]] = {}

    def add_h(h: int) -> list[int]:
        table = plus_h.get(h)
        if table is None:
            shifts = members(h)
            table = [0] * size
            for a in range(size):
                acc = 0
                for e in shifts:
                    acc |= rot[e][a]
                table[a] = acc
            plus_h[h] = table
        return table

    result = KneserSweep(modulus, pairs)
    sums = [0] * size
    for a in range(1, size):
        for b in range(1, size):
            s = sums[b & (b - 1)] | rot[low_index[b]][a]
            sums[b] = s
            h = stab[s]
            th = add_h(h)
            if th[s] != s or pop[s] < pop[th[a]] + pop[th[b]] - pop[h]:
                result.failures.append((a, b))
    return result


# ---------------------------------------------------------------------------
# rectangles


class MonoClass(str, enum.Enum):
    NO_VALID = "no-valid"
    NO_ZERO_VALID = "no-0-valid"
    NO_ONE_VALID = "no-1-valid"
    MIXED = "mixed"

    @property
    def monochromatic_with_valid(self) -> bool:
        return self in (MonoClass.NO_ZERO_VALID, MonoClass.NO_ONE_VALID)


@dataclass(frozen=True)
class Rectangle:
    n: int
    k: int
    parts: tuple[int, ...]

    def __post_init__(self):
        if len(self.parts) != self.k:
            raise ValueError(f"expected {self.k} parts, got {len(self.parts)}")
        for p in self.parts:
            if not p or p >> 2**self.n:
                raise ValueError(f"part {p:#x} is not a nonempty subset of V")

    @classmethod
    def of(cls, n: int, sets: Iterable[Iterable[int]]) -> "Rectangle":
        parts = tuple(mask_of(s, 2**n) for s in sets)
        return cls(n, len(parts), parts)

    @property
    def modulus(self) -> int:
        return 2**self.n

    def sizes(self) -> list[int]:
        return [bin(p).count("1") for p in self.parts]

    @property
    def cardinality(self) -> int:
        return math.prod(self.sizes())

    def tuples(self) -> Iterator[tuple[int, ...]]:
        return itertools.product(*(members(p) for p in self.parts))

    def to_json(self) -> dict:
        return {"n": self.n, "k": self.k, "parts": [members(p) for p in self.parts]}


def _classify(has0: bool, has1: bool) -> MonoClass:
    if has0 and has1:
        return MonoClass.MIXED
    if has0:
        return MonoClass.NO_ONE_VALID
    if has1:
        return MonoClass.NO_ZERO_VALID
    return MonoClass.NO_VALID


def rectangle_sum_mask(rect: Rectangle) -> int:
    s = 1
    for p in rect.parts:
        s = sumset_mask(s, p, rect.modulus)
    return s


def is_monochromatic(rect: Rectangle, method: str = "sumset", budget: int = RECTANGLE_BUDGET) -> MonoClass:
    """Which valid classes ``rect`` contains.

    ``method="sumset"`` reads the classes off the reachable sums (0 for
    0-valid, ``2**(n-1)`` for 1-valid); ``method="scan"`` visits every tuple.
    """
    half = 2 ** (rect.n - 1)
    if method == "sumset":
        s = rectangle_sum_mask(rect)
        return _classify(bool(s & 1), bool(s >> half & 1))
    if method == "scan":
        if rect.cardinality > budget:
            raise BudgetExceeded(f"rectangle of size {rect.cardinality} exceeds scan budget {budget}")
        has = [False, False]
        for tup in rect.tuples():
            total = sum(tup) % rect.modulus
            if total % half == 0:
                has[total // half] = True
                if has[0] and has[1]:
                    break
        return _classify(*has)
    raise ValueError(f"unknown method {method!r}")


def count_valid(rect: Rectangle, method: str = "sumset") -> tuple[int, int]:
    """Numbers of (0-valid, 1-valid) tuples in ``rect``."""
    q = rect.modulus
    half = q // 2
    if method == "scan":
        counts = [0, 0]
        for tup in rect.tuples():
            total = sum(tup) % q
            if total % half == 0:
                counts[total // half] += 1
        return counts[0], counts[1]
    if method == "sumset":
        # multiplicity of every residue, convolving one part at a time
        dist = [1] + [0] * (q - 1)
        for p in rect.parts:
            elems = members(p)
            new = [0] * q
            for s, c in enumerate(dist):
                if c:
                    for e in elems:
                        new[(s + e) % q] += c
            dist = new
        return dist[0], dist[half]
    raise ValueError(f"unknown method {method!r}")


@dataclass(frozen=True)
class SumsetChain:
    modulus: int
    sums: tuple[int, ...]
    stabilizers: tuple[int, ...]

    def stabilizers_monotone(self) -> bool:
        return all(a & ~b == 0 for a, b in zip(self.stabilizers, self.stabilizers[1:]))

    def violations(self, rect: Rectangle) -> list[str]:
        """Failed steps of the trivial-stabilizer size argument, for a rectangle it applies to."""
        bad = []
        if not self.stabilizers_monotone():
            bad.append("stabilizers not nested")
        if not is_monochromatic(rect).monochromatic_with_valid:
            return bad
        sizes = rect.sizes()
        for i, h in enumerate(self.stabilizers):
            if h != 1:
                bad.append(f"H_{i} = {members(h)} is not trivial")
        for i in range(1, len(self.sums)):
            if _pop(self.sums[i]) < _pop(self.sums[i - 1]) + sizes[i - 1] - 1:
                bad.append(f"|S_{i}| < |S_{i - 1}| + |R_{i}| - 1")
        if sum(sizes) > self.modulus - 2 + rect.k:
            bad.append(f"sum of part sizes {sum(sizes)} > 2**n - 2 + k")
        return bad


def _pop(mask: int) -> int:
    return bin(mask).count("1")


def sumset_chain(rect: Rectangle) -> SumsetChain:
    q = rect.modulus
    sums = [1]
    for p in rect.parts:
        sums.append(sumset_mask(sums[-1], p, q))
    return SumsetChain(q, tuple(sums), tuple(stabilizer_mask(s, q) for s in sums))


@dataclass(frozen=True)
class RectangleMax:
    n: int
    k: int
    size: int
    witness: Optional[Rectangle]
    exhaustive: bool
    candidates: int

    @property
    def label(self) -> str:
        return "exact_max" if self.exhaustive else "lower_bound_on_max"

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "k": self.k,
            self.label: self.size,
            "witness": self.witness.to_json() if self.witness else None,
            "candidates": self.candidates,
        }


def rectangle_candidates(n: int, k: int) -> int:
    return (2 ** (2**n) - 1) ** k


def max_monochromatic_rectangle(
    n: int, k: int, exhaustive: bool = True, budget: int = RECTANGLE_BUDGET, seed: int = 0, restarts: int = 200
) -> RectangleMax:
    """Largest monochromatic rectangle containing a valid input.

    The exhaustive mode visits every product of nonempty subsets.  The
    heuristic mode hill-climbs from random singletons and only ever yields a
    lower bound on the maximum.
    """
    if exhaustive:
        total = rectangle_candidates(n, k)
        if total > budget:
            raise BudgetExceeded(f"{total} rectangle candidates exceed budget {budget}")
        return _exhaustive_max(n, k, total)
    return _hill_climb_max(n, k, seed, restarts)


def _exhaustive_max(n: int, k: int, total: int) -> RectangleMax:
    q = 2**n
    half = q // 2
    subsets = range(1, 1 << q)
    pop = {p: _pop(p) for p in subsets}
    best, witness = 0, None

    # depth-first over parts, carrying the partial sumset and size
    def walk(depth: int, partial: int, size: int, chosen: list[int]) -> None:
        nonlocal best, witness
        if depth == k:
            has0, has1 = bool(partial & 1), bool(partial >> half & 1)
            if has0 != has1 and size > best:
                best, witness = size, Rectangle(n, k, tuple(chosen))
            return
        for p in subsets:
            chosen.append(p)
            walk(depth + 1, sumset_mask(partial, p, q), size * pop[p], chosen)
            chosen.pop()

    walk(0, 1, 1, [])
    return RectangleMax(n, k, best, witness, True, total)


def _hill_climb_max(n: int, k: int, seed: int, restarts: int) -> RectangleMax:
    rng = random.Random(seed)
    q = 2**n
    best, witness, tried = 0, None, 0
    for _ in range(restarts):
        head = [rng.randrange(q) for _ in range(k - 1)]
        parts = [1 << v for v in head] + [1 << (-sum(head) % q)]
        improved = True
        while improved:
            improved = False
            moves = [(i, e) for i in range(k) for e in range(q) if not parts[i] >> e & 1]
            rng.shuffle(moves)
            for i, e in moves:
                trial = parts.copy()
                trial[i] |= 1 << e
                tried += 1
                if is_monochromatic(Rectangle(n, k, tuple(trial))).monochromatic_with_valid:
                    parts = trial
                    improved = True
                    break
        rect = Rectangle(n, k, tuple(parts))
        if rect.cardinality > best:
            best, witness = rect.cardinality, rect
    return RectangleMax(n, k, best, witness, False, tried)


# ---------------------------------------------------------------------------
# one-round protocols for G_1: exhaustive search and distinguishability


class ProtocolIncorrect(ValueError):
    """A message table does not compute G_m, so distinguishability checks do not apply."""


def _labelings(items: int, blocks: int) -> Iterator[tuple[int, ...]]:
    """Set partitions of ``range(items)`` into at most ``blocks`` labelled blocks, as restricted growth strings."""

    def grow(prefix: list[int], used: int) -> Iterator[tuple[int, ...]]:
        if len(prefix) == items:
            yield tuple(prefix)
            return
        for label in range(min(used + 1, blocks)):
            prefix.append(label)
            yield from grow(prefix, max(used, label + 1))
            prefix.pop()

    return grow([], 0)


def _all_maps(items: int, values: int) -> Iterator[tuple[int, ...]]:
    return itertools.product(range(values), repeat=items)


@dataclass
class SearchResult:
    budget: int
    feasible: bool
    candidates: int
    witnesses: list[OneRoundProtocolTable] = field(default_factory=list)
    up_to_relabeling: bool = True

    def to_json(self) -> dict:
        return {
            "budget": self.budget,
            "feasible": self.feasible,
            "candidates": self.candidates,
            "witness_tables": [w.to_json() for w in self.witnesses],
        }


def _g_table(m: int) -> dict:
    return {(v.xs, v.ys, v.zs): g_m(v) for v in enumerate_valid_triple_vectors(m)}


def _slice_ok(vecs, ys_in_slice, carol_labels, g_table) -> bool:
    """Does Alice's view determine G on every valid input whose Bob message is this one?"""
    seen: dict = {}
    for y in ys_in_slice:
        for zi, z in enumerate(vecs):
            c = carol_labels[zi]
            for x in vecs:
                val = g_table.get((x, y, z))
                if val is None:
                    continue
                prev = seen.setdefault((x, c), val)
                if prev != val:
                    return False
    return True


def search_oneround_Gm(
    total_budget_bits: int, m: int = 1, up_to_relabeling: bool = True, max_witnesses: Optional[int] = None
) -> SearchResult:
    """Exhaustive search for one-round protocols for G_m of a given total cost.

    Alice's answer bit is reserved, so Bob and Carol share
    ``total_budget_bits - 1`` bits over every split.  With
    ``up_to_relabeling`` the message tables are enumerated up to renaming
    of messages (renaming cannot affect correctness); without it every raw
    table is visited.
    """
    if m != 1:
        raise ValueError("the one-round search only covers m = 1")
    if total_budget_bits < 1:
        raise ValueError("the budget must include Alice's answer bit")
    if total_budget_bits > SEARCH_MAX_BUDGET:
        raise ValueError(f"budget {total_budget_bits} > {SEARCH_MAX_BUDGET} is out of range")
    vecs = list(itertools.product(U, repeat=m))
    g_table = _g_table(m)
    result = SearchResult(total_budget_bits, False, 0, up_to_relabeling=up_to_relabeling)
    shared = total_budget_bits - 1

    for s_b in range(shared + 1):
        s_c = shared - s_b
        bob_maps = _labelings(len(vecs), 2**s_b) if up_to_relabeling else _all_maps(len(vecs), 2**s_b)
        for bob in bob_maps:
            result.candidates += 1
            options: dict[int, list[tuple[int, ...]]] = {}
            for b in sorted(set(bob)):
                ys = [y for y, lab in zip(vecs, bob) if lab == b]
                carol_maps = _labelings(len(vecs), 2**s_c) if up_to_relabeling else _all_maps(len(vecs), 2**s_c)
                good = []
                for carol in carol_maps:
                    result.candidates += 1
                    if _slice_ok(vecs, ys, carol, g_table):
                        good.append(carol)
                if not good:
                    break
                options[b] = good
            else:
                result.feasible = True
                for combo in itertools.product(*options.values()):
                    if max_witnesses is not None and len(result.witnesses) >= max_witnesses:
                        break
                    result.witnesses.append(
                        _build_table(m, s_b, s_c, vecs, bob, dict(zip(options, combo)), g_table)
                    )
    return result


def _build_table(m, s_b, s_c, vecs, bob, carol_by_b, g_table) -> OneRoundProtocolTable:
    sigma_b = {y: to_bits(lab, s_b) for y, lab in zip(vecs, bob)}
    sigma_c = {}
    for b, labels in carol_by_b.items():
        for z, lab in zip(vecs, labels):
            sigma_c[(z, to_bits(b, s_b))] = to_bits(lab, s_c)
    answer = {}
    for (x, y, z), val in g_table.items():
        bm = sigma_b[y]
        answer[(x, bm, sigma_c[(z, bm)])] = val
    return OneRoundProtocolTable(m, s_b, s_c, sigma_b, sigma_c, answer)


def table_is_correct(p: OneRoundProtocolTable) -> bool:
    for v in enumerate_valid_triple_vectors(p.m):
        b, c = p.messages(v.ys, v.zs)
        if p.alice(v.xs, b, c) != g_m(v):
            return False
    return True


def lemma1_violations(p: OneRoundProtocolTable) -> list[str]:
    """Input pairs on which a correct protocol fails to separate messages.

    Carol's input always carries Bob's low bits, as in the fooling family:
    ``y = (y_high, y_low)`` goes with ``z = (z_high, y_low)``.  Condition
    (ii) compares two Carol inputs against the same Bob input.
    """
    if not table_is_correct(p):
        raise ProtocolIncorrect("table does not compute G_m on every valid input")
    m = p.m
    bits = list(itertools.product((0, 1), repeat=m))

    def vec(high, low):
        return tuple(2 * h + l for h, l in zip(high, low))

    bad = []
    for low, high, high2 in itertools.product(bits, repeat=3):
        if high == high2:
            continue
        y, y2 = vec(high, low), vec(high2, low)
        if p.sigma_b[y] == p.sigma_b[y2]:
            bad.append(f"(i) y={y} y'={y2}")
        z, z2 = vec(high, low), vec(high2, low)
        for yh in bits:
            yy = vec(yh, low)
            if p.sigma_c[(z, p.sigma_b[yy])] == p.sigma_c[(z2, p.sigma_b[yy])]:
                bad.append(f"(ii) y={yy} z={z} z'={z2}")
    for low, low2 in itertools.product(bits, repeat=2):
        if low == low2:
            continue
        for yh, yh2, zh, zh2 in itertools.product(bits, repeat=4):
            y, y2 = vec(yh, low), vec(yh2, low2)
            z, z2 = vec(zh, low), vec(zh2, low2)
            if p.messages(y, z) == p.messages(y2, z2):
                bad.append(f"(iii) y={y} z={z} y'={y2} z'={z2}")
    return bad


def lemma1_check(p: OneRoundProtocolTable) -> bool:
    return not lemma1_violations(p)
