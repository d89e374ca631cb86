"""Integer compositions and partitions, their counting functions, and exact
distribution tables over them.
"""

from __future__ import annotations

import json
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from types import MappingProxyType
from typing import Callable, Dict, Iterable, Iterator, List, Mapping, Tuple

from .arith import FLOAT_TOL, all_exact, fmt, is_exact, parse_number

ENUMERATION_CAP = 20


class Composition(tuple):
    """Ordered sequence of positive integer parts. The empty composition has n = 0."""

    def __new__(cls, parts: Iterable[int] = ()):
        parts = tuple(int(p) for p in parts)
        if any(p < 1 for p in parts):
            raise ValueError(f"composition parts must be positive: {parts}")
        return super().__new__(cls, parts)

    @property
    def n(self) -> int:
        return sum(self)

    @property
    def k(self) -> int:
        return len(self)

    def tail_sums(self) -> Tuple[int, ...]:
        """Lambda_j = lambda_j + ... + lambda_k."""
        out, s = [], 0
        for p in reversed(self):
            s += p
            out.append(s)
        return tuple(reversed(out))

    def head_sums(self) -> Tuple[int, ...]:
        """Lambda_j = lambda_1 + ... + lambda_j."""
        out, s = [], 0
        for p in self:
            s += p
            out.append(s)
        return tuple(out)

    def reversed(self) -> "Composition":
        return Composition(self[::-1])

    def to_partition(self) -> "Partition":
        return Partition(self)

    def __str__(self) -> str:
        return ",".join(map(str, self))

    def __repr__(self) -> str:
        return f"Composition({tuple(self)})"

    @classmethod
    def parse(cls, text: str) -> "Composition":
        text = text.strip()
        if not text:
            return cls(())
        return cls(int(t) for t in text.split(","))


class Partition(tuple):
    """Multiset of positive parts, stored in nonincreasing order."""

    def __new__(cls, parts: Iterable[int] = ()):
        parts = tuple(sorted((int(p) for p in parts), reverse=True))
        if any(p < 1 for p in parts):
            raise ValueError(f"partition parts must be positive: {parts}")
        return super().__new__(cls, parts)

    @property
    def n(self) -> int:
        return sum(self)

    @property
    def k(self) -> int:
        return len(self)

    def multiplicities(self) -> Dict[int, int]:
        """r -> k_r, the number of parts equal to r."""
        return dict(Counter(self))

    def remove(self, m: int) -> "Partition":
        """Delete one part equal to m."""
        parts = list(self)
        parts.remove(m)
        return Partition(parts)

    def arrangements(self) -> List[Composition]:
        """All distinct orderings of the parts."""
        return [Composition(c) for c in _distinct_permutations(Counter(self), len(self))]

    def __str__(self) -> str:
        return ",".join(map(str, self))

    def __repr__(self) -> str:
        return f"Partition({tuple(self)})"

    @classmethod
    def parse(cls, text: str) -> "Partition":
        text = text.strip()
        if not text:
            return cls(())
        return cls(int(t) for t in text.split(","))


def _distinct_permutations(counts: Counter, length: int) -> Iterator[tuple]:
    if length == 0:
        yield ()
        return
    for value in sorted(counts, reverse=True):
        if counts[value] == 0:
            continue
        counts[value] -= 1
        for rest in _distinct_permutations(counts, length - 1):
            yield (value,) + rest
        counts[value] += 1


# ---------------------------------------------------------------- encoding

def binary_encode(c: Composition) -> str:
    """Each part m becomes a 1 followed by m-1 zeros: (3,1,2) -> 100110."""
    c = Composition(c)
    if c.n < 1:
        raise ValueError("cannot encode the empty composition")
    return "".join("1" + "0" * (p - 1) for p in c)


def binary_decode(bits: str) -> Composition:
    bits = bits.strip()
    if not bits:
        return Composition(())
    if bits[0] != "1" or set(bits) - {"0", "1"}:
        raise ValueError(f"not a composition code: {bits!r}")
    starts = [i for i, b in enumerate(bits) if b == "1"] + [len(bits)]
    return Composition(b - a for a, b in zip(starts, starts[1:]))


# ---------------------------------------------------------------- counting

def multinomial_count(c: Composition) -> int:
    """Number of ordered set partitions of [n] with shape c."""
    c = Composition(c)
    out = math.factorial(c.n)
    for p in c:
        out //= math.factorial(p)
    return out


def shape_count(p: Partition) -> int:
    """Number of set partitions of [n] with block sizes p."""
    p = Partition(p)
    denom = 1
    for r, kr in p.multiplicities().items():
        denom *= math.factorial(r) ** kr * math.factorial(kr)
    return math.factorial(p.n) // denom


def _check_cap(n: int, cap: int) -> None:
    if n < 1:
        raise ValueError("n must be >= 1")
    if n > cap:
        raise ValueError(f"n={n} exceeds the enumeration cap {cap}; pass a larger cap explicitly")


def enumerate_compositions(n: int, cap: int = ENUMERATION_CAP) -> List[Composition]:
    """All 2^(n-1) compositions of n, ordered lexicographically by binary code."""
    _check_cap(n, cap)
    out = []
    for tail in range(2 ** (n - 1)):
        bits = "1" + format(tail, f"0{n - 1}b") if n > 1 else "1"
        out.append(binary_decode(bits))
    return out


def enumerate_partitions(n: int, cap: int = ENUMERATION_CAP * 3) -> List[Partition]:
    """All partitions of n in reverse lexicographic order: (n), (n-1,1), ..., (1,...,1)."""
    _check_cap(n, cap)
    out: List[Partition] = []

    def rec(remaining: int, largest: int, prefix: List[int]) -> None:
        if remaining == 0:
            out.append(Partition(prefix))
            return
        for p in range(min(remaining, largest), 0, -1):
            prefix.append(p)
            rec(remaining - p, p, prefix)
            prefix.pop()

    rec(n, n, [])
    return out


# ---------------------------------------------------------------- tables

@dataclass(frozen=True)
class DistributionTable:
    """Law of a random composition (or partition) of a fixed n."""

    n: int
    kind: str
    entries: Mapping[tuple, object] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ("composition", "partition"):
            raise ValueError(f"unknown table kind {self.kind!r}")
        key_type = Composition if self.kind == "composition" else Partition
        clean = {}
        for key, p in self.entries.items():
            key = key_type(key)
            if key.n != self.n:
                raise ValueError(f"{key} is not of size {self.n}")
            if p < 0 and not is_exact(p) and p > -FLOAT_TOL:
                p = 0.0
            if p < 0:
                raise ValueError(f"negative probability {p} at {key}")
            clean[key] = clean.get(key, 0) + p
        object.__setattr__(self, "entries", MappingProxyType(clean))
        object.__setattr__(self, "_backend", "exact" if all_exact(clean.values()) else "float")

    @property
    def backend(self) -> str:
        return self._backend

    def __getitem__(self, key) -> object:
        key_type = Composition if self.kind == "composition" else Partition
        return self.entries.get(key_type(key), Fraction(0) if self.backend == "exact" else 0.0)

    def total(self):
        return sum(self.entries.values(), Fraction(0) if self.backend == "exact" else 0.0)

    def support(self) -> Dict[tuple, object]:
        return {k: v for k, v in self.entries.items() if v != 0}

    def is_normalized(self) -> bool:
        t = self.total()
        return t == 1 if self.backend == "exact" else abs(t - 1) <= FLOAT_TOL

    def equals(self, other: "DistributionTable", tol: float = FLOAT_TOL) -> bool:
        """Exact equality under the rational backend, tolerance across backends."""
        if self.n != other.n or self.kind != other.kind:
            return False
        keys = set(self.support()) | set(other.support())
        exact = self.backend == "exact" and other.backend == "exact"
        for key in keys:
            a, b = self[key], other[key]
            if exact:
                if a != b:
                    return False
            elif abs(float(a) - float(b)) > tol:
                return False
        return True

    def max_abs_diff(self, other: "DistributionTable") -> float:
        keys = set(self.entries) | set(other.entries)
        return max((abs(float(self[k]) - float(other[k])) for k in keys), default=0.0)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "kind": self.kind,
            "entries": [{"parts": list(k), "p": fmt(v)} for k, v in self.entries.items()],
        }

    @classmethod
    def from_json(cls, text: str) -> "DistributionTable":
        data = json.loads(text)
        entries = {tuple(e["parts"]): parse_number(e["p"]) for e in data["entries"]}
        return cls(data["n"], data["kind"], entries)


def table_from_function(n: int, fn: Callable[[Composition], object], kind: str = "composition") -> DistributionTable:
    objs = enumerate_compositions(n) if kind == "composition" else enumerate_partitions(n)
    return DistributionTable(n, kind, {c: fn(c) for c in objs})


def uniform_composition_table(n: int) -> DistributionTable:
    comps = enumerate_compositions(n)
    p = Fraction(1, len(comps))
    return DistributionTable(n, "composition", {c: p for c in comps})


def point_mass(c, kind: str = "composition") -> DistributionTable:
    key = Composition(c) if kind == "composition" else Partition(c)
    return DistributionTable(key.n, kind, {key: Fraction(1)})


def _zero_like(table: DistributionTable):
    return Fraction(0) if table.backend == "exact" else 0.0


def symmetrize(table: DistributionTable) -> DistributionTable:
    """Composition law -> partition law by summing over arrangements."""
    if table.kind != "composition":
        raise ValueError("symmetrize expects a composition table")
    out: Dict[Partition, object] = defaultdict(lambda: _zero_like(table))
    for c, p in table.entries.items():
        out[Partition(c)] += p
    return DistributionTable(table.n, "partition", dict(out))


def sb_reduce_pushforward(table: DistributionTable) -> DistributionTable:
    """Push the law at level n through size-biased reduction of one part to level n-1."""
    n = table.n
    if n < 2:
        raise ValueError("size-biased reduction needs n >= 2")
    out: Dict[tuple, object] = defaultdict(lambda: _zero_like(table))
    exact = table.backend == "exact"
    key_type = Composition if table.kind == "composition" else Partition
    for c, p in table.entries.items():
        if p == 0:
            continue
        for j, part in enumerate(c):
            w = Fraction(part, n) if exact else part / n
            reduced = list(c)
            if part == 1:
                del reduced[j]
            else:
                reduced[j] -= 1
            out[key_type(reduced)] += p * w
    return DistributionTable(n - 1, table.kind, dict(out))


def reverse_pushforward(table: DistributionTable) -> DistributionTable:
    if table.kind != "composition":
        raise ValueError("reversal is defined for compositions only")
    return DistributionTable(table.n, "composition", {c.reversed(): p for c, p in table.entries.items()})


def _part_marginal(table: DistributionTable, pick: Callable[[Composition], int]) -> List:
    out = [_zero_like(table) for _ in range(table.n)]
    for c, p in table.entries.items():
        out[pick(c) - 1] += p
    return out


def first_part_marginal(table: DistributionTable) -> List:
    """[P(F_n = 1), ..., P(F_n = n)]."""
    return _part_marginal(table, lambda c: c[0])


def last_part_marginal(table: DistributionTable) -> List:
    """[P(L_n = 1), ..., P(L_n = n)]."""
    return _part_marginal(table, lambda c: c[-1])


def is_exact_table(table: DistributionTable) -> bool:
    return all(is_exact(v) for v in table.entries.values())
