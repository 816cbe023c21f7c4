"""Version spaces: the hypotheses still consistent with every round so far.

``BitsetSpace`` stores an explicit set of hypothesis indices.  ``PosetSpace``
represents a set of permutations of 1..n through the comparisons
``f(a) < f(b)`` learned so far, so S_n never has to be enumerated; it only
supports queries whose answer hinges on a single comparison.
"""
from __future__ import annotations

import math
from functools import lru_cache
from typing import Any

from .protocols import Protocol, answer_of, single_comparison


class UnsupportedQuery(NotImplementedError):
    pass


class Evaluator:
    """Caches the answer of every hypothesis to each query seen."""

    def __init__(self, protocol: Protocol, family):
        self.protocol = protocol
        self.family = family
        self._cache: dict[Any, tuple] = {}
        table = getattr(family, "table", None)
        self._rows = table

    def answers(self, query) -> tuple:
        vec = self._cache.get(query)
        if vec is None:
            m = self.protocol.model
            if self._rows is not None:
                vec = tuple(answer_of(m, (lambda x, row=row: row[x - 1]), query) for row in self._rows)
            else:
                fam = self.family
                vec = tuple(answer_of(m, (lambda x, i=i: fam.label(i, x)), query) for i in range(len(fam)))
            self._cache[query] = vec
        return vec

    def answer(self, i: int, query):
        return self.answers(query)[i]


def iter_bits(bits: int):
    while bits:
        low = bits & -bits
        yield low.bit_length() - 1
        bits ^= low


class BitsetSpace:
    __slots__ = ("ev", "bits")

    def __init__(self, ev: Evaluator, bits: int):
        self.ev = ev
        self.bits = bits

    @classmethod
    def full(cls, protocol: Protocol, family) -> "BitsetSpace":
        return cls(Evaluator(protocol, family), (1 << len(family)) - 1)

    @property
    def family(self):
        return self.ev.family

    def __len__(self) -> int:
        return bin(self.bits).count("1")

    def __contains__(self, i: int) -> bool:
        return bool(self.bits >> i & 1)

    def __eq__(self, other) -> bool:
        return isinstance(other, BitsetSpace) and other.bits == self.bits

    def __hash__(self):
        return hash(self.bits)

    def members(self) -> list[int]:
        return list(iter_bits(self.bits))

    def first(self) -> int:
        return (self.bits & -self.bits).bit_length() - 1

    def with_bits(self, bits: int) -> "BitsetSpace":
        return BitsetSpace(self.ev, bits)

    def partition(self, query) -> dict[Any, "BitsetSpace"]:
        vec = self.ev.answers(query)
        classes: dict[Any, int] = {}
        for i in iter_bits(self.bits):
            a = vec[i]
            classes[a] = classes.get(a, 0) | (1 << i)
        return {a: BitsetSpace(self.ev, b) for a, b in classes.items()}

    def join(self, keep: list["BitsetSpace"], parts: dict) -> "BitsetSpace":
        bits = 0
        for c in keep:
            bits |= c.bits
        return BitsetSpace(self.ev, bits)

    def answer(self, i: int, query):
        return self.ev.answer(i, query)

    def witness_answer(self, query):
        return self.ev.answer(self.first(), query)

    def restrict(self, constraints) -> "BitsetSpace":
        """Keep hypotheses meeting every ``(kind, a, b)`` constraint.

        ``("label", x, y)`` asks f(x) = y; ``("less", a, b)`` asks f(a) < f(b).
        """
        fam, bits = self.family, self.bits
        for kind, a, b in constraints:
            if kind == "label":
                keep = (lambda i: fam.label(i, a) == b)
            else:
                keep = (lambda i: fam.label(i, a) < fam.label(i, b))
            bits = sum(1 << i for i in iter_bits(bits) if keep(i))
        return BitsetSpace(self.ev, bits)

    def key(self):
        return self.bits


# -- poset-backed space over S_n ---------------------------------------------------


def _components(n: int, below: tuple[int, ...]) -> list[list[int]]:
    adj = [below[e] for e in range(n)]
    for e in range(n):
        for d in range(n):
            if below[e] >> d & 1:
                adj[d] |= 1 << e
    seen, comps = 0, []
    for s in range(n):
        if seen >> s & 1:
            continue
        comp, stack = [], [s]
        seen |= 1 << s
        while stack:
            v = stack.pop()
            comp.append(v)
            nb = adj[v] & ~seen
            seen |= nb
            stack.extend(i for i in range(n) if nb >> i & 1)
        comps.append(sorted(comp))
    return comps


def _extensions(comp: list[int], below: tuple[int, ...]) -> int:
    """Linear extensions of one component by sparse DP over its down-sets."""
    pos = {e: j for j, e in enumerate(comp)}
    req = []
    for e in comp:
        m = 0
        for d in range(len(below)):
            if below[e] >> d & 1:
                m |= 1 << pos[d]
        req.append(m)
    k = len(comp)
    layer = {0: 1}
    for _ in range(k):
        nxt: dict[int, int] = {}
        for mask, c in layer.items():
            for j in range(k):
                if not mask >> j & 1 and req[j] & mask == req[j]:
                    t = mask | 1 << j
                    nxt[t] = nxt.get(t, 0) + c
        layer = nxt
    return layer.get((1 << k) - 1, 0)


@lru_cache(maxsize=1 << 16)
def count_linear_extensions(n: int, below: tuple[int, ...]) -> int:
    total = math.factorial(n)
    for comp in _components(n, below):
        total = total // math.factorial(len(comp)) * _extensions(comp, below)
    return total


class PosetSpace:
    """Permutations of 1..n consistent with a set of learned comparisons.

    ``below[e]`` is the bitmask of inputs d (0-based) known to satisfy f(d) < f(e);
    the relation is kept transitively closed.
    """

    __slots__ = ("n", "below", "empty", "protocol")

    def __init__(self, n: int, below: tuple[int, ...] | None = None, empty: bool = False,
                 protocol: Protocol | None = None):
        self.n = n
        self.below = below if below is not None else (0,) * n
        self.empty = empty
        self.protocol = protocol

    @classmethod
    def full(cls, protocol: Protocol, family) -> "PosetSpace":
        return cls(family.domain_size, protocol=protocol)

    def __len__(self) -> int:
        return 0 if self.empty else count_linear_extensions(self.n, self.below)

    def __eq__(self, other) -> bool:
        return isinstance(other, PosetSpace) and (self.below, self.empty) == (other.below, other.empty)

    def __hash__(self):
        return hash((self.below, self.empty))

    def less(self, a: int, b: int) -> bool | None:
        """True/False if f(a) < f(b) is decided, else None (inputs 1-based)."""
        if self.below[b - 1] >> (a - 1) & 1:
            return True
        if self.below[a - 1] >> (b - 1) & 1:
            return False
        return None

    def with_relation(self, a: int, b: int) -> "PosetSpace":
        """Add f(a) < f(b) (1-based inputs)."""
        a0, b0 = a - 1, b - 1
        if self.empty or a0 == b0 or self.below[a0] >> b0 & 1:
            return PosetSpace(self.n, self.below, True, self.protocol)
        low = self.below[a0] | 1 << a0
        out = list(self.below)
        for y in range(self.n):
            if y == b0 or self.below[y] >> b0 & 1:
                out[y] |= low
        return PosetSpace(self.n, tuple(out), False, self.protocol)

    def partition(self, query) -> dict[Any, "PosetSpace"]:
        sc = single_comparison(self.protocol, query)
        if sc is None:
            raise UnsupportedQuery(f"{self.protocol.model} query {query!r} is not a single comparison")
        a, b, ans_less, ans_greater = sc
        out = {}
        for ans, cls in ((ans_less, self.with_relation(a, b)), (ans_greater, self.with_relation(b, a))):
            if not cls.empty:
                out[ans] = cls
        return out

    def join(self, keep: list["PosetSpace"], parts: dict) -> "PosetSpace":
        if len(keep) == len(parts):
            return self
        if len(keep) == 1:
            return keep[0]
        raise UnsupportedQuery("union of comparison classes is not a poset")

    def key(self):
        return (self.below, self.empty)

    def linear_extension(self) -> tuple[int, ...]:
        """One consistent permutation: f(e) for e = 1..n, smallest free input ranked first."""
        if self.empty:
            raise ValueError("empty space has no members")
        placed, f = 0, [0] * self.n
        for rank in range(1, self.n + 1):
            e = next(e for e in range(self.n)
                     if not placed >> e & 1 and self.below[e] & ~placed == 0)
            f[e] = rank
            placed |= 1 << e
        return tuple(f)

    def witness_answer(self, query):
        f = self.linear_extension()
        return answer_of(self.protocol, lambda x: f[x - 1], query)

    def restrict(self, constraints) -> "PosetSpace":
        out = self
        for kind, a, b in constraints:
            if kind != "less":
                raise UnsupportedQuery("poset spaces only take comparison constraints")
            out = out.with_relation(a, b)
        return out


def initial_space(protocol: Protocol, family):
    if getattr(family, "implicit", False):
        return PosetSpace.full(protocol, family)
    return BitsetSpace.full(protocol, family)
