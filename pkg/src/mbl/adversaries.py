"""Adversary strategies that force mistakes while staying truthful.

An adversary bound to a game answers ``query(vs)`` (or ``open_round`` and
``next_input`` when inputs are revealed one at a time) and ``feedback``.
Returning ``None`` from ``query``/``open_round`` ends the game.

The recursive constructions are written as generators: they ``yield`` a query
and, when resumed, read ``self.vs`` to see what the feedback established.
"""
from __future__ import annotations

import functools
import itertools
import math
import random
import warnings
from collections import Counter
from dataclasses import dataclass, field

from .engine.protocols import Protocol, ProtocolError, graded
from .engine.spaces import PosetSpace
from .families import index_of, thresholds_of
from .verify import BucketTable, SearchFailure, find_good_u


class Adversary:
    name = "adversary"

    def bind(self, protocol: Protocol, family, rng: random.Random) -> None:
        self.protocol, self.family, self.rng = protocol, family, rng
        self.log: list[dict] = []
        self.forced = Counter()
        self.phase = None

    def query(self, vs):
        raise NotImplementedError

    def open_round(self, vs):
        raise NotImplementedError

    def next_input(self, vs, header, so_far):
        raise NotImplementedError

    def feedback(self, vs, query, guess):
        """Say "no" (or reveal a different answer) whenever some hypothesis allows it."""
        parts = vs.partition(query)
        g = graded(self.protocol, guess)
        if self.protocol.strong:
            others = [a for a in parts if a != g]
            if not others:
                return g
            self.forced[self.phase] += 1
            return max(others, key=lambda a: (len(parts[a]), _neg_key(a)))
        if any(a != g for a in parts):
            self.forced[self.phase] += 1
            return False
        return True

    def observe(self, vs, query, guess, feedback, new_vs) -> None:
        pass


def _neg_key(a):
    # deterministic tie-break between equally large answer classes: smallest answer wins
    return tuple(-x for x in a) if isinstance(a, tuple) else -a


class GeneratorAdversary(Adversary):
    def bind(self, protocol, family, rng):
        super().bind(protocol, family, rng)
        self.vs = None
        self._plan = self.plan()

    def plan(self):
        raise NotImplementedError
        yield

    def query(self, vs):
        self.vs = vs
        return next(self._plan, None)

    def pinned(self, query) -> bool:
        return len(self.vs.partition(query)) <= 1

    def force(self, query, phase=None):
        """Ask ``query`` until its answer is determined; returns the number of rounds."""
        rounds = 0
        self.phase = phase
        while not self.pinned(query):
            yield query
            rounds += 1
        return rounds

    def known_answer(self, query):
        (ans,) = self.vs.partition(query)
        return ans


# -- threshold families -------------------------------------------------------------------


def quantile_indices(m: int, r: int, offset: int = 0) -> list[int]:
    """1-based survivor indices queried by the maximin threshold strategy.

    ``offset=0`` cuts the sorted survivors into r+1 runs of at most ceil(m/(r+1));
    ``offset=1`` is the literal ``i*c + 1`` indexing.
    """
    c = -(-m // (r + 1))
    top = m - 1 + offset
    return [min(i * c + offset, top) for i in range(1, r + 1)]


@dataclass
class SortedSurvivors:
    """Thresholds b_1 < ... < b_m of the hypotheses still consistent."""

    b: list[int] = field(default_factory=list)

    @classmethod
    def of(cls, vs, thresholds) -> "SortedSurvivors":
        return cls(sorted(thresholds[i] for i in vs.members()))

    def __len__(self) -> int:
        return len(self.b)

    def at(self, j: int) -> int:
        return self.b[j - 1]


class ThresholdMaximin(Adversary):
    """Queries the quantile thresholds of the survivors and always says "no"."""

    name = "threshold-maximin"

    def __init__(self, min_survivors: int = 2, offset: int = 0):
        self.min_survivors = max(2, min_survivors)
        self.offset = offset

    def bind(self, protocol, family, rng):
        if protocol.model not in ("cart_weak", "bandit"):
            raise ProtocolError("threshold-maximin plays the r-input weak model")
        super().bind(protocol, family, rng)
        self.thresholds = thresholds_of(family)

    def query(self, vs):
        s = SortedSurvivors.of(vs, self.thresholds)
        m, r = len(s), self.protocol.r
        if m < self.min_survivors:
            return None
        xs = [min(s.at(t), self.family.domain_size) for t in quantile_indices(m, r, self.offset)]
        self.log.append({"survivors": m, "cut": -(-m // (r + 1))})
        return xs[0] if self.protocol.model == "bandit" else tuple(xs)


class AmbMedian(Adversary):
    """Reveals the median of the survivors that agree with the learner's labels so far."""

    name = "amb-median"

    def __init__(self, min_survivors: int = 2):
        self.min_survivors = max(2, min_survivors)

    def bind(self, protocol, family, rng):
        if protocol.model != "amb":
            raise ProtocolError("amb-median plays the ambiguous delayed model")
        super().bind(protocol, family, rng)
        self.thresholds = thresholds_of(family)

    def open_round(self, vs):
        if len(vs) < self.min_survivors:
            return None
        self.log.append({"survivors": len(vs)})
        return 0

    def next_input(self, vs, header, so_far):
        b = [a for a in SortedSurvivors.of(vs, self.thresholds).b
             if all(int(x >= a) == y for x, y in so_far)]
        if not b:
            b = SortedSurvivors.of(vs, self.thresholds).b
        return min(b[-(-len(b) // 2) - 1], self.family.domain_size)

    def observe(self, vs, query, guess, feedback, new_vs):
        self.log[-1]["lost"] = len(vs) - len(new_vs)


# -- permutations: shared helpers -------------------------------------------------------------


def pair_query(protocol: Protocol, a: int, b: int):
    """A query whose answer is exactly whether f(a) < f(b)."""
    m = protocol.model
    if m == "order" and protocol.r == 2:
        return (a, b)
    if m == "comparison" and protocol.r == 1:
        return ((a, b),)
    if m == "selection" and protocol.r == 2:
        return (a, b)
    if m in ("relpos", "delayed_relpos") and protocol.r == 1:
        return (b, (a,))
    raise ProtocolError(f"{protocol} has no single-comparison query")


def known_less(vs, family, a: int, b: int) -> bool | None:
    """Whether f(a) < f(b) holds for every hypothesis in vs (None if undecided)."""
    if isinstance(vs, PosetSpace):
        return vs.less(a, b)
    vals = {family.label(i, a) < family.label(i, b) for i in vs.members()}
    return vals.pop() if len(vals) == 1 else None


def sorted_by_f(vs, family, elems):
    """Order a set of inputs whose relative order is already determined."""

    def cmp(a, b):
        return -1 if known_less(vs, family, a, b) else 1

    return sorted(elems, key=functools.cmp_to_key(cmp))


class Insertion(GeneratorAdversary):
    """Inserts inputs 2..n one by one, binary searching each position and always saying "no"."""

    name = "insertion"

    def bind(self, protocol, family, rng):
        super().bind(protocol, family, rng)
        pair_query(protocol, 1, 2)

    @staticmethod
    def midpoint(a: int, b: int) -> int:
        """Bounds a < v <= b; the midpoint rounded half up."""
        return (a + b + 1) // 2

    def plan(self):
        chain = [1]
        for e in range(2, self.family.domain_size + 1):
            # v = 1 + number of chain elements below e, and a < v <= b
            a, b = 0, len(chain) + 1
            forced = 0
            while b - a > 1:
                m = self.midpoint(a, b)
                c = chain[m - 1]
                forced += yield from self.force(pair_query(self.protocol, c, e), e)
                if known_less(self.vs, self.family, c, e):
                    a = m
                else:
                    b = m
            chain.insert(a, e)
            self.log.append({"element": e, "forced": forced})


class Merge(GeneratorAdversary):
    """Order model: exhaust every r-block, then recurse on the j-th smallest of each block."""

    name = "merge"

    def bind(self, protocol, family, rng):
        if protocol.model != "order" or protocol.r < 2:
            raise ProtocolError("merge plays the order model with r >= 2")
        super().bind(protocol, family, rng)

    def plan(self):
        r = self.protocol.r
        groups = [list(range(1, self.family.domain_size + 1))]
        leftovers: list[int] = []
        depth, phase = 0, "block"
        while groups:
            nxt = []
            for g in groups:
                full = len(g) // r * r
                blocks = [g[i:i + r] for i in range(0, full, r)]
                leftovers += g[full:]
                for blk in blocks:
                    q = tuple(sorted(blk))
                    forced = yield from self.force(q, (phase, q))
                    self.log.append({"phase": phase, "depth": depth, "block": q, "forced": forced})
                ordered = [sorted_by_f(self.vs, self.family, blk) for blk in blocks]
                if ordered:
                    nxt.extend([o[j] for o in ordered] for j in range(r))
            groups = [g for g in nxt if len(g) >= r]
            depth += 1
            if not groups and len(leftovers) >= r:
                # leftovers join one last group, in input order
                groups, leftovers, phase = [sorted(leftovers)], [], "leftover"


class Quicksort(GeneratorAdversary):
    """Comparison model: compare r-blocks against the last input of the group, then split."""

    name = "quicksort"

    def bind(self, protocol, family, rng):
        if protocol.model != "comparison":
            raise ProtocolError("quicksort plays the comparison model")
        super().bind(protocol, family, rng)

    def _padded(self, left, pivot):
        r = self.protocol.r
        pairs = [(s, pivot) for s in left] + [(pivot, s) for s in left]
        if len(pairs) < r:
            n = self.family.domain_size
            every = [(a, b) for a in range(1, n + 1) for b in range(1, n + 1) if a != b]
            known = [q for q in every if q not in pairs and known_less(self.vs, self.family, *q) is not None]
            rest = [q for q in every if q not in pairs and q not in known]
            pairs += known + rest
        return tuple(pairs[:r])

    def plan(self):
        r = self.protocol.r
        groups = [list(range(1, self.family.domain_size + 1))]
        while groups:
            g = groups.pop(0)
            if len(g) < 2:
                continue
            pivot, rest = g[-1], g[:-1]
            full = len(rest) // r
            for i in range(full):
                blk = rest[i * r:(i + 1) * r]
                q = tuple((s, pivot) for s in blk)
                forced = yield from self.force(q, ("block", pivot, tuple(blk)))
                self.log.append({"phase": "block", "pivot": pivot, "block": tuple(blk), "forced": forced})
            left = rest[full * r:]
            if left:
                q = self._padded(left, pivot)
                forced = yield from self.force(q, ("leftover", pivot, tuple(left)))
                self.log.append({"phase": "leftover", "pivot": pivot, "block": tuple(left), "forced": forced})
            lower = [s for s in rest if known_less(self.vs, self.family, s, pivot)]
            upper = [s for s in rest if s not in lower]
            groups += [lower, upper]


def split_evenly(items: list, parts: int) -> list[list]:
    q, extra = divmod(len(items), parts)
    out, i = [], 0
    for j in range(parts):
        size = q + (j < extra)
        out.append(items[i:i + size])
        i += size
    return out


class SelectionMerge(GeneratorAdversary):
    """Selection model: sort r blocks recursively, then merge by repeatedly asking for the maximum."""

    name = "selection-merge"

    def bind(self, protocol, family, rng):
        if protocol.model != "selection" or protocol.r < 2:
            raise ProtocolError("selection-merge plays the selection model with r >= 2")
        super().bind(protocol, family, rng)

    def plan(self):
        yield from self.sort_group(list(range(1, self.family.domain_size + 1)), 0)

    def sort_group(self, g: list[int], depth: int):
        """Generator returning g sorted by increasing f."""
        r = self.protocol.r
        if len(g) <= 1:
            return list(g)
        runs = []
        for blk in split_evenly(g, min(r, len(g))):
            run = yield from self.sort_group(blk, depth + 1)
            runs.append(run)
        out = []
        for iteration in itertools.count():
            heads = [run[-1] for run in runs if run]
            if not heads:
                break
            if len(heads) > 1:
                q = tuple(heads) + (heads[-1],) * (r - len(heads))
                forced = yield from self.force(q, ("merge", depth, iteration))
                self.log.append({"phase": "merge", "depth": depth, "iteration": iteration,
                                 "heads": len(heads), "forced": forced})
                top = self.known_answer(q)
            else:
                top = heads[0]
            next(run for run in runs if run and run[-1] == top).pop()
            out.append(top)
        return out[::-1]


# -- relative position ------------------------------------------------------------------------------


def feasible_positions(vs, family, chain: list[int], e: int) -> list[int]:
    """Possible counts of chain elements below e, over the hypotheses in vs."""
    if isinstance(vs, PosetSpace):
        lo = sum(vs.less(c, e) is True for c in chain)
        hi = len(chain) - sum(vs.less(e, c) is True for c in chain)
        return list(range(lo, hi + 1))
    return sorted({sum(family.label(i, c) < family.label(i, e) for c in chain) for i in vs.members()})


def pad_ranks(chosen: list[int], b: list[int], length: int, r: int) -> list[int]:
    """Fill up to r distinct chain ranks, preferring ranks every survivor answers alike."""
    spare = [s for s in range(1, length + 1) if s not in chosen]
    spare.sort(key=lambda s: (b[0] <= s < b[-1], s))
    return sorted(chosen + spare[:r - len(chosen)])


class RelposThreshold(GeneratorAdversary):
    """Pins the first r+1 inputs, then locates each new input by playing the threshold game."""

    name = "relpos-threshold"

    def bind(self, protocol, family, rng):
        if protocol.model != "relpos":
            raise ProtocolError(f"{self.name} plays the relative position model")
        super().bind(protocol, family, rng)

    def plan(self):
        r, n = self.protocol.r, self.family.domain_size
        first = list(range(1, r + 2))
        rank = {}
        for x in first:
            q = (x, tuple(y for y in first if y != x))
            yield from self.force(q, ("bootstrap", x))
            rank[x] = self.known_answer(q)
        chain = sorted(first, key=rank.__getitem__)
        for e in range(r + 2, n + 1):
            self.phase = e
            pos = feasible_positions(self.vs, self.family, chain, e)
            self.log.append({"element": e, "feasible": len(pos)})
            while len(pos) > 1:
                b = [j + 1 for j in pos]
                ranks = sorted({b[t - 1] for t in quantile_indices(len(b), r)})
                ranks = pad_ranks(ranks, b, len(chain), r)
                yield (e, tuple(chain[s - 1] for s in ranks))
                pos = feasible_positions(self.vs, self.family, chain, e)
            chain.insert(pos[0], e)


class RelposAvoiding(RelposThreshold):
    """The same construction on a pattern-avoiding class; the log keeps the feasible counts."""

    name = "relpos-avoiding"

    def bind(self, protocol, family, rng):
        if getattr(family, "implicit", False):
            raise ProtocolError("relpos-avoiding needs an enumerated family")
        super().bind(protocol, family, rng)


class DelayedRelpos(Adversary):
    """Delayed relative position: the relpos skeleton with median picks inside each round."""

    name = "delayed-relpos"

    def bind(self, protocol, family, rng):
        if protocol.model != "delayed_relpos":
            raise ProtocolError("delayed-relpos plays the delayed relative position model")
        super().bind(protocol, family, rng)
        self.first = list(range(1, protocol.r + 2))
        self.boot = 0
        self.chain: list[int] | None = None
        self.e = protocol.r + 2
        self.current = None

    def _boot_query(self, x):
        return (x, tuple(y for y in self.first if y != x))

    def open_round(self, vs):
        while self.chain is None:
            if self.boot == len(self.first):
                rank = {x: next(iter(vs.partition(self._boot_query(x)))) for x in self.first}
                self.chain = sorted(self.first, key=rank.__getitem__)
                break
            x = self.first[self.boot]
            if len(vs.partition(self._boot_query(x))) > 1:
                self.current = ("boot", x, None)
                self.phase = ("bootstrap", x)
                return x
            self.boot += 1
        while self.e <= self.family.domain_size:
            pos = feasible_positions(vs, self.family, self.chain, self.e)
            if len(pos) > 1:
                self.current = ("insert", self.e, pos)
                self.phase = self.e
                self.log.append({"element": self.e, "survivors": len(pos)})
                return self.e
            self.chain.insert(pos[0], self.e)
            self.e += 1
        return None

    def next_input(self, vs, header, so_far):
        kind, x, pos = self.current
        if kind == "boot":
            return self._boot_query(x)[1][len(so_far)]
        L = len(self.chain)
        rank_of = {c: i + 1 for i, c in enumerate(self.chain)}
        b = [j + 1 for j in pos]
        # "higher" on rank s keeps thresholds a > s, "lower" keeps a <= s
        live = [a for a in b if all((a > rank_of[c]) == bool(t) for c, t in so_far)]
        used = {rank_of[c] for c, _ in so_far}
        if len(live) >= 2:
            s = live[-(-len(live) // 2) - 1]
        else:
            spare = [s for s in range(1, L + 1) if s not in used]
            spare.sort(key=lambda s: (b[0] <= s < b[-1], s))
            s = spare[0]
        return self.chain[s - 1]

    def observe(self, vs, query, guess, feedback, new_vs):
        if self.current[0] == "insert":
            self.log[-1]["lost"] = len(vs) - len(new_vs)


# -- linear families ----------------------------------------------------------------------------------


class LinearBucket(Adversary):
    """Hashes the surviving coefficient vectors with sampled u and queries the flattest split."""

    name = "linear-bucket"

    def __init__(self, attempts: int = 32, min_survivors: float | None = None):
        self.attempts = attempts
        self.min_survivors = min_survivors

    def bind(self, protocol, family, rng):
        if protocol.model != "cart_weak" or not hasattr(family, "coefficients"):
            raise ProtocolError("linear-bucket plays the r-input weak model on a linear family")
        super().bind(protocol, family, rng)
        p, r = family.p, protocol.r
        if self.min_survivors is None:
            self.min_survivors = p ** (2 * r) * math.log(p)
        self.tables: list[tuple[BucketTable, bool]] = []
        self.warnings: list[str] = []

    def query(self, vs):
        fam, r = self.family, self.protocol.r
        R = [fam.coefficients[i] for i in vs.members()]
        if len(R) < max(2, self.min_survivors):
            return None
        try:
            _, table = find_good_u(fam.p, fam.n, r, R, self.rng, self.attempts)
            ok = True
        except SearchFailure as exc:
            table, ok = exc.best, False
            msg = f"no u met the bucket bound for |R| = {len(R)}; using the best of {self.attempts}"
            self.warnings.append(msg)
            warnings.warn(msg, RuntimeWarning, stacklevel=2)
        self.tables.append((table, ok))
        self.log.append({"survivors": len(R), "largest": table.largest, "accepted": ok})
        return tuple(index_of(ui, fam.p) for ui in table.u)


# -- seeded random truthful adversary -------------------------------------------------------------------


def random_query(protocol: Protocol, n: int, rng: random.Random):
    m, r = protocol.model, protocol.r
    if m in ("standard", "bandit"):
        return rng.randint(1, n)
    if m in ("cart_weak", "amb", "selection"):
        return tuple(rng.randint(1, n) for _ in range(r))
    if m == "order":
        return tuple(sorted(rng.sample(range(1, n + 1), r)))
    if m == "comparison":
        pairs = set()
        while len(pairs) < r:
            a, b = rng.sample(range(1, n + 1), 2)
            pairs.add((a, b))
        return tuple(sorted(pairs))
    x = rng.randint(1, n)
    S = rng.sample([y for y in range(1, n + 1) if y != x], r)
    return (x, tuple(S) if m == "delayed_relpos" else tuple(sorted(S)))


class RandomAdversary(Adversary):
    """Random informative queries; says "no" with probability p_no whenever that is truthful."""

    name = "random"

    def __init__(self, p_no: float = 0.8, tries: int = 50):
        self.p_no = p_no
        self.tries = tries

    def _draw(self, vs):
        n = self.family.domain_size
        q = None
        for _ in range(self.tries):
            q = random_query(self.protocol, n, self.rng)
            try:
                if len(vs.partition(q)) > 1:
                    return q
            except NotImplementedError:
                continue
        return q

    def query(self, vs):
        if len(vs) <= 1:
            return None
        return self._draw(vs)

    def open_round(self, vs):
        if len(vs) <= 1:
            return None
        self._pending = self._draw(vs)
        return self._pending[0] if self.protocol.model == "delayed_relpos" else 0

    def next_input(self, vs, header, so_far):
        if self.protocol.model == "delayed_relpos":
            return self._pending[1][len(so_far)]
        return self._pending[len(so_far)]

    def feedback(self, vs, query, guess):
        parts = vs.partition(query)
        g = graded(self.protocol, guess)
        others = sorted(a for a in parts if a != g)
        if self.protocol.strong:
            if others and self.rng.random() < self.p_no:
                return self.rng.choice(others)
            return self.rng.choice(sorted(parts))
        if others and (g not in parts or self.rng.random() < self.p_no):
            return False
        return True


ADVERSARIES = {
    cls.name: cls
    for cls in (ThresholdMaximin, AmbMedian, Insertion, Merge, Quicksort, SelectionMerge,
                RelposThreshold, RelposAvoiding, LinearBucket, DelayedRelpos, RandomAdversary)
}


def make_adversary(name: str, **params) -> Adversary:
    try:
        cls = ADVERSARIES[name]
    except KeyError:
        raise KeyError(f"unknown adversary {name!r}") from None
    return cls(**params)
