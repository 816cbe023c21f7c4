"""Exact minimax values of tiny games.

The adversary picks queries (and, for incremental protocols, each input of a
round) and any truthful feedback; the learner picks guesses.  Values are memoized
on the version space bitset plus the partial-round state.  A feedback that would
leave the version space unchanged is a wasted round for the adversary, so it is
scored 0 when the guess was right and as unbounded when the guess was wrong.
"""
from __future__ import annotations

import copy
import itertools
import math
import random
from typing import Callable

from .engine.game import is_mistake, run_game
from .engine.protocols import Protocol, graded
from .engine.spaces import BitsetSpace, iter_bits
from .families import SizeError

INF = math.inf
DEFAULT_MAX_HYPOTHESES = 12
DEFAULT_MAX_QUERIES = 64


def enumerate_queries(protocol: Protocol, n: int) -> list:
    """Every query up to reordering of inputs that cannot change the answer classes."""
    m, r = protocol.model, protocol.r
    xs = range(1, n + 1)
    if m in ("standard", "bandit"):
        return list(xs)
    if m in ("cart_weak", "selection"):
        return list(itertools.combinations_with_replacement(xs, r))
    if m == "order":
        return list(itertools.combinations(xs, r))
    if m == "comparison":
        pairs = [(a, b) for a in xs for b in xs if a != b]
        return list(itertools.combinations(pairs, r))
    if m == "relpos":
        return [(x, S) for x in xs for S in itertools.combinations([y for y in xs if y != x], r)]
    raise ValueError(f"{m} rounds are enumerated input by input")


def query_space_size(protocol: Protocol, n: int) -> int:
    m, r = protocol.model, protocol.r
    if m == "amb":
        return n**r
    if m == "delayed_relpos":
        return n * math.comb(n - 1, r)
    return len(enumerate_queries(protocol, n))


class Solver:
    def __init__(self, protocol: Protocol, family, max_hypotheses: int = DEFAULT_MAX_HYPOTHESES,
                 max_queries: int = DEFAULT_MAX_QUERIES):
        protocol.check_family(family)
        if getattr(family, "implicit", False) or len(family) > max_hypotheses:
            raise SizeError(f"{len(family)} hypotheses exceed the solver cap {max_hypotheses}")
        n = family.domain_size
        size = query_space_size(protocol, n)
        if size > max_queries:
            raise SizeError(f"{size} queries per round exceed the solver cap {max_queries}")
        self.protocol, self.family, self.n = protocol, family, n
        self.space = BitsetSpace.full(protocol, family)
        self.queries = [] if protocol.incremental else enumerate_queries(protocol, n)
        self.memo: dict = {}

    # -- whole-round protocols ------------------------------------------------------------

    def value(self, bits: int | None = None) -> int:
        bits = self.space.bits if bits is None else bits
        v = self._val(bits)
        return int(v)

    def _parts(self, bits: int, query) -> dict:
        return self.space.with_bits(bits).partition(query)

    def _val(self, bits: int):
        hit = self.memo.get(bits)
        if hit is not None:
            return hit
        if self.protocol.incremental:
            best = self._round_value(bits)
        else:
            best, seen = 0, set()
            for q in self.queries:
                parts = self._parts(bits, q)
                if len(parts) < 2:
                    continue
                key = frozenset(c.bits for c in parts.values())
                if key in seen:
                    continue
                seen.add(key)
                best = max(best, min(self.branch(bits, parts, g) for g in parts))
        self.memo[bits] = best
        return best

    def branch(self, bits: int, parts: dict, g):
        """Adversary's best continuation once the learner has guessed g."""
        if self.protocol.strong:
            return max((a != g) + self._val(c.bits) for a, c in parts.items())
        cls = parts[g].bits if g in parts else 0
        return self._leaf_weak(bits, cls)

    def _leaf_weak(self, bits: int, cls: int):
        rest = bits & ~cls
        if rest == bits:
            return INF
        opts = [1 + self._val(rest)] if rest else []
        opts.append(0 if cls == bits else self._val(cls))
        return max(opts)

    # -- input-by-input protocols --------------------------------------------------------------

    def _round_value(self, bits: int):
        if self.protocol.model == "amb":
            return self.amb_state(bits, bits, 0)
        return max(self.delayed_state(bits, x, frozenset(), 0) for x in range(1, self.n + 1))

    def amb_state(self, bits: int, cand: int, j: int):
        """Value with ``cand`` the hypotheses matching the learner's first j labels."""
        key = ("amb", bits, cand, j)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        if j == self.protocol.r:
            best = self._leaf_weak(bits, cand)
        else:
            best = 0
            for x in range(1, self.n + 1):
                best = max(best, min(self.amb_state(bits, c, j + 1)
                                     for c in self.label_classes(cand, x).values()))
        self.memo[key] = best
        return best

    def label_classes(self, cand: int, x: int) -> dict[int, int]:
        out: dict[int, int] = {}
        for i in iter_bits(cand):
            y = self.family.label(i, x)
            out[y] = out.get(y, 0) | 1 << i
        return out

    def delayed_state(self, bits: int, x: int, used: frozenset, higher: int):
        key = ("delayed", bits, x, used, higher)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        if len(used) == self.protocol.r:
            best = self._delayed_leaf(bits, x, used, 1 + higher)
        else:
            best = 0
            for s in range(1, self.n + 1):
                if s == x or s in used:
                    continue
                best = max(best, min(self.delayed_state(bits, x, used | {s}, higher + t) for t in (0, 1)))
        self.memo[key] = best
        return best

    def _delayed_leaf(self, bits: int, x: int, used: frozenset, rank: int):
        parts = self._parts(bits, (x, tuple(sorted(used))))
        if not self.protocol.strong:
            return self._leaf_weak(bits, parts[rank].bits if rank in parts else 0)
        best = 0
        for a, c in parts.items():
            if c.bits == bits:
                best = max(best, INF if a != rank else 0)
            else:
                best = max(best, (a != rank) + self._val(c.bits))
        return best

    # -- strategy text -------------------------------------------------------------------------

    def tree(self, bits: int | None = None, depth: int = 0, max_depth: int = 8) -> list[str]:
        """Indented optimal adversary strategy for whole-round protocols."""
        bits = self.space.bits if bits is None else bits
        pad = "  " * depth
        v = self._val(bits)
        lines = [f"{pad}|V|={bin(bits).count('1')} value={int(v)}"]
        if v == 0 or depth >= max_depth or self.protocol.incremental:
            return lines
        for q in self.queries:
            parts = self._parts(bits, q)
            if len(parts) >= 2 and min(self.branch(bits, parts, g) for g in parts) == v:
                break
        lines.append(f"{pad}query {q}")
        for g in sorted(parts):
            lines.append(f"{pad}  guess {g}:")
            for fb, child in self._feedback_options(bits, parts, g):
                lines.append(f"{pad}    feedback {fb}")
                lines.extend(self.tree(child, depth + 3, max_depth))
                break
        return lines

    def _feedback_options(self, bits: int, parts: dict, g):
        target = self.branch(bits, parts, g)
        if self.protocol.strong:
            for a, c in sorted(parts.items()):
                if (a != g) + self._val(c.bits) == target:
                    yield a, c.bits
            return
        cls = parts[g].bits
        rest = bits & ~cls
        if rest and 1 + self._val(rest) == target:
            yield "no", rest
        if cls != bits and self._val(cls) == target:
            yield "yes", cls


def exact_opt(protocol: Protocol, family, max_hypotheses: int = DEFAULT_MAX_HYPOTHESES,
              max_queries: int = DEFAULT_MAX_QUERIES) -> int:
    return Solver(protocol, family, max_hypotheses, max_queries).value()


def exact_opt_invariance_check(family, r: int, max_hypotheses: int = DEFAULT_MAX_HYPOTHESES,
                               max_queries: int = DEFAULT_MAX_QUERIES) -> bool:
    """Standard value with r-tuple queries and revealed r-tuple answers equals the r = 1 value."""
    one = exact_opt(Protocol("standard"), family, max_hypotheses, max_queries)
    many = exact_opt(Protocol("cart_weak", r, "strong"), family, max_hypotheses, max_queries)
    return one == many


# -- learners and adversaries measured by the solver ----------------------------------------------


class OptimalLearner:
    """Plays the solver's minimizing choice every time."""

    name = "optimal"
    memoryless = True

    def __init__(self, max_hypotheses: int = DEFAULT_MAX_HYPOTHESES, max_queries: int = DEFAULT_MAX_QUERIES):
        self.caps = (max_hypotheses, max_queries)

    def bind(self, protocol, family, rng):
        self.protocol, self.family = protocol, family
        self.solver = Solver(protocol, family, *self.caps)

    def guess(self, vs, query):
        parts = vs.partition(query)
        return min(parts, key=lambda g: (self.solver.branch(vs.bits, parts, g), g))

    def subround_guess(self, vs, header, so_far, x):
        s = self.solver
        if self.protocol.model == "amb":
            cand = vs.restrict([("label", xi, yi) for xi, yi in so_far]).bits
            options = s.label_classes(cand, x)
            return min(options, key=lambda y: (s.amb_state(vs.bits, options[y], len(so_far) + 1), y))
        used = frozenset(c for c, _ in so_far) | {x}
        h = sum(bool(t) for _, t in so_far)
        return min((False, True), key=lambda t: (s.delayed_state(vs.bits, header, used, h + t), t))

    def update(self, *args) -> None:
        pass


def learner_worst_case(protocol: Protocol, family, make_learner: Callable, seed: int = 0,
                       max_hypotheses: int = DEFAULT_MAX_HYPOTHESES,
                       max_queries: int = DEFAULT_MAX_QUERIES):
    """Most mistakes any truthful adversary can force on a fixed learner (inf if unbounded)."""
    solver = Solver(protocol, family, max_hypotheses, max_queries)
    learner = make_learner()
    learner.bind(protocol, family, random.Random(f"{seed}:learner"))
    memo: dict = {}
    memoryless = getattr(learner, "memoryless", False)
    space = solver.space

    def outcomes(bits, query, g):
        parts = solver._parts(bits, query)
        gg = graded(protocol, g)
        if protocol.strong:
            for a, c in parts.items():
                yield a, a != gg, c.bits
            return
        cls = parts[gg].bits if gg in parts else 0
        if bits & ~cls:
            yield False, True, bits & ~cls
        if cls:
            yield True, False, cls

    def settle(bits, query, g, lrn):
        best = 0
        for fb, mistake, child in outcomes(bits, query, g):
            if child == bits:
                if mistake:
                    return INF
                continue
            nxt = lrn if memoryless else copy.deepcopy(lrn)
            nxt.update(space.with_bits(bits), query, g, fb, space.with_bits(child))
            best = max(best, mistake + worst(child, nxt))
        return best

    def worst(bits, lrn):
        if memoryless and bits in memo:
            return memo[bits]
        if memoryless:
            memo[bits] = 0
        vs = space.with_bits(bits)
        best = 0
        if protocol.incremental:
            best = incremental(bits, lrn, None, ())
        else:
            for q in solver.queries:
                cur = lrn if memoryless else copy.deepcopy(lrn)
                g = cur.guess(vs, q)
                best = max(best, settle(bits, q, g, cur))
        if memoryless:
            memo[bits] = best
        return best

    def incremental(bits, lrn, header, so_far):
        vs = space.with_bits(bits)
        r = protocol.r
        if protocol.model == "delayed_relpos" and header is None:
            return max(incremental(bits, lrn, x, ()) for x in range(1, solver.n + 1))
        if len(so_far) == r:
            xs = tuple(x for x, _ in so_far)
            guess = tuple(y for _, y in so_far)
            query = xs if protocol.model == "amb" else (header, xs)
            return settle(bits, query, guess, lrn)
        best = 0
        taken = {x for x, _ in so_far} | ({header} if header is not None else set())
        for x in range(1, solver.n + 1):
            if protocol.model == "delayed_relpos" and x in taken:
                continue
            cur = lrn if memoryless else copy.deepcopy(lrn)
            y = cur.subround_guess(vs, header if header is not None else 0, so_far, x)
            best = max(best, incremental(bits, cur, header, so_far + ((x, y),)))
        return best

    return worst(space.bits, learner)


class NeedChoice(Exception):
    def __init__(self, options):
        super().__init__("script exhausted")
        self.options = options


class ScriptLearner:
    """Replays a fixed list of choices, then reports the options at the next decision."""

    def __init__(self, script):
        self.script = list(script)
        self.mistakes = 0

    def bind(self, protocol, family, rng):
        self.protocol, self.family = protocol, family

    def _next(self, options):
        if not self.script:
            raise NeedChoice(options)
        return self.script.pop(0)

    def guess(self, vs, query):
        return self._next(sorted(vs.partition(query)))

    def subround_guess(self, vs, header, so_far, x):
        if self.protocol.model == "amb":
            cand = vs.restrict([("label", xi, yi) for xi, yi in so_far])
            opts = sorted({self.family.label(i, x) for i in cand.members()}) or [0]
        else:
            opts = [False, True]
        return self._next(opts)

    def update(self, vs, query, guess, feedback, new_vs):
        self.mistakes += is_mistake(self.protocol, guess, feedback)


def adversary_forced(protocol: Protocol, family, make_adversary: Callable, seed: int = 0,
                     round_budget: int = 10**4, max_nodes: int = 200000) -> int:
    """Fewest mistakes a learner can make against a fixed adversary, by replaying every branch."""
    nodes = 0

    def solve(script):
        nonlocal nodes
        nodes += 1
        if nodes > max_nodes:
            raise SizeError(f"tree search exceeded {max_nodes} nodes")
        learner = ScriptLearner(script)
        try:
            tr = run_game(protocol, family, learner, make_adversary(), round_budget, seed)
        except NeedChoice as nc:
            return min(solve(script + [o]) for o in nc.options)
        tr.raise_for_fault()
        return learner.mistakes

    return solve([])
