"""Learner strategies.

Every learner is bound to one game with ``bind(protocol, family, rng)`` and then
answers through three hooks:

* ``guess(vs, query)`` for protocols where the whole query is shown at once,
* ``subround_guess(vs, header, so_far, x)`` for protocols that reveal inputs one
  at a time (``so_far`` holds this round's earlier ``(input, label)`` pairs),
* ``update(vs, query, guess, feedback, new_vs)`` after the feedback.
"""
from __future__ import annotations

import math
import random
from collections import Counter
from dataclasses import dataclass

from .engine.protocols import Protocol, ProtocolError, QueryError, all_answers


class Learner:
    name = "learner"

    def bind(self, protocol: Protocol, family, rng: random.Random) -> None:
        self.protocol, self.family, self.rng = protocol, family, rng

    def guess(self, vs, query):
        raise NotImplementedError

    def subround_guess(self, vs, header, so_far, x):
        raise NotImplementedError

    def update(self, vs, query, guess, feedback, new_vs) -> None:
        pass


# -- plurality ------------------------------------------------------------------------


def halving_guess(vs, query, protocol: Protocol | None = None):
    """The answer shared by the most remaining hypotheses; ties go to the smallest answer."""
    parts = vs.partition(query)
    return min(parts, key=lambda ans: (-len(parts[ans]), ans))


def _constraint(protocol: Protocol, header, x, label):
    if protocol.model == "amb":
        return ("label", x, label)
    # a "higher" token says f(x) > f(s) for the revealed element s
    return ("less", x, header) if label else ("less", header, x)


def _subround_labels(protocol: Protocol, family) -> tuple:
    if protocol.model == "amb":
        return tuple(range(family.label_count))
    return (False, True)


def prefix_candidates(vs, protocol: Protocol, header, so_far):
    """Hypotheses in ``vs`` that agree with every label given earlier this round."""
    return vs.restrict([_constraint(protocol, header, x, y) for x, y in so_far])


def greedy_subround_guess(vs, protocol: Protocol, so_far, x, header=None, family=None):
    family = family if family is not None else vs.family
    cands = prefix_candidates(vs, protocol, header, so_far)
    if len(cands) == 0:
        cands = vs
    best, best_count = None, -1
    for y in _subround_labels(protocol, family):
        c = len(cands.restrict([_constraint(protocol, header, x, y)]))
        if c > best_count:
            best, best_count = y, c
    return best


class HalvingLearner(Learner):
    """Plurality vote over the version space; prefix-greedy when inputs arrive one by one."""

    name = "halving"
    memoryless = True

    def guess(self, vs, query):
        return halving_guess(vs, query, self.protocol)

    def subround_guess(self, vs, header, so_far, x):
        return greedy_subround_guess(vs, self.protocol, so_far, x, header, self.family)


class GreedySubroundLearner(HalvingLearner):
    name = "greedy-subround"

    def bind(self, protocol, family, rng):
        if not protocol.incremental:
            raise ProtocolError("greedy-subround plays protocols that reveal inputs one at a time")
        super().bind(protocol, family, rng)


class EliminateOneLearner(Learner):
    """Answers as one fixed remaining hypothesis would, so each mistake removes it."""

    name = "eliminate-one"
    memoryless = True

    def guess(self, vs, query):
        return vs.witness_answer(query)

    def subround_guess(self, vs, header, so_far, x):
        cands = prefix_candidates(vs, self.protocol, header, so_far)
        if len(cands) == 0:
            cands = vs
        for y in _subround_labels(self.protocol, self.family):
            if len(cands.restrict([_constraint(self.protocol, header, x, y)])):
                return y
        return _subround_labels(self.protocol, self.family)[0]


class RandomLearner(Learner):
    """Seeded arbitrary learner: a realized answer at random, sometimes any legal answer."""

    name = "random"

    def __init__(self, wild: float = 0.1):
        self.wild = wild

    def guess(self, vs, query):
        if self.rng.random() < self.wild:
            try:
                return self.rng.choice(all_answers(self.protocol, query, self.family.label_count))
            except QueryError:
                pass
        return self.rng.choice(sorted(vs.partition(query)))

    def subround_guess(self, vs, header, so_far, x):
        labels = _subround_labels(self.protocol, self.family)
        if self.rng.random() < self.wild:
            return self.rng.choice(labels)
        cands = prefix_candidates(vs, self.protocol, header, so_far)
        live = [y for y in labels if len(cands.restrict([_constraint(self.protocol, header, x, y)]))]
        return self.rng.choice(live or list(labels))


# -- base learners for the expert pool -------------------------------------------------


class StandardHalving:
    """Standard-model halving over an explicit family; its state is the consistent bitset.

    Predicts the plurality label (ties to the smallest) and makes at most
    floor(log2 |F|) mistakes on any sequence some hypothesis agrees with.
    """

    name = "halving"

    def __init__(self, family):
        self.family = family
        self.k = family.label_count
        self._masks: dict[int, tuple[int, ...]] = {}

    def mistake_bound(self) -> int:
        return max(0, len(self.family).bit_length() - 1)

    def initial_state(self) -> int:
        return (1 << len(self.family)) - 1

    def masks(self, x: int) -> tuple[int, ...]:
        m = self._masks.get(x)
        if m is None:
            out = [0] * self.k
            for i in range(len(self.family)):
                out[self.family.label(i, x)] |= 1 << i
            m = self._masks[x] = tuple(out)
        return m

    def predict(self, state: int, x: int) -> int:
        counts = [bin(state & m).count("1") for m in self.masks(x)]
        return max(range(self.k), key=lambda y: (counts[y], -y))

    def learn(self, state: int, x: int, y: int) -> int:
        return state & self.masks(x)[y]


class StandardFirst(StandardHalving):
    """Predicts as the lowest-index consistent hypothesis; at most |F| - 1 mistakes."""

    name = "eliminate-one"

    def mistake_bound(self) -> int:
        return len(self.family) - 1

    def predict(self, state: int, x: int) -> int:
        if state == 0:
            return 0
        i = (state & -state).bit_length() - 1
        return self.family.label(i, x)


BASE_LEARNERS = {cls.name: cls for cls in (StandardHalving, StandardFirst)}


# -- weighted pool of standard-model copies --------------------------------------------------


@dataclass(frozen=True)
class Copy:
    state: int
    exponent: int
    base_mistakes: int


MAX_ANSWER_TUPLES = 1 << 20


class ExpertPoolLearner(Learner):
    """Weighted vote over copies of a standard-model learner, for inputs revealed one by one.

    A copy that has been charged ``x`` pool mistakes has weight ``alpha**x`` with
    ``alpha = 1 / (k**r ln k)``.  Identical copies are merged and counted by
    multiplicity.  On a wrong round the copies that voted for the losing tuple are
    replaced by clones fed each of the other ``k**r - 1`` tuples; every other copy
    is rewound to its state before the round.
    """

    name = "expert-pool"

    def __init__(self, base: str = "halving"):
        if base not in BASE_LEARNERS:
            raise ValueError(f"unknown base learner {base!r}")
        self.base_name = base

    def bind(self, protocol, family, rng):
        if protocol.model != "amb":
            raise ProtocolError("expert-pool plays the ambiguous delayed model")
        super().bind(protocol, family, rng)
        self.k, self.r = family.label_count, protocol.r
        if self.k < 2:
            raise ValueError("expert pool needs at least two labels")
        if self.k**self.r > MAX_ANSWER_TUPLES:
            raise ValueError(f"k^r = {self.k ** self.r} exceeds {MAX_ANSWER_TUPLES}")
        self.alpha = 1.0 / (self.k**self.r * math.log(self.k))
        self.base = BASE_LEARNERS[self.base_name](family)
        self.copies: Counter[Copy] = Counter({Copy(self.base.initial_state(), 0, 0): 1})
        self.mistakes = 0
        self.history: list[int] = [1]
        self._reset_round()

    def _reset_round(self) -> None:
        # copies still agreeing with the chosen prefix, mapped to their self-fed state
        self._live: dict[Copy, int] | None = None

    def weight(self, copies=None) -> float:
        copies = self.copies if copies is None else copies
        return math.fsum(m * self.alpha**c.exponent for c, m in copies.items())

    def copy_count(self) -> int:
        return sum(self.copies.values())

    def max_exponent(self) -> int:
        return max(c.exponent for c in self.copies)

    def subround_guess(self, vs, header, so_far, x):
        if not so_far or self._live is None:
            self._live = {c: c.state for c in self.copies}
        votes: dict[int, Counter] = {}
        for c, st in self._live.items():
            y = self.base.predict(st, x)
            votes.setdefault(y, Counter())[c.exponent] += self.copies[c]
        label = self._pick(votes)
        self._live = {c: self.base.learn(st, x, label) for c, st in self._live.items()
                      if self.base.predict(st, x) == label}
        return label

    def _pick(self, votes: dict[int, Counter]) -> int:
        # alpha is transcendental, so two vote totals tie only if their exponent counts match
        totals = {y: math.fsum(m * self.alpha**e for e, m in poly.items()) for y, poly in votes.items()}
        best = max(sorted(votes), key=totals.__getitem__)
        tied = [y for y in sorted(votes) if votes[y] == votes[best]]
        return tied[0] if len(tied) == 1 else self.rng.choice(tied)

    def update(self, vs, query, guess, feedback, new_vs) -> None:
        winners = self._live or {}
        nxt: Counter[Copy] = Counter()
        for c, m in self.copies.items():
            if c not in winners:
                nxt[c] += m
        if feedback:
            for c, st in winners.items():
                if st:
                    nxt[Copy(st, c.exponent, c.base_mistakes)] += self.copies[c]
        else:
            self.mistakes += 1
            for c in winners:
                m = self.copies[c]
                for alt in all_answers(self.protocol, query, self.k):
                    if alt == tuple(guess):
                        continue
                    st, wrong = c.state, 0
                    for xi, yi in zip(query, alt):
                        wrong += self.base.predict(st, xi) != yi
                        st = self.base.learn(st, xi, yi)
                    if st:
                        nxt[Copy(st, c.exponent + 1, c.base_mistakes + wrong)] += m
        self.copies = nxt
        self.history.append(self.copy_count())
        self._reset_round()


LEARNERS = {
    "halving": HalvingLearner,
    "greedy-subround": GreedySubroundLearner,
    "eliminate-one": EliminateOneLearner,
    "expert-pool": ExpertPoolLearner,
    "random": RandomLearner,
}


def make_learner(name: str, **params) -> Learner:
    try:
        cls = LEARNERS[name]
    except KeyError:
        raise KeyError(f"unknown learner {name!r}") from None
    return cls(**params)
