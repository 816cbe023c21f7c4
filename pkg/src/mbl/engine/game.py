"""Running one game between a learner and an adversary."""
from __future__ import annotations

import csv
import io
import math
import random
from dataclasses import dataclass, field
from typing import Any

from .protocols import (
    Protocol, QueryError, check_guess, format_value, graded, normalize_query,
)
from .spaces import initial_space

CSV_VERSION_LINE = "# mbl-csv v1"
TRANSCRIPT_COLUMNS = ("round", "query", "guess", "feedback", "mistake", "version_space_size")


class IllegalFeedback(ValueError):
    """Feedback that no remaining hypothesis is consistent with."""


class LearnerFault(ValueError):
    pass


class AdversaryFault(ValueError):
    pass


@dataclass
class RoundRecord:
    index: int
    query: Any
    guess: Any
    feedback: Any
    mistake: bool
    size_before: int
    size_after: int


@dataclass
class Transcript:
    protocol: Protocol
    rounds: list[RoundRecord] = field(default_factory=list)
    fault: str | None = None

    @property
    def mistakes(self) -> int:
        return sum(rec.mistake for rec in self.rounds)

    @property
    def final_size(self) -> int | None:
        return self.rounds[-1].size_after if self.rounds else None

    def raise_for_fault(self) -> None:
        if self.fault:
            raise AdversaryFault(self.fault) if self.fault.startswith("adversary") else LearnerFault(self.fault)

    def rows(self) -> list[tuple]:
        out = []
        for rec in self.rounds:
            if self.protocol.strong:
                fb = format_value(rec.feedback)
            else:
                fb = "yes" if rec.feedback else "no"
            out.append((rec.index, format_value(rec.query), format_value(rec.guess), fb,
                        int(rec.mistake), rec.size_after))
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(CSV_VERSION_LINE + "\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(TRANSCRIPT_COLUMNS)
        w.writerows(self.rows())
        return buf.getvalue()


def _kept_classes(protocol: Protocol, parts: dict, guess, feedback) -> list:
    g = graded(protocol, guess)
    if protocol.strong:
        return [parts[feedback]] if feedback in parts else []
    if feedback:
        return [parts[g]] if g in parts else []
    return [cls for ans, cls in parts.items() if ans != g]


def filter_consistent(vs, protocol: Protocol, query, guess, feedback):
    """Version space after the round; raises IllegalFeedback if it would be empty."""
    parts = vs.partition(query)
    keep = _kept_classes(protocol, parts, guess, feedback)
    if not keep:
        raise IllegalFeedback(f"feedback {feedback!r} to guess {guess!r} on {query!r} leaves nothing")
    return vs.join(keep, parts)


def validate_feedback(vs, protocol: Protocol, query, guess, feedback) -> bool:
    return bool(_kept_classes(protocol, vs.partition(query), guess, feedback))


def is_mistake(protocol: Protocol, guess, feedback) -> bool:
    if protocol.strong:
        return graded(protocol, guess) != feedback
    return not feedback


def default_budget(protocol: Protocol, family) -> int:
    from ..verify import protocol_upper_bound

    bound = protocol_upper_bound(protocol.model, protocol.r, len(family), family.label_count)
    return 2 * (math.ceil(bound) + 1)


def _seeded(seed, who: str) -> random.Random:
    return random.Random(f"{seed}:{who}")


def run_game(protocol: Protocol, family, learner, adversary, round_budget: int | None = None,
             seed: int = 0, vs=None) -> Transcript:
    protocol.check_family(family)
    if round_budget is None:
        round_budget = default_budget(protocol, family)
    if round_budget < 0:
        raise ValueError("round budget must be nonnegative")
    learner.bind(protocol, family, _seeded(seed, "learner"))
    adversary.bind(protocol, family, _seeded(seed, "adversary"))
    vs = initial_space(protocol, family) if vs is None else vs
    tr = Transcript(protocol)
    n, k = family.domain_size, family.label_count
    for t in range(round_budget):
        try:
            if protocol.incremental:
                header = adversary.open_round(vs)
                if header is None:
                    break
                so_far: list[tuple[int, Any]] = []
                for _ in range(protocol.r):
                    x = adversary.next_input(vs, header, tuple(so_far))
                    label = learner.subround_guess(vs, header, tuple(so_far), x)
                    so_far.append((x, label))
                xs = tuple(x for x, _ in so_far)
                query = xs if protocol.model == "amb" else (header, xs)
                guess = tuple(lab for _, lab in so_far)
                query = normalize_query(protocol, query, n)
            else:
                query = adversary.query(vs)
                if query is None:
                    break
                query = normalize_query(protocol, query, n)
                guess = learner.guess(vs, query)
        except QueryError as exc:
            tr.fault = f"adversary: {exc}"
            break
        if not check_guess(protocol, query, guess, k):
            tr.fault = f"learner: malformed guess {guess!r} for {query!r}"
            break
        feedback = adversary.feedback(vs, query, guess)
        parts = vs.partition(query)
        keep = _kept_classes(protocol, parts, guess, feedback)
        if not keep:
            tr.fault = f"adversary: untruthful feedback {feedback!r} in round {t}"
            break
        new_vs = vs.join(keep, parts)
        mistake = is_mistake(protocol, guess, feedback)
        learner.update(vs, query, guess, feedback, new_vs)
        adversary.observe(vs, query, guess, feedback, new_vs)
        tr.rounds.append(RoundRecord(t, query, guess, feedback, mistake, len(vs), len(new_vs)))
        vs = new_vs
    return tr
