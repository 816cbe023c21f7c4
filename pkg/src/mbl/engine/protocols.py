"""Game protocols: query/answer shapes and the correct answer under a hypothesis."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Any, Callable

from ..families import PermutationFamily, pattern_of

MODELS = (
    "standard", "bandit", "cart_weak", "amb",
    "order", "comparison", "selection", "relpos", "delayed_relpos",
)
INCREMENTAL = frozenset({"amb", "delayed_relpos"})
PERMUTATION_MODELS = frozenset({"order", "comparison", "selection", "relpos", "delayed_relpos"})


class QueryError(ValueError):
    pass


class ProtocolError(ValueError):
    pass


@dataclass(frozen=True)
class Protocol:
    model: str
    r: int = 1
    reinforcement: str = "weak"

    def __post_init__(self):
        if self.model not in MODELS:
            raise ProtocolError(f"unknown model {self.model!r}")
        if self.r < 1:
            raise ProtocolError("r must be at least 1")
        if self.reinforcement not in ("weak", "strong"):
            raise ProtocolError(f"unknown reinforcement {self.reinforcement!r}")
        if self.model in ("standard", "bandit") and self.r != 1:
            raise ProtocolError(f"{self.model} has r = 1")
        if self.model == "standard" and self.reinforcement != "strong":
            object.__setattr__(self, "reinforcement", "strong")
        if self.model in ("bandit", "amb") and self.reinforcement != "weak":
            raise ProtocolError(f"{self.model} only has weak feedback")

    @property
    def strong(self) -> bool:
        return self.reinforcement == "strong"

    @property
    def incremental(self) -> bool:
        return self.model in INCREMENTAL

    def check_family(self, family) -> None:
        n = family.domain_size
        if self.model in PERMUTATION_MODELS:
            kind = getattr(family, "kind", None)
            if not isinstance(family, PermutationFamily) and kind != "permutation":
                raise ProtocolError(f"{self.model} is played on permutation families")
        if self.model == "order" and self.r > n:
            raise ProtocolError("order model needs r <= n")
        if self.model in ("relpos", "delayed_relpos") and self.r + 1 > n:
            raise ProtocolError("relative position models need r + 1 <= n")
        if self.model == "comparison" and self.r > n * (n - 1):
            raise ProtocolError("not enough ordered pairs for r")

    def __str__(self) -> str:
        return f"{self.model}/r={self.r}/{self.reinforcement}"


def _inputs_ok(xs, n) -> bool:
    return all(isinstance(x, int) and not isinstance(x, bool) and 1 <= x <= n for x in xs)


def normalize_query(protocol: Protocol, query: Any, domain_size: int) -> Any:
    """Validate a complete query and return its canonical form."""
    m, r, n = protocol.model, protocol.r, domain_size
    try:
        if m in ("standard", "bandit"):
            if isinstance(query, tuple) and len(query) == 1:
                query = query[0]
            if not _inputs_ok([query], n):
                raise QueryError
            return query
        if m in ("cart_weak", "amb"):
            query = tuple(query)
            if len(query) != r or not _inputs_ok(query, n):
                raise QueryError
            return query
        if m == "order":
            q = tuple(sorted(query))
            if len(q) != r or len(set(q)) != r or not _inputs_ok(q, n):
                raise QueryError
            return q
        if m == "comparison":
            q = tuple(tuple(p) for p in query)
            if len(q) != r or len(set(q)) != r:
                raise QueryError
            if any(len(p) != 2 or p[0] == p[1] or not _inputs_ok(p, n) for p in q):
                raise QueryError
            return q
        if m == "selection":
            q = tuple(query)
            if len(q) != r or not _inputs_ok(q, n):
                raise QueryError
            return q
        if m in ("relpos", "delayed_relpos"):
            x, S = query
            S = tuple(sorted(S)) if m == "relpos" else tuple(S)
            if len(S) != r or len(set(S)) != r or x in S or not _inputs_ok((x, *S), n):
                raise QueryError
            return (x, S)
    except (TypeError, ValueError) as exc:
        raise QueryError(f"malformed {m} query {query!r}") from exc
    raise QueryError(f"malformed {m} query {query!r}")


def answer_of(protocol: Protocol | str, f: Callable[[int], int], query: Any) -> Any:
    """The correct answer to ``query`` when the hidden function is ``f``."""
    m = protocol if isinstance(protocol, str) else protocol.model
    if m in ("standard", "bandit"):
        return f(query)
    if m in ("cart_weak", "amb"):
        return tuple(f(x) for x in query)
    if m == "order":
        return pattern_of([f(x) for x in query])
    if m == "comparison":
        return tuple(f(i) < f(j) for i, j in query)
    if m == "selection":
        return max(set(query), key=f)
    if m in ("relpos", "delayed_relpos"):
        x, S = query
        fx = f(x)
        return 1 + sum(f(s) < fx for s in S)
    raise QueryError(f"unknown model {m!r}")


def graded(protocol: Protocol, guess: Any) -> Any:
    """The part of a guess that is compared against the answer."""
    if protocol.model == "delayed_relpos":
        return 1 + sum(bool(t) for t in guess)
    return guess


def check_guess(protocol: Protocol, query: Any, guess: Any, label_count: int) -> bool:
    m, r = protocol.model, protocol.r
    if m in ("standard", "bandit"):
        return isinstance(guess, int) and 0 <= guess < label_count
    if m in ("cart_weak", "amb"):
        return (isinstance(guess, tuple) and len(guess) == r
                and all(isinstance(y, int) and 0 <= y < label_count for y in guess))
    if m == "order":
        return isinstance(guess, tuple) and sorted(guess) == list(range(1, r + 1))
    if m == "comparison":
        return isinstance(guess, tuple) and len(guess) == r and all(isinstance(b, bool) for b in guess)
    if m == "selection":
        return guess in set(query)
    if m == "relpos":
        return isinstance(guess, int) and 1 <= guess <= r + 1
    if m == "delayed_relpos":
        return isinstance(guess, tuple) and len(guess) == r and all(isinstance(b, bool) for b in guess)
    return False


def answer_space_size(protocol: Protocol, label_count: int) -> int:
    m, r = protocol.model, protocol.r
    return {
        "standard": label_count, "bandit": label_count,
        "cart_weak": label_count**r, "amb": label_count**r,
        "order": math.factorial(r), "comparison": 2**r, "selection": r,
        "relpos": r + 1, "delayed_relpos": r + 1,
    }[m]


def all_answers(protocol: Protocol, query: Any, label_count: int, cap: int = 1 << 12) -> list:
    """Every well-formed guess for ``query``, in canonical order."""
    if answer_space_size(protocol, label_count) > cap:
        raise QueryError("answer space too large to enumerate")
    m, r = protocol.model, protocol.r
    if m in ("standard", "bandit"):
        return list(range(label_count))
    if m in ("cart_weak", "amb"):
        return list(itertools.product(range(label_count), repeat=r))
    if m == "order":
        return list(itertools.permutations(range(1, r + 1)))
    if m in ("comparison", "delayed_relpos"):
        return list(itertools.product((False, True), repeat=r))
    if m == "selection":
        return sorted(set(query))
    return list(range(1, r + 2))


def single_comparison(protocol: Protocol, query: Any):
    """Reduce a query to one comparison ``(a, b)`` if its answer only depends on f(a) < f(b).

    Returns ``(a, b, answer_if_less, answer_if_greater)`` or None.
    """
    m, r = protocol.model, protocol.r
    if m == "order" and r == 2:
        a, b = query
        return a, b, (1, 2), (2, 1)
    if m == "comparison" and r == 1:
        (a, b), = query
        return a, b, (True,), (False,)
    if m == "selection":
        xs = sorted(set(query))
        if len(xs) == 2:
            a, b = xs
            return a, b, b, a
    if m in ("relpos", "delayed_relpos") and r == 1:
        x, (s,) = query
        return s, x, 2, 1
    return None


def format_value(v: Any) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, tuple):
        return "(" + " ".join(format_value(e) for e in v) + ")"
    return str(v)
