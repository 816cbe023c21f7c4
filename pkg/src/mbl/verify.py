"""Closed-form bounds and exhaustive checks of the counting lemmas."""
from __future__ import annotations

import csv
import io
import itertools
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .families import SizeError

ENUMERATION_CAP = 10**7
CSV_VERSION_LINE = "# mbl-csv v1"


class PreconditionError(ValueError):
    pass


# -- sums of floor(log2 m) ------------------------------------------------------


def v(n: int) -> int:
    if n < 1:
        raise ValueError("v(n) needs n >= 1")
    return n.bit_length() - 1


def p_direct(n: int) -> int:
    if n < 1:
        raise ValueError("p(n) needs n >= 1")
    return sum(v(m) for m in range(1, n + 1))


def p_closed(n: int) -> int:
    vn = v(n)
    return (n + 1) * vn - 2 * (2**vn - 1)


def check_pn(max_n: int) -> int | None:
    """First n <= max_n where the closed form and the running sum disagree, else None."""
    total = 0
    for n in range(1, max_n + 1):
        total += n.bit_length() - 1
        if total != p_closed(n):
            return n
    return None


# -- exact caps -----------------------------------------------------------------


def log_cap(size, base: Fraction) -> int:
    """Largest integer t >= 0 with base**t <= size, i.e. floor(log_base size) clamped at 0."""
    base, size = Fraction(base), Fraction(size)
    if base <= 1:
        raise ValueError("base must exceed 1")
    t, power = 0, base
    while power <= size:
        t += 1
        power *= base
    return t


def cap_base(model: str, r: int, k: int = 2) -> Fraction | None:
    """Base of the plurality learner's log cap; None when only one answer exists."""
    if model in ("standard", "bandit"):
        a = k
    elif model in ("cart_weak", "relpos"):
        a = r + 1
    elif model in ("amb", "comparison", "delayed_relpos"):
        a = 2**r
    elif model == "order":
        a = math.factorial(r)
    elif model == "selection":
        a = r
    else:
        raise ValueError(f"unknown model {model!r}")
    if model == "standard":
        return Fraction(2)
    return None if a == 1 else Fraction(a, a - 1)


def mistake_cap(model: str, r: int, family_size: int, k: int = 2) -> int:
    base = cap_base(model, r, k)
    return 0 if base is None else log_cap(family_size, base)


def threshold_lower_count(family_size: int, r: int) -> int:
    """floor(log_{(r+1)/r}(|F|/(r+1))), clamped at 0."""
    return log_cap(Fraction(family_size, r + 1), Fraction(r + 1, r))


def protocol_upper_bound(model: str, r: int, family_size: int, k: int) -> int:
    """Generic plurality-learner cap used to size round budgets."""
    from .engine.protocols import Protocol, answer_space_size

    if model == "standard":
        return log_cap(family_size, Fraction(2))
    a = answer_space_size(Protocol(model, 1 if model == "bandit" else r), k)
    if a <= 1:
        return 0
    return min(log_cap(family_size, Fraction(a, a - 1)), family_size - 1)


# -- hashing lemmas over Z_p ------------------------------------------------------


def _dot(a: Sequence[int], b: Sequence[int], p: int) -> int:
    return sum(x * y for x, y in zip(a, b)) % p


def _check_nonzero(vec: Sequence[int], p: int, n: int, name: str) -> None:
    if len(vec) != n or any(not 1 <= c < p for c in vec):
        raise PreconditionError(f"{name} must lie in {{1..{p - 1}}}^{n}")


def is_scalar_multiple(s: Sequence[int], t: Sequence[int], p: int) -> bool:
    return any(all((c * a - b) % p == 0 for a, b in zip(s, t)) for c in range(1, p))


def _u_tuples(p: int, n: int, r: int):
    if p ** (n * r) > ENUMERATION_CAP:
        raise SizeError(f"p^(nr) = {p ** (n * r)} exceeds {ENUMERATION_CAP}")
    vectors = list(itertools.product(range(p), repeat=n))
    return itertools.product(vectors, repeat=r)


def check_uniformity(p: int, n: int, r: int, s: Sequence[int], z: Sequence[int]) -> Fraction:
    """Pr over uniform u of s.u_i = z_i for all i, by enumeration."""
    _check_nonzero(s, p, n, "s")
    hits = total = 0
    for u in _u_tuples(p, n, r):
        total += 1
        hits += all(_dot(s, ui, p) == zi for ui, zi in zip(u, z))
    return Fraction(hits, total)


def check_conditional(p: int, n: int, r: int, s: Sequence[int], t: Sequence[int],
                      z: Sequence[int]) -> Fraction:
    """Pr(t.u_i = z_i for all i | s.u_i = z_i for all i), by enumeration."""
    _check_nonzero(s, p, n, "s")
    _check_nonzero(t, p, n, "t")
    if is_scalar_multiple(s, t, p):
        raise PreconditionError(f"{tuple(t)} is a multiple of {tuple(s)} mod {p}")
    cond = both = 0
    for u in _u_tuples(p, n, r):
        if all(_dot(s, ui, p) == zi for ui, zi in zip(u, z)):
            cond += 1
            both += all(_dot(t, ui, p) == zi for ui, zi in zip(u, z))
    return Fraction(both, cond)


def draw_admissible(p: int, n: int, r: int, rng: random.Random):
    """One (s, t, z) draw with t not a multiple of s; None when no such pair exists."""
    nonzero = list(itertools.product(range(1, p), repeat=n))
    pairs = [(s, t) for s in nonzero for t in nonzero if not is_scalar_multiple(s, t, p)]
    if not pairs:
        return None
    s, t = rng.choice(pairs)
    z = tuple(rng.randrange(p) for _ in range(r))
    return s, t, z


# -- buckets ----------------------------------------------------------------------


def nonzero_points(p: int, n: int) -> list[tuple[int, ...]]:
    return list(itertools.product(range(1, p), repeat=n))


def bucket_bound(size: int, p: int, r: int) -> float:
    return size / p**r + 2 * math.sqrt(size)


def within_bucket_bound(largest: int, size: int, p: int, r: int) -> bool:
    """Exact test of largest <= size/p^r + 2 sqrt(size)."""
    d = largest * p**r - size
    return d <= 0 or d * d <= 4 * p ** (2 * r) * size


@dataclass
class BucketTable:
    p: int
    r: int
    u: tuple[tuple[int, ...], ...]
    counts: dict[tuple[int, ...], int]
    size: int

    @property
    def largest(self) -> int:
        return max(self.counts.values(), default=0)

    def within_bound(self) -> bool:
        return within_bucket_bound(self.largest, self.size, self.p, self.r)


def bucket_counts(p: int, n: int, r: int, u: Sequence[Sequence[int]], S=None) -> BucketTable:
    S = nonzero_points(p, n) if S is None or S == "all" else [tuple(s) for s in S]
    u = tuple(tuple(ui) for ui in u)
    if len(u) != r or any(len(ui) != n for ui in u):
        raise ValueError(f"u must be {r} vectors of length {n}")
    counts: dict[tuple[int, ...], int] = {}
    for s in S:
        z = tuple(_dot(s, ui, p) for ui in u)
        counts[z] = counts.get(z, 0) + 1
    return BucketTable(p, r, u, counts, len(S))


def sample_u(p: int, n: int, r: int, rng: random.Random) -> tuple[tuple[int, ...], ...]:
    return tuple(tuple(rng.randrange(p) for _ in range(n)) for _ in range(r))


class SearchFailure(RuntimeError):
    def __init__(self, message: str, best: BucketTable):
        super().__init__(message)
        self.best = best


def find_good_u(p: int, n: int, r: int, S=None, rng: random.Random | None = None,
                budget: int = 32) -> tuple[tuple, BucketTable]:
    if budget < 1:
        raise ValueError("budget must be at least 1")
    rng = rng or random.Random(0)
    best = None
    for _ in range(budget):
        table = bucket_counts(p, n, r, sample_u(p, n, r, rng), S)
        if table.within_bound():
            return table.u, table
        if best is None or table.largest < best.largest:
            best = table
    raise SearchFailure(f"no u within the bucket bound after {budget} attempts", best)


def exhaustive_best_u(p: int, n: int, r: int, S=None) -> BucketTable:
    best = None
    for u in _u_tuples(p, n, r):
        table = bucket_counts(p, n, r, u, S)
        if best is None or table.largest < best.largest:
            best = table
    return best


# -- ceiling identity --------------------------------------------------------------


def ceil_identity_grid(samples: int = 10**4):
    """Deterministic (x, n) pairs: x = a/b with b <= 20, n <= 5."""
    grid = ((Fraction(a, b), n) for a in itertools.count(1) for b in range(1, 21) for n in range(1, 6))
    return itertools.islice(grid, samples)


def ceil_identity_check(samples: int = 10**4) -> bool:
    return all(math.ceil(Fraction(math.ceil(x), n)) == math.ceil(x / n)
               for x, n in ceil_identity_grid(samples))


# -- bound table --------------------------------------------------------------------


@dataclass
class BoundEntry:
    name: str
    value: float
    cap: int | None = None


@dataclass
class BoundReport:
    family_size: int
    k: int = 2
    r: int = 1
    n: int | None = None
    M: int | None = None
    model: str | None = None
    entries: list[BoundEntry] = field(default_factory=list)

    def get(self, name: str) -> BoundEntry:
        for e in self.entries:
            if e.name == name:
                return e
        raise KeyError(name)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(CSV_VERSION_LINE + "\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("name", "value", "cap", "F", "k", "r", "n", "M"))
        for e in self.entries:
            w.writerow((e.name, f"{e.value:.12g}", "" if e.cap is None else e.cap,
                        self.family_size, self.k, self.r,
                        "" if self.n is None else self.n, "" if self.M is None else self.M))
        return buf.getvalue()


def expert_pool_alpha(k: int, r: int) -> float:
    if k < 2:
        raise ValueError("expert-pool expressions need k >= 2 (ln k = 0 otherwise)")
    return 1.0 / (k**r * math.log(k))


def expert_pool_cap(k: int, r: int, M: int) -> float:
    a = expert_pool_alpha(k, r)
    return math.log(1 / a) * M / (1 / k**r - a)


LOG_MODELS = ("cart_weak", "amb", "order", "comparison", "selection", "relpos", "delayed_relpos")


def bound_table(family_size: int, r: int = 1, k: int = 2, n: int | None = None,
                M: int | None = None, model: str | None = None) -> BoundReport:
    if family_size < 1 or r < 1 or k < 1:
        raise ValueError("parameters must be positive")
    F = family_size
    lnF = math.log(F)
    rep = BoundReport(F, k, r, n, M, model)
    add = rep.entries.append
    for m in LOG_MODELS if model is None else (model,):
        if m in ("standard", "bandit"):
            add(BoundEntry(f"{m}_log", math.log2(F), mistake_cap(m, 1, F, k)))
            continue
        base = cap_base(m, r, k)
        if base is None:
            add(BoundEntry(f"{m}_log", 0.0, 0))
        else:
            add(BoundEntry(f"{m}_log", lnF / math.log(base), log_cap(F, base)))
    if model in (None, "amb"):
        add(BoundEntry("amb_trivial", F - 1, F - 1))
    if model in (None, "cart_weak"):
        add(BoundEntry("cart_weak_ln", (r + 1) * lnF))
    if model in (None, "comparison"):
        add(BoundEntry("comparison_ln", 2**r * lnF))
    if model in (None, "order"):
        add(BoundEntry("order_ln", math.factorial(r) * lnF))
    if model in (None, "selection"):
        add(BoundEntry("selection_ln", r * lnF))
    if model in (None, "relpos"):
        add(BoundEntry("relpos_ln", (r + 1) * lnF))
    if model in (None, "delayed_relpos"):
        add(BoundEntry("delayed_relpos_ln", 2**r * lnF))
    if n is not None:
        add(BoundEntry("p_n", p_closed(n), p_closed(n)))
    if k >= 2 and model in (None, "amb"):
        Mv = log_cap(F, Fraction(2)) if M is None else M
        add(BoundEntry("alpha", expert_pool_alpha(k, r)))
        add(BoundEntry("expert_pool_simple", k**r * r * math.log(k) * Mv))
        add(BoundEntry("expert_pool", expert_pool_cap(k, r, Mv)))
    for e in rep.entries:
        if not math.isfinite(e.value):
            raise ValueError(f"bound {e.name} is not finite")
    return rep
