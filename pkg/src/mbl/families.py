"""Finite hypothesis classes.

Every family exposes the same small surface used by the game engine:
``len(family)``, ``domain_size`` (inputs are ``1..domain_size``),
``label_count`` (labels are ``0..label_count-1``) and ``label(i, x)``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

DEFAULT_PERMUTATION_CAP = 10
DEFAULT_TABLE_CAP = 1 << 16
PATTERN_CAP = 12


class InvalidFamily(ValueError):
    pass


class InvalidModulus(ValueError):
    pass


class DomainError(ValueError):
    pass


class SizeError(ValueError):
    pass


@dataclass(frozen=True)
class FunctionFamily:
    """Extensional family: one row of labels per hypothesis."""

    domain_size: int
    label_count: int
    table: tuple[tuple[int, ...], ...]
    names: tuple[str, ...] | None = None
    kind: str = "table"
    params: tuple[tuple[str, str], ...] = ()

    def __post_init__(self):
        if not self.table:
            raise InvalidFamily("a family needs at least one hypothesis")
        if self.domain_size < 1 or self.label_count < 1:
            raise InvalidFamily("domain and label counts must be positive")
        for row in self.table:
            if len(row) != self.domain_size:
                raise InvalidFamily(f"row {row} does not have {self.domain_size} entries")
            if any(not 0 <= y < self.label_count for y in row):
                raise InvalidFamily(f"row {row} has a label outside [0, {self.label_count})")
        if len(set(self.table)) != len(self.table):
            raise InvalidFamily("hypothesis rows must be pairwise distinct")
        if self.names is not None and len(self.names) != len(self.table):
            raise InvalidFamily("names must match the number of hypotheses")

    def __len__(self) -> int:
        return len(self.table)

    def label(self, i: int, x: int) -> int:
        return self.table[i][x - 1]

    def check_input(self, x: int) -> None:
        if not (isinstance(x, int) and 1 <= x <= self.domain_size):
            raise DomainError(f"input {x!r} outside 1..{self.domain_size}")

    def materialize(self) -> "FunctionFamily":
        return self


@dataclass(frozen=True)
class ThresholdFamily:
    """Non-decreasing 0/1 functions: hypothesis i is 1 exactly on x >= thresholds[i]."""

    domain_size: int
    thresholds: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.thresholds)

    @property
    def label_count(self) -> int:
        return 2

    def label(self, i: int, x: int) -> int:
        return int(x >= self.thresholds[i])

    def materialize(self) -> FunctionFamily:
        rows = tuple(
            tuple(int(x >= a) for x in range(1, self.domain_size + 1)) for a in self.thresholds
        )
        return FunctionFamily(
            self.domain_size,
            2,
            rows,
            names=tuple(f"a={a}" for a in self.thresholds),
            kind="threshold",
            params=(("thresholds", ",".join(map(str, self.thresholds))),),
        )


def build_threshold_family(domain_size: int, thresholds: Sequence[int]) -> ThresholdFamily:
    thresholds = tuple(int(a) for a in thresholds)
    if domain_size < 1:
        raise InvalidFamily("domain_size must be positive")
    if not thresholds:
        raise InvalidFamily("empty threshold list")
    if any(b <= a for a, b in zip(thresholds, thresholds[1:])):
        raise InvalidFamily(f"thresholds {thresholds} are not strictly increasing")
    if thresholds[0] < 1 or thresholds[-1] > domain_size + 1:
        raise InvalidFamily(f"thresholds must lie in [1, {domain_size + 1}]")
    return ThresholdFamily(domain_size, thresholds)


def spread_thresholds(family_size: int, domain_size: int) -> list[int]:
    """Evenly spaced thresholds from 1 to domain_size + 1 (the all-zero function)."""
    if family_size < 1 or domain_size < family_size - 1:
        raise InvalidFamily(f"cannot fit {family_size} thresholds into domain {domain_size}")
    if family_size == 1:
        return [1]
    return [1 + (i * domain_size) // (family_size - 1) for i in range(family_size)]


def thresholds_of(family) -> list[int]:
    """Recover a_i for every hypothesis of a 0/1 non-decreasing family."""
    if isinstance(family, ThresholdFamily):
        return list(family.thresholds)
    out = []
    for i in range(len(family)):
        row = [family.label(i, x) for x in range(1, family.domain_size + 1)]
        a = next((x for x, y in enumerate(row, start=1) if y == 1), family.domain_size + 1)
        if any(y != int(x >= a) for x, y in enumerate(row, start=1)):
            raise InvalidFamily(f"hypothesis {i} is not non-decreasing")
        out.append(a)
    return out


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    return all(p % d for d in range(2, math.isqrt(p) + 1))


def point_of(index: int, p: int, n: int) -> tuple[int, ...]:
    """Domain index (1-based) to vector, base-p little-endian."""
    v, out = index - 1, []
    for _ in range(n):
        v, d = divmod(v, p)
        out.append(d)
    return tuple(out)


def index_of(point: Sequence[int], p: int) -> int:
    return 1 + sum(c * p**j for j, c in enumerate(point))


@dataclass(frozen=True)
class LinearFamily:
    """f_a(x) = a.x mod p over {0..p-1}^n, evaluated lazily."""

    p: int
    n: int
    coefficients: tuple[tuple[int, ...], ...]
    nonzero_only: bool = False

    def __len__(self) -> int:
        return len(self.coefficients)

    @property
    def domain_size(self) -> int:
        return self.p**self.n

    @property
    def label_count(self) -> int:
        return self.p

    def label(self, i: int, x: int) -> int:
        return self.evaluate(self.coefficients[i], point_of(x, self.p, self.n))

    def evaluate(self, a: Sequence[int], x: Sequence[int]) -> int:
        return sum(ai * xi for ai, xi in zip(a, x)) % self.p

    def materialize(self, cap: int = DEFAULT_TABLE_CAP) -> FunctionFamily:
        if len(self) * self.domain_size > cap:
            raise SizeError(f"table of {len(self)}x{self.domain_size} exceeds cap {cap}")
        points = [point_of(x, self.p, self.n) for x in range(1, self.domain_size + 1)]
        rows = tuple(tuple(self.evaluate(a, x) for x in points) for a in self.coefficients)
        return FunctionFamily(
            self.domain_size,
            self.p,
            rows,
            names=tuple("a=" + "".join(map(str, a)) for a in self.coefficients),
            kind="linear",
            params=(("p", str(self.p)), ("n", str(self.n)),
                    ("coefficients", "nonzero" if self.nonzero_only else "all")),
        )


def build_linear_family(p: int, n: int, restrict_to_nonzero_coords: bool = False) -> LinearFamily:
    if not is_prime(p):
        raise InvalidModulus(f"{p} is not prime")
    if n < 2:
        raise InvalidFamily("dimension must be at least 2")
    digits = range(1, p) if restrict_to_nonzero_coords else range(p)
    coeffs = tuple(itertools.product(digits, repeat=n))
    return LinearFamily(p, n, coeffs, restrict_to_nonzero_coords)


# -- permutations ---------------------------------------------------------------


def pattern_of(values: Sequence[int]) -> tuple[int, ...]:
    """Rank vector: position j gets the rank of values[j] among all values."""
    values = tuple(values)
    if len(set(values)) != len(values):
        raise ValueError(f"values {values} are not pairwise distinct")
    order = sorted(range(len(values)), key=values.__getitem__)
    ranks = [0] * len(values)
    for rank, j in enumerate(order, start=1):
        ranks[j] = rank
    return tuple(ranks)


def check_permutation(perm: Sequence[int]) -> tuple[int, ...]:
    perm = tuple(perm)
    if sorted(perm) != list(range(1, len(perm) + 1)):
        raise ValueError(f"{perm} is not a permutation of 1..{len(perm)}")
    return perm


@lru_cache(maxsize=None)
def _contains(perm: tuple[int, ...], pattern: tuple[int, ...]) -> bool:
    k = len(pattern)
    return any(
        pattern_of([perm[j] for j in idx]) == pattern
        for idx in itertools.combinations(range(len(perm)), k)
    )


def contains_pattern(perm: Sequence[int], pattern: Sequence[int]) -> bool:
    perm, pattern = tuple(perm), tuple(pattern)
    if len(perm) > PATTERN_CAP:
        raise SizeError(f"permutation longer than {PATTERN_CAP}")
    if len(pattern) > len(perm):
        return False
    return _contains(perm, pattern)


@dataclass(frozen=True)
class PermutationFamily:
    """Bijections on 1..n; perms=None stands for all of S_n, never enumerated."""

    n: int
    perms: tuple[tuple[int, ...], ...] | None
    avoided_pattern: tuple[int, ...] | None = None

    def __len__(self) -> int:
        return math.factorial(self.n) if self.perms is None else len(self.perms)

    @property
    def implicit(self) -> bool:
        return self.perms is None

    @property
    def domain_size(self) -> int:
        return self.n

    @property
    def label_count(self) -> int:
        return self.n

    def label(self, i: int, x: int) -> int:
        if self.perms is None:
            raise SizeError("implicit permutation family has no indexed hypotheses")
        return self.perms[i][x - 1] - 1

    def materialize(self) -> FunctionFamily:
        if self.perms is None:
            raise SizeError("implicit permutation family cannot be materialized")
        rows = tuple(tuple(v - 1 for v in perm) for perm in self.perms)
        params = [("n", str(self.n))]
        if self.avoided_pattern:
            params.append(("pattern", ",".join(map(str, self.avoided_pattern))))
        return FunctionFamily(
            self.n, self.n, rows,
            names=tuple("".join(map(str, perm)) for perm in self.perms),
            kind="permutation", params=tuple(params),
        )


def build_permutation_family(n: int, cap: int = DEFAULT_PERMUTATION_CAP,
                             implicit: bool = False) -> PermutationFamily:
    if n < 1:
        raise ValueError("n must be positive")
    if implicit:
        return PermutationFamily(n, None)
    if n > cap:
        raise SizeError(f"S_{n} is above the enumeration cap {cap}")
    return PermutationFamily(n, tuple(itertools.permutations(range(1, n + 1))))


def build_avoiding_family(n: int, pattern: Sequence[int],
                          cap: int = DEFAULT_PERMUTATION_CAP) -> PermutationFamily:
    pattern = check_permutation(pattern)
    if len(pattern) < 2:
        raise ValueError("pattern must have length at least 2")
    full = build_permutation_family(n, cap)
    kept = tuple(s for s in full.perms if not contains_pattern(s, pattern))
    return PermutationFamily(n, kept, pattern)


# -- product view ---------------------------------------------------------------


def cart_product_eval(family, inputs: Sequence[int]) -> list[tuple[int, ...]]:
    """Row i is (f_i(x_1), ..., f_i(x_r))."""
    for x in inputs:
        if not (isinstance(x, int) and 1 <= x <= family.domain_size):
            raise DomainError(f"input {x!r} outside 1..{family.domain_size}")
    return [tuple(family.label(i, x) for x in inputs) for i in range(len(family))]


# -- plain-text serialization ------------------------------------------------------


def dump_family(family) -> str:
    fam = family.materialize()
    lines = [f"family {fam.kind} {fam.domain_size} {fam.label_count} {len(fam)}"]
    if fam.params:
        lines.append("params " + " ".join(f"{k}={v}" for k, v in fam.params))
    lines.extend(" ".join(map(str, row)) for row in fam.table)
    return "\n".join(lines) + "\n"


def load_family(text: str) -> FunctionFamily:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    head = lines[0].split()
    if len(head) != 5 or head[0] != "family":
        raise InvalidFamily(f"bad header line: {lines[0]!r}")
    kind, X, Y, F = head[1], int(head[2]), int(head[3]), int(head[4])
    params: dict[str, str] = {}
    body = lines[1:]
    if body and body[0].startswith("params"):
        params = dict(tok.split("=", 1) for tok in body[0].split()[1:])
        body = body[1:]
    rows = tuple(tuple(int(v) for v in ln.split()) for ln in body)
    if len(rows) != F:
        raise InvalidFamily(f"header promises {F} rows, found {len(rows)}")
    fam = FunctionFamily(X, Y, rows, kind=kind, params=tuple(params.items()))
    rebuilt = _rebuild(kind, X, params)
    if rebuilt is not None:
        if rebuilt.table != rows:
            raise InvalidFamily("rows disagree with the compact parameters")
        return rebuilt
    return fam


def _rebuild(kind: str, X: int, params: dict[str, str]) -> FunctionFamily | None:
    if kind == "threshold" and "thresholds" in params:
        return build_threshold_family(X, [int(a) for a in params["thresholds"].split(",")]).materialize()
    if kind == "linear" and "p" in params:
        return build_linear_family(int(params["p"]), int(params["n"]),
                                   params.get("coefficients") == "nonzero").materialize()
    if kind == "permutation" and "n" in params:
        n = int(params["n"])
        if "pattern" in params:
            return build_avoiding_family(n, [int(c) for c in params["pattern"].split(",")]).materialize()
        return build_permutation_family(n).materialize()
    return None
