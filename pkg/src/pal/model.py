"""Fixed-priority model with advice: items, priorities, advice tapes, simulation."""
from __future__ import annotations

import hashlib
import itertools
import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Any, Callable, Iterable, Sequence

from .errors import DomainError, InvalidInstanceError, PriorityTieError, SearchBudgetError

DEFAULT_SEARCH_CAP = 20


@dataclass(frozen=True, order=True)
class Name:
    """A fresh vertex/variable/clause name living in namespace `ns`."""

    ns: Fraction
    tag: str
    idx: int

    def __post_init__(self):
        object.__setattr__(self, "_hash", hash((self.ns, self.tag, self.idx)))

    def __hash__(self):
        return self._hash

    def __str__(self):
        return _name_text(self.ns, self.tag, self.idx)


@lru_cache(maxsize=1 << 16)
def _name_text(ns, tag, idx):
    return f"{tag}{idx}@{fmt_frac(ns)}"


def fmt_frac(q) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def canonical(obj) -> str:
    """Deterministic text form; sets are sorted by the text of their members."""
    if isinstance(obj, Name):
        return str(obj)
    if isinstance(obj, bool):
        return "T" if obj else "F"
    if obj is None:
        return "-"
    if isinstance(obj, (int, Fraction)):
        return fmt_frac(obj)
    if isinstance(obj, str):
        return obj
    if isinstance(obj, frozenset):
        return _set_text(obj)
    if isinstance(obj, set):
        return "{" + ",".join(sorted(canonical(o) for o in obj)) + "}"
    if isinstance(obj, tuple):
        return "(" + ",".join(canonical(o) for o in obj) + ")"
    raise TypeError(f"no canonical form for {type(obj).__name__}")


@lru_cache(maxsize=1 << 16)
def _set_text(obj):
    return "{" + ",".join(sorted(canonical(o) for o in obj)) + "}"


@dataclass(frozen=True)
class InputItem:
    ident: Any
    payload: Any = None

    @cached_property
    def token(self) -> str:
        return canonical(self.ident)

    def __str__(self):
        return self.token


@dataclass(frozen=True)
class PriorityFunction:
    """Larger key means the item is presented earlier."""

    key: Callable[[InputItem], Any]
    name: str = "P"

    def __call__(self, item):
        return self.key(item)


def hashed_priority(seed) -> PriorityFunction:
    """Pseudo-random injective priority: a keyed hash, tie-broken by the item token."""
    secret = hashlib.sha256(str(seed).encode()).digest()

    def key(item):
        t = item.token
        h = hashlib.blake2b(t.encode(), digest_size=8, key=secret).digest()
        return (int.from_bytes(h, "big"), t)

    return PriorityFunction(key, f"hash:{seed}")


def token_priority(descending=True) -> PriorityFunction:
    if descending:
        return PriorityFunction(lambda it: it.token, "lex-desc")
    # reverse lexicographic order via negated code points
    return PriorityFunction(lambda it: tuple(-ord(c) for c in it.token) + (1,), "lex-asc")


def sort_by_priority(items: Iterable[InputItem], p: PriorityFunction) -> list:
    items = list(items)
    if len(set(items)) != len(items):
        raise InvalidInstanceError("duplicate items")
    keyed = sorted(((p(it), i) for i, it in enumerate(items)), reverse=True)
    for (k1, _), (k2, _) in zip(keyed, keyed[1:]):
        if not k1 > k2:
            raise PriorityTieError(f"tie in priority {p.name}")
    return [items[i] for _, i in keyed]


class AdviceTape:
    """Finite bit vector, read as if padded with zeros forever."""

    def __init__(self, bits: Sequence[int] = ()):
        self.bits = tuple(int(b) for b in bits)
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError("advice bits must be 0/1")
        self.cursor = 0

    @property
    def bits_read(self):
        return self.cursor

    @property
    def padding_reads(self):
        return max(0, self.cursor - len(self.bits))

    def read(self) -> int:
        b = self.bits[self.cursor] if self.cursor < len(self.bits) else 0
        self.cursor += 1
        return b

    def read_int(self, width: int) -> int:
        v = 0
        for _ in range(width):
            v = 2 * v + self.read()
        return v

    def __repr__(self):
        return f"AdviceTape({''.join(map(str, self.bits))!r}, cursor={self.cursor})"


def int_to_bits(v: int, width: int) -> tuple:
    if v < 0 or v >= (1 << width):
        raise ValueError(f"{v} does not fit in {width} bits")
    return tuple((v >> (width - 1 - i)) & 1 for i in range(width))


class FixedPriorityAlgorithm:
    """Base class. Subclasses set `priority` and implement `decide`."""

    priority: PriorityFunction

    def reset(self, n=None):
        pass

    def decide(self, item: InputItem, tape: AdviceTape):
        raise NotImplementedError

    def end(self, tape: AdviceTape):
        """Called once after the last item (explicit end-of-input signal)."""


@dataclass
class RunResult:
    decisions: list = field(default_factory=list)
    bits_read: int = 0
    objective: Any = 0


def simulate(alg, instance, tape=None, objective=None, consistent=None) -> RunResult:
    items = list(instance)
    if consistent is not None and not consistent(items):
        raise InvalidInstanceError("instance fails the consistency check")
    tape = tape if tape is not None else AdviceTape()
    order = sort_by_priority(items, alg.priority)
    alg.reset(len(order))
    decisions = []
    for it in order:
        decisions.append((it, alg.decide(it, tape)))
    alg.end(tape)
    value = 0
    if objective is not None and decisions:
        value = objective(decisions)
    return RunResult(decisions, tape.bits_read, value)


def search_cap() -> int:
    return int(os.environ.get("PAL_SEARCH_CAP", DEFAULT_SEARCH_CAP))


def best_advice_search(alg_family, instance, b, loss, *, objective=None, runner=None):
    """Try every b-bit tape; return (best tape bits, minimal loss).

    `alg_family()` builds a fresh algorithm. `runner(alg, instance, tape)` may replace
    `simulate` for non-priority games. Ties keep the lexicographically first tape.
    """
    if b < 0:
        raise DomainError("negative bit count")
    if b > search_cap():
        raise SearchBudgetError(f"{b} advice bits exceeds cap {search_cap()}")
    best = None
    for bits in itertools.product((0, 1), repeat=b):
        tape = AdviceTape(bits)
        alg = alg_family()
        if runner is None:
            res = simulate(alg, instance, tape, objective)
        else:
            res = runner(alg, instance, tape)
        v = loss(res)
        if best is None or v < best[1]:
            best = (bits, v)
    return best


def worst_case_advice_loss(alg_family, instances, b, loss, **kw):
    """max over instances of the best achievable loss with b advice bits."""
    return max(best_advice_search(alg_family, inst, b, loss, **kw)[1] for inst in instances)


def entropy(p) -> float:
    """Binary entropy in bits, with 0 log 0 = 0."""
    if p < 0 or p > 1:
        raise DomainError(f"entropy argument {p} outside [0,1]")
    p = float(p)
    out = 0.0
    for q in (p, 1.0 - p):
        if q > 0:
            out -= q * math.log2(q)
    return out
