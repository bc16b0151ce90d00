"""Pair Matching: decide for each x whether 1 - x also occurs in the input."""
from __future__ import annotations

import hashlib
import heapq
import random
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import DomainError, InvalidInstanceError, OrderingViolation, WhiteBoxRequiredError
from .model import AdviceTape, FixedPriorityAlgorithm, InputItem, fmt_frac
from .sgkh import Guesser

HALF = Fraction(1, 2)


@dataclass(frozen=True)
class PmInstance:
    values: tuple

    def __post_init__(self):
        vals = tuple(Fraction(v) for v in self.values)
        if len(set(vals)) != len(vals):
            raise InvalidInstanceError("Pair Matching values must be distinct")
        if any(v < 0 or v > 1 for v in vals):
            raise InvalidInstanceError("Pair Matching values must lie in [0,1]")
        object.__setattr__(self, "values", vals)

    def __len__(self):
        return len(self.values)

    def truth(self, x) -> bool:
        return pm_truth(self.values, x)


def pm_truth(values, x) -> bool:
    x = Fraction(x)
    return x != HALF and (1 - x) in set(values)


def pairs_count(inst) -> int:
    if not isinstance(inst, PmInstance):
        inst = PmInstance(tuple(inst))
    s = set(inst.values)
    return sum(1 for v in s if v < HALF and (1 - v) in s)


def pm_mistakes(stream, answers, skip_second=False) -> int:
    """Wrong answers against ground truth. With skip_second, the later element of a
    pair (in stream order) is never counted."""
    stream = [Fraction(v) for v in stream]
    vals = set(stream)
    seen = set()
    bad = 0
    for x, a in zip(stream, answers):
        later = (1 - x) in seen
        seen.add(x)
        if skip_second and later:
            continue
        bad += bool(a) != pm_truth(vals, x)
    return bad


def pm_correct(stream, answers) -> int:
    return len(stream) - pm_mistakes(stream, answers)


def format_pm(values) -> str:
    return "".join(fmt_frac(v) + "\n" for v in values)


def parse_pm(text) -> PmInstance:
    return PmInstance(tuple(Fraction(line.strip()) for line in text.splitlines() if line.strip()))


# --- online algorithms ------------------------------------------------------


class OnlinePm:
    """Online algorithm; answer() returns True for accept."""

    def reset(self):
        self.seen = set()

    def answer(self, x, tape: AdviceTape) -> bool:
        x = Fraction(x)
        a = bool(self.rule(x, tape))
        self.seen.add(x)
        return a

    def rule(self, x, tape):
        raise NotImplementedError


class ComplementSeen(OnlinePm):
    name = "complement-seen"

    def rule(self, x, tape):
        return (1 - x) in self.seen


class _Simple(OnlinePm):
    def __init__(self, name, fn):
        self.name = name
        self.fn = fn

    def reset(self):
        super().reset()
        self.t = 0

    def rule(self, x, tape):
        self.t += 1
        return self.fn(x, self.seen, self.t)


def _hash_bit(x):
    return hashlib.blake2b(fmt_frac(x).encode(), digest_size=1).digest()[0] & 1


DETERMINISTIC_RULES = {
    "always-reject": lambda x, seen, t: False,
    "always-accept": lambda x, seen, t: True,
    "alternate": lambda x, seen, t: t % 2 == 1,
    "below-half": lambda x, seen, t: x < HALF,
    "above-half": lambda x, seen, t: x > HALF,
    "contrarian": lambda x, seen, t: (1 - x) not in seen,
    "every-third": lambda x, seen, t: t % 3 == 0,
    "count-parity": lambda x, seen, t: len(seen) % 2 == 0 or (1 - x) in seen,
    "small-denominator": lambda x, seen, t: x.denominator < 50,
    "hash-bit": lambda x, seen, t: bool(_hash_bit(x)),
    "late-accept": lambda x, seen, t: t > 10 or (1 - x) in seen,
}


def pm_algorithm(name) -> OnlinePm:
    if name in ("complement-seen", "deterministic"):
        return ComplementSeen()
    if name == "eager-accept":
        name = "always-accept"
    if name in DETERMINISTIC_RULES:
        return _Simple(name, DETERMINISTIC_RULES[name])
    raise KeyError(name)


def deterministic_registry() -> list:
    return ["complement-seen"] + list(DETERMINISTIC_RULES)


def run_online(alg: OnlinePm, stream, tape=None) -> list:
    tape = tape if tape is not None else AdviceTape()
    alg.reset()
    return [alg.answer(x, tape) for x in stream]


def pm_deterministic(stream) -> list:
    return run_online(ComplementSeen(), stream)


class RandomizedPm(OnlinePm):
    """Accept seen complements; otherwise reject with probability alpha (exact coin)."""

    def __init__(self, alpha, seed=0):
        alpha = Fraction(alpha)
        if not 0 <= alpha <= 1:
            raise DomainError(f"alpha={alpha} outside [0,1]")
        self.alpha = alpha
        self.seed = seed
        self.name = f"alpha:{fmt_frac(alpha)}"

    def reset(self):
        super().reset()
        self.rng = random.Random(self.seed)

    def reject_probability(self, x, seen) -> Fraction:
        return Fraction(0) if (1 - Fraction(x)) in seen else self.alpha

    def rule(self, x, tape):
        p = self.reject_probability(x, self.seen)
        return not (self.rng.randrange(p.denominator) < p.numerator)


class ConstantPm(RandomizedPm):
    """Fresh items are rejected with probability p; seen complements are accepted."""

    def __init__(self, p, seed=0):
        super().__init__(p, seed)
        self.name = f"const-p:{fmt_frac(self.alpha)}"


def pm_randomized(stream, alpha, seed) -> list:
    return run_online(RandomizedPm(alpha, seed), stream)


def expected_correct(n, pairs, alpha):
    alpha = Fraction(alpha)
    return alpha * n - (3 * alpha - 2) * pairs


def randomized_algorithm(name, seed=0) -> RandomizedPm:
    kind, _, val = name.partition(":")
    if kind == "const-p":
        return ConstantPm(Fraction(val), seed)
    if kind == "alpha":
        return RandomizedPm(Fraction(val), seed)
    raise KeyError(name)


# --- adversaries ------------------------------------------------------------


def fresh_pool(n) -> list:
    """y_i = (2i-1)/(8n): distinct, below 1/4, and no two are complements."""
    return [Fraction(2 * i - 1, 8 * n) for i in range(1, n + 1)]


@dataclass
class PmAdversaryResult:
    stream: list
    answers: list
    cases: list
    mistakes: int = 0
    expected_correct: Fraction = Fraction(0)
    raw_mistakes: int = 0


def pm_adversary_det(alg: OnlinePm, n: int) -> PmAdversaryResult:
    """Reject -> supply the complement next; accept -> never supply it."""
    pool = iter(fresh_pool(n))
    tape = AdviceTape()
    alg.reset()
    stream, answers, cases = [], [], []
    while len(stream) < n:
        x = next(pool)
        a = alg.answer(x, tape)
        stream.append(x)
        answers.append(a)
        if not a and len(stream) < n:
            cases.append(1)
            stream.append(1 - x)
            answers.append(alg.answer(1 - x, tape))
        else:
            cases.append(2)
    replay = run_online(alg, stream)
    assert replay == answers, "algorithm is not deterministic"
    # second elements of supplied pairs are not held against the algorithm
    credited = pm_mistakes(stream, answers, skip_second=True)
    return PmAdversaryResult(stream, answers, cases, credited, raw_mistakes=pm_mistakes(stream, answers))


def pm_adversary_rand(alg, n: int) -> PmAdversaryResult:
    """Supply the complement iff the exposed reject probability exceeds 2/3.

    In the expected correct count the second element of a supplied pair is
    always credited as correct.
    """
    if not hasattr(alg, "reject_probability"):
        raise WhiteBoxRequiredError("algorithm does not expose its reject probability")
    pool = iter(fresh_pool(n))
    stream, cases = [], []
    exp = Fraction(0)
    while len(stream) < n:
        x = next(pool)
        p = Fraction(alg.reject_probability(x, set(stream)))
        stream.append(x)
        if p > Fraction(2, 3) and len(stream) < n:
            cases.append(1)
            stream.append(1 - x)
            exp += (1 - p) + 1
        else:
            cases.append(2)
            exp += p
    return PmAdversaryResult(stream, [], cases, 0, exp)


# --- reductions from string guessing ----------------------------------------


class SgkhToPmOnline(Guesser):
    """Query pm_alg on y_i; on a revealed 1, feed 1 - y_i right after."""

    def __init__(self, pm_alg: OnlinePm):
        self.alg = pm_alg

    def reset(self, n):
        self.pool = fresh_pool(max(n, 1))
        self.stream, self.answers, self.xs = [], [], []
        self.alg.reset()
        self._tape = None

    def _absorb(self, bit):
        i = len(self.xs)
        self.xs.append(bit)
        if bit == 1:
            y = 1 - self.pool[i]
            self.stream.append(y)
            self.answers.append(self.alg.answer(y, self._tape))

    def guess(self, prefix, tape):
        self._tape = tape
        if len(prefix) > len(self.xs):
            self._absorb(prefix[-1])
        y = self.pool[len(self.xs)]
        a = self.alg.answer(y, tape)
        self.stream.append(y)
        self.answers.append(a)
        return int(a)

    def finish(self, s):
        if self._tape is None:
            self._tape = AdviceTape()
        if len(s) > len(self.xs):
            self._absorb(s[-1])

    def pm_mistakes(self) -> int:
        return pm_mistakes(self.stream, self.answers, skip_second=True)


def reduce_sgkh_to_pm_online(pm_alg) -> SgkhToPmOnline:
    return SgkhToPmOnline(pm_alg)


def pm_item(x) -> InputItem:
    return InputItem(Fraction(x))


class _Desc:
    """Heap entry ordering larger keys first."""

    __slots__ = ("key", "x")

    def __init__(self, key, x):
        self.key = key
        self.x = x

    def __lt__(self, other):
        return self.key > other.key


class SgkhToPmPriority(Guesser):
    """Present the pool to a priority algorithm in P order while guessing online.

    Z is the P-sorted pool of y_i and 1 - y_i; the first remaining element of Z
    is the next query. Complements of revealed 1s wait in a max-heap Q.
    """

    def __init__(self, pm_alg: FixedPriorityAlgorithm, priority=None):
        self.alg = pm_alg
        self.P = priority if priority is not None else pm_alg.priority

    def reset(self, n):
        pool = fresh_pool(max(n, 1))[:n]
        zs = pool + [1 - y for y in pool]
        self.key = {z: self.P(pm_item(z)) for z in zs}
        self.Z = sorted(zs, key=lambda z: self.key[z], reverse=True)
        for a, b in zip(self.Z, self.Z[1:]):
            if not self.key[a] > self.key[b]:
                raise OrderingViolation("priority is not injective on the pool")
        self.Q = []
        self.stream, self.answers, self.xs = [], [], []
        self.pending = None
        self.alg.reset(None)
        self._tape = AdviceTape()

    def _feed(self, z):
        if self.stream and not self.key[self.stream[-1]] > self.key[z]:
            raise OrderingViolation("delivered stream not decreasing in P")
        a = self.alg.decide(pm_item(z), self._tape)
        self.stream.append(z)
        self.answers.append(bool(a))
        return bool(a)

    def _absorb(self, bit):
        self.xs.append(bit)
        if bit == 1:
            heapq.heappush(self.Q, _Desc(self.key[self.pending], self.pending))
        self.pending = None

    def guess(self, prefix, tape):
        self._tape = tape
        if len(prefix) > len(self.xs):
            self._absorb(prefix[-1])
        z = self.Z[0]
        while self.Q and self.Q[0].key > self.key[z]:
            self._feed(heapq.heappop(self.Q).x)
        # the complement of the query must still be waiting later in Z
        assert (1 - z) in self.Z[1:], "complement not later in Z"
        a = self._feed(z)
        self.Z.remove(z)
        self.Z.remove(1 - z)
        self.pending = 1 - z
        return int(a)

    def finish(self, s):
        if len(s) > len(self.xs):
            self._absorb(s[-1])
        while self.Q:
            self._feed(heapq.heappop(self.Q).x)
        self.alg.end(self._tape)

    def pm_mistakes(self) -> int:
        return pm_mistakes(self.stream, self.answers, skip_second=True)


def reduce_sgkh_to_pm_priority(pm_alg, P=None) -> SgkhToPmPriority:
    return SgkhToPmPriority(pm_alg, P)


class PriorityPm(FixedPriorityAlgorithm):
    """Wrap an online Pair Matching rule as a priority algorithm."""

    def __init__(self, online: OnlinePm, priority):
        self.online = online
        self.priority = priority

    def reset(self, n=None):
        self.online.reset()

    def decide(self, item, tape):
        return self.online.answer(item.ident, tape)


class AdviceBitPm(OnlinePm):
    """Accept seen complements; otherwise answer with the next advice bit."""

    name = "advice-bit"

    def rule(self, x, tape):
        return (1 - x) in self.seen or bool(tape.read())


def random_pm_instance(n, rng, pair_frac=0.5) -> PmInstance:
    """n distinct values avoiding 1/2, roughly pair_frac of them in complementary pairs."""
    den = 8 * n + 3 + 2 * rng.randrange(50)
    vals = set()
    cand = list(range(1, den))
    rng.shuffle(cand)
    for a in cand:
        if len(vals) >= n:
            break
        x = Fraction(a, den)
        if x == HALF or x in vals:
            continue
        if rng.random() < pair_frac and len(vals) + 2 <= n and (1 - x) not in vals:
            vals.update((x, 1 - x))
        elif (1 - x) not in vals:
            vals.add(x)
    out = sorted(vals)
    rng.shuffle(out)
    return PmInstance(tuple(out[:n]))
