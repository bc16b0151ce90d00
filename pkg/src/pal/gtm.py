"""Greater Than Mean: optimal advice algorithm, no-advice adversary, online reduction."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .model import (
    AdviceTape,
    FixedPriorityAlgorithm,
    InputItem,
    PriorityFunction,
    int_to_bits,
    simulate,
)
from .sgkh import Guesser


def gtm_items(values) -> list:
    """Repeated values get copy indices 0, 1, ... so identities stay unique."""
    seen = {}
    out = []
    for v in values:
        v = Fraction(v)
        k = seen.get(v, 0)
        seen[v] = k + 1
        out.append(InputItem((v, k)))
    return out


def gtm_value(item) -> Fraction:
    return item.ident[0]


def gtm_labels(values) -> list:
    values = [Fraction(v) for v in values]
    mean = sum(values) / len(values)
    return [int(v > mean) for v in values]


def gtm_priority(value_key=lambda v: v, name="value-desc") -> PriorityFunction:
    """Priority from a key on values; copies of one value stay consecutive."""
    return PriorityFunction(lambda it: (value_key(it.ident[0]), -it.ident[1]), name)


def gtm_objective(decisions) -> int:
    vals = [gtm_value(it) for it, _ in decisions]
    labels = gtm_labels(vals)
    return sum(int(d) == t for (_, d), t in zip(decisions, labels))


def gtm_mistakes(result) -> int:
    return len(result.decisions) - gtm_objective(result.decisions)


def advice_width(n) -> int:
    return math.ceil(math.log2(n)) if n > 1 else 0


class GtmOptimal(FixedPriorityAlgorithm):
    """Descending values; advice holds the first sorted position whose value is <= mean."""

    def __init__(self, n):
        self.n = n
        self.width = advice_width(n)
        self.priority = gtm_priority()

    def reset(self, n=None):
        self.pos = 0
        self.cut = None

    def decide(self, item, tape):
        if self.cut is None:
            self.cut = tape.read_int(self.width) + 1
        self.pos += 1
        return 1 if self.pos < self.cut else 0


def gtm_optimal_advice(values) -> tuple:
    """Big-endian encoding of (index - 1) of the first sorted value <= mean."""
    vals = sorted((Fraction(v) for v in values), reverse=True)
    mean = sum(vals) / len(vals)
    idx = next(i for i, v in enumerate(vals, 1) if v <= mean)
    return int_to_bits(idx - 1, advice_width(len(vals)))


def gtm_optimal_priority(n):
    return GtmOptimal(n), gtm_optimal_advice


def run_gtm(alg, values, tape=None):
    return simulate(alg, gtm_items(values), tape, gtm_objective)


# --- scripted no-advice algorithms ------------------------------------------


class ScriptedGtm(FixedPriorityAlgorithm):
    """No-advice algorithm: a priority plus an answer rule rule(value, history) -> 0/1."""

    def __init__(self, priority, rule, name):
        self.priority = priority
        self.rule = rule
        self.name = name

    def reset(self, n=None):
        self.n = n
        self.history = []

    def decide(self, item, tape):
        v = gtm_value(item)
        a = int(self.rule(v, self.history, self.n))
        self.history.append((v, a))
        return a


def _running_mean_rule(v, hist, n):
    if not hist:
        return 1
    m = sum(h for h, _ in hist) / len(hist)
    return int(v > m)


_RULES = {
    "one": lambda v, h, n: 1,
    "zero": lambda v, h, n: 0,
    "alternate": lambda v, h, n: len(h) % 2,
    "above-one": lambda v, h, n: int(v > 1),
    "at-least-one": lambda v, h, n: int(v >= 1),
    "running-mean": _running_mean_rule,
    "first-half": lambda v, h, n: int(len(h) < (n or 0) // 2),
    "every-third": lambda v, h, n: int(len(h) % 3 == 0),
    "copy-last": lambda v, h, n: h[-1][1] if h else 0,
    "flip-last": lambda v, h, n: 1 - h[-1][1] if h else 1,
}

_PRIORITIES = {
    "asc": lambda: gtm_priority(lambda v: -v, "value-asc"),  # 0 before 1 before 2
    "desc": lambda: gtm_priority(lambda v: v, "value-desc"),  # 2 before 1 before 0
    "mid": lambda: gtm_priority(lambda v: (-abs(v - 1), v), "middle-first"),
}


def scripted_gtm(name) -> ScriptedGtm:
    """Names look like `rule` (ascending-value priority) or `rule/priority`."""
    aliases = {"majority-one": "one", "majority-zero": "zero"}
    rule, _, pri = name.partition("/")
    rule = aliases.get(rule, rule)
    pri = pri or "asc"
    return ScriptedGtm(_PRIORITIES[pri](), _RULES[rule], name)


def scripted_gtm_corpus() -> list:
    names = [f"{r}/{p}" for p in ("asc", "desc") for r in _RULES]
    return [scripted_gtm(nm) for nm in names]


# --- adversary for algorithms without advice --------------------------------


@dataclass
class GtmAdversaryResult:
    values: list
    case: int
    mistakes: int
    decisions: list = field(default_factory=list)


def _answers_on(alg, items, n):
    alg.reset(n)
    tape = AdviceTape()
    return [int(alg.decide(it, tape)) for it in items]


def gtm_adversary(alg, n) -> GtmAdversaryResult:
    """Build an instance on values {0,1,2} forcing at least (n-2)/2 mistakes.

    Needs white-box access to `alg.priority`. Inputs are replayed in priority order,
    with repeated values consecutive.
    """
    if n < 2:
        raise ValueError("adversary needs n >= 2")
    key = {v: alg.priority(InputItem((Fraction(v), 0))) for v in (0, 1, 2)}
    pair = next(((i, j) for i in (0, 1, 2) for j in (0, 1, 2) if i < j and key[j] > key[i]), None)
    if pair is not None:
        i, j = pair
        prefix = [j] * (n - 1)
        ans = _answers_on(alg, gtm_items(prefix), n)
        last = j if 2 * sum(ans) > len(ans) else i
        case = 1
        values = prefix + [last]
    else:
        prefix = [0] + [1] * (n - 2)
        ans = _answers_on(alg, gtm_items(prefix), n)
        ones = sum(ans[1:])
        last = 2 if 2 * ones > n - 2 else 1
        case = 2
        values = prefix + [last]
    res = run_gtm(alg, values)
    return GtmAdversaryResult(values, case, len(values) - res.objective, res.decisions)


# --- online algorithms and the reduction from string guessing --------------


class OnlineGtm:
    def reset(self, n):
        pass

    def answer(self, y, tape) -> int:
        raise NotImplementedError


class ThresholdGtm(OnlineGtm):
    def __init__(self, t=Fraction(1, 2)):
        self.t = Fraction(t)

    def answer(self, y, tape):
        return int(y > self.t)


class AdviceBitGtm(OnlineGtm):
    """Reads one advice bit per item and answers it."""

    def answer(self, y, tape):
        return tape.read()


class AlternatingGtm(OnlineGtm):
    def reset(self, n):
        self.i = 0

    def answer(self, y, tape):
        self.i += 1
        return self.i % 2


class LastDirectionGtm(OnlineGtm):
    """Answers 1 iff the new value is below the previous one."""

    def reset(self, n):
        self.prev = None

    def answer(self, y, tape):
        a = 0 if self.prev is None else int(y < self.prev)
        self.prev = y
        return a


class SgkhToGtm(Guesser):
    """Turns an online GTM algorithm into a string guesser by bisection."""

    def __init__(self, online_gtm):
        self.alg = online_gtm

    def reset(self, n):
        self.n = n
        self.lows = [Fraction(0)]
        self.ups = [Fraction(1)]
        self.ys = []
        self.answers = []
        self.xs = []
        self.alg.reset(n + 1)

    def _absorb(self, bit):
        y, lo, up = self.ys[-1], self.lows[-1], self.ups[-1]
        if bit == 1:
            self.ups.append(y)
            self.lows.append(lo)
        else:
            self.ups.append(up)
            self.lows.append(y)
        self.xs.append(bit)

    def guess(self, prefix, tape):
        if len(prefix) > len(self.xs):
            self._absorb(prefix[-1])
        y = (self.lows[-1] + self.ups[-1]) / 2
        self.ys.append(y)
        a = int(self.alg.answer(y, tape))
        self.answers.append(a)
        return a

    def finish(self, s):
        if len(s) > len(self.xs):
            self._absorb(s[-1])
        n = len(s)
        self.final = Fraction(n + 1, 2) * (self.lows[-1] + self.ups[-1]) - sum(self.ys)
        self.stream = self.ys + [self.final]

    def gtm_mistakes(self) -> int:
        labels = gtm_labels(self.stream)
        return sum(a != t for a, t in zip(self.answers, labels[:-1]))


def reduce_sgkh_to_gtm(online_gtm) -> SgkhToGtm:
    return SgkhToGtm(online_gtm)


def check_bisection_invariants(g: SgkhToGtm) -> None:
    """Assert the step invariants and the final S/T separation on a finished run."""
    n = len(g.xs)
    lo, up, ys, xs = g.lows, g.ups, g.ys, g.xs
    for i in range(n):
        assert up[i] > lo[i]
        if xs[i] == 1:
            assert up[i] > ys[i] >= up[i + 1]
        else:
            assert lo[i] < ys[i] <= lo[i + 1]
    assert up[n] > lo[n]
    mean = sum(g.stream) / (n + 1)
    assert mean == (lo[n] + up[n]) / 2
    for i in range(n):
        if xs[i] == 1:
            assert ys[i] >= up[n]
        else:
            assert lo[n] >= ys[i]
        assert (ys[i] > mean) == (xs[i] == 1)
