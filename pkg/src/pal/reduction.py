"""Gadget reductions from Pair Matching and the advice/approximation bound formulas."""
from __future__ import annotations

import heapq
import io
import csv
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable

from .errors import DomainError, OrderingViolation
from .model import AdviceTape, InputItem, PriorityFunction, canonical, entropy, fmt_frac, sort_by_priority
from .pairmatch import HALF, PmInstance, pm_truth


@dataclass(frozen=True)
class ProblemSpec:
    """What the template needs to know about a target problem."""

    name: str
    sense: str  # "max" or "min"
    decisions: Callable  # item -> tuple of allowed decisions
    project: Callable  # decision -> True for accept
    consistent: Callable  # items -> bool
    compile: Callable  # items (sequence) -> fn(decision tuple aligned to items) -> value
    first_choices: Callable  # item -> (accept-like decision, reject decision)
    greedy: Callable = None  # (item, history) -> decision

    def objective(self, assign):
        """assign: mapping item -> decision, or a list of (item, decision)."""
        pairs = list(assign.items()) if isinstance(assign, dict) else list(assign)
        if not pairs:
            return 0
        items = [it for it, _ in pairs]
        return self.compile(items)(tuple(d for _, d in pairs))

    def better(self, a, b) -> bool:
        return a > b if self.sense == "max" else a < b


@dataclass(frozen=True)
class GadgetPair:
    x: Fraction
    g1: frozenset
    g2: frozenset
    m1: InputItem
    m2: InputItem
    d1: frozenset  # optimal decisions for m1 in g1
    d2: frozenset
    opt1: int
    opt2: int
    bad1: int
    bad2: int
    size: int
    label: str = ""
    best1: Any = None  # an optimal assignment of g1 (dict item -> decision)
    best2: Any = None

    def gadget(self, k):
        return self.g1 if k == 1 else self.g2

    def best(self, k):
        return self.best1 if k == 1 else self.best2

    def dset(self, k):
        return self.d1 if k == 1 else self.d2


class _Top:
    """Sentinel above every priority key (no earlier item)."""

    def __gt__(self, other):
        return True

    def __lt__(self, other):
        return False

    def __ge__(self, other):
        return True

    def __le__(self, other):
        return False

    def __repr__(self):
        return "+inf"


TOP = _Top()


def derive_priority_prime(factory, P: PriorityFunction) -> PriorityFunction:
    """P'(x) = P(m1(x)) for x <= 1/2 and P(m2(1-x)) for x > 1/2."""
    memo = {}

    def key(item):
        x = Fraction(item.ident if isinstance(item, InputItem) else item)
        if x not in memo:
            memo[x] = P(factory(x).m1) if x <= HALF else P(factory(1 - x).m2)
        return memo[x]

    return PriorityFunction(key, f"prime({P.name})")


class _Entry:
    __slots__ = ("key", "item", "owner")

    def __init__(self, key, item, owner):
        self.key, self.item, self.owner = key, item, owner

    def __lt__(self, other):  # heapq is a min-heap; invert for max-first
        return self.key > other.key


@dataclass
class ReductionRecord:
    x: Fraction
    gadget: int
    decision: Any
    answer: bool
    wrong: bool
    refined_wrong: bool


@dataclass
class ReductionReport:
    problem: str
    n: int
    size_bound: int
    records: list = field(default_factory=list)
    stream: list = field(default_factory=list)
    decisions: list = field(default_factory=list)
    answers: list = field(default_factory=list)  # (x, accept?) in P' order
    alg_prime_mistakes: int = 0
    ordered: bool = True
    consistent: bool = True
    states: dict = field(default_factory=dict)
    alg_objective: Any = 0
    opt_objective: Any = 0
    bits_read: int = 0

    @property
    def wrong_count(self):
        return sum(r.wrong for r in self.records)

    @property
    def refined_wrong_count(self):
        return sum(r.refined_wrong for r in self.records)

    @property
    def size(self):
        return len(self.stream)

    @property
    def g1_count(self):
        return sum(r.gadget == 1 for r in self.records)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "gadget", "decision", "wrong", "cumulative_mistakes"])
        total = 0
        for r in self.records:
            total += r.wrong
            w.writerow([fmt_frac(r.x), r.gadget, canonical(r.decision), int(r.wrong), total])
        return buf.getvalue()

    def to_records(self) -> str:
        lines = [f"problem {self.problem}", f"n {self.n}"]
        for r in self.records:
            lines.append(
                f"x={fmt_frac(r.x)} gadget={r.gadget} decision={canonical(r.decision)} "
                f"answer={'accept' if r.answer else 'reject'} wrong={int(r.wrong)} "
                f"refined_wrong={int(r.refined_wrong)}"
            )
        lines += [
            f"mistakes {self.alg_prime_mistakes}",
            f"size {self.size}",
            f"ordered {int(self.ordered)}",
            f"consistent {int(self.consistent)}",
        ]
        return "\n".join(lines) + "\n"


def run_template(alg, family, pm_input, *, P=None, tape=None, check_consistency=True) -> ReductionReport:
    """Answer Pair Matching with a target-problem algorithm via gadget pairs.

    Items x <= 1/2 get a gadget pair. m1(x) is shown to `alg` when x arrives and
    its decision becomes the answer for x. The rest of G1 is queued when 1 - x
    arrives; the rest of G2 once it is certain that 1 - x will not arrive.
    Queued items leave the max-heap just in time to respect P.
    """
    if not isinstance(pm_input, PmInstance):
        pm_input = PmInstance(tuple(pm_input))
    P = P if P is not None else alg.priority
    factory = family.factory(P)
    Pp = derive_priority_prime(factory, P)
    order = [it.ident for it in sort_by_priority([InputItem(x) for x in pm_input.values], Pp)]
    tape = tape if tape is not None else AdviceTape()
    spec = family.spec
    rep = ReductionReport(family.problem, len(order), family.size * len(order))

    def kp(x):
        return Pp(InputItem(x))

    Q = []
    undecided = {}  # x -> (decision, answer), in arrival order
    remaining = {}
    alg.reset(None)

    def present(item):
        if rep.stream and not P(rep.stream[-1]) > P(item):
            rep.ordered = False
            raise OrderingViolation(f"{item} presented out of priority order")
        d = alg.decide(item, tape)
        rep.stream.append(item)
        rep.decisions.append((item, d))
        return d

    def commit(xj, k):
        d, ans = undecided.pop(xj)
        pair = factory(xj)
        dk = pair.dset(k)
        wrong = (not ans) if k == 1 else ans
        rep.records.append(ReductionRecord(xj, k, d, ans, wrong, d not in dk))
        rest = pair.gadget(k) - {pair.m1}
        remaining[xj] = len(rest)
        rep.states[xj] = "committed" if rest else "finished"
        for it in rest:
            heapq.heappush(Q, _Entry(P(it), it, xj))

    def pop_present():
        e = heapq.heappop(Q)
        present(e.item)
        remaining[e.owner] -= 1
        if remaining[e.owner] == 0:
            rep.states[e.owner] = "finished"

    prev = TOP
    for x in order:
        kx = kp(x)
        if x >= HALF:
            if x != HALF and (1 - x) in undecided:
                rep.answers.append((x, True))
                commit(1 - x, 1)
            else:
                rep.answers.append((x, False))
        for xj in list(undecided):
            t = P(factory(xj).m2)
            if prev > t > kx:
                commit(xj, 2)
            elif not t < prev:
                raise OrderingViolation(f"gadget for {xj} missed its commit window")
        while Q and Q[0].key > kx:
            pop_present()
        if x < HALF:
            pair = factory(x)
            d = present(pair.m1)
            ans = d in pair.d1
            undecided[x] = (d, ans)
            rep.states[x] = "undecided"
            rep.answers.append((x, ans))
        prev = kx
    for xj in list(undecided):
        if not P(factory(xj).m2) <= prev:
            raise OrderingViolation(f"gadget for {xj} left undecided past its window")
        commit(xj, 2)
    while Q:
        pop_present()
    alg.end(tape)
    rep.bits_read = tape.bits_read

    vals = pm_input.values
    rep.alg_prime_mistakes = sum(a != pm_truth(vals, x) for x, a in rep.answers)
    rep.records.sort(key=lambda r: order.index(r.x))
    if rep.stream:
        items = [it for it, _ in rep.decisions]
        if check_consistency:
            rep.consistent = bool(spec.consistent(items))
        rep.alg_objective = spec.compile(items)(tuple(d for _, d in rep.decisions))
        rep.opt_objective = sum(
            factory(r.x).opt1 if r.gadget == 1 else factory(r.x).opt2 for r in rep.records
        )
    return rep


def run_triangle_finding_reduction(alg, pm_input, P=None) -> ReductionReport:
    from .catalog import get_family

    return run_template(alg, get_family("triangle"), pm_input, P=P)


# --- bound formulas ---------------------------------------------------------


def _eps(eps):
    eps = Fraction(eps)
    if not 0 < eps <= HALF:
        raise DomainError(f"eps={eps} outside (0, 1/2]")
    return eps


def min_ratio_bound(opt1, opt2, bad1, bad2, eps) -> Fraction:
    eps = _eps(eps)
    if opt1 <= 0 or opt2 <= 0:
        raise DomainError("OPT values must be positive")
    r = min(Fraction(bad1, opt1), Fraction(bad2, opt2))
    return 1 + eps * (r - 1) * opt1 / (eps * opt1 + (1 - eps) * opt2)


def max_ratio_bound(opt1, opt2, bad1, bad2, eps) -> Fraction:
    eps = _eps(eps)
    if opt1 <= 0 or opt2 <= 0 or bad1 < 0 or bad2 < 0:
        raise DomainError("OPT values must be positive and BAD values non-negative")
    if bad1 == 0 or bad2 == 0:
        # r -> infinity; the expression tends to this limit
        ratios = [Fraction(o, b) for o, b in ((opt1, bad1), (opt2, bad2)) if b]
        if not ratios:
            return 1 + eps * opt1 / ((1 - eps) * opt2)
        r = min(ratios)
    else:
        r = min(Fraction(opt1, bad1), Fraction(opt2, bad2))
    return 1 + eps * (r - 1) * opt1 / (eps * opt1 + (1 - eps) * r * opt2)


def corollary_bound(opt, eps, sense) -> Fraction:
    eps = _eps(eps)
    if opt < 1:
        raise DomainError("OPT must be at least 1")
    if sense == "min":
        return 1 + eps / opt
    if sense == "max":
        if opt - eps <= 0:
            raise DomainError("opt - eps must be positive")
        return 1 + eps / (opt - eps)
    raise DomainError(f"unknown sense {sense!r}")


def ratio_bound(sense, opt1, opt2, bad1, bad2, eps) -> Fraction:
    fn = min_ratio_bound if sense == "min" else max_ratio_bound
    return fn(opt1, opt2, bad1, bad2, eps)


def advice_threshold(n, s, eps) -> float:
    if s < 1:
        raise DomainError("gadget size must be at least 1")
    return (1 - entropy(eps)) * n / (2 * s)
