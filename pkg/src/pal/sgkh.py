"""Binary string guessing with known history (2-SGKH).

A guesser sees the revealed prefix and the advice tape and guesses the next bit.
Besides the play harness this module has an exact oracle for the best worst-case
mistake count achievable with b advice bits, plus two independent cross-checks.
"""
from __future__ import annotations

import itertools
import math
from functools import lru_cache

from .errors import DomainError, SearchBudgetError
from .model import AdviceTape, RunResult, entropy

MAX_ORACLE_N = 12
MAX_ORACLE_B = 4


class Guesser:
    def reset(self, n):
        pass

    def guess(self, prefix: tuple, tape: AdviceTape) -> int:
        raise NotImplementedError

    def finish(self, s: tuple):
        """Called with the full string once every bit has been revealed."""


class ConstantGuesser(Guesser):
    def __init__(self, bit=0):
        self.bit = bit

    def guess(self, prefix, tape):
        return self.bit


class RepeatPrevious(Guesser):
    def guess(self, prefix, tape):
        return prefix[-1] if prefix else 0


class TableGuesser(Guesser):
    """Reads b bits up front to pick one of 2^b prefix->guess tables."""

    def __init__(self, tables, b):
        self.tables = tables
        self.b = b
        self.table = None

    def reset(self, n):
        self.table = None

    def guess(self, prefix, tape):
        if self.table is None:
            self.table = self.tables[tape.read_int(self.b)]
        return self.table.get(tuple(prefix), 0)


def play_guesses(g: Guesser, s, tape=None) -> list:
    s = tuple(int(c) for c in s)
    tape = tape if tape is not None else AdviceTape()
    g.reset(len(s))
    out = []
    for i in range(len(s)):
        out.append(int(g.guess(s[:i], tape)))
    g.finish(s)
    return out


def sgkh_play(g: Guesser, s, tape=None) -> int:
    s = tuple(int(c) for c in s)
    guesses = play_guesses(g, s, tape)
    return sum(a != b for a, b in zip(guesses, s))


def sgkh_run(g, s, tape) -> RunResult:
    """Adapter so best_advice_search can drive a guesser."""
    s = tuple(int(c) for c in s)
    guesses = play_guesses(g, s, tape)
    mistakes = sum(a != b for a, b in zip(guesses, s))
    return RunResult(list(zip(s, guesses)), tape.bits_read, mistakes)


def sgkh_advice_threshold(n, eps) -> float:
    if not 0 < eps <= 0.5:
        raise DomainError(f"eps={eps} outside (0, 1/2]")
    return (1 - entropy(eps)) * n


# --- exact oracle -----------------------------------------------------------
#
# State: r bits still to come and the multiset of remaining mistake allowances of
# the guessers that are still alive. Guessers with equal allowance are
# interchangeable, so a move is just how many of each class guess 0. The
# adversary then picks the bit. Allowances >= r are capped at r since they can
# no longer run out.


def _classes(budgets):
    return [(b, len(list(g))) for b, g in itertools.groupby(budgets)]


def _after(classes, split, x, r):
    nb = []
    for (b, c), z in zip(classes, split):
        right = z if x == 0 else c - z
        nb += [b] * right
        if b >= 1:
            nb += [b - 1] * (c - right)
    return tuple(sorted(min(v, r - 1) for v in nb))


@lru_cache(maxsize=None)
def _feasible(r, budgets):
    if not budgets:
        return False
    if budgets[-1] >= r:
        return True
    classes = _classes(budgets)
    for split in itertools.product(*[range(c + 1) for _, c in classes]):
        if all(_feasible(r - 1, _after(classes, split, x, r)) for x in (0, 1)):
            return True
    return False


def _check_caps(n, b):
    if n < 0 or b < 0:
        raise DomainError("n and b must be non-negative")
    if n > MAX_ORACLE_N or b > MAX_ORACLE_B:
        raise SearchBudgetError(f"oracle caps are n<={MAX_ORACLE_N}, b<={MAX_ORACLE_B}")


def sgkh_optimal_mistakes(n: int, b: int) -> int:
    """min over 2^b adaptive guessers of max over strings of the best guesser's mistakes."""
    _check_caps(n, b)
    k = 2 ** b
    for m in range(n + 1):
        if _feasible(n, (min(m, n),) * k):
            return m
    return n


def sgkh_optimal_strategies(n: int, b: int) -> list:
    """Return 2^b prefix tables that together achieve sgkh_optimal_mistakes(n, b)."""
    m = sgkh_optimal_mistakes(n, b)
    k = 2 ** b
    tables = [dict() for _ in range(k)]

    def walk(r, live, prefix):
        # live: list of (budget, guesser id), sorted
        budgets = tuple(bd for bd, _ in live)
        if budgets and budgets[-1] >= r:
            return
        classes = _classes(budgets)
        for split in itertools.product(*[range(c + 1) for _, c in classes]):
            if all(_feasible(r - 1, _after(classes, split, x, r)) for x in (0, 1)):
                break
        else:  # pragma: no cover - guarded by the feasibility of the root
            raise AssertionError("no feasible move")
        pos = 0
        guess_of = {}
        for (bd, c), z in zip(classes, split):
            for j in range(c):
                gid = live[pos + j][1]
                guess_of[gid] = 0 if j < z else 1
                tables[gid][prefix] = guess_of[gid]
            pos += c
        for x in (0, 1):
            nxt = []
            for bd, gid in live:
                nb = bd if guess_of[gid] == x else bd - 1
                if nb >= 0:
                    nxt.append((min(nb, r - 1), gid))
            walk(r - 1, sorted(nxt), prefix + (x,))

    walk(n, [(min(m, n), g) for g in range(k)], ())
    return tables


def optimal_guesser(n, b) -> TableGuesser:
    return TableGuesser(sgkh_optimal_strategies(n, b), b)


# --- independent cross-checks ----------------------------------------------


def ball_size(n, m):
    return sum(math.comb(n, i) for i in range(min(m, n) + 1))


def sphere_covering_bound(n, b):
    """Smallest m with 2^b * V(n, m) >= 2^n.

    A deterministic guesser stays within m mistakes on exactly V(n, m) strings,
    because string -> (string xor guesses) is a bijection onto mistake patterns.
    """
    k = 2 ** b
    m = 0
    while k * ball_size(n, m) < 2 ** n:
        m += 1
    return m


def _prefix_index(prefix):
    L = len(prefix)
    v = 0
    for c in prefix:
        v = 2 * v + c
    return (1 << L) - 1 + v


def _cover(masks, full, k):
    """Can k of the masks cover `full`? Plain backtracking on the lowest uncovered bit."""
    masks = sorted(set(masks), key=lambda z: -bin(z).count("1"))

    def go(covered, left):
        if covered == full:
            return True
        if left == 0:
            return False
        rest = full & ~covered
        low = rest & -rest
        for z in masks:
            if z & low and go(covered | z, left - 1):
                return True
        return False

    return go(0, k)


def enumerate_optimal_mistakes(n: int, b: int) -> int:
    """Literal enumeration of every adaptive deterministic strategy (n <= 4)."""
    import numpy as np

    if n > 4:
        raise SearchBudgetError("literal strategy enumeration is limited to n <= 4")
    if n == 0:
        return 0
    width = 2 ** n - 1
    strat = np.arange(2 ** width, dtype=np.int64)
    bits = (strat[:, None] >> np.arange(width)) & 1
    strings = list(itertools.product((0, 1), repeat=n))
    cols = []
    for s in strings:
        mis = np.zeros(len(strat), dtype=np.int64)
        for i in range(n):
            mis += bits[:, _prefix_index(s[:i])] != s[i]
        cols.append(mis)
    M = np.stack(cols, axis=1)
    weights = np.array([1 << j for j in range(len(strings))], dtype=np.int64)
    full = (1 << len(strings)) - 1
    k = 2 ** b
    for m in range(n + 1):
        masks = np.unique(((M <= m) * weights).sum(axis=1))
        if _cover([int(z) for z in masks], full, k):
            return m
    return n


def _ball(word, n, m):
    out = []
    for r in range(m + 1):
        for flips in itertools.combinations(range(n), r):
            w = word
            for f in flips:
                w ^= 1 << f
            out.append(w)
    return out


def covering_code(n, k, m):
    """Find at most k words so that every n-bit word is within distance m, or None."""
    size = 1 << n
    full = (1 << size) - 1
    balls = {}

    def cov(c):
        if c not in balls:
            z = 0
            for w in _ball(c, n, m):
                z |= 1 << w
            balls[c] = z
        return balls[c]

    def go(covered, chosen):
        if covered == full:
            return list(chosen)
        if len(chosen) == k:
            return None
        rest = full & ~covered
        low = (rest & -rest).bit_length() - 1
        cands = sorted(_ball(low, n, m), key=lambda c: -bin(cov(c) & rest).count("1"))
        for c in cands:
            chosen.append(c)
            got = go(covered | cov(c), chosen)
            if got is not None:
                return got
            chosen.pop()
        return None

    return go(0, [])


def codeword_guesser(words, n, b) -> TableGuesser:
    """Non-adaptive strategy: guesser j always guesses codeword j."""
    tables = []
    for j in range(2 ** b):
        w = words[j % len(words)]
        bits = [(w >> i) & 1 for i in range(n)]
        t = {}
        for L in range(n):
            for p in itertools.product((0, 1), repeat=L):
                t[p] = bits[L]
        tables.append(t)
    return TableGuesser(tables, b)


def covering_certificate(n, b) -> dict:
    """Sphere-covering lower bound plus an explicit covering-code strategy.

    When lower == upper the exact optimum is certified without the game-tree DP.
    """
    k = 2 ** b
    lower = sphere_covering_bound(n, b)
    upper, words = None, None
    for m in range(lower, n + 1):
        words = covering_code(n, k, m)
        if words is not None:
            upper = m
            break
    return {"n": n, "b": b, "lower": lower, "upper": upper, "words": words}


def worst_case_mistakes(make_guesser, n, b) -> int:
    """Brute force: max over all strings of the best tape's mistakes."""
    worst = 0
    for s in itertools.product((0, 1), repeat=n):
        best = n
        for bits in itertools.product((0, 1), repeat=b):
            best = min(best, sgkh_play(make_guesser(), s, AdviceTape(bits)))
        worst = max(worst, best)
    return worst
