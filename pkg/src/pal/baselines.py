"""Baseline fixed-priority algorithms for the catalog problems."""
from __future__ import annotations

import random

from .errors import UsageError
from .model import FixedPriorityAlgorithm, hashed_priority
from .pairmatch import HALF, PmInstance


class SpecAlgorithm(FixedPriorityAlgorithm):
    def __init__(self, spec, priority=None, seed=0):
        self.spec = spec
        self.priority = priority if priority is not None else hashed_priority(seed)
        self.seed = seed

    def reset(self, n=None):
        self.history = []

    def decide(self, item, tape):
        d = self.choose(item, tape)
        self.history.append((item, d))
        return d

    def choose(self, item, tape):
        raise NotImplementedError


class AlwaysAccept(SpecAlgorithm):
    name = "always-accept"

    def choose(self, item, tape):
        return self.spec.first_choices(item)[0]


class AlwaysReject(SpecAlgorithm):
    name = "always-reject"

    def choose(self, item, tape):
        return self.spec.first_choices(item)[1]


class RandomChoice(SpecAlgorithm):
    name = "random"

    def reset(self, n=None):
        super().reset(n)
        self.rng = random.Random(self.seed)

    def choose(self, item, tape):
        return self.rng.choice(self.spec.decisions(item))


class Greedy(SpecAlgorithm):
    name = "greedy"

    def choose(self, item, tape):
        return self.spec.greedy(item, self.history)


class OracleAdvice(SpecAlgorithm):
    """Reads one bit the first time a gadget namespace shows up, then plays that gadget's optimum.

    Bit 1 means the complement is present (G1), bit 0 means G2.
    """

    name = "oracle-advice"

    def __init__(self, spec, family, priority=None, seed=0):
        super().__init__(spec, priority, seed)
        self.factory = family.factory(self.priority)

    def reset(self, n=None):
        super().reset(n)
        self.which = {}

    def choose(self, item, tape):
        x = item.ident[0].ns
        if x not in self.which:
            self.which[x] = 1 if tape.read() else 2
        return self.factory(x).best(self.which[x])[item]


def oracle_advice_bits(family, P, pm_input, bits=None) -> tuple:
    """Bits for OracleAdvice: one per x < 1/2 in P' order, 1 iff 1 - x is present."""
    from .reduction import derive_priority_prime
    from .model import InputItem, sort_by_priority

    if not isinstance(pm_input, PmInstance):
        pm_input = PmInstance(tuple(pm_input))
    vals = set(pm_input.values)
    Pp = derive_priority_prime(family.factory(P), P)
    order = [it.ident for it in sort_by_priority([InputItem(x) for x in vals], Pp)]
    out = tuple(int((1 - x) in vals) for x in order if x < HALF)
    return out if bits is None else out[:bits]


BASELINES = {
    "always-accept": AlwaysAccept,
    "always-1": AlwaysAccept,
    "always-reject": AlwaysReject,
    "always-0": AlwaysReject,
    "random": RandomChoice,
    "greedy": Greedy,
    "oracle-advice": OracleAdvice,
}


def make_baseline(name, family, priority=None, seed=0):
    if name not in BASELINES:
        raise UsageError(f"unknown algorithm {name!r}; choose from {sorted(BASELINES)}")
    cls = BASELINES[name]
    if cls is OracleAdvice:
        return cls(family.spec, family, priority, seed)
    return cls(family.spec, priority, seed)
