import random
from dataclasses import replace
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from pal.baselines import make_baseline, oracle_advice_bits
from pal.catalog import DECLARED, PROBLEMS, get_family
from pal.errors import DomainError, OrderingViolation
from pal.model import AdviceTape, FixedPriorityAlgorithm, entropy, hashed_priority, token_priority
from pal.pairmatch import PmInstance, pairs_count, pm_truth, random_pm_instance
from pal.reduction import (
    TOP,
    advice_threshold,
    corollary_bound,
    derive_priority_prime,
    max_ratio_bound,
    min_ratio_bound,
    ratio_bound,
    run_template,
    run_triangle_finding_reduction,
)

F = Fraction


class Scripted(FixedPriorityAlgorithm):
    """Answers via the family's first_choices: accept iff fn(item) is true."""

    def __init__(self, spec, P, fn):
        self.spec, self.priority, self.fn = spec, P, fn

    def decide(self, item, tape):
        acc, rej = self.spec.first_choices(item)
        return acc if self.fn(item) else rej


def _values_no_pairs(n):
    return PmInstance(tuple(F(2 * i + 1, 4 * n + 2) for i in range(n)))  # all below 1/2


def _all_pairs(k):
    lows = [F(i, 4 * k + 1) for i in range(1, k + 1)]
    return PmInstance(tuple(lows + [1 - x for x in lows]))


def test_top_sentinel():
    assert TOP > (10**9, "z") and not TOP < (0,)


@pytest.mark.parametrize("problem", PROBLEMS)
def test_priority_prime_orders_complements(problem):
    fam = get_family(problem)
    P = hashed_priority(problem)
    Pp = derive_priority_prime(fam.factory(P), P)
    rng = random.Random(0)
    for _ in range(10):
        x = F(rng.randrange(1, 200), 401)
        assert Pp(x) > Pp(1 - x)
    assert Pp(F(1, 2)) == P(fam.factory(P)(F(1, 2)).m1)


def test_priority_prime_injective_triangle_lex():
    fam = get_family("triangle")
    P = token_priority()
    Pp = derive_priority_prime(fam.factory(P), P)
    xs = [F(k, 41) for k in range(1, 11)] + [1 - F(k, 41) for k in range(1, 11)]
    keys = [Pp(x) for x in xs]
    assert len(set(keys)) == 20


@pytest.mark.parametrize("problem", PROBLEMS)
def test_zero_pairs_all_g2(problem):
    fam = get_family(problem)
    P = hashed_priority(1)
    inst = _values_no_pairs(6)
    rep = run_template(make_baseline("greedy", fam, P), fam, inst)
    assert all(r.gadget == 2 for r in rep.records)
    assert rep.size <= fam.size * len(inst)
    assert rep.ordered and rep.consistent


@pytest.mark.parametrize("problem", PROBLEMS)
def test_all_pairs_all_g1(problem):
    fam = get_family(problem)
    P = hashed_priority(2)
    inst = _all_pairs(4)
    alg = Scripted(fam.spec, P, lambda it: sum(map(ord, it.token)) % 3 == 0)
    rep = run_template(alg, fam, inst)
    assert all(r.gadget == 1 for r in rep.records)
    m1s = {fam.factory(P)(r.x).m1 for r in rep.records}
    rejections = sum(1 for it, d in rep.decisions if it in m1s and d not in fam.factory(P)(it.ident[0].ns).d1)
    assert rep.alg_prime_mistakes == rejections == rep.wrong_count


def _independent_mistakes(rep, inst):
    vals = inst.values
    return sum(a != pm_truth(vals, x) for x, a in rep.answers)


@pytest.mark.parametrize("problem", PROBLEMS)
def test_dual_accounting_random(problem):
    fam = get_family(problem)
    rng = random.Random(problem)
    for t in range(12):
        P = hashed_priority(f"{problem}:{t}")
        inst = random_pm_instance(rng.randrange(0, 9), rng, rng.random())
        alg = make_baseline(rng.choice(["greedy", "random", "always-accept", "always-reject"]), fam, P, t)
        rep = run_template(alg, fam, inst)
        assert rep.wrong_count == rep.alg_prime_mistakes == _independent_mistakes(rep, inst)
        assert len(rep.answers) == len(inst)
        keys = [P(it) for it in rep.stream]
        assert all(a > b for a, b in zip(keys, keys[1:]))
        assert rep.consistent
        assert rep.size <= fam.size * len(inst)
        assert rep.g1_count == pairs_count(inst)


@pytest.mark.parametrize("problem", PROBLEMS)
def test_oracle_advice_is_optimal(problem):
    fam = get_family(problem)
    P = hashed_priority(7)
    inst = random_pm_instance(8, random.Random(7))
    alg = make_baseline("oracle-advice", fam, P)
    bits = oracle_advice_bits(fam, P, inst)
    rep = run_template(alg, fam, inst, tape=AdviceTape(bits))
    assert rep.alg_prime_mistakes == 0
    assert rep.alg_objective == rep.opt_objective
    assert rep.bits_read == len(bits) == sum(1 for x in inst.values if x < F(1, 2))


def test_bipartite_refined_mistakes():
    fam = get_family("bipartite")
    P = hashed_priority(4)
    inst = random_pm_instance(10, random.Random(4))
    rep = run_template(make_baseline("random", fam, P, 4), fam, inst)
    for r in rep.records:
        pair = fam.factory(P)(r.x)
        assert r.refined_wrong == (r.decision not in pair.dset(r.gadget))
        if r.wrong:
            assert r.refined_wrong
    assert rep.refined_wrong_count >= rep.wrong_count


def test_triangle_reduction_components():
    fam = get_family("triangle")
    P = hashed_priority(5)
    rep = run_triangle_finding_reduction(make_baseline("greedy", fam, P), _values_no_pairs(5))
    assert rep.size == 4 * 5
    assert set(rep.states.values()) == {"finished"}
    rep = run_triangle_finding_reduction(make_baseline("always-reject", fam, P), _all_pairs(3))
    assert rep.size == 3 * 3
    assert rep.alg_prime_mistakes == 3


def test_triangle_reduction_ordered_many_priorities():
    fam = get_family("triangle")
    rng = random.Random(8)
    for t in range(100):
        P = hashed_priority(("tri", t))
        inst = random_pm_instance(8, rng)
        rep = run_triangle_finding_reduction(make_baseline("random", fam, P, t), inst)
        keys = [P(it) for it in rep.stream]
        assert all(a > b for a, b in zip(keys, keys[1:]))


def test_empty_input():
    fam = get_family("bipartite")
    rep = run_template(make_baseline("greedy", fam), fam, PmInstance(()))
    assert rep.records == [] and rep.size == 0
    assert rep.to_csv() == "x,gadget,decision,wrong,cumulative_mistakes\n"


def test_half_only_sets_priority():
    fam = get_family("is")
    rep = run_template(make_baseline("greedy", fam), fam, PmInstance((F(1, 2),)))
    assert rep.size == 0 and rep.answers == [(F(1, 2), False)]


class _BrokenFamily:
    """Wraps a family but reports the wrong second item, breaking the commit window."""

    def __init__(self, fam):
        self.fam, self.spec, self.size, self.problem = fam, fam.spec, fam.size, fam.problem

    def factory(self, P):
        inner = self.fam.factory(P)

        def f(x):
            pair = inner(x)
            low = min(pair.g1 | pair.g2, key=P)
            return replace(pair, m2=low)

        return f


def test_ordering_trap():
    fam = _BrokenFamily(get_family("is"))
    hit = 0
    for t in range(20):
        P = hashed_priority(("trap", t))
        try:
            run_template(make_baseline("greedy", fam.fam, P), fam, _values_no_pairs(6))
        except OrderingViolation:
            hit += 1
    assert hit > 0


def test_report_formats():
    fam = get_family("maxcut")
    P = hashed_priority(7)
    inst = random_pm_instance(10, random.Random(7))
    rep = run_template(make_baseline("always-0", fam, P), fam, inst)
    lines = rep.to_csv().strip().split("\n")
    assert lines[0] == "x,gadget,decision,wrong,cumulative_mistakes"
    assert int(lines[-1].split(",")[-1]) == rep.wrong_count == rep.g1_count
    assert rep.to_records().splitlines()[-4] == f"mistakes {rep.alg_prime_mistakes}"


# --- bounds -----------------------------------------------------------------


def test_min_bound_examples():
    assert min_ratio_bound(3, 3, 4, 4, F(1, 4)) == F(13, 12)
    assert min_ratio_bound(3, 3, 3, 3, F(1, 4)) == 1
    with pytest.raises(DomainError):
        min_ratio_bound(0, 3, 4, 4, F(1, 4))


def test_max_bound_examples():
    assert max_ratio_bound(3, 3, 2, 2, F(1, 4)) == F(12, 11)
    assert max_ratio_bound(8, 8, 7, 7, F(1, 4)) == F(32, 31)
    assert max_ratio_bound(5, 5, 5, 5, F(1, 4)) == 1


def test_max_bound_zero_bad_limit():
    eps = F(1, 4)
    lim = max_ratio_bound(3, 3, 0, 0, eps)
    # large r approaches the limit from below
    assert max_ratio_bound(3 * 10**6, 3 * 10**6, 1, 1, eps) < lim
    assert abs(float(lim - max_ratio_bound(3 * 10**6, 3 * 10**6, 1, 1, eps))) < 1e-5


def test_corollary_examples():
    assert corollary_bound(5, F(1, 4), "min") == F(21, 20)
    assert corollary_bound(6, F(1, 4), "max") == F(24, 23)
    assert corollary_bound(15, F(1, 4), "max") == F(60, 59)
    with pytest.raises(DomainError):
        corollary_bound(0, F(1, 4), "max")
    with pytest.raises(DomainError):
        corollary_bound(3, F(3, 4), "max")


def test_corollary_identity_grid():
    for opt in range(1, 21):
        for k in range(1, 50):
            eps = F(k, 100)
            assert corollary_bound(opt, eps, "min") == min_ratio_bound(opt, opt, opt + 1, opt + 1, eps)
            if opt > 1:
                assert corollary_bound(opt, eps, "max") == max_ratio_bound(opt, opt, opt - 1, opt - 1, eps)


@settings(max_examples=80)
@given(st.integers(1, 30), st.integers(0, 5), st.integers(1, 30), st.integers(0, 5),
       st.fractions(min_value=F(1, 1000), max_value=F(1, 2)), st.fractions(min_value=F(1, 1000), max_value=F(1, 2)))
def test_bounds_monotone_in_eps(o1, d1, o2, d2, e1, e2):
    lo, hi = min(e1, e2), max(e1, e2)
    o2 = max(o1, o2)
    assert min_ratio_bound(o1, o2, o1 + d1, o2 + d2, lo) <= min_ratio_bound(o1, o2, o1 + d1, o2 + d2, hi)
    b1, b2 = max(o1 - d1, 0), max(o2 - d2, 0)
    assert max_ratio_bound(o1, o2, b1, b2, lo) <= max_ratio_bound(o1, o2, b1, b2, hi)
    assert ratio_bound("min", o1, o2, o1 + d1, o2 + d2, hi) >= 1


def test_catalog_spot_values():
    quarter = F(1, 4)
    want = {"is": F(12, 11), "vc-mixed": F(13, 12), "max3sat": F(32, 31), "maxcut": F(60, 59),
            "jobsched": F(24, 23), "vc-regular": F(21, 20)}
    for problem, r in want.items():
        o1, b1, o2, b2, _ = DECLARED[problem]
        sense = get_family(problem).sense
        assert ratio_bound(sense, o1, o2, b1, b2, quarter) == r
        assert corollary_bound(o1, quarter, sense) == r


def test_advice_threshold():
    assert advice_threshold(100, 8, F(1, 2)) == 0
    assert abs(advice_threshold(160, 8, F(1, 4)) - 160 * (1 - entropy(F(1, 4))) / 16) < 1e-12
    assert abs(advice_threshold(160, 8, F(1, 4)) - 1.8872187554) < 1e-9
    with pytest.raises(DomainError):
        advice_threshold(10, 0, F(1, 4))


def test_eps_domain():
    for bad in (0, F(3, 4)):
        with pytest.raises(DomainError):
            min_ratio_bound(3, 3, 4, 4, bad)
