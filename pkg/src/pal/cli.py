"""Command line entry point: `pal verify|reduce|tradeoff|adversary|oracle`.

Exit codes: 0 success, 1 a checked property failed, 2 usage or catalog error.

CSV schemas
  reduce:   x,gadget,decision,wrong,cumulative_mistakes
  tradeoff: problem,eps,eps_decimal,s,divisor,bits_per_item,ratio,ratio_decimal
Exact values are written as p/q; decimal columns use 9 places.
"""
from __future__ import annotations

import argparse
import csv
import io
import random
import sys
from fractions import Fraction

from . import catalog
from .baselines import BASELINES, make_baseline, oracle_advice_bits
from .errors import CatalogError, GadgetConditionError, PalError, UsageError, WhiteBoxRequiredError
from .gtm import gtm_adversary, scripted_gtm
from .model import AdviceTape, entropy, fmt_frac, hashed_priority
from .pairmatch import (
    PmInstance,
    pairs_count,
    pm_adversary_det,
    pm_adversary_rand,
    pm_algorithm,
    pm_mistakes,
    random_pm_instance,
    randomized_algorithm,
    run_online,
)
from .reduction import advice_threshold, corollary_bound, ratio_bound, run_template
from .sgkh import covering_certificate, enumerate_optimal_mistakes, sgkh_optimal_mistakes

DEC = 9


def dec(q) -> str:
    return f"{float(q):.{DEC}f}"


def parse_grid(text) -> list:
    """`a:b:step` with rational endpoints, inclusive of b."""
    try:
        a, b, step = (Fraction(t) for t in text.split(":"))
    except ValueError:
        raise UsageError(f"bad grid {text!r}; expected a:b:step") from None
    if step <= 0:
        raise UsageError("grid step must be positive")
    out = []
    v = a
    while v <= b:
        out.append(v)
        v += step
    return out


def _emit(text, out):
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# --- verify -----------------------------------------------------------------


def cmd_verify(args) -> int:
    fam = catalog.get_family(args.problem)
    rng = random.Random(args.seed)
    declared = catalog.DECLARED[args.problem]
    for cls in fam.pairs:
        c = catalog.structure_certificate(args.problem, cls)
        print(
            f"{args.problem} class={cls} opt1={c.c1.opt} bad1={c.c1.bad} opt2={c.c2.opt} bad2={c.c2.bad} "
            f"unique={'yes' if c.c1.unique and c.c2.unique else 'no'}"
        )
    checked = []
    try:
        for i in range(args.samples):
            P = hashed_priority(f"{args.seed}:{i}")
            x = Fraction(rng.randrange(1, 1000), 2000)
            pair = fam.instantiate(x, P)
            catalog.verify_gadget_pair(fam.spec, pair, P, fam.universe(x), declared)
            checked.append(pair)
        catalog.verify_disjoint_copies(checked)
    except GadgetConditionError as e:
        print(f"FAIL {e.condition}: {e}")
        return 1
    print(f"size={fam.size} declared={declared[:4]} samples={args.samples} all conditions pass")
    return 0


# --- reduce -----------------------------------------------------------------


def cmd_reduce(args) -> int:
    if args.alg not in BASELINES:
        raise UsageError(f"unknown algorithm {args.alg!r}; choose from {', '.join(sorted(BASELINES))}")
    fam = catalog.get_family(args.problem)
    P = hashed_priority(args.seed)
    inst = random_pm_instance(args.n, random.Random(args.seed)) if args.n > 0 else PmInstance(())
    alg = make_baseline(args.alg, fam, P, args.seed)
    bits = oracle_advice_bits(fam, P, inst, args.bits) if args.alg == "oracle-advice" else ()
    rep = run_template(alg, fam, inst, tape=AdviceTape(bits))
    _emit(rep.to_csv(), args.out)
    eps = Fraction(args.eps)
    o1, b1, o2, b2, s = catalog.DECLARED[args.problem]
    bound = ratio_bound(fam.sense, o1, o2, b1, b2, eps)
    err = sys.stderr if not args.out else sys.stdout
    print(f"mistakes {rep.alg_prime_mistakes}", file=err)
    print(f"g1_commitments {rep.g1_count}", file=err)
    print(f"size {rep.size} (bound {fam.size * rep.n})", file=err)
    print(f"bits_read {rep.bits_read}", file=err)
    print(f"bound eps={fmt_frac(eps)} ratio={fmt_frac(bound)}", file=err)
    ok = rep.ordered and rep.consistent and rep.wrong_count == rep.alg_prime_mistakes
    return 0 if ok else 1


# --- tradeoff ---------------------------------------------------------------

TRADEOFF_HEADER = ["problem", "eps", "eps_decimal", "s", "divisor", "bits_per_item", "ratio", "ratio_decimal"]


def tradeoff_rows(problem, grid) -> list:
    o1, b1, o2, b2, s = catalog.DECLARED[problem]
    sense = catalog.get_spec(problem).sense
    rows = []
    for eps in grid:
        if o1 == o2 and abs(b1 - o1) == 1:
            r = corollary_bound(o1, eps, sense)
        else:
            r = ratio_bound(sense, o1, o2, b1, b2, eps)
        per_item = advice_threshold(1, s, eps)
        rows.append([problem, fmt_frac(eps), dec(eps), s, 2 * s, dec(per_item), fmt_frac(r), dec(r)])
    return rows


def cmd_tradeoff(args) -> int:
    grid = parse_grid(args.grid) if args.grid else [Fraction(args.eps)]
    if any(not 0 < e <= Fraction(1, 2) for e in grid):
        raise UsageError("eps values must lie in (0, 1/2]")
    problems = catalog.PROBLEMS if args.problem == "all" else [args.problem]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRADEOFF_HEADER)
    for p in problems:
        catalog.get_family(p)
        w.writerows(tradeoff_rows(p, grid))
    _emit(buf.getvalue(), args.out)
    return 0


# --- adversary --------------------------------------------------------------


def cmd_adversary(args) -> int:
    n = args.n
    if args.target == "gtm":
        try:
            alg = scripted_gtm(args.alg)
        except KeyError:
            raise UsageError(f"unknown GTM algorithm {args.alg!r}") from None
        res = gtm_adversary(alg, n)
        floor = Fraction(n - 2, 2)
        print("values " + " ".join(fmt_frac(v) for v in res.values))
        print(f"case {res.case}")
        print(f"mistakes {res.mistakes}")
        print(f"floor {fmt_frac(floor)}")
        return 0 if res.mistakes >= floor else 1
    if args.target == "pm-det":
        try:
            alg = pm_algorithm(args.alg)
        except KeyError:
            raise UsageError(f"unknown Pair Matching algorithm {args.alg!r}") from None
        res = pm_adversary_det(alg, n)
        print("stream " + " ".join(fmt_frac(v) for v in res.stream))
        print(f"mistakes {res.mistakes}")
        print(f"floor {n // 2}")
        return 0 if res.mistakes >= n // 2 else 1
    if args.target == "pm-rand":
        try:
            alg = randomized_algorithm(args.alg)
        except KeyError:
            try:
                alg = pm_algorithm(args.alg)
            except KeyError:
                raise UsageError(f"unknown Pair Matching algorithm {args.alg!r}") from None
        res = pm_adversary_rand(alg, n)
        total = 0
        for s in range(args.samples):
            a = randomized_algorithm(args.alg, seed=args.seed * 1_000_003 + s)
            ans = run_online(a, res.stream)
            total += len(res.stream) - pm_mistakes(res.stream, ans, skip_second=True)
        mean = Fraction(total, max(args.samples, 1))
        print("stream " + " ".join(fmt_frac(v) for v in res.stream))
        print(f"pairs {pairs_count(res.stream)}")
        print(f"expected_correct {fmt_frac(res.expected_correct)} ({dec(res.expected_correct / n)} of n)")
        print(f"sample_mean_correct {dec(mean)} ({dec(mean / n)} of n) over {args.samples} seeds")
        print(f"cap {dec(Fraction(2, 3))} of n")
        return 0 if res.expected_correct <= Fraction(2, 3) * n else 1
    raise UsageError(f"unknown adversary target {args.target!r}")


# --- oracle -----------------------------------------------------------------


def cmd_oracle(args) -> int:
    n, b = args.n, args.bits
    m = sgkh_optimal_mistakes(n, b)
    print(f"n {n} bits {b}")
    print(f"optimal_mistakes {m}")
    if n <= 6:
        cert = covering_certificate(n, b)
        print(f"covering lower {cert['lower']} upper {cert['upper']}")
        if not cert["lower"] <= m <= cert["upper"]:
            return 1
    if n <= 4:
        e = enumerate_optimal_mistakes(n, b)
        print(f"enumeration {e}")
        if e != m:
            return 1
    if args.eps is not None:
        eps = Fraction(args.eps)
        print(f"threshold {dec((1 - entropy(eps)) * n)} for eps={fmt_frac(eps)}")
    return 0


# --- parser -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pal", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="cmd", required=True)

    v = sub.add_parser("verify", help="certify a problem's gadget pairs under random priorities")
    v.add_argument("problem")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--samples", type=int, default=25)
    v.set_defaults(func=cmd_verify)

    r = sub.add_parser("reduce", help="run the reduction template against a baseline; CSV x,gadget,decision,wrong,cumulative_mistakes")
    r.add_argument("problem")
    r.add_argument("--n", type=int, default=20)
    r.add_argument("--alg", default="greedy", help=", ".join(sorted(BASELINES)))
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--bits", type=int, default=None)
    r.add_argument("--eps", default="1/4")
    r.add_argument("--out")
    r.set_defaults(func=cmd_reduce)

    t = sub.add_parser("tradeoff", help="advice/ratio curve; CSV " + ",".join(TRADEOFF_HEADER))
    t.add_argument("problem", help="catalog problem or 'all'")
    t.add_argument("--eps", default="1/4")
    t.add_argument("--grid", help="a:b:step, e.g. 1/20:1/2:1/20")
    t.add_argument("--out")
    t.set_defaults(func=cmd_tradeoff)

    a = sub.add_parser("adversary", help="adversary constructions for gtm, pm-det, pm-rand")
    a.add_argument("target", choices=["gtm", "pm-det", "pm-rand"])
    a.add_argument("--alg", required=True)
    a.add_argument("--n", type=int, default=20)
    a.add_argument("--seed", type=int, default=0)
    a.add_argument("--samples", type=int, default=10000)
    a.set_defaults(func=cmd_adversary)

    o = sub.add_parser("oracle", help="exact string-guessing optimum for n bits with b advice bits")
    o.add_argument("--n", type=int, default=8)
    o.add_argument("--bits", type=int, default=1)
    o.add_argument("--eps")
    o.set_defaults(func=cmd_oracle)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code else 0
    try:
        return args.func(args)
    except (CatalogError, UsageError, WhiteBoxRequiredError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except PalError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
