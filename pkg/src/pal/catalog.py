"""Target problems, hand-transcribed gadget structures, and brute-force certificates.

Structures use small integer vertex ids. An instance is produced by renaming
those ids to fresh `Name`s in the namespace of a Pair Matching value x.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from .errors import CatalogError, GadgetConditionError, InstantiationError, SearchBudgetError
from .model import InputItem, Name, canonical, fmt_frac, sort_by_priority
from .reduction import GadgetPair, ProblemSpec

BRUTE_FORCE_CAP = 2 ** 24
STRUCT_NS = Fraction(-1)
INF = math.inf

PROBLEMS = ("triangle", "is", "maxcut", "bipartite", "max3sat", "jobsched", "vc-mixed", "vc-regular")


# --- structures -------------------------------------------------------------


@dataclass(frozen=True)
class Structure:
    problem: str
    kind: str  # graph | bipartite | digraph | cnf
    n: int  # vertices, U-side size, or variable count
    edges: tuple  # (u, v) pairs, arcs, or (clause id, (signed literals))
    first: int  # vertex that the highest-priority item is mapped to

    def vertex_ids(self):
        if self.kind == "graph":
            ids = {v for e in self.edges for v in e}
            return sorted(ids | {self.first})
        if self.kind == "digraph":
            return sorted({v for e in self.edges for v in e})
        if self.kind == "bipartite":
            return sorted({u for u, _ in self.edges})
        return sorted({abs(l) for _, lits in self.edges for l in lits})


@dataclass(frozen=True)
class StructurePair:
    g1: Structure
    g2: Structure


def _graph(problem, edges, first):
    edges = tuple(tuple(sorted(e)) for e in edges)
    n = len({v for e in edges for v in e})
    return Structure(problem, "graph", n, edges, first)


IS_G1_EDGES = [(b, t) for b in (1, 2, 3) for t in (4, 5, 6, 7, 8)] + [(4, 5), (5, 6), (6, 7), (7, 8), (8, 4)]
IS_G2_EDGES = [(t, b) for t in (1, 2, 3, 4, 5) for b in (6, 7, 8)] + [(1, 4), (4, 3), (3, 2), (2, 5), (5, 1)]

BIP_E1 = ((1, 1), (1, 2), (2, 2), (2, 3), (3, 2), (3, 3))
BIP_E2 = ((1, 1), (1, 2), (2, 1), (2, 3), (3, 1), (3, 3))

SAT_G1 = (
    (1, (1, 2, 3)), (2, (1, -2, -3)), (3, (1, -2, 3)), (4, (1, 2, -3)),
    (5, (-1, 2, 3)), (6, (-1, 2, 3)), (7, (-1, -2, -3)), (8, (-1, -2, -3)),
)
SAT_G2 = (
    (1, (-1, 2, 3)), (2, (-1, -2, -3)), (3, (-1, -2, 3)), (4, (-1, 2, -3)),
    (5, (1, 2, 3)), (6, (1, 2, 3)), (7, (1, -2, -3)), (8, (1, -2, -3)),
)

JOB_ARCS = (
    (0, 8), (0, 2), (1, 0), (1, 2), (2, 3), (2, 7), (3, 0), (3, 1), (4, 6),
    (4, 8), (5, 4), (5, 6), (6, 3), (6, 7), (7, 4), (7, 5), (8, 1), (8, 5),
)

VC_GRAPH1 = [(4, 3), (4, 5), (3, 7), (7, 5), (3, 2), (2, 1), (5, 6), (6, 1)]
VC_GRAPH2 = [(4, 1), (2, 1), (3, 1), (4, 7), (3, 7), (3, 6), (2, 6), (2, 5), (5, 4)]
VC_REGULAR = [
    (1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (6, 7), (7, 8), (8, 1),
    (2, 4), (4, 7), (7, 2), (1, 3), (3, 5), (5, 8), (8, 6), (6, 1),
]

TRIANGLE = [(1, 2), (2, 3), (3, 1)]
SQUARE = [(1, 2), (2, 3), (3, 4), (4, 1)]


def builtin_structure(problem, variant=None):
    """Return {item class: StructurePair} for a catalog problem."""
    p = problem
    if p == "is" or p == "maxcut":
        return {5: StructurePair(_graph(p, IS_G1_EDGES, 1), _graph(p, IS_G2_EDGES, 1))}
    if p == "triangle":
        return {2: StructurePair(_graph(p, TRIANGLE, 1), _graph(p, SQUARE, 1))}
    if p == "bipartite":
        return {2: StructurePair(Structure(p, "bipartite", 3, BIP_E1, 1), Structure(p, "bipartite", 3, BIP_E2, 1))}
    if p == "max3sat":
        return {None: StructurePair(Structure(p, "cnf", 3, SAT_G1, 1), Structure(p, "cnf", 3, SAT_G2, 1))}
    if p == "jobsched":
        return {(2, 2): StructurePair(Structure(p, "digraph", 9, JOB_ARCS, 0), Structure(p, "digraph", 9, JOB_ARCS, 8))}
    if p == "vc-mixed":
        return {
            2: StructurePair(_graph(p, VC_GRAPH1, 1), _graph(p, VC_GRAPH1, 2)),
            3: StructurePair(_graph(p, VC_GRAPH1, 3), _graph(p, VC_GRAPH2, 1)),
        }
    if p == "vc-regular":
        return {4: StructurePair(_graph(p, VC_REGULAR, 2), _graph(p, VC_REGULAR, 1))}
    raise CatalogError(f"unknown problem {problem!r}")


# --- items built from structures --------------------------------------------


def _nm(ns, tag, i):
    return Name(ns, tag, i)


def structure_items(st: Structure, ns=STRUCT_NS) -> dict:
    """Map vertex id -> InputItem, with names in namespace ns."""
    out = {}
    if st.kind == "graph":
        adj = {v: set() for v in st.vertex_ids()}
        for a, b in st.edges:
            adj[a].add(b)
            adj[b].add(a)
        for v, nb in adj.items():
            out[v] = InputItem((_nm(ns, "v", v), frozenset(_nm(ns, "v", w) for w in nb)))
    elif st.kind == "bipartite":
        adj = {}
        for u, w in st.edges:
            adj.setdefault(u, set()).add(w)
        for u, nb in adj.items():
            out[u] = InputItem((_nm(ns, "u", u), frozenset(_nm(ns, "w", w) for w in nb)))
    elif st.kind == "digraph":
        ins = {v: set() for v in st.vertex_ids()}
        outs = {v: set() for v in st.vertex_ids()}
        for a, b in st.edges:
            outs[a].add(b)
            ins[b].add(a)
        for v in ins:
            out[v] = InputItem((
                _nm(ns, "j", v),
                frozenset(_nm(ns, "j", w) for w in ins[v]),
                frozenset(_nm(ns, "j", w) for w in outs[v]),
            ))
    elif st.kind == "cnf":
        for v in st.vertex_ids():
            pos, neg = set(), set()
            for cid, lits in st.edges:
                if v not in map(abs, lits):
                    continue
                others = frozenset(_nm(ns, "x", abs(l)) for l in lits if abs(l) != v)
                tup = (_nm(ns, "c", cid), len(lits), others)
                (pos if v in lits else neg).add(tup)
            out[v] = InputItem((_nm(ns, "x", v), frozenset(pos), frozenset(neg)))
    else:
        raise CatalogError(f"unknown structure kind {st.kind!r}")
    return out


def rename(obj, phi):
    if isinstance(obj, Name):
        return phi[obj]
    if isinstance(obj, frozenset):
        return frozenset(rename(o, phi) for o in obj)
    if isinstance(obj, tuple):
        return tuple(rename(o, phi) for o in obj)
    if isinstance(obj, InputItem):
        return InputItem(rename(obj.ident, phi), obj.payload)
    return obj


def item_names(item):
    """All names mentioned by an item."""
    out = set()

    def walk(o):
        if isinstance(o, Name):
            out.add(o)
        elif isinstance(o, (tuple, frozenset)):
            for c in o:
                walk(c)

    walk(item.ident)
    return out


def item_class(kind, ident):
    if kind == "graph" or kind == "bipartite":
        return len(ident[1])
    if kind == "digraph":
        return (len(ident[1]), len(ident[2]))
    return None


def item_namespace(item):
    return item.ident[0].ns


# --- problem definitions ----------------------------------------------------


def _adjacency(items):
    names = {it.ident[0] for it in items}
    return names, {it.ident[0]: it.ident[1] for it in items}


def graph_consistent(items) -> bool:
    names, adj = _adjacency(items)
    if len(names) != len(items):
        return False
    for v, nb in adj.items():
        for w in nb:
            if w == v or w not in adj or v not in adj[w]:
                return False
    return True


def bipartite_consistent(items) -> bool:
    us = [it.ident[0] for it in items]
    vs = {w for it in items for w in it.ident[1]}
    return len(set(us)) == len(us) and not (set(us) & vs)


def digraph_consistent(items) -> bool:
    ins = {it.ident[0]: it.ident[1] for it in items}
    outs = {it.ident[0]: it.ident[2] for it in items}
    if len(ins) != len(items):
        return False
    for v in ins:
        for p in ins[v]:
            if p == v or p not in outs or v not in outs[p]:
                return False
        for q in outs[v]:
            if q == v or q not in ins or v not in ins[q]:
                return False
    return True


def cnf_consistent(items) -> bool:
    tuples = {}
    for it in items:
        var, pos, neg = it.ident
        if var in tuples:
            return False
        seen = {}
        for c, length, others in list(pos) + list(neg):
            if c in seen or length != len(others) + 1 or var in others:
                return False
            seen[c] = (length, others)
        tuples[var] = seen
    for var, seen in tuples.items():
        for c, (length, others) in seen.items():
            members = others | {var}
            for w in others:
                if w not in tuples or c not in tuples[w]:
                    return False
                if tuples[w][c] != (length, members - {w}):
                    return False
    return True


def _binary(item):
    return (0, 1)


def _binary_first(item):
    return (1, 0)


def _is_compile(items):
    idx = {it.ident[0]: i for i, it in enumerate(items)}
    edges = [(idx[it.ident[0]], idx[w]) for it in items for w in it.ident[1] if w in idx and idx[w] > idx[it.ident[0]]]

    def fn(ds):
        for i, j in edges:
            if ds[i] == 1 and ds[j] == 1:
                return -INF
        return sum(1 for d in ds if d == 1)

    return fn


def _vc_compile(items):
    idx = {it.ident[0]: i for i, it in enumerate(items)}
    edges = [(idx[it.ident[0]], idx[w]) for it in items for w in it.ident[1] if w in idx and idx[w] > idx[it.ident[0]]]

    def fn(ds):
        for i, j in edges:
            if ds[i] != 1 and ds[j] != 1:
                return INF
        return sum(1 for d in ds if d == 1)

    return fn


def _maxcut_compile(items):
    idx = {it.ident[0]: i for i, it in enumerate(items)}
    edges = [(idx[it.ident[0]], idx[w]) for it in items for w in it.ident[1] if w in idx and idx[w] > idx[it.ident[0]]]

    def fn(ds):
        ones = sum(1 for d in ds if d == 1)
        if ones > len(ds) - ones:  # label 0 must mark the larger block
            return -INF
        return sum(1 for i, j in edges if ds[i] != ds[j])

    return fn


def _triangle_compile(items):
    _, adj = _adjacency(items)
    truth = []
    for it in items:
        v, nb = it.ident
        nb = sorted(nb)
        tri = any(b in adj.get(a, ()) for a, b in itertools.combinations(nb, 2))
        truth.append(1 if tri else 0)

    def fn(ds):
        return sum(1 for d, t in zip(ds, truth) if d == t)

    return fn


def _bipartite_compile(items):
    nbrs = [it.ident[1] for it in items]

    def fn(ds):
        used = set()
        for d, nb in zip(ds, nbrs):
            if d is None:
                continue
            if d not in nb or d in used:
                return -INF
            used.add(d)
        return len(used)

    return fn


def _sat_compile(items):
    idx = {it.ident[0]: i for i, it in enumerate(items)}
    clauses = {}
    for it in items:
        var, pos, neg = it.ident
        for c, _, _ in pos:
            clauses.setdefault(c, []).append((idx[var], 1))
        for c, _, _ in neg:
            clauses.setdefault(c, []).append((idx[var], 0))
    lits = list(clauses.values())

    def fn(ds):
        return sum(1 for cl in lits if any(ds[i] == pol for i, pol in cl))

    return fn


def _job_compile(items):
    idx = {it.ident[0]: i for i, it in enumerate(items)}
    arcs = [(idx[it.ident[0]], idx[q]) for it in items for q in it.ident[2] if q in idx]

    def fn(ds):
        chosen = [i for i, d in enumerate(ds) if d == 1]
        cs = set(chosen)
        indeg = {i: 0 for i in chosen}
        succ = {i: [] for i in chosen}
        for a, b in arcs:
            if a in cs and b in cs:
                indeg[b] += 1
                succ[a].append(b)
        stack = [i for i in chosen if indeg[i] == 0]
        seen = 0
        while stack:
            a = stack.pop()
            seen += 1
            for b in succ[a]:
                indeg[b] -= 1
                if indeg[b] == 0:
                    stack.append(b)
        return len(chosen) if seen == len(chosen) else -INF

    return fn


# greedy baselines, one per problem: (item, history) -> decision


def _greedy_is(item, hist):
    taken = {it.ident[0] for it, d in hist if d == 1}
    return 0 if item.ident[1] & taken else 1


def _greedy_vc(item, hist):
    taken = {it.ident[0] for it, d in hist if d == 1}
    return 0 if item.ident[1] <= taken else 1


def _greedy_maxcut(item, hist):
    side = {it.ident[0]: d for it, d in hist}
    ones = sum(1 for w in item.ident[1] if side.get(w) == 1)
    zeros = sum(1 for w in item.ident[1] if side.get(w) == 0)
    return 1 if zeros > ones else 0


def _greedy_triangle(item, hist):
    adj = {it.ident[0]: it.ident[1] for it, _ in hist}
    a, b = sorted(item.ident[1])[:2] if len(item.ident[1]) >= 2 else (None, None)
    return 1 if a is not None and b in adj.get(a, ()) else 0


def _greedy_bipartite(item, hist):
    used = {d for _, d in hist if d is not None}
    free = sorted(w for w in item.ident[1] if w not in used)
    return free[0] if free else None


def _greedy_sat(item, hist):
    return 1 if len(item.ident[1]) >= len(item.ident[2]) else 0


def _greedy_job(item, hist):
    chosen = [it for it, d in hist if d == 1] + [item]
    return 1 if _job_compile(chosen)(tuple(1 for _ in chosen)) != -INF else 0


SPECS = {
    "triangle": ProblemSpec("triangle", "max", _binary, lambda d: d == 1, graph_consistent,
                            _triangle_compile, _binary_first, _greedy_triangle),
    "is": ProblemSpec("is", "max", _binary, lambda d: d == 1, graph_consistent,
                      _is_compile, _binary_first, _greedy_is),
    "maxcut": ProblemSpec("maxcut", "max", _binary, lambda d: d == 1, graph_consistent,
                          _maxcut_compile, _binary_first, _greedy_maxcut),
    "bipartite": ProblemSpec("bipartite", "max", lambda it: tuple(sorted(it.ident[1])) + (None,),
                             lambda d: d is not None, bipartite_consistent, _bipartite_compile,
                             lambda it: (min(it.ident[1]), None), _greedy_bipartite),
    "max3sat": ProblemSpec("max3sat", "max", _binary, lambda d: d == 1, cnf_consistent,
                           _sat_compile, _binary_first, _greedy_sat),
    "jobsched": ProblemSpec("jobsched", "max", _binary, lambda d: d == 1, digraph_consistent,
                            _job_compile, _binary_first, _greedy_job),
    "vc-mixed": ProblemSpec("vc-mixed", "min", _binary, lambda d: d == 1, graph_consistent,
                            _vc_compile, _binary_first, _greedy_vc),
    "vc-regular": ProblemSpec("vc-regular", "min", _binary, lambda d: d == 1, graph_consistent,
                              _vc_compile, _binary_first, _greedy_vc),
}


def get_spec(problem) -> ProblemSpec:
    if problem not in SPECS:
        raise CatalogError(f"unknown problem {problem!r}")
    return SPECS[problem]


def evaluate_objective(spec, instance, decisions):
    """decisions: dict item -> decision, or a sequence aligned with `instance`."""
    items = list(instance)
    if not items:
        return 0
    if isinstance(decisions, dict):
        ds = tuple(decisions[it] for it in items)
    else:
        ds = tuple(decisions)
    return spec.compile(items)(ds)


# --- brute force ------------------------------------------------------------


def _space(spec, items):
    alph = [spec.decisions(it) for it in items]
    total = math.prod(len(a) for a in alph)
    if total > BRUTE_FORCE_CAP:
        raise SearchBudgetError(f"decision space {total} exceeds {BRUTE_FORCE_CAP}")
    return alph


def brute_force_opt(spec, instance):
    """(optimal value, list of optimal assignments as dicts); infeasible vectors never win."""
    items = sorted(instance, key=lambda it: it.token)
    if not items:
        return 0, [{}]
    alph = _space(spec, items)
    fn = spec.compile(items)
    best, arg = None, []
    for ds in itertools.product(*alph):
        v = fn(ds)
        if math.isinf(v):
            continue
        if best is None or spec.better(v, best):
            best, arg = v, [ds]
        elif v == best:
            arg.append(ds)
    if best is None:
        return (-INF if spec.sense == "max" else INF), []
    return best, [dict(zip(items, ds)) for ds in arg]


def brute_force_bad(spec, instance, first_item, wrong_set):
    """Best feasible value when first_item's decision lies in wrong_set."""
    items = sorted(instance, key=lambda it: it.token)
    alph = _space(spec, items)
    pos = items.index(first_item)
    alph[pos] = tuple(d for d in alph[pos] if d in wrong_set)
    fn = spec.compile(items)
    best = None
    for ds in itertools.product(*alph):
        v = fn(ds)
        if math.isinf(v):
            continue
        if best is None or spec.better(v, best):
            best = v
    if best is None:
        return -INF if spec.sense == "max" else INF
    return best


@dataclass
class GadgetCertificate:
    opt: int
    bad: int
    optimal_first: frozenset
    unique: bool
    isomorphic: bool
    n_optimal: int = 0
    best: dict = field(default_factory=dict)


def certify(spec, instance, first_item) -> GadgetCertificate:
    opt, sols = brute_force_opt(spec, instance)
    dset = frozenset(s[first_item] for s in sols)
    wrong = set(spec.decisions(first_item)) - dset
    bad = brute_force_bad(spec, instance, first_item, wrong) if wrong else opt
    best = next(s for s in sols)
    return GadgetCertificate(opt, bad, dset, len(sols) == 1, True, len(sols), best)


# --- families ---------------------------------------------------------------

DECLARED = {
    # problem: (opt1, bad1, opt2, bad2, s)
    "triangle": (3, 2, 4, 3, 4),
    "is": (3, 2, 3, 2, 8),
    "maxcut": (15, 14, 15, 14, 8),
    "bipartite": (3, 2, 3, 2, 3),
    "max3sat": (8, 7, 8, 7, 3),
    "jobsched": (6, 5, 6, 5, 9),
    "vc-mixed": (3, 4, 3, 4, 7),
    "vc-regular": (5, 6, 5, 6, 8),
}


@dataclass(frozen=True)
class PairCertificate:
    c1: GadgetCertificate
    c2: GadgetCertificate
    items1: dict  # vertex id -> structure-level item
    items2: dict


@lru_cache(maxsize=None)
def structure_certificate(problem, cls) -> PairCertificate:
    sp = builtin_structure(problem)[cls]
    spec = get_spec(problem)
    i1, i2 = structure_items(sp.g1), structure_items(sp.g2)
    c1 = certify(spec, set(i1.values()), i1[sp.g1.first])
    c2 = certify(spec, set(i2.values()), i2[sp.g2.first])
    return PairCertificate(c1, c2, i1, i2)


class Family:
    """All gadget pairs of one problem, keyed by the class of the first item."""

    def __init__(self, problem):
        self.problem = problem
        self.spec = get_spec(problem)
        self.pairs = builtin_structure(problem)
        any_pair = next(iter(self.pairs.values()))
        self.kind = any_pair.g1.kind
        structs = [s for sp in self.pairs.values() for s in (sp.g1, sp.g2)]
        self.size = max(len(structure_items(s)) for s in structs)
        # name pool per tag, from every structure in the family
        pool = {}
        for s in structs:
            for it in structure_items(s).values():
                for nm in item_names(it):
                    pool.setdefault(nm.tag, set()).add(nm.idx)
        self.pool = {t: tuple(sorted(v)) for t, v in pool.items()}
        self.classes = {item_class(self.kind, it.ident) for s in structs for it in structure_items(s).values()}
        d = DECLARED[problem]
        self.opt1, self.bad1, self.opt2, self.bad2, self.declared_size = d

    @property
    def sense(self):
        return self.spec.sense

    def universe(self, x):
        return _universe(self.problem, Fraction(x))

    def instantiate(self, x, P) -> GadgetPair:
        return instantiate_pair(self, Fraction(x), P)

    def factory(self, P):
        cache = {}

        def f(x):
            x = Fraction(x)
            if x not in cache:
                cache[x] = self.instantiate(x, P)
            return cache[x]

        return f


@lru_cache(maxsize=None)
def get_family(problem) -> Family:
    if problem not in PROBLEMS:
        raise CatalogError(f"unknown problem {problem!r}")
    return Family(problem)


@lru_cache(maxsize=None)
def _universe_text(problem) -> tuple:
    return tuple(it.token for it in _build_universe(problem, STRUCT_NS))


@lru_cache(maxsize=256)
def _universe(problem, x) -> tuple:
    """Every item that could be the first item of a gadget in namespace x."""
    items = _build_universe(problem, x)
    # Set members are ordered by the text before '@', so namespace x only changes the suffix.
    old, new = "@" + fmt_frac(STRUCT_NS), "@" + fmt_frac(x)
    for it, text in zip(items, _universe_text(problem)):
        it.__dict__["token"] = text.replace(old, new)
    return items


def _build_universe(problem, x) -> tuple:
    fam = get_family(problem)
    kind = fam.kind
    out = []
    if kind == "graph":
        names = [Name(x, "v", i) for i in fam.pool["v"]]
        for v in names:
            others = [w for w in names if w != v]
            for d in sorted(fam.classes):
                for nb in itertools.combinations(others, d):
                    out.append(InputItem((v, frozenset(nb))))
    elif kind == "bipartite":
        us = [Name(x, "u", i) for i in fam.pool["u"]]
        ws = [Name(x, "w", i) for i in fam.pool["w"]]
        for u in us:
            for d in sorted(fam.classes):
                for nb in itertools.combinations(ws, d):
                    out.append(InputItem((u, frozenset(nb))))
    elif kind == "digraph":
        names = [Name(x, "j", i) for i in fam.pool["j"]]
        for v in names:
            others = [w for w in names if w != v]
            for din, dout in sorted(fam.classes):
                for ins in itertools.combinations(others, din):
                    rest = [w for w in others if w not in ins]
                    for outs in itertools.combinations(rest, dout):
                        out.append(InputItem((v, frozenset(ins), frozenset(outs))))
    elif kind == "cnf":
        vs = [Name(x, "x", i) for i in fam.pool["x"]]
        cs = [Name(x, "c", i) for i in fam.pool["c"]]
        half = len(cs) // 2
        for v in vs:
            others = frozenset(w for w in vs if w != v)
            for pos in itertools.combinations(cs, half):
                neg = [c for c in cs if c not in pos]
                out.append(InputItem((
                    v,
                    frozenset((c, len(vs), others) for c in pos),
                    frozenset((c, len(vs), others) for c in neg),
                )))
    return tuple(out)


def _bijection(st: Structure, s1: InputItem, m1: InputItem, pool, x) -> dict:
    """Map structure-level names to names in namespace x so that s1 becomes m1."""
    phi = {}

    def pair_up(src, dst):
        src, dst = sorted(src), sorted(dst)
        if len(src) != len(dst):
            raise InstantiationError("first item does not fit the structure")
        for a, b in zip(src, dst):
            if a in phi and phi[a] != b:
                raise InstantiationError("inconsistent naming")
            phi[a] = b

    k = st.kind
    pair_up([s1.ident[0]], [m1.ident[0]])
    if k in ("graph", "bipartite"):
        pair_up(s1.ident[1], m1.ident[1])
    elif k == "digraph":
        pair_up(s1.ident[1], m1.ident[1])
        pair_up(s1.ident[2], m1.ident[2])
    elif k == "cnf":
        for j in (1, 2):
            pair_up([c for c, _, _ in s1.ident[j]], [c for c, _, _ in m1.ident[j]])
        src_o = set().union(*(o for _, _, o in s1.ident[1] | s1.ident[2]))
        dst_o = set().union(*(o for _, _, o in m1.ident[1] | m1.ident[2]))
        pair_up(src_o, dst_o)
    # everything else: remaining structure names onto remaining pool names, in order
    all_src = set()
    for it in structure_items(st).values():
        all_src |= item_names(it)
    for tag, ids in pool.items():
        src = sorted(n for n in all_src if n.tag == tag and n not in phi)
        used = {phi[n] for n in phi if n.tag == tag}
        dst = [Name(x, tag, i) for i in ids if Name(x, tag, i) not in used]
        if len(dst) < len(src):
            raise InstantiationError("name pool too small")
        for a, b in zip(src, dst):
            phi[a] = b
    return phi


def instantiate_pair(fam: Family, x: Fraction, P) -> GadgetPair:
    uni = fam.universe(x)
    m1 = max(uni, key=P)
    cls = item_class(fam.kind, m1.ident)
    if cls not in fam.pairs:
        raise InstantiationError(f"no gadget pair for first-item class {cls!r}")
    sp = fam.pairs[cls]
    cert = structure_certificate(fam.problem, cls)
    built = []
    for st, items, c in ((sp.g1, cert.items1, cert.c1), (sp.g2, cert.items2, cert.c2)):
        phi = _bijection(st, items[st.first], m1, fam.pool, x)
        g = frozenset(rename(it, phi) for it in items.values())
        if rename(items[st.first], phi) != m1:
            raise InstantiationError("renamed first item differs from the P-maximal item")
        dset = frozenset(rename(d, phi) for d in c.optimal_first)
        best = {rename(it, phi): rename(d, phi) for it, d in c.best.items()}
        built.append((g, dset, best))
    (g1, d1, b1), (g2, d2, b2) = built
    m2 = max((g1 | g2) - {m1}, key=P)
    return GadgetPair(
        x=x, g1=g1, g2=g2, m1=m1, m2=m2, d1=d1, d2=d2,
        opt1=cert.c1.opt, opt2=cert.c2.opt, bad1=cert.c1.bad, bad2=cert.c2.bad,
        size=fam.size, label=f"{fam.problem}:{cls}", best1=b1, best2=b2,
    )


# --- verification -----------------------------------------------------------


def verify_gadget_pair(spec, pair: GadgetPair, P, universe=None, declared=None) -> dict:
    """Recompute every gadget condition from scratch; raise GadgetConditionError on failure."""

    def fail(cond, detail=""):
        raise GadgetConditionError(cond, detail)

    top1 = sort_by_priority(pair.g1, P)[0]
    top2 = sort_by_priority(pair.g2, P)[0]
    if not (top1 == top2 == pair.m1):
        fail("first item condition", "m1 is not the P-maximum of both gadgets")
    if universe is not None and max(universe, key=P) != pair.m1:
        fail("first item condition", "m1 is not the P-maximum of the universe")
    for g in (pair.g1, pair.g2):
        if not spec.consistent(list(g)):
            fail("consistency condition")
    c1 = certify(spec, pair.g1, pair.m1)
    c2 = certify(spec, pair.g2, pair.m1)
    if c1.optimal_first != pair.d1 or c2.optimal_first != pair.d2:
        fail("distinguishing decision condition", "declared optimal decision sets differ")
    if len(c1.optimal_first) != 1 or len(c2.optimal_first) != 1 or c1.optimal_first & c2.optimal_first:
        fail("distinguishing decision condition", f"{set(c1.optimal_first)} vs {set(c2.optimal_first)}")
    if len(pair.g1) > pair.size or len(pair.g2) > pair.size:
        fail("size condition")
    got = (c1.opt, c1.bad, c2.opt, c2.bad)
    if got != (pair.opt1, pair.bad1, pair.opt2, pair.bad2):
        fail("gadget OPT and BAD condition", f"recomputed {got}")
    if declared is not None and got != tuple(declared[:4]):
        fail("gadget OPT and BAD condition", f"recomputed {got}, declared {tuple(declared[:4])}")
    if pair.opt2 < pair.opt1:
        fail("gadget OPT and BAD condition", "OPT(G2) < OPT(G1)")
    rest = (pair.g1 | pair.g2) - {pair.m1}
    if rest and max(rest, key=P) != pair.m2:
        fail("second item condition")
    for it in pair.g1 | pair.g2:
        if any(nm.ns != pair.x for nm in item_names(it)):
            fail("namespace condition", str(it))
    return {
        "opt1": c1.opt, "bad1": c1.bad, "opt2": c2.opt, "bad2": c2.bad,
        "d1": c1.optimal_first, "d2": c2.optimal_first,
        "unique": c1.unique and c2.unique, "size": max(len(pair.g1), len(pair.g2)),
    }


def verify_disjoint_copies(pairs) -> None:
    owner = {}
    for p in pairs:
        for it in p.g1 | p.g2:
            if it in owner and owner[it] != p.x:
                raise GadgetConditionError("disjoint copies condition", str(it))
            owner[it] = p.x


def isomorphic_items(problem) -> bool:
    """Every item of every structure in the family belongs to a declared class."""
    fam = get_family(problem)
    ok = True
    for sp in fam.pairs.values():
        for st in (sp.g1, sp.g2):
            cls = {item_class(st.kind, it.ident) for it in structure_items(st).values()}
            if problem != "vc-mixed":
                ok &= len(cls) == 1
            ok &= cls <= fam.classes
    return ok


# --- text formats -----------------------------------------------------------


def format_structure(st: Structure) -> str:
    lines = [f"{st.problem} {st.kind} {st.n}"]
    for e in st.edges:
        if st.kind == "cnf":
            cid, lits = e
            lines.append(f"c C{cid} " + " ".join(f"{l:+d}" for l in lits))
        elif st.kind == "digraph":
            lines.append(f"a {e[0]} {e[1]}")
        else:
            lines.append(f"e {e[0]} {e[1]}")
    lines.append(f"f {st.first}")
    return "\n".join(lines) + "\n"


def parse_structure(text: str) -> Structure:
    rows = [ln.split() for ln in text.splitlines() if ln.strip()]
    problem, kind, n = rows[0][0], rows[0][1], int(rows[0][2])
    edges, first = [], None
    for r in rows[1:]:
        if r[0] == "c":
            edges.append((int(r[1][1:]), tuple(int(t) for t in r[2:])))
        elif r[0] in ("a", "e"):
            edges.append((int(r[1]), int(r[2])))
        elif r[0] == "f":
            first = int(r[1])
        else:
            raise CatalogError(f"bad structure line {' '.join(r)!r}")
    return Structure(problem, kind, n, tuple(edges), first)


def format_pair(sp: StructurePair) -> str:
    return format_structure(sp.g1) + "--\n" + format_structure(sp.g2)


def parse_pair(text: str) -> StructurePair:
    a, b = text.split("--\n")
    return StructurePair(parse_structure(a), parse_structure(b))


def format_instance(problem, items) -> str:
    toks = sorted(it.token for it in items)
    return f"# {problem} {len(toks)}\n" + "".join(t + "\n" for t in toks)


class _Reader:
    def __init__(self, s):
        self.s, self.i = s, 0

    def peek(self):
        return self.s[self.i] if self.i < len(self.s) else ""

    def take(self, ch):
        if self.peek() != ch:
            raise CatalogError(f"expected {ch!r} at {self.i} in {self.s!r}")
        self.i += 1

    def value(self):
        c = self.peek()
        if c in "({":
            close = ")" if c == "(" else "}"
            self.i += 1
            parts = []
            while self.peek() != close:
                parts.append(self.value())
                if self.peek() == ",":
                    self.i += 1
            self.i += 1
            return tuple(parts) if c == "(" else frozenset(parts)
        j = self.i
        while self.i < len(self.s) and self.s[self.i] not in ",)}":
            self.i += 1
        return _atom(self.s[j:self.i])


def _atom(tok):
    if "@" in tok:
        head, ns = tok.split("@")
        k = 0
        while k < len(head) and not head[k].isdigit():
            k += 1
        return Name(Fraction(ns), head[:k], int(head[k:]))
    if tok == "-":
        return None
    if tok in ("T", "F"):
        return tok == "T"
    try:
        q = Fraction(tok)
        return int(q) if q.denominator == 1 and "/" not in tok else q
    except ValueError:
        return tok


def parse_item(token: str) -> InputItem:
    r = _Reader(token.strip())
    v = r.value()
    if r.i != len(r.s):
        raise CatalogError(f"trailing text in {token!r}")
    return InputItem(v)


def parse_instance(text: str):
    lines = [ln for ln in text.splitlines() if ln.strip()]
    head = lines[0].split()
    problem = head[1]
    items = [parse_item(ln) for ln in lines[1:]]
    return problem, items
