"""Small-step probabilistic reduction for classical terms and quantum
configurations, exhaustive weighted exploration, and seeded sampling.

Terms must be elaborated by the checker first (every injection and fold
annotated, ascriptions erased). Reduction is call-by-value, left to right.
Measurement is the only rule with two successors.

Fresh qubit variables are ``_q0, _q1, ...``: the first such name not
already occurring in the configuration, so a step is a pure function of
its input.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .ast import (
    Annot, App, Case, Config, Fold, Gate, Init, Inj, Lam, LetLift, LetTensor,
    Meas, New, Pair, Proj, QAnnot, QApp, QCase, QFold, QInj, QLam, QUnfold, QVar, Run,
    Seq, Star, Tensor, Unfold, Unit, Var, all_qnames, bit_type, is_value,
    is_value_config, obs_translate_value, obs_untranslate_value, split_tensor, subst_c,
    subst_q,
)
from .dist import SubDist
from .errors import NodeBudgetExceeded, Stuck, Timeout
from .qstate import DEFAULT_MAX_QUBITS, alloc_qubit, apply_unitary, measure, relink_after_removal

DEFAULT_NODE_BUDGET = 10 ** 6


# ---------------------------------------------------------------- classical steps

def step_classical(m, max_qubits=DEFAULT_MAX_QUBITS):
    """All one-step successors ``[(p, m')]`` of a closed term; ``[]`` for values."""
    r = _step_c(m, max_qubits)
    return [] if r is None else r


def _wrap(r, build):
    return [(p, build(x)) for p, x in r]


def _step_c(m, cap):
    """Successors of ``m``, or None when ``m`` is a value."""
    match m:
        case Var() | Unit() | Lam() | QLam() | New() | Meas() | Gate():
            return None
        case Pair(a, b):
            r = _step_c(a, cap)
            if r is not None:
                return _wrap(r, lambda x: Pair(x, b))
            r = _step_c(b, cap)
            if r is not None:
                return _wrap(r, lambda x: Pair(a, x))
            return None
        case Inj(i, b, ann):
            r = _step_c(b, cap)
            return None if r is None else _wrap(r, lambda x: Inj(i, x, ann))
        case Fold(b, ann):
            r = _step_c(b, cap)
            return None if r is None else _wrap(r, lambda x: Fold(x, ann))
        case Proj(i, b):
            r = _step_c(b, cap)
            if r is not None:
                return _wrap(r, lambda x: Proj(i, x))
            if isinstance(b, Pair):
                return [(1.0, b.first if i == 1 else b.second)]
        case Unfold(b):
            r = _step_c(b, cap)
            if r is not None:
                return _wrap(r, Unfold)
            if isinstance(b, Fold):
                return [(1.0, b.body)]
        case Case(s, x, left, y, right):
            r = _step_c(s, cap)
            if r is not None:
                return _wrap(r, lambda u: Case(u, x, left, y, right))
            if isinstance(s, Inj):
                if s.index == 1:
                    return [(1.0, subst_c(left, {x: s.body}))]
                return [(1.0, subst_c(right, {y: s.body}))]
        case App(f, a):
            r = _step_c(f, cap)
            if r is not None:
                return _wrap(r, lambda u: App(u, a))
            r = _step_c(a, cap)
            if r is not None:
                return _wrap(r, lambda u: App(f, u))
            if isinstance(f, Lam):
                return [(1.0, subst_c(f.body, {f.var: a}))]
        case Run(c):
            r = _step_config(c, cap)
            if r is not None:
                return _wrap(r, Run)
            if not c.linking:
                return [(1.0, obs_translate_value(c.term))]
        case Annot():
            raise Stuck("ascriptions must be erased by elaboration before evaluation")
    raise Stuck(f"no reduction rule applies to {type(m).__name__}")


# ---------------------------------------------------------------- quantum steps

def step_config(c, max_qubits=DEFAULT_MAX_QUBITS):
    """All one-step successors ``[(p, c')]`` of a configuration; ``[]`` for values."""
    r = _step_config(c, max_qubits)
    return [] if r is None else r


def _step_config(c, cap):
    env = _QEnv(c, cap)
    r = _step_q(c.term, c.state, c.link_map, env)
    if r is None:
        return None
    return [(p, Config.make(s, link, q)) for p, s, link, q in r]


class _QEnv:
    def __init__(self, c, cap):
        self.config = c
        self.cap = cap

    def fresh(self):
        used = all_qnames(self.config.term) | set(self.config.link_map)
        i = 0
        while f"_q{i}" in used:
            i += 1
        return f"_q{i}"


def _qwrap(r, build):
    return [(p, s, link, build(x)) for p, s, link, x in r]


def _step_q(q, state, link, env):
    """Successors ``[(p, state', linking', q')]`` or None for quantum values.
    ``link`` is the linking of the whole configuration."""
    match q:
        case QVar() | Star():
            return None
        case Tensor(a, b):
            r = _step_q(a, state, link, env)
            if r is not None:
                return _qwrap(r, lambda x: Tensor(x, b))
            r = _step_q(b, state, link, env)
            if r is not None:
                return _qwrap(r, lambda x: Tensor(a, x))
            return None
        case QInj(i, b, ann):
            r = _step_q(b, state, link, env)
            return None if r is None else _qwrap(r, lambda x: QInj(i, x, ann))
        case QFold(b, ann):
            r = _step_q(b, state, link, env)
            return None if r is None else _qwrap(r, lambda x: QFold(x, ann))
        case QUnfold(b):
            r = _step_q(b, state, link, env)
            if r is not None:
                return _qwrap(r, QUnfold)
            if isinstance(b, QFold):
                return [(1.0, state, link, b.body)]
        case Seq(a, b):
            r = _step_q(a, state, link, env)
            if r is not None:
                return _qwrap(r, lambda x: Seq(x, b))
            if isinstance(a, Star):
                return [(1.0, state, link, b)]
        case LetTensor(x, y, a, b):
            r = _step_q(a, state, link, env)
            if r is not None:
                return _qwrap(r, lambda u: LetTensor(x, y, u, b))
            if isinstance(a, Tensor):
                return [(1.0, state, link, subst_q(b, {x: a.left, y: a.right}))]
        case QCase(s, x, left, y, right):
            r = _step_q(s, state, link, env)
            if r is not None:
                return _qwrap(r, lambda u: QCase(u, x, left, y, right))
            if isinstance(s, QInj):
                if s.index == 1:
                    return [(1.0, state, link, subst_q(left, {x: s.body}))]
                return [(1.0, state, link, subst_q(right, {y: s.body}))]
        case QApp(m, a):
            r = _step_c(m, env.cap)
            if r is not None:
                return [(p, state, link, QApp(u, a)) for p, u in r]
            r = _step_q(a, state, link, env)
            if r is not None:
                return _qwrap(r, lambda u: QApp(m, u))
            return _apply(m, a, state, link, env)
        case Init(m):
            r = _step_c(m, env.cap)
            if r is not None:
                return [(p, state, link, Init(u)) for p, u in r]
            return [(1.0, state, link, obs_untranslate_value(m))]
        case LetLift(x, a, b):
            r = _step_q(a, state, link, env)
            if r is not None:
                return _qwrap(r, lambda u: LetLift(x, u, b))
            return [(1.0, state, link, subst_c(b, {x: obs_translate_value(a)}))]
        case QAnnot():
            raise Stuck("ascriptions must be erased by elaboration before evaluation")
    raise Stuck(f"no reduction rule applies to {type(q).__name__}")


def _apply(m, v, state, link, env):
    match m:
        case QLam(params, body):
            parts = split_tensor(v, len(params))
            if parts is None:
                raise Stuck("quantum lambda applied to an argument of the wrong shape")
            return [(1.0, state, link, subst_q(body, {x: p for (x, _), p in zip(params, parts)}))]
        case New():
            if not (isinstance(v, QInj) and isinstance(v.body, Star)):
                raise Stuck("new expects a bit value")
            s2, idx = alloc_qubit(state, v.index - 1, env.cap)
            x = env.fresh()
            return [(1.0, s2, {**link, x: idx}, QVar(x))]
        case Meas():
            if not isinstance(v, QVar):
                raise Stuck("meas expects a qubit variable")
            j = link[v.name]
            rest = {k: i for k, i in link.items() if k != v.name}
            rest = relink_after_removal(rest, j)
            return [(b.prob, b.state, rest, QInj(b.outcome + 1, Star(), bit_type()))
                    for b in measure(state, j)]
        case Gate(spec):
            parts = split_tensor(v, spec.arity)
            if parts is None or not all(isinstance(p, QVar) for p in parts):
                raise Stuck("unitary expects a tensor of qubit variables")
            return [(1.0, apply_unitary(state, [link[p.name] for p in parts], spec), link, v)]
    raise Stuck(f"{type(m).__name__} is not a quantum function value")


# ---------------------------------------------------------------- generic helpers

def step(t, max_qubits=DEFAULT_MAX_QUBITS):
    if isinstance(t, Config):
        return step_config(t, max_qubits)
    return step_classical(t, max_qubits)


def is_terminal(t):
    if isinstance(t, Config):
        return is_value_config(t)
    return is_value(t)


# ---------------------------------------------------------------- exploration

@dataclass
class ExploreReport:
    dist: SubDist
    residual: float
    steps_used: int
    nodes_expanded: int
    max_steps: int
    halted_at: dict = field(default_factory=dict)  # depth -> mass terminating there

    def halt(self):
        return self.dist.total()


def explore(t, max_steps, node_budget=DEFAULT_NODE_BUDGET, max_qubits=DEFAULT_MAX_QUBITS,
            threads=1):
    """Expand the weighted reduction tree breadth-first to depth ``max_steps``.
    Values reached within the bound go to ``dist``; the rest is residual."""
    if max_steps < 0:
        raise ValueError("max_steps must be non-negative")
    dist = SubDist()
    halted = {}

    def collect(frontier, depth):
        rest = []
        for p, u in frontier:
            if is_terminal(u):
                dist.add(u, p)
                halted[depth] = halted.get(depth, 0.0) + p
            else:
                rest.append((p, u))
        return rest

    def expand(node):
        p, u = node
        succ = step(u, max_qubits)
        if not succ:
            raise Stuck("non-value without successors")
        return [(p * q, v) for q, v in succ]

    frontier = collect([(1.0, t)], 0)
    nodes = 0
    depth = 0
    pool = ThreadPoolExecutor(threads) if threads > 1 else None
    try:
        while frontier and depth < max_steps:
            nodes += len(frontier)
            if nodes > node_budget:
                raise NodeBudgetExceeded(f"more than {node_budget} nodes expanded")
            results = pool.map(expand, frontier) if pool else map(expand, frontier)
            depth += 1
            frontier = collect([s for r in results for s in r], depth)
    finally:
        if pool:
            pool.shutdown()
    residual = float(sum(p for p, _ in frontier))
    return ExploreReport(dist, residual, depth, nodes, max_steps, halted)


# ---------------------------------------------------------------- sampling

class StepCache:
    """Successor lists keyed by object identity. Cached terms are kept alive
    so identities stay unique while they are cached."""

    def __init__(self, max_qubits=DEFAULT_MAX_QUBITS, limit=200_000):
        self.max_qubits = max_qubits
        self.limit = limit
        self._table = {}

    def successors(self, t):
        hit = self._table.get(id(t))
        if hit is not None and hit[0] is t:
            return hit[1]
        if len(self._table) >= self.limit:
            self._table.clear()
        succ = step(t, self.max_qubits)
        self._table[id(t)] = (t, succ)
        return succ


def make_rng(seed):
    """PCG64 generator from numpy; the seed is reduced modulo 2**64."""
    return np.random.Generator(np.random.PCG64(int(seed) % (1 << 64)))


def run_path(t, rng, max_steps, cache=None):
    """Follow one reduction path. Returns ``(value, steps)`` or raises Timeout."""
    cache = cache or StepCache()
    steps = 0
    while not is_terminal(t):
        if steps >= max_steps:
            raise Timeout(f"no value within {max_steps} steps")
        succ = cache.successors(t)
        if not succ:
            raise Stuck("non-value without successors")
        if len(succ) == 1:
            t = succ[0][1]
        else:
            u = rng.random()
            acc = 0.0
            for p, v in succ:
                acc += p
                t = v
                if u < acc:
                    break
        steps += 1
    return t, steps


def sample(t, seed, max_steps, cache=None):
    """One seeded sample of the terminal value."""
    return run_path(t, make_rng(seed), max_steps, cache)[0]


def sample_many(t, seeds, max_steps, max_qubits=DEFAULT_MAX_QUBITS):
    """Samples for each seed, sharing one successor cache. Timeouts yield None."""
    cache = StepCache(max_qubits)
    out = []
    for s in seeds:
        try:
            out.append(run_path(t, make_rng(s), max_steps, cache)[0])
        except Timeout:
            out.append(None)
    return out


__all__ = [
    "ExploreReport", "StepCache", "explore", "is_terminal", "make_rng", "run_path", "sample",
    "sample_many", "step", "step_classical", "step_config", "DEFAULT_NODE_BUDGET",
]
