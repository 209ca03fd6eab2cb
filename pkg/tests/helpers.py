"""Shared test utilities: a type-directed generator of closed well-typed
terms and a full reduction-tree walker."""

from __future__ import annotations

import random

import numpy as np

from vqpl import ast as A
from vqpl.ast import (
    App, Arrow, Case, CMu, CProd, CUnit, Fold, Gate, Init, Inj, Lam, LetLift, LetTensor, Meas,
    New, Pair, Proj, QApp, QCase, QFun, QInj, QLam, QTensor, QUnit, QVar, Qbit, Run, Seq, Star,
    Tensor, Unfold, Unit, Var, bit_type, bool_type, trivial_config,
)
from vqpl.evaluator import step
from vqpl.gates import gate
from vqpl.qstate import StateVector

UNIT, BOOL = CUnit(), bool_type()
BB = CProd(BOOL, BOOL)
FUN = Arrow(BOOL, BOOL)
QU, BIT, QB = QUnit(), bit_type(), Qbit()
QBB = QTensor(QB, QB)
BITS = QTensor(BIT, BIT)
QQ, QM, QQQ = QFun(QB, QB), QFun(QB, BIT), QFun(QBB, QBB)

C_TYPES = (UNIT, BOOL, BB, FUN, QQ, QM, QQQ)
OBS = {UNIT: QU, BOOL: BIT, BB: BITS}

ONE_QUBIT = ("H", "X", "Y", "Z", "S", "T")
TWO_QUBIT = ("CNOT", "CZ", "SWAP")


class TermGen:
    """Random closed terms, well typed by construction. ``budget`` bounds
    the nesting of generated constructs."""

    def __init__(self, seed, budget=4):
        self.rng = random.Random(seed)
        self.budget = budget
        self.n = 0

    def fresh(self, base):
        self.n += 1
        return f"{base}{self.n}"

    def pick(self, options):
        return self.rng.choice(options)()

    def one_gate(self):
        if self.rng.random() < 0.2:
            return Gate(gate("RY", round(self.rng.uniform(0, 3.1), 3)))
        return Gate(gate(self.rng.choice(ONE_QUBIT)))

    # classical
    def term(self, ty=None):
        ty = ty if ty is not None else self.rng.choice((UNIT, BOOL, BB, BOOL, BB, FUN, QQ))
        if ty in OBS and self.rng.random() < 0.6:
            return Run(trivial_config(self.q(OBS[ty], self.budget - 1, {}, []))), ty
        return self.c(ty, self.budget, {}), ty

    def c(self, ty, d, env):
        vars_ = [x for x, t in env.items() if t == ty]
        if d <= 0:
            if vars_ and self.rng.random() < 0.5:
                return Var(self.rng.choice(vars_))
            return self.c_base(ty)
        opts = [lambda: self.c_intro(ty, d, env)]
        if vars_:
            opts.append(lambda: Var(self.rng.choice(vars_)))
        opts.append(lambda: App(self._lam_over(ty, d, env), self.c(BOOL, d - 1, env)))
        opts.append(lambda: self._case(ty, d, env))
        opts.append(lambda: Proj(1, Pair(self.c(ty, d - 1, env), self.c(UNIT, d - 1, env))))
        opts.append(lambda: Unfold(Fold(self.c(ty, d - 1, env), CMu("X", ty))))
        if ty in OBS:
            opts += [lambda: Run(trivial_config(self.q(OBS[ty], d - 1, env, [])))] * 2
        return self.pick(opts)

    def _lam_over(self, ty, d, env):
        y = self.fresh("y")
        return Lam(y, BOOL, self.c(ty, d - 1, {**env, y: BOOL}))

    def _case(self, ty, d, env):
        x, y = self.fresh("l"), self.fresh("r")
        return Case(self.c(BOOL, d - 1, env), x, self.c(ty, d - 1, {**env, x: UNIT}),
                    y, self.c(ty, d - 1, {**env, y: UNIT}))

    def c_base(self, ty):
        if ty == UNIT:
            return Unit()
        if ty == BOOL:
            return Inj(self.rng.choice((1, 2)), Unit(), BOOL)
        if ty == BB:
            return Pair(self.c_base(BOOL), self.c_base(BOOL))
        if ty == FUN:
            x = self.fresh("x")
            return Lam(x, BOOL, Var(x))
        if ty == QQ:
            return self.one_gate()
        if ty == QM:
            return Meas()
        if ty == QQQ:
            return Gate(gate(self.rng.choice(TWO_QUBIT)))
        raise ValueError(ty)

    def c_intro(self, ty, d, env):
        if ty == UNIT:
            return Unit()
        if ty == BOOL:
            return Inj(self.rng.choice((1, 2)), self.c(UNIT, d - 1, env), BOOL)
        if ty == BB:
            return Pair(self.c(BOOL, d - 1, env), self.c(BOOL, d - 1, env))
        if ty == FUN:
            x = self.fresh("x")
            return Lam(x, BOOL, self.c(BOOL, d - 1, {**env, x: BOOL}))
        if ty == QQ:
            x = self.fresh("q")
            return self.rng.choice([self.one_gate, lambda: QLam(((x, QB),), self.q(QB, d - 1, env, [(x, QB)]))])()
        if ty == QM:
            x = self.fresh("q")
            return self.rng.choice([Meas, lambda: QLam(((x, QB),), self.q(BIT, d - 1, env, [(x, QB)]))])()
        if ty == QQQ:
            a, b = self.fresh("a"), self.fresh("b")
            return QLam(((a, QB), (b, QB)), self.q(QBB, d - 1, env, [(a, QB), (b, QB)]))
        raise ValueError(ty)

    # quantum
    def q(self, ty, d, env, lin):
        """Term of type ``ty`` using each variable of ``lin`` exactly once."""
        if not lin:
            return self.q_closed(ty, d, env)
        (x, a), rest = lin[0], lin[1:]
        if not rest and a == ty and (d <= 0 or self.rng.random() < 0.4):
            return QVar(x)
        if rest and ty == QBB and a == QB and rest[0][1] == QB and len(rest) == 1:
            y = rest[0][0]
            return self.pick([
                lambda: Tensor(self.q(QB, d - 1, env, [(x, QB)]), self.q(QB, d - 1, env, [(y, QB)])),
                lambda: QApp(self.c(QQQ, d - 1, env), Tensor(QVar(x), QVar(y))),
                lambda: QApp(self.c(QQQ, d - 1, env), self.q(QBB, d - 1, env, lin)),
            ])
        if not rest and a == QB and ty in (QB, BIT) and d > 0:
            head = QQ if ty == QB else QM
            return QApp(self.c(head, d - 1, env), self.q(QB, d - 1, env, lin))
        # consume x and continue with the rest
        return self.discard(x, a, ty, max(d - 1, 0), env, rest)

    def discard(self, x, a, ty, d, env, rest):
        y = self.fresh("c")
        if a == QU:
            return Seq(QVar(x), self.q(ty, d, env, rest))
        if a == QB:
            bound = QApp(Meas(), QVar(x))
        elif a == BIT:
            if self.rng.random() < 0.5:
                u, v = self.fresh("u"), self.fresh("v")
                return QCase(QVar(x), u, Seq(QVar(u), self.q(ty, d, env, rest)),
                             v, Seq(QVar(v), self.q(ty, d, env, rest)))
            bound = QVar(x)
        elif a == QBB:
            p, r = self.fresh("a"), self.fresh("b")
            return LetTensor(p, r, QVar(x), self.q(ty, d, env, [(p, QB), (r, QB)] + rest))
        else:
            raise ValueError(a)
        return LetLift(y, bound, self.q(ty, d, {**env, y: BOOL}, rest))

    def q_closed(self, ty, d, env):
        if d <= 0:
            return self.q_base(ty)
        opts = []
        if ty == QU:
            opts += [Star, lambda: Seq(self.q(QU, d - 1, env, []), self.q(QU, d - 1, env, [])),
                     lambda: Init(self.c(UNIT, d - 1, env))]
        elif ty == BIT:
            opts += [lambda: QInj(self.rng.choice((1, 2)), Star(), BIT),
                     lambda: QApp(self.c(QM, d - 1, env), self.q(QB, d - 1, env, [])),
                     lambda: QApp(self.c(QM, d - 1, env), self.q(QB, d - 1, env, [])),
                     lambda: Init(self.c(BOOL, d - 1, env))]
        elif ty == QB:
            opts += [lambda: QApp(New(), self.q(BIT, d - 1, env, [])),
                     lambda: QApp(self.c(QQ, d - 1, env), self.q(QB, d - 1, env, []))]
        elif ty == QBB:
            a, b = self.fresh("a"), self.fresh("b")
            opts += [lambda: Tensor(self.q(QB, d - 1, env, []), self.q(QB, d - 1, env, [])),
                     lambda: QApp(self.c(QQQ, d - 1, env), self.q(QBB, d - 1, env, [])),
                     lambda: LetTensor(a, b, self.q(QBB, d - 1, env, []),
                                       self.q(QBB, d - 1, env, [(b, QB), (a, QB)]))]
        elif ty == BITS:
            a, b = self.fresh("a"), self.fresh("b")
            opts += [lambda: Tensor(self.q(BIT, d - 1, env, []), self.q(BIT, d - 1, env, [])),
                     lambda: LetTensor(a, b, self.q(QBB, d - 1, env, []),
                                       Tensor(QApp(Meas(), QVar(a)), QApp(Meas(), QVar(b)))),
                     lambda: Init(self.c(BB, d - 1, env))]
        y = self.fresh("c")
        opts.append(lambda: LetLift(y, self.q(BIT, d - 1, env, []), self.q(ty, d - 1, {**env, y: BOOL}, [])))
        u, v = self.fresh("u"), self.fresh("v")
        opts.append(lambda: QCase(self.q(BIT, d - 1, env, []), u, Seq(QVar(u), self.q(ty, d - 1, env, [])),
                                  v, Seq(QVar(v), self.q(ty, d - 1, env, []))))
        return self.pick(opts)

    def q_base(self, ty):
        if ty == QU:
            return Star()
        if ty == BIT:
            return QInj(self.rng.choice((1, 2)), Star(), BIT)
        if ty == QB:
            return QApp(New(), self.q_base(BIT))
        if ty == QBB:
            return Tensor(self.q_base(QB), self.q_base(QB))
        if ty == BITS:
            return Tensor(self.q_base(BIT), self.q_base(BIT))
        raise ValueError(ty)


def term_depth(t):
    """Nesting depth of an abstract syntax tree (configurations count as one level)."""
    if isinstance(t, A.Config):
        return 1 + term_depth(t.term)
    kids = []
    for f in getattr(t, "__dataclass_fields__", {}):
        if f in ("span", "ann", "ty"):
            continue
        v = getattr(t, f)
        if isinstance(v, (A.CTerm, A.QTerm, A.Config)):
            kids.append(v)
    return 1 + max((term_depth(k) for k in kids), default=0)


def random_terms(count, seed=0, max_depth=7, budget=4):
    """``count`` generated ``(term, type)`` pairs of AST depth at most ``max_depth``."""
    out, s = [], seed
    while len(out) < count:
        g = TermGen(s, budget)
        s += 1
        t, ty = g.term()
        if term_depth(t) <= max_depth:
            out.append((t, ty))
    return out


def walk_tree(t, max_steps, max_nodes=200_000):
    """Yield ``(depth, node, successors)`` for every node of the reduction tree
    up to ``max_steps``; no merging of equal nodes."""
    frontier = [t]
    seen = 0
    for depth in range(max_steps + 1):
        nxt = []
        for u in frontier:
            seen += 1
            if seen > max_nodes:
                raise RuntimeError("reduction tree larger than the node cap")
            succ = step(u)
            yield depth, u, succ
            if depth < max_steps:
                nxt.extend(v for _, v in succ)
        frontier = nxt
        if not frontier:
            return


def random_state(n, rng):
    v = rng.normal(size=2 ** n) + 1j * rng.normal(size=2 ** n)
    return StateVector(v / np.linalg.norm(v))


def random_density(n, rng):
    a = rng.normal(size=(2 ** n, 2 ** n)) + 1j * rng.normal(size=(2 ** n, 2 ** n))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real
