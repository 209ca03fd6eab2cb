"""Pretty printer for the surface syntax.

Output re-parses to the same abstract syntax tree. Aliases such as ``Bool``
or ``QList(qbit)`` and the constants ``tt``/``ff`` are printed only when the
tree is exactly what the parser would produce for them.
"""

from __future__ import annotations

from .ast import (
    Annot, App, Arrow, CMu, CProd, CSum, CTVar, CUnit, Case, Fold, Gate, Init, Inj,
    Lam, LetLift, LetTensor, Meas, New, Pair, Proj, QAnnot, QApp, QCase, QFold,
    QFun, QInj, QLam, QMu, QSum, QTVar, QTensor, QUnfold, QUnit, QVar, Qbit, Run,
    Seq, Star, Tensor, Unfold, Unit, Var, free_type_vars,
)

# ---------------------------------------------------------------- aliases

ALIAS_BINDER = "X"


def list_binder(elem):
    """Binder name used when expanding ``List(elem)`` / ``QList(elem)``."""
    b = ALIAS_BINDER
    while b in free_type_vars(elem):
        b += "'"
    return b


def nat_c():
    return CMu(ALIAS_BINDER, CSum(CUnit(), CTVar(ALIAS_BINDER)))


def nat_q():
    return QMu(ALIAS_BINDER, QSum(QUnit(), QTVar(ALIAS_BINDER)))


def list_c(elem):
    b = list_binder(elem)
    return CMu(b, CSum(CUnit(), CProd(elem, CTVar(b))))


def list_q(elem):
    b = list_binder(elem)
    return QMu(b, QSum(QUnit(), QTensor(elem, QTVar(b))))


def _alias(t):
    match t:
        case CSum(CUnit(), CUnit()):
            return "Bool"
        case QSum(QUnit(), QUnit()):
            return "Bit"
        case CMu(_, CSum(CUnit(), CProd(elem, CTVar()))) if t == list_c(elem):
            return f"List({show_type(elem)})"
        case QMu(_, QSum(QUnit(), QTensor(elem, QTVar()))) if t == list_q(elem):
            return f"QList({show_type(elem)})"
    if t == nat_c():
        return "Nat"
    if t == nat_q():
        return "QNat"
    return None


# ---------------------------------------------------------------- types

T_TOP, T_SUM, T_PROD, T_ATOM = range(4)


def show_type(t, level=T_TOP):
    s, lv = _type(t)
    return f"({s})" if lv < level else s


def _type(t):
    alias = _alias(t)
    if alias is not None:
        return alias, T_ATOM
    match t:
        case QTVar(name) | CTVar(name):
            return name, T_ATOM
        case CUnit():
            return "1", T_ATOM
        case QUnit():
            return "I", T_ATOM
        case Qbit():
            return "qbit", T_ATOM
        case QFun(a, b):
            return f"Q({show_type(a)}, {show_type(b)})", T_ATOM
        case CSum(l, r):
            return f"{show_type(l, T_PROD)} + {show_type(r, T_SUM)}", T_SUM
        case QSum(l, r):
            return f"{show_type(l, T_PROD)} (+) {show_type(r, T_SUM)}", T_SUM
        case CProd(l, r):
            return f"{show_type(l, T_ATOM)} * {show_type(r, T_PROD)}", T_PROD
        case QTensor(l, r):
            return f"{show_type(l, T_ATOM)} (x) {show_type(r, T_PROD)}", T_PROD
        case Arrow(a, b):
            return f"{show_type(a, T_SUM)} -> {show_type(b, T_TOP)}", T_TOP
        case QMu(b, body) | CMu(b, body):
            return f"mu {b}. {show_type(body, T_TOP)}", T_TOP
    raise TypeError(f"not a type: {t!r}")


# ---------------------------------------------------------------- terms

EXPR, PREFIX, APP, ATOM = range(4)


def show_term(t, level=EXPR):
    s, lv = _term(t)
    return f"({s})" if lv < level else s


def _num(x):
    return repr(float(x))


def _gate(spec):
    if spec.name == "CUSTOM":
        rows = []
        for row in spec.matrix:
            rows.append("[" + ", ".join(f"({_num(z.real)}, {_num(z.imag)})" for z in row) + "]")
        return "CUSTOM [" + ", ".join(rows) + "]"
    if spec.params:
        return f"{spec.name}({', '.join(_num(p) for p in spec.params)})"
    return spec.name


def _ann(ann):
    return "" if ann is None else "{" + show_type(ann) + "}"


def _term(t):
    match t:
        case Var(name) | QVar(name):
            return name, ATOM
        case Unit():
            return "()", ATOM
        case Star():
            return "*", ATOM
        case New():
            return "new", ATOM
        case Meas():
            return "meas", ATOM
        case Gate(spec):
            return _gate(spec), ATOM
        case Inj(i, Unit(), CSum(CUnit(), CUnit())) | QInj(i, Star(), QSum(QUnit(), QUnit())):
            return ("ff" if i == 1 else "tt"), ATOM
        case Pair(a, b):
            return f"({show_term(a)}, {show_term(b)})", ATOM
        case Tensor(a, b):
            return f"<{show_term(a)}, {show_term(b)}>", ATOM
        case Annot(b, ty) | QAnnot(b, ty):
            return f"({show_term(b)} : {show_type(ty)})", ATOM
        case Proj(i, b):
            return f"{'fst' if i == 1 else 'snd'} {show_term(b, PREFIX)}", PREFIX
        case Inj(i, b, ann) | QInj(i, b, ann):
            return f"in{i}{_ann(ann)} {show_term(b, PREFIX)}", PREFIX
        case Fold(b, ann) | QFold(b, ann):
            return f"fold{_ann(ann)} {show_term(b, PREFIX)}", PREFIX
        case Unfold(b) | QUnfold(b):
            return f"unfold {show_term(b, PREFIX)}", PREFIX
        case Init(b):
            return f"init {show_term(b, PREFIX)}", PREFIX
        case Run(c):
            if c.state.num_qubits == 0 and not c.linking:
                return f"run {show_term(c.term, PREFIX)}", PREFIX
            return f"run {show_config(c)}", PREFIX
        case App(f, a) | QApp(f, a):
            return f"{show_term(f, APP)} {show_term(a, ATOM)}", APP
        case Lam(x, ty, b):
            return f"fun ({x} : {show_type(ty)}) . {show_term(b)}", EXPR
        case QLam(params, b):
            ps = ", ".join(f"{x} : {show_type(a)}" for x, a in params)
            return f"qfun ({ps}) . {show_term(b)}", EXPR
        case Case(s, x, l, y, r) | QCase(s, x, l, y, r):
            return (f"case {show_term(s)} of in1 {x} => {show_term(l)} "
                    f"| in2 {y} => {show_term(r)}"), EXPR
        case LetTensor(x, y, a, b):
            return f"let <{x}, {y}> = {show_term(a)} in {show_term(b)}", EXPR
        case LetLift(x, a, b):
            return f"let {x} = lift {show_term(a)} in {show_term(b)}", EXPR
        case Seq(a, b):
            return f"{show_term(a, PREFIX)}; {show_term(b)}", EXPR
    raise TypeError(f"not a term: {t!r}")


def show_state(s):
    if s.num_qubits == 0:
        return "1"
    parts = []
    for i, z in enumerate(s.amps):
        if abs(z) > 1e-12:
            z = complex(z)
            coef = f"{z.real:.6g}" if abs(z.imag) < 1e-12 else f"({z.real:.6g}{z.imag:+.6g}i)"
            parts.append(f"{coef}|{i:0{s.num_qubits}b}>")
    return " + ".join(parts)


def show_config(c):
    link = ", ".join(f"{x}->{i}" for x, i in sorted(c.linking, key=lambda p: p[1]))
    return f"[{show_state(c.state)}, {{{link}}}, {show_term(c.term)}]"
