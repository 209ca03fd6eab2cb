"""Abstract syntax: types, classical and quantum terms, configurations.

Classical and quantum variables live in separate namespaces (``Var`` versus
``QVar``), as do classical and quantum type variables. Every node is an
immutable dataclass; source spans are carried for diagnostics but ignored by
equality and hashing.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from .errors import NotObservable
from .gates import GateSpec
from .qstate import StateVector


@dataclass(frozen=True)
class Span:
    start: int
    end: int


def _span():
    return field(default=None, compare=False, repr=False)


# ---------------------------------------------------------------- types

class QType:
    """Quantum types."""


@dataclass(frozen=True)
class QTVar(QType):
    name: str
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class QUnit(QType):
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Qbit(QType):
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class QSum(QType):
    left: QType
    right: QType
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class QTensor(QType):
    left: QType
    right: QType
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class QMu(QType):
    binder: str
    body: QType
    span: Optional[Span] = _span()


class CType:
    """Classical types."""


@dataclass(frozen=True)
class CTVar(CType):
    name: str
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class CUnit(CType):
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class CSum(CType):
    left: CType
    right: CType
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class CProd(CType):
    left: CType
    right: CType
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Arrow(CType):
    dom: CType
    cod: CType
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class QFun(CType):
    dom: QType
    cod: QType
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class CMu(CType):
    binder: str
    body: CType
    span: Optional[Span] = _span()


Type = Union[QType, CType]

_VARS = (QTVar, CTVar)
_MUS = (QMu, CMu)


def bit_type():
    return QSum(QUnit(), QUnit())


def bool_type():
    return CSum(CUnit(), CUnit())


def qbits(n):
    """Right-nested ``qbit (x) ... (x) qbit`` with ``n >= 1`` factors."""
    t = Qbit()
    for _ in range(n - 1):
        t = QTensor(Qbit(), t)
    return t


def free_type_vars(t):
    match t:
        case QTVar(name) | CTVar(name):
            return {name}
        case QMu(b, body) | CMu(b, body):
            return free_type_vars(body) - {b}
        case QSum(l, r) | QTensor(l, r) | CSum(l, r) | CProd(l, r) | Arrow(l, r):
            return free_type_vars(l) | free_type_vars(r)
        case _:
            # units, qbit and Q(A,B) whose components are closed
            return set()


def fresh_name(base, avoid):
    base = base.rstrip("0123456789") or "v"
    if base not in avoid:
        return base
    i = 1
    while f"{base}{i}" in avoid:
        i += 1
    return f"{base}{i}"


def type_subst(body, binder, arg):
    """Capture-avoiding ``body[arg/binder]`` within one type family."""
    match body:
        case QTVar(name) | CTVar(name):
            return arg if name == binder else body
        case QMu(b, inner) | CMu(b, inner):
            if b == binder:
                return body
            if b in free_type_vars(arg):
                nb = fresh_name(b, free_type_vars(arg) | free_type_vars(inner) | {binder})
                var = QTVar(nb) if isinstance(body, QMu) else CTVar(nb)
                inner = type_subst(inner, b, var)
                b = nb
            return type(body)(b, type_subst(inner, binder, arg))
        case QSum(l, r) | QTensor(l, r) | CSum(l, r) | CProd(l, r) | Arrow(l, r):
            return type(body)(type_subst(l, binder, arg), type_subst(r, binder, arg))
        case _:
            return body


def unfold_type(mu):
    """One unrolling ``A[muX.A/X]`` of a recursive type."""
    return type_subst(mu.body, mu.binder, mu)


def type_key(t, env=()):
    """De Bruijn form of a type; equal keys iff alpha-equivalent."""
    match t:
        case QTVar(name) | CTVar(name):
            for i, b in enumerate(reversed(env)):
                if b == name:
                    return ("#", i)
            return ("free", name)
        case QMu(b, body) | CMu(b, body):
            return (type(t).__name__, type_key(body, env + (b,)))
        case QSum(l, r) | QTensor(l, r) | CSum(l, r) | CProd(l, r) | Arrow(l, r):
            return (type(t).__name__, type_key(l, env), type_key(r, env))
        case QFun(a, b):
            return ("QFun", type_key(a), type_key(b))
        case _:
            return (type(t).__name__,)


def types_equal(a, b):
    return type_key(a) == type_key(b)


def is_observable(t):
    match t:
        case Qbit() | Arrow() | QFun():
            return False
        case QMu(_, body) | CMu(_, body):
            return is_observable(body)
        case QSum(l, r) | QTensor(l, r) | CSum(l, r) | CProd(l, r):
            return is_observable(l) and is_observable(r)
        case _:
            return True


def is_closed_type(t):
    return not free_type_vars(t)


def _translate(t):
    match t:
        case QTVar(name):
            return CTVar(name)
        case QUnit():
            return CUnit()
        case QSum(l, r):
            return CSum(_translate(l), _translate(r))
        case QTensor(l, r):
            return CProd(_translate(l), _translate(r))
        case QMu(b, body):
            return CMu(b, _translate(body))
    raise NotObservable(f"type {t} is not observable")


def _untranslate(t):
    match t:
        case CTVar(name):
            return QTVar(name)
        case CUnit():
            return QUnit()
        case CSum(l, r):
            return QSum(_untranslate(l), _untranslate(r))
        case CProd(l, r):
            return QTensor(_untranslate(l), _untranslate(r))
        case CMu(b, body):
            return QMu(b, _untranslate(body))
    raise NotObservable(f"type {t} is not observable")


def obs_translate_type(t):
    """Observable quantum type to its classical counterpart (I to 1, (+) to +,
    (x) to *, mu to mu)."""
    if not is_closed_type(t):
        raise NotObservable("open types have no observable translation")
    return _translate(t)


def obs_untranslate_type(t):
    """Inverse of :func:`obs_translate_type`."""
    if not is_closed_type(t):
        raise NotObservable("open types have no observable translation")
    return _untranslate(t)


# ---------------------------------------------------------------- terms

class CTerm:
    """Classical terms."""


class QTerm:
    """Quantum terms."""


@dataclass(frozen=True)
class Var(CTerm):
    name: str
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Unit(CTerm):
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Pair(CTerm):
    first: CTerm
    second: CTerm
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Proj(CTerm):
    index: int
    body: CTerm
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Inj(CTerm):
    """``in_index body``; ``ann`` is the whole sum type when known."""
    index: int
    body: CTerm
    ann: Optional[CType] = None
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Case(CTerm):
    scrut: CTerm
    lvar: str
    left: CTerm
    rvar: str
    right: CTerm
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Lam(CTerm):
    var: str
    ty: CType
    body: CTerm
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class App(CTerm):
    fn: CTerm
    arg: CTerm
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Fold(CTerm):
    body: CTerm
    ann: Optional[CType] = None
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Unfold(CTerm):
    body: CTerm
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class QLam(CTerm):
    """Quantum lambda over ``params = ((x1, A1), ..., (xn, An))``, n >= 1."""
    params: tuple
    body: QTerm
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class New(CTerm):
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Meas(CTerm):
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Gate(CTerm):
    spec: GateSpec
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Run(CTerm):
    config: "Config"
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Annot(CTerm):
    body: CTerm
    ty: CType
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class QVar(QTerm):
    name: str
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Star(QTerm):
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Seq(QTerm):
    first: QTerm
    second: QTerm
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Tensor(QTerm):
    left: QTerm
    right: QTerm
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class LetTensor(QTerm):
    lvar: str
    rvar: str
    bound: QTerm
    body: QTerm
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class QInj(QTerm):
    index: int
    body: QTerm
    ann: Optional[QType] = None
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class QCase(QTerm):
    scrut: QTerm
    lvar: str
    left: QTerm
    rvar: str
    right: QTerm
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class QFold(QTerm):
    body: QTerm
    ann: Optional[QType] = None
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class QUnfold(QTerm):
    body: QTerm
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class QApp(QTerm):
    fn: CTerm
    arg: QTerm
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Init(QTerm):
    body: CTerm
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class LetLift(QTerm):
    """``let var = lift bound in body``; ``var`` is a classical variable."""
    var: str
    bound: QTerm
    body: QTerm
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class QAnnot(QTerm):
    body: QTerm
    ty: QType
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Config:
    """``[state, linking, term]``; ``linking`` is a sorted tuple of
    ``(variable, 1-based qubit index)`` pairs."""
    state: StateVector
    linking: tuple
    term: QTerm

    @property
    def link_map(self):
        return dict(self.linking)

    @staticmethod
    def make(state, linking, term):
        return Config(state, tuple(sorted(dict(linking).items())), term)


def trivial_config(q):
    """The configuration ``[1, {}, q]`` behind the ``run q`` sugar."""
    return Config(StateVector.scalar(), (), q)


def tensor_of(items):
    """Right-nested tensor of quantum terms."""
    items = list(items)
    out = items[-1]
    for it in reversed(items[:-1]):
        out = Tensor(it, out)
    return out


def split_tensor(v, n):
    """Decompose a right-nested tensor into ``n`` components, or None."""
    parts = []
    for _ in range(n - 1):
        if not isinstance(v, Tensor):
            return None
        parts.append(v.left)
        v = v.right
    parts.append(v)
    return parts


# ---------------------------------------------------------------- values

def is_value(m):
    match m:
        case Var() | Unit() | Lam() | QLam() | New() | Meas() | Gate():
            return True
        case Pair(a, b):
            return is_value(a) and is_value(b)
        case Inj(_, b) | Fold(b):
            return is_value(b)
    return False


def is_qvalue(q):
    match q:
        case QVar() | Star():
            return True
        case Tensor(a, b):
            return is_qvalue(a) and is_qvalue(b)
        case QInj(_, b) | QFold(b):
            return is_qvalue(b)
    return False


def is_value_config(c):
    return is_qvalue(c.term)


def obs_translate_value(v):
    """Closed observable quantum value to classical value."""
    match v:
        case Star():
            return Unit()
        case Tensor(a, b):
            return Pair(obs_translate_value(a), obs_translate_value(b))
        case QInj(i, b, ann):
            return Inj(i, obs_translate_value(b), None if ann is None else obs_translate_type(ann))
        case QFold(b, ann):
            return Fold(obs_translate_value(b), None if ann is None else obs_translate_type(ann))
    raise NotObservable(f"{v} is not a closed observable quantum value")


def obs_untranslate_value(v):
    """Closed observable classical value to quantum value."""
    match v:
        case Unit():
            return Star()
        case Pair(a, b):
            return Tensor(obs_untranslate_value(a), obs_untranslate_value(b))
        case Inj(i, b, ann):
            return QInj(i, obs_untranslate_value(b), None if ann is None else obs_untranslate_type(ann))
        case Fold(b, ann):
            return QFold(obs_untranslate_value(b), None if ann is None else obs_untranslate_type(ann))
    raise NotObservable(f"{v} is not a closed observable classical value")


# ---------------------------------------------------------------- free variables

def free_cvars(t):
    """Free classical variables of a classical or quantum term."""
    match t:
        case Var(name):
            return {name}
        case Unit() | New() | Meas() | Gate() | QVar() | Star():
            return set()
        case Pair(a, b) | App(a, b) | Seq(a, b) | Tensor(a, b) | QApp(a, b):
            return free_cvars(a) | free_cvars(b)
        case Proj(_, b) | Inj(_, b) | Fold(b) | Unfold(b) | Annot(b) | QInj(_, b) \
                | QFold(b) | QUnfold(b) | Init(b) | QAnnot(b) | QLam(_, b):
            return free_cvars(b)
        case Case(s, x, l, y, r):
            return free_cvars(s) | (free_cvars(l) - {x}) | (free_cvars(r) - {y})
        case QCase(s, _, l, _, r):
            return free_cvars(s) | free_cvars(l) | free_cvars(r)
        case Lam(x, _, b):
            return free_cvars(b) - {x}
        case LetTensor(_, _, a, b):
            return free_cvars(a) | free_cvars(b)
        case LetLift(x, a, b):
            return free_cvars(a) | (free_cvars(b) - {x})
        case Run(c):
            return free_cvars(c.term)
    raise TypeError(f"not a term: {t!r}")


def free_qvars(q):
    """Free quantum variables of a quantum term, in order of first occurrence."""
    out = {}
    _fqv(q, frozenset(), out)
    return list(out)


def _fqv(q, bound, out):
    match q:
        case QVar(name):
            if name not in bound:
                out.setdefault(name, None)
        case Seq(a, b) | Tensor(a, b):
            _fqv(a, bound, out)
            _fqv(b, bound, out)
        case LetTensor(x, y, a, b):
            _fqv(a, bound, out)
            _fqv(b, bound | {x, y}, out)
        case QCase(s, x, l, y, r):
            _fqv(s, bound, out)
            _fqv(l, bound | {x}, out)
            _fqv(r, bound | {y}, out)
        case QInj(_, b) | QFold(b) | QUnfold(b) | QAnnot(b):
            _fqv(b, bound, out)
        case QApp(_, b):
            _fqv(b, bound, out)
        case LetLift(_, a, b):
            _fqv(a, bound, out)
            _fqv(b, bound, out)
        case Star() | Init():
            pass
        case _:
            raise TypeError(f"not a quantum term: {q!r}")


def all_qnames(t, acc=None):
    """Every quantum variable name occurring anywhere, bound or free,
    including inside quantum lambdas nested in classical subterms."""
    acc = set() if acc is None else acc
    match t:
        case QVar(name):
            acc.add(name)
        case LetTensor(x, y, a, b):
            acc.update((x, y))
            all_qnames(a, acc)
            all_qnames(b, acc)
        case QCase(s, x, l, y, r):
            acc.update((x, y))
            for c in (s, l, r):
                all_qnames(c, acc)
        case QLam(params, b):
            acc.update(p for p, _ in params)
            all_qnames(b, acc)
        case Case(s, _, l, _, r):
            for c in (s, l, r):
                all_qnames(c, acc)
        case Run(c):
            all_qnames(c.term, acc)
        case LetLift(_, a, b) | Pair(a, b) | App(a, b) | Seq(a, b) | Tensor(a, b) | QApp(a, b):
            all_qnames(a, acc)
            all_qnames(b, acc)
        case Proj(_, b) | Inj(_, b) | Fold(b) | Unfold(b) | Annot(b) | Lam(_, _, b) \
                | QInj(_, b) | QFold(b) | QUnfold(b) | Init(b) | QAnnot(b):
            all_qnames(b, acc)
    return acc


# ---------------------------------------------------------------- substitution

def subst_c(t, sub):
    """Simultaneous capture-avoiding substitution of classical terms for
    classical variables in a classical or quantum term."""
    if not sub:
        return t
    fv = set()
    for v in sub.values():
        fv |= free_cvars(v)
    return _sc(t, dict(sub), fv)


def _bind_c(x, body, sub, fv):
    """Handle a classical binder ``x`` scoping over ``body``."""
    if x in sub:
        sub = {k: v for k, v in sub.items() if k != x}
    if not sub:
        return x, body, sub
    if x in fv:
        nx = fresh_name(x, fv | free_cvars(body) | set(sub))
        body = _sc(body, {x: Var(nx)}, {nx})
        x = nx
    return x, body, sub


def _sc(t, sub, fv):
    if not sub:
        return t
    match t:
        case Var(name):
            return sub.get(name, t)
        case Unit() | New() | Meas() | Gate() | QVar() | Star():
            return t
        case Pair(a, b):
            return Pair(_sc(a, sub, fv), _sc(b, sub, fv), span=t.span)
        case Proj(i, b):
            return Proj(i, _sc(b, sub, fv), span=t.span)
        case Inj(i, b, ann):
            return Inj(i, _sc(b, sub, fv), ann, span=t.span)
        case Case(s, x, l, y, r):
            x, l, sl = _bind_c(x, l, sub, fv)
            y, r, sr = _bind_c(y, r, sub, fv)
            return Case(_sc(s, sub, fv), x, _sc(l, sl, fv), y, _sc(r, sr, fv), span=t.span)
        case Lam(x, ty, b):
            x, b, sb = _bind_c(x, b, sub, fv)
            return Lam(x, ty, _sc(b, sb, fv), span=t.span)
        case App(a, b):
            return App(_sc(a, sub, fv), _sc(b, sub, fv), span=t.span)
        case Fold(b, ann):
            return Fold(_sc(b, sub, fv), ann, span=t.span)
        case Unfold(b):
            return Unfold(_sc(b, sub, fv), span=t.span)
        case QLam(ps, b):
            return QLam(ps, _sc(b, sub, fv), span=t.span)
        case Run(c):
            return Run(Config(c.state, c.linking, _sc(c.term, sub, fv)), span=t.span)
        case Annot(b, ty):
            return Annot(_sc(b, sub, fv), ty, span=t.span)
        case Seq(a, b):
            return Seq(_sc(a, sub, fv), _sc(b, sub, fv), span=t.span)
        case Tensor(a, b):
            return Tensor(_sc(a, sub, fv), _sc(b, sub, fv), span=t.span)
        case LetTensor(x, y, a, b):
            return LetTensor(x, y, _sc(a, sub, fv), _sc(b, sub, fv), span=t.span)
        case QInj(i, b, ann):
            return QInj(i, _sc(b, sub, fv), ann, span=t.span)
        case QCase(s, x, l, y, r):
            return QCase(_sc(s, sub, fv), x, _sc(l, sub, fv), y, _sc(r, sub, fv), span=t.span)
        case QFold(b, ann):
            return QFold(_sc(b, sub, fv), ann, span=t.span)
        case QUnfold(b):
            return QUnfold(_sc(b, sub, fv), span=t.span)
        case QApp(a, b):
            return QApp(_sc(a, sub, fv), _sc(b, sub, fv), span=t.span)
        case Init(b):
            return Init(_sc(b, sub, fv), span=t.span)
        case LetLift(x, a, b):
            a = _sc(a, sub, fv)
            x, b, sb = _bind_c(x, b, sub, fv)
            return LetLift(x, a, _sc(b, sb, fv), span=t.span)
        case QAnnot(b, ty):
            return QAnnot(_sc(b, sub, fv), ty, span=t.span)
    raise TypeError(f"not a term: {t!r}")


def subst_q(q, sub):
    """Simultaneous capture-avoiding substitution of quantum terms for
    quantum variables. Classical subterms have no free quantum variables and
    are left untouched."""
    if not sub:
        return q
    fv = set()
    for v in sub.values():
        fv |= set(free_qvars(v))
    return _sq(q, dict(sub), fv)


def _bind_q(names, body, sub, fv):
    sub = {k: v for k, v in sub.items() if k not in names}
    if not sub:
        return names, body, sub
    names = list(names)
    for i, x in enumerate(names):
        if x in fv:
            avoid = fv | set(free_qvars(body)) | set(sub) | set(names)
            nx = fresh_name(x, avoid)
            body = _sq(body, {x: QVar(nx)}, {nx})
            names[i] = nx
    return names, body, sub


def _sq(q, sub, fv):
    if not sub:
        return q
    match q:
        case QVar(name):
            return sub.get(name, q)
        case Star() | Init():
            return q
        case Seq(a, b):
            return Seq(_sq(a, sub, fv), _sq(b, sub, fv), span=q.span)
        case Tensor(a, b):
            return Tensor(_sq(a, sub, fv), _sq(b, sub, fv), span=q.span)
        case LetTensor(x, y, a, b):
            (x, y), b, sb = _bind_q((x, y), b, sub, fv)
            return LetTensor(x, y, _sq(a, sub, fv), _sq(b, sb, fv), span=q.span)
        case QInj(i, b, ann):
            return QInj(i, _sq(b, sub, fv), ann, span=q.span)
        case QCase(s, x, l, y, r):
            (x,), l, sl = _bind_q((x,), l, sub, fv)
            (y,), r, sr = _bind_q((y,), r, sub, fv)
            return QCase(_sq(s, sub, fv), x, _sq(l, sl, fv), y, _sq(r, sr, fv), span=q.span)
        case QFold(b, ann):
            return QFold(_sq(b, sub, fv), ann, span=q.span)
        case QUnfold(b):
            return QUnfold(_sq(b, sub, fv), span=q.span)
        case QApp(m, b):
            return QApp(m, _sq(b, sub, fv), span=q.span)
        case LetLift(x, a, b):
            return LetLift(x, _sq(a, sub, fv), _sq(b, sub, fv), span=q.span)
        case QAnnot(b, ty):
            return QAnnot(_sq(b, sub, fv), ty, span=q.span)
    raise TypeError(f"not a quantum term: {q!r}")


def term_subst(t, x, v):
    """``t[v/x]``, choosing the namespace from the kind of ``v``."""
    if isinstance(v, QTerm):
        return subst_q(t, {x: v})
    return subst_c(t, {x: v})


def rename_qvars(q, renaming):
    return subst_q(q, {k: QVar(v) for k, v in renaming.items()})


# ---------------------------------------------------------------- canonical keys

def term_key(t, cenv=(), qenv=(), qfree=None):
    """Alpha-normal key. Bound variables become de Bruijn indices per
    namespace; free quantum variables are looked up in ``qfree`` (mapping to
    qubit indices) when given."""

    def cv(name):
        for i, b in enumerate(reversed(cenv)):
            if b == name:
                return ("c#", i)
        return ("cfree", name)

    def qv(name):
        for i, b in enumerate(reversed(qenv)):
            if b == name:
                return ("q#", i)
        if qfree is not None and name in qfree:
            return ("qubit", qfree[name])
        return ("qfree", name)

    def k(u, c=cenv, q=qenv):
        return term_key(u, c, q, qfree)

    def ty(a):
        return None if a is None else type_key(a)

    match t:
        case Var(name):
            return cv(name)
        case QVar(name):
            return qv(name)
        case Unit() | Star() | New() | Meas():
            return (type(t).__name__,)
        case Gate(spec):
            return ("Gate", spec.key())
        case Pair(a, b) | App(a, b) | Seq(a, b) | Tensor(a, b) | QApp(a, b):
            return (type(t).__name__, k(a), k(b))
        case Proj(i, b):
            return ("Proj", i, k(b))
        case Inj(i, b, ann) | QInj(i, b, ann):
            return (type(t).__name__, i, k(b), ty(ann))
        case Fold(b, ann) | QFold(b, ann):
            return (type(t).__name__, k(b), ty(ann))
        case Unfold(b) | QUnfold(b) | Init(b):
            return (type(t).__name__, k(b))
        case Annot(b, a) | QAnnot(b, a):
            return (type(t).__name__, k(b), type_key(a))
        case Case(s, x, l, y, r):
            return ("Case", k(s), k(l, cenv + (x,)), k(r, cenv + (y,)))
        case QCase(s, x, l, y, r):
            return ("QCase", k(s), k(l, cenv, qenv + (x,)), k(r, cenv, qenv + (y,)))
        case Lam(x, a, b):
            return ("Lam", type_key(a), k(b, cenv + (x,)))
        case QLam(ps, b):
            names = tuple(p for p, _ in ps)
            return ("QLam", tuple(type_key(a) for _, a in ps),
                    term_key(b, cenv, qenv + names, None))
        case LetTensor(x, y, a, b):
            return ("LetTensor", k(a), k(b, cenv, qenv + (x, y)))
        case LetLift(x, a, b):
            return ("LetLift", k(a), k(b, cenv + (x,)))
        case Run(c):
            return ("Run", config_key(c, cenv))
    raise TypeError(f"not a term: {t!r}")


def config_key(c, cenv=()):
    """Key of a configuration: rounded amplitudes plus the term with free
    quantum variables replaced by their linked qubit indices."""
    return ("Config", c.state.key(), term_key(c.term, cenv, (), c.link_map))


def alpha_equal(a, b):
    return term_key(a) == term_key(b)
