"""Type checking for classical terms, quantum terms and configurations.

The checker is bidirectional. Synthesis works for every node except
injections and folds that lack a type annotation; those are accepted in
checking mode, where the expected type supplies the annotation. Checking
also elaborates: the returned terms have every injection and fold annotated
and every ascription erased, so they synthesize on their own and can be fed
to the evaluator and re-checked after each reduction step.

The quantum context is linear. Instead of guessing context splits, the whole
context is threaded through the derivation and each variable is flagged when
consumed; a second use is ``NonLinearUse`` and an unconsumed entry at the end
of its scope is ``UnusedLinear``.
"""

from __future__ import annotations

import functools

from .ast import (
    Annot, App, Arrow, CMu, CProd, CSum, CTVar, CType, CUnit, Case, Config, Fold,
    Gate, Init, Inj, Lam, LetLift, LetTensor, Meas, New, Pair, Proj, QAnnot, QApp,
    QCase, QFold, QFun, QInj, QLam, QMu, QSum, QTVar, QTensor, QType, QUnfold,
    QUnit, QVar, Qbit, Run, Seq, Star, Tensor, Unfold, Unit, Var, bit_type,
    free_qvars, is_closed_type, is_observable, obs_translate_type,
    obs_untranslate_type, qbits, types_equal, unfold_type,
)
from .errors import ErrorKind, TypeCheckError

K = ErrorKind


def _show(t):
    from .printer import show_type
    return show_type(t)


def _err(kind, message, node=None, expected=None, actual=None, needs_annotation=False):
    span = getattr(node, "span", None)
    return TypeCheckError(kind, message, span, expected, actual, needs_annotation)


def _mismatch(node, expected, actual, what="term"):
    return _err(K.MISMATCH, f"{what} has type {_show(actual)} but {_show(expected)} was expected",
                node, expected, actual)


# ---------------------------------------------------------------- well-formedness

def check_type_wf(ctx, t):
    """Raise ``IllFormedType`` unless ``ctx |- t`` by the formation rules."""
    ctx = tuple(ctx)
    if len(set(ctx)) != len(ctx):
        raise _err(K.ILL_FORMED_TYPE, "type context lists a variable twice", t)
    _wf(ctx, t, QType if isinstance(t, QType) else CType)


def _wf(ctx, t, family):
    if not isinstance(t, family):
        raise _err(K.ILL_FORMED_TYPE, f"{_show(t)} is not a {'quantum' if family is QType else 'classical'} type", t)
    match t:
        case QTVar(x) | CTVar(x):
            if x not in ctx:
                raise _err(K.ILL_FORMED_TYPE, f"unbound type variable {x}", t)
        case QMu(b, body) | CMu(b, body):
            _wf(ctx + (b,), body, family)
        case QSum(l, r) | QTensor(l, r) | CSum(l, r) | CProd(l, r) | Arrow(l, r):
            _wf(ctx, l, family)
            _wf(ctx, r, family)
        case QFun(a, b):
            for part in (a, b):
                if isinstance(part, QType) and not is_closed_type(part):
                    raise _err(K.ILL_FORMED_TYPE, f"Q(A, B) needs closed components, got {_show(part)}", t)
                _wf((), part, QType)


def _closed_wf(t, family):
    _wf((), t, family)


# ---------------------------------------------------------------- linear context

class QuantumCtx:
    """Quantum variables with consumed flags; rebinding a name shadows it."""

    def __init__(self, entries=()):
        self._slots = {}
        for name, ty in entries:
            self.bind(name, ty)

    def bind(self, name, ty):
        self._slots.setdefault(name, []).append([ty, False])

    def use(self, name, node):
        stack = self._slots.get(name)
        if not stack:
            raise _err(K.UNBOUND, f"unbound quantum variable {name}", node)
        entry = stack[-1]
        if entry[1]:
            raise _err(K.NON_LINEAR_USE, f"quantum variable {name} is used more than once", node)
        entry[1] = True
        return entry[0]

    def unbind(self, name, node):
        entry = self._slots[name].pop()
        if not self._slots[name]:
            del self._slots[name]
        if not entry[1]:
            raise _err(K.UNUSED_LINEAR, f"quantum variable {name} is never used", node)

    def snapshot(self):
        return {k: [list(e) for e in v] for k, v in self._slots.items()}

    def restore(self, snap):
        self._slots = {k: [list(e) for e in v] for k, v in snap.items()}

    def finish(self, node):
        for name, stack in self._slots.items():
            for _, used in stack:
                if not used:
                    raise _err(K.UNUSED_LINEAR, f"quantum variable {name} is never used", node)

    def all_consumed(self):
        return all(used for stack in self._slots.values() for _, used in stack)


def _consumed(snap):
    return {(k, i) for k, v in snap.items() for i, (_, used) in enumerate(v) if used}


def _tensor_width(q):
    n = 1
    while isinstance(q, Tensor):
        n += 1
        q = q.right
    return n


def _qbit_width(t):
    n = 1
    while isinstance(t, QTensor):
        if not isinstance(t.left, Qbit):
            return None
        n += 1
        t = t.right
    return n if isinstance(t, Qbit) else None


def _tensor_type(types):
    types = list(types)
    out = types[-1]
    for t in reversed(types[:-1]):
        out = QTensor(t, out)
    return out


# ---------------------------------------------------------------- checker

class _Checker:

    # classical synthesis
    def synth_c(self, phi, m):
        match m:
            case Var(x):
                if x not in phi:
                    raise _err(K.UNBOUND, f"unbound classical variable {x}", m)
                return m, phi[x]
            case Unit():
                return m, CUnit()
            case Pair(a, b):
                a, ta = self.synth_c(phi, a)
                b, tb = self.synth_c(phi, b)
                return Pair(a, b, span=m.span), CProd(ta, tb)
            case Proj(i, b):
                b, t = self.synth_c(phi, b)
                if not isinstance(t, CProd):
                    raise _err(K.MISMATCH, f"projection from non-product type {_show(t)}", m, actual=t)
                return Proj(i, b, span=m.span), (t.left if i == 1 else t.right)
            case Inj(i, b, ann):
                if ann is None:
                    raise _err(K.MISMATCH, "cannot infer the type of an injection; add an annotation",
                               m, needs_annotation=True)
                _closed_wf(ann, CType)
                return self.check_c(phi, Inj(i, b, None, span=m.span), ann), ann
            case Case(s, x, l, y, r):
                s, ts = self.synth_c(phi, s)
                if not isinstance(ts, CSum):
                    raise _err(K.MISMATCH, f"case on non-sum type {_show(ts)}", m, actual=ts)
                pl, pr = {**phi, x: ts.left}, {**phi, y: ts.right}
                try:
                    l, t = self.synth_c(pl, l)
                    r = self.check_c(pr, r, t)
                except TypeCheckError as e:
                    if not e.needs_annotation:
                        raise
                    try:
                        r, t = self.synth_c(pr, r)
                    except TypeCheckError:
                        raise e
                    l = self.check_c(pl, l, t)
                return Case(s, x, l, y, r, span=m.span), t
            case Lam(x, ty, b):
                _closed_wf(ty, CType)
                b, tb = self.synth_c({**phi, x: ty}, b)
                return Lam(x, ty, b, span=m.span), Arrow(ty, tb)
            case App(f, a):
                f, tf = self.synth_c(phi, f)
                if not isinstance(tf, Arrow):
                    raise _err(K.MISMATCH, f"applying a term of non-function type {_show(tf)}", m, actual=tf)
                a = self.check_c(phi, a, tf.dom)
                return App(f, a, span=m.span), tf.cod
            case Fold(b, ann):
                if ann is None:
                    raise _err(K.MISMATCH, "cannot infer the type of a fold; add an annotation",
                               m, needs_annotation=True)
                _closed_wf(ann, CType)
                return self.check_c(phi, Fold(b, None, span=m.span), ann), ann
            case Unfold(b):
                b, t = self.synth_c(phi, b)
                if not isinstance(t, CMu):
                    raise _err(K.MISMATCH, f"unfold of non-recursive type {_show(t)}", m, actual=t)
                return Unfold(b, span=m.span), unfold_type(t)
            case QLam(params, body):
                params = self._params(m, params)
                ctx = QuantumCtx(params)
                body, tb = self.synth_q(phi, ctx, body)
                ctx.finish(m)
                return QLam(params, body, span=m.span), QFun(_tensor_type(t for _, t in params), tb)
            case New():
                return m, QFun(bit_type(), Qbit())
            case Meas():
                return m, QFun(Qbit(), bit_type())
            case Gate(spec):
                if spec.arity < 1:
                    raise _err(K.ARITY_MISMATCH, "unitaries need arity at least 1", m)
                return m, QFun(qbits(spec.arity), qbits(spec.arity))
            case Run(c):
                c, t, _ = self.config(phi, c, m)
                if not is_observable(t):
                    raise _err(K.NOT_OBSERVABLE, f"run needs an observable result, got {_show(t)}", m, actual=t)
                return Run(c, span=m.span), obs_translate_type(t)
            case Annot(b, ty):
                _closed_wf(ty, CType)
                return self.check_c(phi, b, ty), ty
        raise _err(K.MISMATCH, f"not a classical term: {type(m).__name__}", m)

    def _params(self, node, params):
        params = tuple((x, t) for x, t in params)
        if not params:
            raise _err(K.ARITY_MISMATCH, "quantum lambda needs at least one parameter", node)
        names = [x for x, _ in params]
        if len(set(names)) != len(names):
            raise _err(K.NON_LINEAR_USE, "quantum lambda binds a name twice", node)
        for _, t in params:
            _closed_wf(t, QType)
        return params

    # classical checking
    def check_c(self, phi, m, want):
        match m:
            case Inj(i, b, None):
                if not isinstance(want, CSum):
                    raise _err(K.MISMATCH, f"injection checked against non-sum type {_show(want)}", m, expected=want)
                b = self.check_c(phi, b, want.left if i == 1 else want.right)
                return Inj(i, b, want, span=m.span)
            case Fold(b, None):
                if not isinstance(want, CMu):
                    raise _err(K.MISMATCH, f"fold checked against non-recursive type {_show(want)}", m, expected=want)
                return Fold(self.check_c(phi, b, unfold_type(want)), want, span=m.span)
            case Pair(a, b) if isinstance(want, CProd):
                return Pair(self.check_c(phi, a, want.left), self.check_c(phi, b, want.right), span=m.span)
            case Case(s, x, l, y, r):
                s, ts = self.synth_c(phi, s)
                if not isinstance(ts, CSum):
                    raise _err(K.MISMATCH, f"case on non-sum type {_show(ts)}", m, actual=ts)
                l = self.check_c({**phi, x: ts.left}, l, want)
                r = self.check_c({**phi, y: ts.right}, r, want)
                return Case(s, x, l, y, r, span=m.span)
            case Lam(x, ty, b) if isinstance(want, Arrow):
                _closed_wf(ty, CType)
                if not types_equal(ty, want.dom):
                    raise _mismatch(m, want.dom, ty, "lambda parameter")
                return Lam(x, ty, self.check_c({**phi, x: ty}, b, want.cod), span=m.span)
            case QLam(params, body) if isinstance(want, QFun):
                params = self._params(m, params)
                dom = _tensor_type(t for _, t in params)
                if not types_equal(dom, want.dom):
                    raise _mismatch(m, want.dom, dom, "quantum lambda domain")
                ctx = QuantumCtx(params)
                body = self.check_q(phi, ctx, body, want.cod)
                ctx.finish(m)
                return QLam(params, body, span=m.span)
            case Annot(b, ty):
                _closed_wf(ty, CType)
                if not types_equal(ty, want):
                    raise _mismatch(m, want, ty, "ascription")
                return self.check_c(phi, b, ty)
        m2, got = self.synth_c(phi, m)
        if not types_equal(got, want):
            raise _mismatch(m, want, got)
        return m2

    # quantum synthesis
    def synth_q(self, phi, ctx, q):
        match q:
            case QVar(x):
                return q, ctx.use(x, q)
            case Star():
                return q, QUnit()
            case Seq(a, b):
                a = self.check_q(phi, ctx, a, QUnit())
                b, t = self.synth_q(phi, ctx, b)
                return Seq(a, b, span=q.span), t
            case Tensor(a, b):
                a, ta = self.synth_q(phi, ctx, a)
                b, tb = self.synth_q(phi, ctx, b)
                return Tensor(a, b, span=q.span), QTensor(ta, tb)
            case LetTensor(x, y, a, b):
                a, x, y, ta = self._let_head(phi, ctx, q)
                ctx.bind(x, ta.left)
                ctx.bind(y, ta.right)
                b, t = self.synth_q(phi, ctx, b)
                ctx.unbind(y, q)
                ctx.unbind(x, q)
                return LetTensor(x, y, a, b, span=q.span), t
            case QInj(i, b, ann):
                if ann is None:
                    raise _err(K.MISMATCH, "cannot infer the type of an injection; add an annotation",
                               q, needs_annotation=True)
                _closed_wf(ann, QType)
                return self.check_q(phi, ctx, QInj(i, b, None, span=q.span), ann), ann
            case QCase():
                return self._qcase(phi, ctx, q, None)
            case QFold(b, ann):
                if ann is None:
                    raise _err(K.MISMATCH, "cannot infer the type of a fold; add an annotation",
                               q, needs_annotation=True)
                _closed_wf(ann, QType)
                return self.check_q(phi, ctx, QFold(b, None, span=q.span), ann), ann
            case QUnfold(b):
                b, t = self.synth_q(phi, ctx, b)
                if not isinstance(t, QMu):
                    raise _err(K.MISMATCH, f"unfold of non-recursive type {_show(t)}", q, actual=t)
                return QUnfold(b, span=q.span), unfold_type(t)
            case QApp(m, a):
                m, tm = self.synth_c(phi, m)
                if not isinstance(tm, QFun):
                    raise _err(K.MISMATCH, f"applying a term of type {_show(tm)} to a quantum argument",
                               q, actual=tm)
                try:
                    a = self.check_q(phi, ctx, a, tm.dom)
                except TypeCheckError as e:
                    width = _qbit_width(tm.dom)
                    if e.kind is K.MISMATCH and width is not None and _tensor_width(a) != width:
                        raise _err(K.ARITY_MISMATCH,
                                   f"expected {width} qubit argument(s), got {_tensor_width(a)}", q)
                    raise
                return QApp(m, a, span=q.span), tm.cod
            case Init(m):
                m, tm = self.synth_c(phi, m)
                if not is_observable(tm):
                    raise _err(K.NOT_OBSERVABLE, f"init needs an observable type, got {_show(tm)}", q, actual=tm)
                return Init(m, span=q.span), obs_untranslate_type(tm)
            case LetLift(x, a, b):
                a, t = self.synth_q(phi, ctx, a)
                if not is_observable(t):
                    raise _err(K.NOT_OBSERVABLE, f"lift needs an observable type, got {_show(t)}", q, actual=t)
                b, tb = self.synth_q({**phi, x: obs_translate_type(t)}, ctx, b)
                return LetLift(x, a, b, span=q.span), tb
            case QAnnot(b, ty):
                _closed_wf(ty, QType)
                return self.check_q(phi, ctx, b, ty), ty
        raise _err(K.MISMATCH, f"not a quantum term: {type(q).__name__}", q)

    def _let_head(self, phi, ctx, q):
        if q.lvar == q.rvar:
            raise _err(K.NON_LINEAR_USE, f"let binds {q.lvar} twice", q)
        a, ta = self.synth_q(phi, ctx, q.bound)
        if not isinstance(ta, QTensor):
            raise _err(K.MISMATCH, f"let-tensor on non-tensor type {_show(ta)}", q, actual=ta)
        return a, q.lvar, q.rvar, ta

    def _qcase(self, phi, ctx, q, want):
        s, ts = self.synth_q(phi, ctx, q.scrut)
        if not isinstance(ts, QSum):
            raise _err(K.MISMATCH, f"case on non-sum type {_show(ts)}", q, actual=ts)
        before = ctx.snapshot()

        def branch(var, ty, body, expect):
            ctx.restore(before)
            ctx.bind(var, ty)
            if expect is None:
                body, t = self.synth_q(phi, ctx, body)
            else:
                body, t = self.check_q(phi, ctx, body, expect), expect
            ctx.unbind(var, q)
            return body, t, ctx.snapshot()

        try:
            l, t, after_l = branch(q.lvar, ts.left, q.left, want)
            r, _, after_r = branch(q.rvar, ts.right, q.right, t)
        except TypeCheckError as e:
            if want is not None or not e.needs_annotation:
                raise
            try:
                r, t, after_r = branch(q.rvar, ts.right, q.right, None)
            except TypeCheckError:
                raise e
            l, _, after_l = branch(q.lvar, ts.left, q.left, t)
        only = _consumed(after_l) ^ _consumed(after_r)
        if only:
            names = ", ".join(sorted({k for k, _ in only}))
            raise _err(K.UNUSED_LINEAR, f"case branches consume different quantum variables ({names})", q)
        ctx.restore(after_l)
        return QCase(s, q.lvar, l, q.rvar, r, span=q.span), t

    # quantum checking
    def check_q(self, phi, ctx, q, want):
        match q:
            case QInj(i, b, None):
                if not isinstance(want, QSum):
                    raise _err(K.MISMATCH, f"injection checked against non-sum type {_show(want)}", q, expected=want)
                b = self.check_q(phi, ctx, b, want.left if i == 1 else want.right)
                return QInj(i, b, want, span=q.span)
            case QFold(b, None):
                if not isinstance(want, QMu):
                    raise _err(K.MISMATCH, f"fold checked against non-recursive type {_show(want)}", q, expected=want)
                return QFold(self.check_q(phi, ctx, b, unfold_type(want)), want, span=q.span)
            case Tensor(a, b) if isinstance(want, QTensor):
                a = self.check_q(phi, ctx, a, want.left)
                b = self.check_q(phi, ctx, b, want.right)
                return Tensor(a, b, span=q.span)
            case Seq(a, b):
                a = self.check_q(phi, ctx, a, QUnit())
                return Seq(a, self.check_q(phi, ctx, b, want), span=q.span)
            case LetTensor(_, _, _, b):
                a, x, y, ta = self._let_head(phi, ctx, q)
                ctx.bind(x, ta.left)
                ctx.bind(y, ta.right)
                b = self.check_q(phi, ctx, b, want)
                ctx.unbind(y, q)
                ctx.unbind(x, q)
                return LetTensor(x, y, a, b, span=q.span)
            case QCase():
                return self._qcase(phi, ctx, q, want)[0]
            case LetLift(x, a, b):
                a, t = self.synth_q(phi, ctx, a)
                if not is_observable(t):
                    raise _err(K.NOT_OBSERVABLE, f"lift needs an observable type, got {_show(t)}", q, actual=t)
                b = self.check_q({**phi, x: obs_translate_type(t)}, ctx, b, want)
                return LetLift(x, a, b, span=q.span)
            case Init(m):
                if not is_observable(want):
                    raise _err(K.NOT_OBSERVABLE, f"init at non-observable type {_show(want)}", q, expected=want)
                return Init(self.check_c(phi, m, obs_translate_type(want)), span=q.span)
            case QAnnot(b, ty):
                _closed_wf(ty, QType)
                if not types_equal(ty, want):
                    raise _mismatch(q, want, ty, "ascription")
                return self.check_q(phi, ctx, b, ty)
        q2, got = self.synth_q(phi, ctx, q)
        if not types_equal(got, want):
            raise _mismatch(q, want, got)
        return q2

    # configurations
    def config(self, phi, c, node=None):
        link = c.link_map
        n = c.state.num_qubits
        fv = free_qvars(c.term)
        if set(link) != set(fv):
            raise _err(K.MISMATCH, f"linking domain {sorted(link)} differs from free quantum variables {sorted(fv)}",
                       node)
        idx = list(link.values())
        if len(set(idx)) != len(idx):
            raise _err(K.MISMATCH, "linking function is not injective", node)
        if any(not 1 <= i <= n for i in idx):
            raise _err(K.MISMATCH, f"linking points outside qubits 1..{n}", node)
        ctx = QuantumCtx((x, Qbit()) for x in fv)
        term, t = self.synth_q(phi, ctx, c.term)
        ctx.finish(node)
        return Config(c.state, c.linking, term), t, n - len(fv)


def _spanned(method):
    """Give a span-less rejection the span of the nearest enclosing node;
    desugared nodes carry no span of their own."""
    @functools.wraps(method)
    def wrapper(self, phi, *rest):
        try:
            return method(self, phi, *rest)
        except TypeCheckError as e:
            node = rest[-2] if method.__name__ in ("check_c", "check_q") else rest[-1]
            if e.span is None and getattr(node, "span", None) is not None:
                e.span = node.span
            raise
    return wrapper


for _name in ("synth_c", "check_c", "synth_q", "check_q"):
    setattr(_Checker, _name, _spanned(getattr(_Checker, _name)))

_CHECKER = _Checker()


def _phi(phi):
    if phi is None:
        return {}
    return dict(phi)


def elaborate_classical(phi, m):
    """Return ``(annotated term, type)`` for ``phi |- m``."""
    return _CHECKER.synth_c(_phi(phi), m)


def elaborate_classical_at(phi, m, ty):
    """Check ``m`` against ``ty`` and return the annotated term."""
    return _CHECKER.check_c(_phi(phi), m, ty)


def check_classical(phi, m):
    return elaborate_classical(phi, m)[1]


def elaborate_quantum(phi, gamma, q):
    ctx = QuantumCtx(list(dict(gamma).items()) if gamma else ())
    q2, t = _CHECKER.synth_q(_phi(phi), ctx, q)
    ctx.finish(q)
    return q2, t


def check_quantum(phi, gamma, q):
    return elaborate_quantum(phi, gamma, q)[1]


def elaborate_config(phi, c):
    """Return ``(annotated configuration, type, auxiliary qubit count)``."""
    return _CHECKER.config(_phi(phi), c)


def check_config(phi, c):
    _, t, k = elaborate_config(phi, c)
    return t, k
