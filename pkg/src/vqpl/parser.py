"""Surface syntax: lexer, parser and desugaring into the core syntax.

Parsing runs in two passes. The first builds a mode-neutral surface tree.
The second resolves it in classical or quantum mode: in quantum mode an
application chain ``a b c`` has a classical head ``a b`` and a quantum
argument ``c``, and constructs such as ``in1``, ``case`` or ``[..]`` produce
their quantum forms. Sugar (``fix``, list patterns, ``coin p``, numerals,
aliases) is expanded during resolution. The grammar is documented in
``docs/grammar.md``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Optional

from . import ast as A
from .ast import Span
from .errors import InvalidGate, ParseError
from .gates import FIXED_GATES, GATE_NAMES, PARAMETRIC_GATES, GateSpec
from .printer import list_c, list_q, nat_c, nat_q


@dataclass(frozen=True)
class Diagnostic:
    severity: str
    message: str
    span: Span
    expected: tuple = ()

    def to_json(self):
        return {"severity": self.severity, "message": self.message,
                "span": [self.span.start, self.span.end], "expected": list(self.expected)}


@dataclass
class Decl:
    name: str
    ty: Optional[A.CType]
    term: A.CTerm
    span: Optional[Span] = None


@dataclass
class SourceFile:
    decls: list
    type_aliases: dict = field(default_factory=dict)
    text: str = ""

    def decl(self, name):
        for d in self.decls:
            if d.name == name:
                return d
        raise KeyError(name)

    @property
    def names(self):
        return [d.name for d in self.decls]

    @property
    def entry(self):
        return self.decl("main")


# ---------------------------------------------------------------- lexer

KEYWORDS = {
    "def", "type", "fun", "qfun", "fix", "case", "of", "fold", "unfold", "let", "lift",
    "in", "run", "init", "new", "meas", "if", "then", "else", "mu", "in1", "in2", "fst",
    "snd", "tt", "ff", "nil", "zero", "succ", "coin", "qbit", "unit", "I",
}
PREFIX_OPS = {"in1", "in2", "fold", "unfold", "fst", "snd", "run", "init", "succ"}
ATOM_KEYWORDS = {"new", "meas", "tt", "ff", "nil", "zero", "coin"}
NUM_FUNCS = {"sqrt": math.sqrt, "acos": math.acos, "asin": math.asin, "atan": math.atan,
             "cos": math.cos, "sin": math.sin, "exp": math.exp, "log": math.log}

_TOKEN = re.compile(r"""
    (?P<ws>\s+|--[^\n]*)
  | (?P<num>\d+(?:\.\d+)?(?:[eE][+-]?\d+)?)
  | (?P<id>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<sym>::|->|=>|[()\[\]<>{},.:;=|+*/\-⊗⊕])
""", re.VERBOSE)


@dataclass(frozen=True)
class Token:
    kind: str  # id, kw, gate, num, sym, eof
    value: str
    start: int
    end: int


class _Bytes:
    """Character offset to UTF-8 byte offset conversion."""

    def __init__(self, text):
        self.table = [0]
        for ch in text:
            self.table.append(self.table[-1] + len(ch.encode("utf-8")))

    def span(self, start, end):
        return Span(self.table[start], self.table[end])


def tokenize(text):
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            b = _Bytes(text)
            raise ParseError([Diagnostic("error", f"unexpected character {text[pos]!r}",
                                         b.span(pos, pos + 1))])
        kind = m.lastgroup
        if kind != "ws":
            value = m.group()
            if kind == "id":
                if value in KEYWORDS:
                    kind = "kw"
                elif value in GATE_NAMES:
                    kind = "gate"
            out.append(Token(kind, value, m.start(), m.end()))
        pos = m.end()
    out.append(Token("eof", "", len(text), len(text)))
    return out


# ---------------------------------------------------------------- surface tree

@dataclass
class S:
    kind: str
    args: tuple
    start: int
    end: int


def _s(kind, start, end, *args):
    return S(kind, args, start, end)


# ---------------------------------------------------------------- parser

class _Parser:
    def __init__(self, text):
        self.text = text
        self.bytes = _Bytes(text)
        self.toks = tokenize(text)
        self.i = 0

    # token helpers
    def peek(self, k=0):
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, value, k=0):
        t = self.peek(k)
        return t.value == value and t.kind in ("sym", "kw")

    def advance(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def fail(self, message, expected=(), tok=None):
        tok = tok or self.peek()
        end = max(tok.end, tok.start + 1) if tok.kind != "eof" else tok.start
        span = self.bytes.span(tok.start, min(end, len(self.text)))
        raise ParseError([Diagnostic("error", message, span, tuple(expected))])

    def expect(self, value):
        if not self.at(value):
            t = self.peek()
            found = "end of input" if t.kind == "eof" else repr(t.value)
            self.fail(f"expected {value!r}, found {found}", (value,))
        return self.advance()

    def ident(self, allow_gate=False):
        t = self.peek()
        if t.kind == "id" or (allow_gate and t.kind == "gate"):
            return self.advance().value
        found = "end of input" if t.kind == "eof" else repr(t.value)
        self.fail(f"expected an identifier, found {found}", ("identifier",))

    # program
    def program(self):
        decls = []
        while self.peek().kind != "eof":
            start = self.peek().start
            if self.at("def"):
                self.advance()
                name = self.ident()
                ty = None
                if self.at(":"):
                    self.advance()
                    ty = self.type_()
                self.expect("=")
                body = self.expr()
                decls.append(("def", name, ty, body, start, self.toks[self.i - 1].end))
            elif self.at("type"):
                self.advance()
                name = self.ident(allow_gate=True)
                self.expect("=")
                decls.append(("type", name, self.type_(), None, start, self.toks[self.i - 1].end))
            else:
                self.fail("expected a declaration ('def' or 'type')", ("def", "type"))
        return decls

    # types
    def type_(self):
        t = self.peek()
        if self.at("mu"):
            self.advance()
            name = self.ident(allow_gate=True)
            self.expect(".")
            body = self.type_()
            return _s("mu", t.start, body.end, name, body)
        left = self.tsum()
        if self.at("->"):
            self.advance()
            right = self.type_()
            return _s("->", left.start, right.end, left, right)
        return left

    def _infix(self, ops, paren_op):
        if self.peek().kind == "sym" and self.peek().value in ops:
            return self.advance().value
        if self.at("(") and self.peek(2).value == ")" and self.peek(1).value == paren_op:
            self.advance(), self.advance(), self.advance()
            return f"({paren_op})"
        return None

    def tsum(self):
        left = self.tprod()
        op = self._infix(("+", "⊕"), "+")
        if op is None:
            return left
        right = self.tsum()
        return _s("+" if op == "+" else "(+)", left.start, right.end, left, right)

    def tprod(self):
        left = self.tatom()
        op = self._infix(("*", "⊗"), "x")
        if op is None:
            return left
        right = self.tprod()
        return _s("*" if op == "*" else "(x)", left.start, right.end, left, right)

    def tatom(self):
        t = self.peek()
        if t.kind == "num" and t.value == "1":
            self.advance()
            return _s("tunit", t.start, t.end, "1")
        if t.kind == "kw" and t.value in ("unit", "I"):
            self.advance()
            return _s("tunit", t.start, t.end, t.value)
        if t.kind == "kw" and t.value == "qbit":
            self.advance()
            return _s("qbit", t.start, t.end)
        if self.at("("):
            self.advance()
            inner = self.type_()
            self.expect(")")
            return inner
        if t.kind in ("id", "gate"):
            self.advance()
            if t.value == "Q" and self.at("("):
                self.advance()
                a = self.type_()
                self.expect(",")
                b = self.type_()
                end = self.expect(")").end
                return _s("Q", t.start, end, a, b)
            if t.value in ("List", "QList") and self.at("("):
                self.advance()
                a = self.type_()
                end = self.expect(")").end
                return _s("tapp", t.start, end, t.value, a)
            return _s("tname", t.start, t.end, t.value)
        self.fail("expected a type", ("type",))

    # numeric expressions (gate angles, coin biases)
    def num(self):
        v = self.nterm()
        while self.peek().kind == "sym" and self.peek().value in "+-":
            op = self.advance().value
            w = self.nterm()
            v = v + w if op == "+" else v - w
        return v

    def nterm(self):
        v = self.nfactor()
        while self.peek().kind == "sym" and self.peek().value in "*/":
            op = self.advance().value
            w = self.nfactor()
            if op == "/" and w == 0:
                self.fail("division by zero in numeric expression")
            v = v * w if op == "*" else v / w
        return v

    def nfactor(self):
        t = self.peek()
        if self.at("-"):
            self.advance()
            return -self.nfactor()
        if t.kind == "num":
            self.advance()
            return float(t.value)
        if t.kind == "id" and t.value == "pi":
            self.advance()
            return math.pi
        if t.kind == "id" and t.value in NUM_FUNCS:
            self.advance()
            self.expect("(")
            x = self.num()
            self.expect(")")
            try:
                return NUM_FUNCS[t.value](x)
            except ValueError:
                self.fail(f"{t.value}({x}) is undefined", tok=t)
        if self.at("("):
            self.advance()
            x = self.num()
            self.expect(")")
            return x
        self.fail("expected a number", ("number",))

    def num_atom(self):
        t = self.peek()
        if t.kind == "num":
            self.advance()
            return float(t.value)
        if self.at("-"):
            self.advance()
            return -self.num_atom()
        if self.at("("):
            self.advance()
            x = self.num()
            self.expect(")")
            return x
        self.fail("expected a number", ("number",))

    # expressions
    def expr(self):
        t = self.peek()
        if t.kind == "kw":
            v = t.value
            if v == "fun":
                return self.fun()
            if v == "qfun":
                return self.qfun()
            if v == "fix":
                self.advance()
                name = self.ident()
                self.expect(":")
                ty = self.type_()
                self.expect(".")
                body = self.expr()
                return _s("fix", t.start, body.end, name, ty, body)
            if v == "case":
                return self.case()
            if v == "if":
                self.advance()
                c = self.expr()
                self.expect("then")
                a = self.expr()
                self.expect("else")
                b = self.expr()
                return _s("if", t.start, b.end, c, a, b)
            if v == "let":
                return self.let()
        return self.seq()

    def fun(self):
        start = self.advance().start
        ret = None
        if self.at("("):
            self.advance()
            x = self.ident()
            self.expect(":")
            ty = self.type_()
            self.expect(")")
            if self.at(":"):
                self.advance()
                ret = self.type_()
        else:
            x = self.ident()
            self.expect(":")
            ty = self.type_()
        self.expect(".")
        body = self.expr()
        return _s("fun", start, body.end, x, ty, ret, body)

    def qfun(self):
        start = self.advance().start
        self.expect("(")
        params = []
        while True:
            x = self.ident()
            self.expect(":")
            params.append((x, self.type_()))
            if not self.at(","):
                break
            self.advance()
        self.expect(")")
        ret = None
        if self.at(":"):
            self.advance()
            ret = self.type_()
        self.expect(".")
        body = self.expr()
        return _s("qfun", start, body.end, tuple(params), ret, body)

    def case(self):
        start = self.advance().start
        scrut = self.expr()
        self.expect("of")
        if self.at("|"):
            self.advance()
        if self.at("in1"):
            self.advance()
            x = self.ident()
            self.expect("=>")
            left = self.expr()
            self.expect("|")
            self.expect("in2")
            y = self.ident()
            self.expect("=>")
            right = self.expr()
            return _s("case", start, right.end, scrut, x, left, y, right)
        if self.at("nil") or (self.at("[") and self.at("]", 1)):
            self.advance()
            if self.at("]"):
                self.advance()
            self.expect("=>")
            left = self.expr()
            self.expect("|")
            h = self.ident()
            self.expect("::")
            tl = self.ident()
            self.expect("=>")
            right = self.expr()
            return _s("lcase", start, right.end, scrut, left, h, tl, right)
        self.fail("expected a case alternative", ("in1", "nil"))

    def let(self):
        start = self.advance().start
        if self.at("<"):
            self.advance()
            x = self.ident()
            self.expect(",")
            y = self.ident()
            self.expect(">")
            self.expect("=")
            bound = self.expr()
            self.expect("in")
            body = self.expr()
            return _s("lettensor", start, body.end, x, y, bound, body)
        x = self.ident()
        self.expect("=")
        self.expect("lift")
        bound = self.expr()
        self.expect("in")
        body = self.expr()
        return _s("letlift", start, body.end, x, bound, body)

    def seq(self):
        left = self.cons()
        if self.at(";"):
            self.advance()
            right = self.expr()
            return _s("seq", left.start, right.end, left, right)
        return left

    def cons(self):
        left = self.app()
        if self.at("::"):
            self.advance()
            right = self.cons()
            return _s("cons", left.start, right.end, left, right)
        return left

    def starts_atom(self, t):
        if t.kind in ("id", "gate", "num"):
            return True
        if t.kind == "sym":
            return t.value in ("(", "<", "[", "*")
        return t.kind == "kw" and t.value in ATOM_KEYWORDS

    def app(self):
        t = self.peek()
        if t.kind == "kw" and t.value in PREFIX_OPS:
            self.advance()
            ann = None
            if t.value in ("in1", "in2", "fold") and self.at("{"):
                self.advance()
                ann = self.type_()
                self.expect("}")
            arg = self.app()
            return _s("prefix", t.start, arg.end, t.value, ann, arg)
        if not self.starts_atom(t):
            found = "end of input" if t.kind == "eof" else repr(t.value)
            self.fail(f"expected an expression, found {found}", ("expression",))
        f = self.atom()
        while self.starts_atom(self.peek()):
            a = self.atom()
            f = _s("app", f.start, a.end, f, a)
        return f

    def atom(self):
        t = self.advance()
        if t.kind == "id":
            return _s("name", t.start, t.end, t.value)
        if t.kind == "num":
            if not t.value.isdigit():
                self.fail("only natural-number literals are terms", tok=t)
            return _s("nat", t.start, t.end, int(t.value))
        if t.kind == "gate":
            return self.gate(t)
        if t.kind == "kw":
            if t.value == "coin":
                p = self.num_atom()
                return _s("coin", t.start, self.toks[self.i - 1].end, p)
            return _s("const", t.start, t.end, t.value)
        if t.value == "*":
            return _s("star", t.start, t.end)
        if t.value == "(":
            if self.at(")"):
                return _s("unit", t.start, self.advance().end)
            e = self.expr()
            if self.at(":"):
                self.advance()
                ty = self.type_()
                end = self.expect(")").end
                return _s("annot", t.start, end, e, ty)
            items = [e]
            while self.at(","):
                self.advance()
                items.append(self.expr())
            end = self.expect(")").end
            if len(items) == 1:
                return e
            out = items[-1]
            for it in reversed(items[:-1]):
                out = _s("pair", it.start, end, it, out)
            return out
        if t.value == "<":
            items = [self.expr()]
            while self.at(","):
                self.advance()
                items.append(self.expr())
            end = self.expect(">").end
            return _s("tensor", t.start, end, tuple(items))
        if t.value == "[":
            items = []
            if not self.at("]"):
                items.append(self.expr())
                while self.at(","):
                    self.advance()
                    items.append(self.expr())
            end = self.expect("]").end
            return _s("list", t.start, end, tuple(items))
        self.fail("expected an expression", ("expression",), tok=t)

    def gate(self, t):
        name = t.value
        try:
            if name in FIXED_GATES:
                return _s("gate", t.start, t.end, GateSpec(name))
            if name in PARAMETRIC_GATES:
                self.expect("(")
                p = self.num()
                end = self.expect(")").end
                return _s("gate", t.start, end, GateSpec(name, (p,)))
            self.expect("[")
            rows = []
            while True:
                self.expect("[")
                row = [self.matrix_entry()]
                while self.at(","):
                    self.advance()
                    row.append(self.matrix_entry())
                self.expect("]")
                rows.append(row)
                if not self.at(","):
                    break
                self.advance()
            end = self.expect("]").end
            return _s("gate", t.start, end, GateSpec("CUSTOM", (), rows))
        except InvalidGate as e:
            self.fail(str(e), tok=t)

    def matrix_entry(self):
        if self.at("("):
            self.advance()
            re_ = self.num()
            self.expect(",")
            im = self.num()
            self.expect(")")
            return complex(re_, im)
        return complex(self.num())


# ---------------------------------------------------------------- resolution

def _fix_combinator(p, r):
    """Closed term of type ((p -> r) -> p -> r) -> p -> r built by
    self-application through the recursive type mu X. X -> p -> r."""
    fn = A.Arrow(p, r)
    t = A.CMu("X", A.Arrow(A.CTVar("X"), fn))
    y, z, f = A.Var("_y"), A.Var("_z"), A.Var("_F")
    w = A.Lam("_y", t, A.App(f, A.Lam("_z", p, A.App(A.App(A.Unfold(y), y), z))))
    return A.Lam("_F", A.Arrow(fn, fn), A.App(w, A.Fold(w, t)))


def nat_value(n):
    nat = nat_c()
    s = A.unfold_type(nat)
    v = A.Fold(A.Inj(1, A.Unit(), s), nat)
    for _ in range(n):
        v = A.Fold(A.Inj(2, v, s), nat)
    return v


def coin_term(p):
    """``run (meas (RY(2 acos(sqrt p)) (new ff)))``: ff with probability p."""
    theta = 2 * math.acos(math.sqrt(p))
    ff = A.QInj(1, A.Star(), A.bit_type())
    q = A.QApp(A.Meas(), A.QApp(A.Gate(GateSpec("RY", (theta,))), A.QApp(A.New(), ff)))
    return A.Run(A.trivial_config(q))


class _Resolver:
    def __init__(self, parser, decls=None, aliases=None):
        self.p = parser
        self.decls = decls if decls is not None else {}
        self.aliases = aliases if aliases is not None else {}
        self._expanding = []

    def span(self, s):
        return self.p.bytes.span(s.start, s.end)

    def fail(self, s, message):
        raise ParseError([Diagnostic("error", message, self.span(s))])

    # types
    def rtype(self, s, quantum, tvars=()):
        sp = self.span(s)
        k, a = s.kind, s.args
        if k == "tunit":
            return A.QUnit(span=sp) if quantum else A.CUnit(span=sp)
        if k == "qbit":
            if not quantum:
                self.fail(s, "qbit is a quantum type; use Q(A, B) to mention it classically")
            return A.Qbit(span=sp)
        if k == "mu":
            body = self.rtype(a[1], quantum, tvars + (a[0],))
            return (A.QMu if quantum else A.CMu)(a[0], body, span=sp)
        if k == "->":
            if quantum:
                self.fail(s, "function types are classical")
            return A.Arrow(self.rtype(a[0], False, tvars), self.rtype(a[1], False, tvars), span=sp)
        if k in ("+", "(+)"):
            cls = A.QSum if quantum else A.CSum
            return cls(self.rtype(a[0], quantum, tvars), self.rtype(a[1], quantum, tvars), span=sp)
        if k in ("*", "(x)"):
            cls = A.QTensor if quantum else A.CProd
            return cls(self.rtype(a[0], quantum, tvars), self.rtype(a[1], quantum, tvars), span=sp)
        if k == "Q":
            if quantum:
                self.fail(s, "Q(A, B) is a classical type")
            return A.QFun(self.rtype(a[0], True, ()), self.rtype(a[1], True, ()), span=sp)
        if k == "tapp":
            elem = self.rtype(a[1], quantum, tvars)
            return list_q(elem) if quantum else list_c(elem)
        name = a[0]
        if name in tvars:
            return A.QTVar(name, span=sp) if quantum else A.CTVar(name, span=sp)
        if name in ("Bool", "Bit"):
            return A.bit_type() if quantum else A.bool_type()
        if name in ("Nat", "QNat"):
            return nat_q() if quantum else nat_c()
        if name in self.aliases:
            if name in self._expanding:
                self.fail(s, f"type alias {name} is recursive; use mu")
            self._expanding.append(name)
            try:
                return self.rtype(self.aliases[name], quantum, ())
            finally:
                self._expanding.pop()
        self.fail(s, f"unknown type {name}")

    # classical mode
    def c(self, s, cs, qs):
        sp = self.span(s)
        k, a = s.kind, s.args
        if k == "name":
            x = a[0]
            if x in cs or x in qs:
                return A.Var(x, span=sp)
            if x in self.decls:
                body, ty = self.decls[x]
                return body if ty is None else A.Annot(body, ty, span=sp)
            self.fail(s, f"unbound identifier {x}")
        if k == "unit":
            return A.Unit(span=sp)
        if k == "star":
            self.fail(s, "'*' is the quantum unit; the classical unit is '()'")
        if k == "pair":
            return A.Pair(self.c(a[0], cs, qs), self.c(a[1], cs, qs), span=sp)
        if k == "tensor":
            if len(a[0]) == 1:
                return self.c(a[0][0], cs, qs)
            self.fail(s, "'<..>' builds quantum tensors; classical pairs use '(a, b)'")
        if k == "app":
            return A.App(self.c(a[0], cs, qs), self.c(a[1], cs, qs), span=sp)
        if k == "prefix":
            op, ann, arg = a
            if op in ("in1", "in2"):
                t = None if ann is None else self.rtype(ann, False)
                return A.Inj(int(op[2]), self.c(arg, cs, qs), t, span=sp)
            if op == "fold":
                t = None if ann is None else self.rtype(ann, False)
                return A.Fold(self.c(arg, cs, qs), t, span=sp)
            if op == "unfold":
                return A.Unfold(self.c(arg, cs, qs), span=sp)
            if op in ("fst", "snd"):
                return A.Proj(1 if op == "fst" else 2, self.c(arg, cs, qs), span=sp)
            if op == "run":
                return A.Run(A.trivial_config(self.q(arg, cs, frozenset())), span=sp)
            if op == "succ":
                nat = nat_c()
                return A.Fold(A.Inj(2, self.c(arg, cs, qs), A.unfold_type(nat)), nat, span=sp)
            self.fail(s, f"'{op}' builds a quantum term")
        if k == "fun":
            x, ty, ret, body = a
            b = self.c(body, cs | {x}, qs - {x})
            if ret is not None:
                b = A.Annot(b, self.rtype(ret, False))
            return A.Lam(x, self.rtype(ty, False), b, span=sp)
        if k == "qfun":
            params, ret, body = a
            ps = tuple((x, self.rtype(t, True)) for x, t in params)
            b = self.q(body, cs - {x for x, _ in ps}, frozenset(x for x, _ in ps))
            if ret is not None:
                b = A.QAnnot(b, self.rtype(ret, True))
            return A.QLam(ps, b, span=sp)
        if k == "fix":
            name, ty, body = a
            t = self.rtype(ty, False)
            if not isinstance(t, A.Arrow):
                self.fail(ty, "fix needs a function type P -> R")
            inner = A.Lam(name, t, self.c(body, cs | {name}, qs - {name}))
            return A.App(_fix_combinator(t.dom, t.cod), inner, span=sp)
        if k == "case":
            scrut, x, l, y, r = a
            return A.Case(self.c(scrut, cs, qs), x, self.c(l, cs | {x}, qs - {x}),
                          y, self.c(r, cs | {y}, qs - {y}), span=sp)
        if k == "lcase":
            scrut, l, h, tl, r = a
            left = self.c(l, cs, qs)
            right = self.c(r, cs | {h, tl}, qs - {h, tl})
            avoid = A.free_cvars(left) | A.free_cvars(right) | {h, tl}
            u = A.fresh_name("_u", avoid)
            pv = A.fresh_name("_p", avoid)
            right = A.subst_c(right, {h: A.Proj(1, A.Var(pv)), tl: A.Proj(2, A.Var(pv))})
            return A.Case(A.Unfold(self.c(scrut, cs, qs)), u, left, pv, right, span=sp)
        if k == "if":
            cond, then, other = a
            t, e = self.c(then, cs, qs), self.c(other, cs, qs)
            u = A.fresh_name("_b", A.free_cvars(t) | A.free_cvars(e))
            return A.Case(self.c(cond, cs, qs), u, e, u, t, span=sp)
        if k == "cons":
            return A.Fold(A.Inj(2, A.Pair(self.c(a[0], cs, qs), self.c(a[1], cs, qs))), span=sp)
        if k == "list":
            out = A.Fold(A.Inj(1, A.Unit()), span=sp)
            for it in reversed(a[0]):
                out = A.Fold(A.Inj(2, A.Pair(self.c(it, cs, qs), out)), span=sp)
            return out
        if k == "annot":
            return A.Annot(self.c(a[0], cs, qs), self.rtype(a[1], False), span=sp)
        if k == "gate":
            return A.Gate(a[0], span=sp)
        if k == "const":
            v = a[0]
            if v == "new":
                return A.New(span=sp)
            if v == "meas":
                return A.Meas(span=sp)
            if v in ("tt", "ff"):
                return A.Inj(2 if v == "tt" else 1, A.Unit(), A.bool_type(), span=sp)
            if v == "nil":
                return A.Fold(A.Inj(1, A.Unit()), span=sp)
            if v == "zero":
                return nat_value(0)
        if k == "nat":
            return nat_value(a[0])
        if k == "coin":
            p = a[0]
            if not 0.0 <= p <= 1.0:
                self.fail(s, f"coin bias {p} is not a probability")
            return coin_term(p)
        if k in ("seq", "lettensor", "letlift"):
            self.fail(s, "this construct builds a quantum term")
        self.fail(s, f"unsupported construct {k}")

    # quantum mode
    def q(self, s, cs, qs):
        sp = self.span(s)
        k, a = s.kind, s.args
        if k == "name":
            x = a[0]
            if x in qs or x in cs:
                return A.QVar(x, span=sp)
            if x in self.decls:
                self.fail(s, f"{x} is a classical declaration used where a quantum term is expected")
            self.fail(s, f"unbound identifier {x}")
        if k in ("unit", "star"):
            return A.Star(span=sp)
        if k == "tensor":
            return A.tensor_of([self.q(it, cs, qs) for it in a[0]])
        if k == "pair":
            self.fail(s, "quantum tensors are written '<a, b>'")
        if k == "app":
            return A.QApp(self.c(a[0], cs, qs), self.q(a[1], cs, qs), span=sp)
        if k == "prefix":
            op, ann, arg = a
            if op in ("in1", "in2"):
                t = None if ann is None else self.rtype(ann, True)
                return A.QInj(int(op[2]), self.q(arg, cs, qs), t, span=sp)
            if op == "fold":
                t = None if ann is None else self.rtype(ann, True)
                return A.QFold(self.q(arg, cs, qs), t, span=sp)
            if op == "unfold":
                return A.QUnfold(self.q(arg, cs, qs), span=sp)
            if op == "init":
                return A.Init(self.c(arg, cs, frozenset()), span=sp)
            self.fail(s, f"'{op}' builds a classical term")
        if k == "case":
            scrut, x, l, y, r = a
            return A.QCase(self.q(scrut, cs, qs), x, self.q(l, cs - {x}, qs | {x}),
                           y, self.q(r, cs - {y}, qs | {y}), span=sp)
        if k == "lcase":
            scrut, l, h, tl, r = a
            left = self.q(l, cs, qs)
            right = self.q(r, cs - {h, tl}, qs | {h, tl})
            avoid = set(A.free_qvars(left)) | set(A.free_qvars(right)) | {h, tl}
            u = A.fresh_name("_u", avoid)
            pv = A.fresh_name("_p", avoid)
            return A.QCase(A.QUnfold(self.q(scrut, cs, qs)), u, A.Seq(A.QVar(u), left),
                           pv, A.LetTensor(h, tl, A.QVar(pv), right), span=sp)
        if k == "if":
            cond, then, other = a
            t, e = self.q(then, cs, qs), self.q(other, cs, qs)
            u = A.fresh_name("_b", set(A.free_qvars(t)) | set(A.free_qvars(e)))
            return A.QCase(self.q(cond, cs, qs), u, A.Seq(A.QVar(u), e), u, A.Seq(A.QVar(u), t), span=sp)
        if k == "lettensor":
            x, y, bound, body = a
            return A.LetTensor(x, y, self.q(bound, cs, qs), self.q(body, cs - {x, y}, qs | {x, y}), span=sp)
        if k == "letlift":
            x, bound, body = a
            return A.LetLift(x, self.q(bound, cs, qs), self.q(body, cs | {x}, qs - {x}), span=sp)
        if k == "seq":
            return A.Seq(self.q(a[0], cs, qs), self.q(a[1], cs, qs), span=sp)
        if k == "cons":
            return A.QFold(A.QInj(2, A.Tensor(self.q(a[0], cs, qs), self.q(a[1], cs, qs))), span=sp)
        if k == "list":
            out = A.QFold(A.QInj(1, A.Star()), span=sp)
            for it in reversed(a[0]):
                out = A.QFold(A.QInj(2, A.Tensor(self.q(it, cs, qs), out)), span=sp)
            return out
        if k == "annot":
            return A.QAnnot(self.q(a[0], cs, qs), self.rtype(a[1], True), span=sp)
        if k == "const":
            v = a[0]
            if v in ("tt", "ff"):
                return A.QInj(2 if v == "tt" else 1, A.Star(), A.bit_type(), span=sp)
            if v == "nil":
                return A.QFold(A.QInj(1, A.Star()), span=sp)
        self.fail(s, "expected a quantum term here; classical terms appear only as "
                     "the function in an application or under 'init'")


# ---------------------------------------------------------------- entry points

def parse_program(text):
    """Parse a source file; raise :class:`ParseError` with diagnostics on failure."""
    p = _Parser(text)
    items = p.program()
    res = _Resolver(p)
    decls = []
    seen = set()
    for kind, name, ty, body, start, end in items:
        sp = p.bytes.span(start, end)
        if name in seen:
            raise ParseError([Diagnostic("error", f"duplicate declaration {name}", sp)])
        seen.add(name)
        if kind == "type":
            res.aliases[name] = ty
            continue
        cty = None if ty is None else res.rtype(ty, False)
        term = res.c(body, frozenset(), frozenset())
        res.decls[name] = (term, cty)
        decls.append(Decl(name, cty, term, sp))
    return SourceFile(decls, dict(res.aliases), text)


def _resolver_for(text, program):
    p = _Parser(text)
    res = _Resolver(p)
    if program is not None:
        res.decls = {d.name: (d.term, d.ty) for d in program.decls}
        res.aliases = dict(program.type_aliases)
    return p, res


def _finish(p):
    if p.peek().kind != "eof":
        p.fail(f"unexpected {p.peek().value!r} after the expression")


def parse_term(text, program=None):
    """Parse a closed classical expression (declarations of ``program`` in scope)."""
    p, res = _resolver_for(text, program)
    s = p.expr()
    _finish(p)
    return res.c(s, frozenset(), frozenset())


def parse_qterm(text, qvars=(), program=None):
    """Parse a quantum expression whose free quantum variables are ``qvars``."""
    p, res = _resolver_for(text, program)
    s = p.expr()
    _finish(p)
    return res.q(s, frozenset(), frozenset(qvars))


def parse_type(text, quantum=False, program=None):
    p, res = _resolver_for(text, program)
    s = p.type_()
    _finish(p)
    return res.rtype(s, quantum)
