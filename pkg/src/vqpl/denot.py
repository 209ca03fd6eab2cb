"""Finite-dimensional denotational oracle.

Quantum types without ``mu`` denote finite direct sums of matrix algebras
(:class:`FinAlg`). A quantum operation ``A -> B`` is stored in the
Heisenberg picture: a matrix ``M`` of shape ``(dim A, dim B)`` with
``vec(f*(y)) = M vec(y)`` for ``y`` in the algebra of ``B``. Composition
``g . f`` is therefore ``M_f @ M_g``. Elements are vectorised block by
block in row-major order. A state on ``A`` is a density block per summand;
as a functional ``x -> sum tr(rho x)`` its row vector is ``vec(rho^T)``.

Classical subterms are given meaning by a fuelled big-step interpreter that
returns a :class:`~vqpl.dist.SubDist` over syntactic values. Each
beta-reduction costs one unit of fuel, so the result is the corresponding
finite approximant of the least fixed point.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .ast import (
    App, Case, Config, Fold, Gate, Init, Inj, Lam, LetLift, LetTensor, Meas, New, Pair,
    Proj, QApp, QCase, QFold, QInj, QLam, QMu, QSum, QTensor, QTVar, QUnfold, QUnit, QVar,
    Qbit, Run, Seq, Star, Tensor, Unfold, Unit, Var, free_qvars,
    obs_translate_value, obs_untranslate_value, subst_c,
)
from .dist import SubDist, convex_sum, total_variation
from .errors import NonCommutative, NotObservable, ShapeMismatch, Unsupported
from .evaluator import explore, step
from .qstate import permute_qubits
from .typecheck import check_classical, check_quantum

PSD_TOL = 1e-9
DEFAULT_FUEL = 200


# ---------------------------------------------------------------- algebras

@dataclass(frozen=True)
class FinAlg:
    """Direct sum of full matrix algebras ``M_d1 (+) ... (+) M_dk``."""
    blocks: tuple

    def __post_init__(self):
        if not self.blocks or any(int(d) < 1 for d in self.blocks):
            raise ShapeMismatch(f"invalid block sizes {self.blocks}")
        object.__setattr__(self, "blocks", tuple(int(d) for d in self.blocks))

    def dim(self):
        return sum(d * d for d in self.blocks)

    def offsets(self):
        out, o = [], 0
        for d in self.blocks:
            out.append(o)
            o += d * d
        return out

    def tensor(self, other):
        return FinAlg(tuple(a * b for a in self.blocks for b in other.blocks))

    def oplus(self, other):
        return FinAlg(self.blocks + other.blocks)

    def is_commutative(self):
        return all(d == 1 for d in self.blocks)

    def unit_vec(self):
        return np.concatenate([np.eye(d, dtype=complex).reshape(-1) for d in self.blocks])

    def vec(self, elems):
        if len(elems) != len(self.blocks):
            raise ShapeMismatch("wrong number of blocks")
        return np.concatenate([np.asarray(e, dtype=complex).reshape(-1) for e in elems])

    def unvec(self, v):
        return [v[o:o + d * d].reshape(d, d) for o, d in zip(self.offsets(), self.blocks)]


SCALARS = FinAlg((1,))


def tensor_algs(algs):
    out = SCALARS
    for a in algs:
        out = out.tensor(a)
    return out


def interp_qtype(t):
    """Algebra of a closed ``mu``-free quantum type."""
    match t:
        case QUnit():
            return SCALARS
        case Qbit():
            return FinAlg((2,))
        case QSum(a, b):
            return interp_qtype(a).oplus(interp_qtype(b))
        case QTensor(a, b):
            return interp_qtype(a).tensor(interp_qtype(b))
        case QMu():
            raise Unsupported("recursive quantum types denote infinite direct sums")
        case QTVar(name):
            raise Unsupported(f"open type variable {name}")
    raise TypeError(f"not a quantum type: {t!r}")


def enum_values(t):
    """Closed values of a ``mu``-free observable type, in block order."""
    match t:
        case QUnit():
            return [Star()]
        case QSum(a, b):
            return ([QInj(1, v, t) for v in enum_values(a)]
                    + [QInj(2, v, t) for v in enum_values(b)])
        case QTensor(a, b):
            return [Tensor(v, w) for v in enum_values(a) for w in enum_values(b)]
        case Qbit():
            raise NotObservable("qbit has no observable values")
        case QMu():
            raise Unsupported("recursive types have infinitely many values")
    raise TypeError(f"not a quantum type: {t!r}")


# ---------------------------------------------------------------- superoperators

@dataclass(frozen=True, eq=False)
class Superoperator:
    """Morphism ``dom -> cod`` stored as its Heisenberg matrix."""
    dom: FinAlg
    cod: FinAlg
    mat: np.ndarray

    def __post_init__(self):
        if self.mat.shape != (self.dom.dim(), self.cod.dim()):
            raise ShapeMismatch(f"matrix {self.mat.shape} does not fit {self.dom} -> {self.cod}")

    def then(self, g):
        """``g . self``: first this map, then ``g``."""
        return compose(g, self)

    def heisenberg(self, elems):
        """Pull back an element of ``cod`` to ``dom``."""
        return self.dom.unvec(self.mat @ self.cod.vec(elems))

    def apply_state(self, s):
        """Push a state on ``dom`` forward to ``cod``."""
        if s.alg != self.dom:
            raise ShapeMismatch("state lives on a different algebra")
        return AlgState.from_row(self.cod, s.row() @ self.mat)

    def scaled(self, r):
        return Superoperator(self.dom, self.cod, r * self.mat)

    def close_to(self, other, tol=1e-9):
        return (self.dom == other.dom and self.cod == other.cod
                and float(np.max(np.abs(self.mat - other.mat), initial=0.0)) <= tol)


def compose(g, f):
    """``g . f`` (``f`` first)."""
    if f.cod != g.dom:
        raise ShapeMismatch(f"cannot compose {f.cod} with {g.dom}")
    return Superoperator(f.dom, g.cod, f.mat @ g.mat)


def identity(alg):
    return Superoperator(alg, alg, np.eye(alg.dim(), dtype=complex))


def zero_op(dom, cod):
    return Superoperator(dom, cod, np.zeros((dom.dim(), cod.dim()), dtype=complex))


def tensor(f, g):
    """``f (x) g``, acting blockwise on pairs of summands."""
    dom, cod = f.dom.tensor(g.dom), f.cod.tensor(g.cod)
    mat = np.zeros((dom.dim(), cod.dim()), dtype=complex)
    fo_d, fo_c = f.dom.offsets(), f.cod.offsets()
    go_d, go_c = g.dom.offsets(), g.cod.offsets()
    do, co = dom.offsets(), cod.offsets()
    nb_gd, nb_gc = len(g.dom.blocks), len(g.cod.blocks)
    for (i, a), (k, b) in product(enumerate(f.dom.blocks), enumerate(f.cod.blocks)):
        fb = f.mat[fo_d[i]:fo_d[i] + a * a, fo_c[k]:fo_c[k] + b * b]
        if not fb.any():
            continue
        fb = fb.reshape(a, a, b, b)
        for (j, c), (m, d) in product(enumerate(g.dom.blocks), enumerate(g.cod.blocks)):
            gb = g.mat[go_d[j]:go_d[j] + c * c, go_c[m]:go_c[m] + d * d]
            if not gb.any():
                continue
            t = np.einsum("pqrs,tuvw->ptqurvsw", fb, gb.reshape(c, c, d, d))
            r0 = do[i * nb_gd + j]
            c0 = co[k * nb_gc + m]
            mat[r0:r0 + (a * c) ** 2, c0:c0 + (b * d) ** 2] = t.reshape((a * c) ** 2, (b * d) ** 2)
    return Superoperator(dom, cod, mat)


def tensor_all(ops):
    out = identity(SCALARS)
    for f in ops:
        out = tensor(out, f)
    return out


def permute_factors(factors, perm):
    """Isomorphism ``F1 (x) ... (x) Fn -> F_perm[0] (x) ... (x) F_perm[n-1]``."""
    factors = list(factors)
    n = len(factors)
    perm = list(perm)
    if sorted(perm) != list(range(n)):
        raise ShapeMismatch(f"{perm} is not a permutation")
    dom = tensor_algs(factors)
    out_factors = [factors[p] for p in perm]
    cod = tensor_algs(out_factors)
    if n == 0:
        return identity(SCALARS)
    inv = [perm.index(i) for i in range(n)]
    mat = np.zeros((dom.dim(), cod.dim()), dtype=complex)
    dom_off, cod_off = dom.offsets(), cod.offsets()
    out_shape = [len(f.blocks) for f in out_factors]
    for bi, combo in enumerate(product(*[range(len(f.blocks)) for f in factors])):
        dims = [factors[k].blocks[combo[k]] for k in range(n)]
        out_combo = [combo[p] for p in perm]
        bo = int(np.ravel_multi_index(out_combo, out_shape))
        out_dims = [dims[p] for p in perm]
        size = int(np.prod(dims))
        arr = np.arange(size * size).reshape(out_dims + out_dims)
        local = arr.transpose(inv + [n + k for k in inv]).reshape(-1)
        rows = dom_off[bi] + np.arange(size * size)
        mat[rows, cod_off[bo] + local] = 1.0
    return Superoperator(dom, cod, mat)


# ---------------------------------------------------------------- primitives

QBIT = FinAlg((2,))
BIT = FinAlg((1, 1))


def unitary_op(g):
    """Heisenberg map ``x -> U* x U``."""
    u = np.asarray(g.matrix if hasattr(g, "matrix") else g, dtype=complex)
    alg = FinAlg((u.shape[0],))
    return Superoperator(alg, alg, np.kron(u.conj().T, u.T))


def meas_op():
    """Measurement ``qbit -> I (+) I``; its adjoint embeds ``(a, b)`` as ``diag(a, b)``."""
    mat = np.zeros((4, 2), dtype=complex)
    mat[0, 0] = mat[3, 1] = 1.0
    return Superoperator(QBIT, BIT, mat)


def new_op():
    """Preparation ``I (+) I -> qbit``; its adjoint reads the diagonal."""
    mat = np.zeros((2, 4), dtype=complex)
    mat[0, 0] = mat[1, 3] = 1.0
    return Superoperator(BIT, QBIT, mat)


def tr_op(n):
    """Discarding ``n`` qubits: ``qbit^n -> I`` with adjoint ``c -> c 1``."""
    alg = FinAlg((2 ** n,))
    return Superoperator(alg, SCALARS, alg.unit_vec().reshape(-1, 1))


def state_op(rho, alg=None):
    """Preparation of ``rho`` as a map ``I -> alg``; adjoint ``x -> tr(x rho)``."""
    if isinstance(rho, AlgState):
        alg, row = rho.alg, rho.row()
    else:
        rho = np.asarray(rho, dtype=complex)
        alg = alg or FinAlg((rho.shape[0],))
        row = rho.T.reshape(-1)
    return Superoperator(SCALARS, alg, row.reshape(1, -1))


def drop_op(k, alg=SCALARS):
    """``alg (x) qbit^k -> alg`` with adjoint ``x -> x (x) 1``."""
    return tensor(identity(alg), tr_op(k))


def injection_op(i, a, b):
    """``in_i : A -> A (+) B`` whose adjoint projects onto summand ``i``."""
    cod = a.oplus(b)
    mat = np.zeros(((a if i == 1 else b).dim(), cod.dim()), dtype=complex)
    start = 0 if i == 1 else a.dim()
    mat[:, start:start + mat.shape[0]] = np.eye(mat.shape[0])
    return Superoperator(a if i == 1 else b, cod, mat)


def copair(f, g):
    """``[f, g] : A (+) B -> C``."""
    if f.cod != g.cod:
        raise ShapeMismatch("copairing maps with different codomains")
    return Superoperator(f.dom.oplus(g.dom), f.cod, np.vstack([f.mat, g.mat]))


def barycentre(weighted, dom, cod):
    """``sum_i r_i f_i`` for ``weighted = [(r_i, f_i)]``; the empty sum is zero."""
    mat = np.zeros((dom.dim(), cod.dim()), dtype=complex)
    for r, f in weighted:
        if f.dom != dom or f.cod != cod:
            raise ShapeMismatch("barycentre of maps with different types")
        mat = mat + r * f.mat
    return Superoperator(dom, cod, mat)


def transpose_op(d=2):
    """The transpose map on ``M_d`` (positive but not completely positive)."""
    alg = FinAlg((d,))
    mat = np.zeros((d * d, d * d), dtype=complex)
    for a in range(d):
        for b in range(d):
            mat[a * d + b, b * d + a] = 1.0
    return Superoperator(alg, alg, mat)


# ---------------------------------------------------------------- checks

@dataclass
class NCPSUReport:
    ok: bool
    min_choi_eigenvalue: float
    min_unit_gap: float
    details: list = field(default_factory=list)

    def __bool__(self):
        return self.ok


def choi_blocks(f):
    """Choi matrices of the adjoint, one per (codomain block, domain block)."""
    out = []
    do, co = f.dom.offsets(), f.cod.offsets()
    for k, e in enumerate(f.cod.blocks):
        for i, d in enumerate(f.dom.blocks):
            sub = f.mat[do[i]:do[i] + d * d, co[k]:co[k] + e * e].reshape(d, d, e, e)
            # C[(a, p), (b, q)] = f*(E_ab)[p, q]
            c = sub.transpose(2, 0, 3, 1).reshape(e * d, e * d)
            out.append(((k, i), c))
    return out


def ncpsu_check(f, tol=PSD_TOL):
    """Complete positivity (Choi PSD) and subunitality (``1 - f*(1) >= 0``)."""
    details = []
    min_eig = np.inf
    for (k, i), c in choi_blocks(f):
        if np.max(np.abs(c - c.conj().T), initial=0.0) > tol:
            details.append(f"Choi block ({k},{i}) is not Hermitian")
        ev = float(np.min(np.linalg.eigvalsh((c + c.conj().T) / 2)))
        min_eig = min(min_eig, ev)
        if ev < -tol:
            details.append(f"Choi block ({k},{i}) has eigenvalue {ev:.3g}")
    one = f.heisenberg(f.cod.unvec(f.cod.unit_vec()))
    min_gap = np.inf
    for i, blk in enumerate(one):
        gap = np.eye(blk.shape[0]) - blk
        ev = float(np.min(np.linalg.eigvalsh((gap + gap.conj().T) / 2)))
        min_gap = min(min_gap, ev)
        if ev < -tol:
            details.append(f"f*(1) exceeds 1 on block {i} by {-ev:.3g}")
    return NCPSUReport(not details, float(min_eig), float(min_gap), details)


# ---------------------------------------------------------------- states

@dataclass(eq=False)
class AlgState:
    """Positive subunital functional, one density block per summand."""
    alg: FinAlg
    blocks: list
    ty: object = None

    def row(self):
        return np.concatenate([np.asarray(b, dtype=complex).T.reshape(-1) for b in self.blocks])

    @classmethod
    def from_row(cls, alg, row, ty=None):
        return cls(alg, [b.T.copy() for b in alg.unvec(np.asarray(row, dtype=complex))], ty)

    def trace(self):
        return float(sum(np.trace(b).real for b in self.blocks))

    def diagonal_weights(self):
        if not self.alg.is_commutative():
            raise NonCommutative("algebra has a block larger than 1")
        return [float(b[0, 0].real) for b in self.blocks]

    def is_valid(self, tol=PSD_TOL):
        for b in self.blocks:
            h = (b + b.conj().T) / 2
            if np.max(np.abs(b - b.conj().T), initial=0.0) > tol or np.min(np.linalg.eigvalsh(h)) < -tol:
                return False
        return self.trace() <= 1 + tol

    def close_to(self, other, tol=1e-9):
        return self.alg == other.alg and float(np.max(np.abs(self.row() - other.row()))) <= tol

    def to_json(self):
        return {"blocks": [[[[float(z.real), float(z.imag)] for z in r] for r in b] for b in self.blocks]}


def r_iso(s, ty=None):
    """Read a state on a commutative algebra as a subdistribution over the
    values of ``ty`` (block order), or over block indices without a type."""
    w = s.diagonal_weights()
    ty = ty if ty is not None else s.ty
    labels = enum_values(ty) if ty is not None else list(range(len(w)))
    if len(labels) != len(w):
        raise ShapeMismatch("type and algebra disagree on the number of values")
    return SubDist([(v, p) for v, p in zip(labels, w) if p > 0.0])


def r_inv(d, ty=None, alg=None):
    """State on ``l-infinity(values of ty)`` with the weights of ``d``."""
    if ty is not None:
        labels = enum_values(ty)
        alg = interp_qtype(ty)
    else:
        labels = list(range(len(alg.blocks)))
    blocks = [np.array([[d.prob(v)]], dtype=complex) for v in labels]
    missing = d.total() - sum(b[0, 0].real for b in blocks)
    if missing > 1e-12:
        raise ShapeMismatch("distribution has support outside the value set")
    return AlgState(alg, blocks, ty)


def is_multiplicative(s, tol=1e-12):
    """Whether a state on a commutative algebra is a unital *-homomorphism
    (equivalently, a point mass)."""
    w = np.array(s.diagonal_weights())
    if abs(w.sum() - 1.0) > tol:
        return False
    # phi(e_i e_j) = phi(e_i) phi(e_j) for the minimal projections e_i
    return bool(np.max(np.abs(np.diag(w) - np.outer(w, w))) <= tol)


# ---------------------------------------------------------------- classical terms

def cdenote(m, fuel=DEFAULT_FUEL):
    """Subdistribution over values of a closed classical term."""
    old = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old, 20000))
    try:
        return SubDist(_cd(m, fuel))
    finally:
        sys.setrecursionlimit(old)


# Intermediate results are plain [(value, prob)] lists; keying every lambda
# is costly, so entries are merged only once a list grows.
MERGE_AT = 8


def _merge(parts):
    if len(parts) < MERGE_AT:
        return parts
    return SubDist(parts).items()


def _bind(d, f):
    return _merge([(w, p * q) for v, p in d for w, q in f(v) if p * q > 0.0])


def _map(f, d):
    return [(f(v), p) for v, p in d]


def _cd(m, fuel):
    match m:
        case Var() | Unit() | Lam() | QLam() | New() | Meas() | Gate():
            return [(m, 1.0)]
        case Pair(a, b):
            return _bind(_cd(a, fuel), lambda u: _map(lambda w: Pair(u, w), _cd(b, fuel)))
        case Inj(i, b, ann):
            return _map(lambda u: Inj(i, u, ann), _cd(b, fuel))
        case Fold(b, ann):
            return _map(lambda u: Fold(u, ann), _cd(b, fuel))
        case Proj(i, b):
            return _map(lambda u: u.first if i == 1 else u.second, _cd(b, fuel))
        case Unfold(b):
            return _map(lambda u: u.body, _cd(b, fuel))
        case Case(s, x, left, y, right):
            def branch(u):
                if u.index == 1:
                    return _cd(subst_c(left, {x: u.body}), fuel)
                return _cd(subst_c(right, {y: u.body}), fuel)
            return _bind(_cd(s, fuel), branch)
        case App(f, a):
            if fuel <= 0:
                return []

            def call(fv):
                return _bind(_cd(a, fuel), lambda av: _cd(subst_c(fv.body, {fv.var: av}), fuel - 1))
            return _bind(_cd(f, fuel), call)
        case Run(c):
            return _map(obs_translate_value, config_dist(c, fuel).items())
    raise TypeError(f"cannot interpret {type(m).__name__}")


# ---------------------------------------------------------------- quantum terms

def _qtype(q, ctx):
    return check_quantum({}, dict(ctx), q)


def _split(ctx, q):
    fv = set(free_qvars(q))
    return [e for e in ctx if e[0] in fv], [e for e in ctx if e[0] not in fv]


def _ctx_alg(ctx):
    return tensor_algs(interp_qtype(t) for _, t in ctx)


def _reorder(ctx, first, rest):
    """Isomorphism from ``ctx`` to ``first`` followed by ``rest``."""
    names = [x for x, _ in ctx]
    perm = [names.index(x) for x, _ in first + rest]
    return permute_factors([interp_qtype(t) for _, t in ctx], perm)


def value_op(v, fuel=DEFAULT_FUEL):
    """Operation denoted by a closed value of type ``Q(A, B)``."""
    match v:
        case New():
            return new_op()
        case Meas():
            return meas_op()
        case Gate(spec):
            return unitary_op(spec)
        case QLam(params, body):
            return _interp(body, list(params), fuel)
    raise TypeError(f"{type(v).__name__} is not a quantum function value")


def interp_qterm(q, ctx=(), env=None, fuel=DEFAULT_FUEL):
    """``[[ctx |- q : A]]`` as a map ``[[ctx]] -> [[A]]``. Classical
    variables are replaced by the closed values in ``env`` first."""
    if env:
        q = subst_c(q, dict(env))
    return _interp(q, list(ctx), fuel)


def _interp(q, ctx, fuel):
    match q:
        case QVar(x):
            if [n for n, _ in ctx] != [x]:
                raise ShapeMismatch(f"context {ctx} does not match variable {x}")
            return identity(interp_qtype(ctx[0][1]))
        case Star():
            return identity(SCALARS)
        case Tensor(a, b):
            ca, cb = _split(ctx, a)
            return compose(tensor(_interp(a, ca, fuel), _interp(b, cb, fuel)), _reorder(ctx, ca, cb))
        case Seq(a, b):
            ca, cb = _split(ctx, a)
            first = tensor(_interp(a, ca, fuel), identity(_ctx_alg(cb)))
            return compose(_interp(b, cb, fuel), compose(first, _reorder(ctx, ca, cb)))
        case LetTensor(x, y, a, b):
            ca, rest = _split(ctx, a)
            ta = _qtype(a, ca)
            head = tensor(_interp(a, ca, fuel), identity(_ctx_alg(rest)))
            body = _interp(b, [(x, ta.left), (y, ta.right)] + rest, fuel)
            return compose(body, compose(head, _reorder(ctx, ca, rest)))
        case QInj(i, b, ann):
            f = _interp(b, ctx, fuel)
            return compose(injection_op(i, interp_qtype(ann.left), interp_qtype(ann.right)), f)
        case QCase(s, x, left, y, right):
            cs, rest = _split(ctx, s)
            ts = _qtype(s, cs)
            head = tensor(_interp(s, cs, fuel), identity(_ctx_alg(rest)))
            fl = _interp(left, [(x, ts.left)] + rest, fuel)
            fr = _interp(right, [(y, ts.right)] + rest, fuel)
            return compose(copair(fl, fr), compose(head, _reorder(ctx, cs, rest)))
        case QApp(m, a):
            fa = _interp(a, ctx, fuel)
            tm = check_classical({}, m)
            dom, cod = interp_qtype(tm.dom), interp_qtype(tm.cod)
            d = _cd(m, fuel)
            return compose(barycentre([(p, value_op(v, fuel)) for v, p in d], dom, cod), fa)
        case Init(m):
            if ctx:
                raise ShapeMismatch("init under a nonempty quantum context")
            ty = _qtype(q, [])
            d = SubDist(_map(obs_untranslate_value, _cd(m, fuel)))
            return state_op(r_inv(d, ty))
        case LetLift(x, a, b):
            ca, rest = _split(ctx, a)
            ta = _qtype(a, ca)
            head = tensor(_interp(a, ca, fuel), identity(_ctx_alg(rest)))
            branches = [_interp(subst_c(b, {x: obs_translate_value(v)}), rest, fuel)
                        for v in enum_values(ta)]
            lift = Superoperator(interp_qtype(ta).tensor(_ctx_alg(rest)), branches[0].cod,
                                 np.vstack([f.mat for f in branches]))
            return compose(lift, compose(head, _reorder(ctx, ca, rest)))
        case QFold() | QUnfold():
            raise Unsupported("fold/unfold at recursive quantum types")
    raise TypeError(f"cannot interpret {type(q).__name__}")


# ---------------------------------------------------------------- configurations

def config_order(c):
    """Qubit order used to present the state: linked variables in order of
    first occurrence, then the auxiliary qubits in increasing index order."""
    link = c.link_map
    fv = free_qvars(c.term)
    linked = [link[x] for x in fv]
    aux = [i for i in range(1, c.state.num_qubits + 1) if i not in set(linked)]
    return fv, linked + aux, len(aux)


def interp_config(c, fuel=DEFAULT_FUEL):
    """State on ``[[A]] (x) qbit^k`` for a configuration of type ``A`` with
    ``k`` auxiliary qubits."""
    fv, order, k = config_order(c)
    psi = permute_qubits(c.state, order)
    start = AlgState(FinAlg((2 ** psi.num_qubits,)), [psi.density()])
    ctx = [(x, Qbit()) for x in fv]
    f = _interp(c.term, ctx, fuel)
    ty = _qtype(c.term, ctx)
    out = tensor(f, identity(FinAlg((2 ** k,)))).apply_state(start)
    out.ty = ty
    return out, k


def reduced_state(c, fuel=DEFAULT_FUEL):
    """``interp_config`` followed by discarding the auxiliary qubits."""
    s, k = interp_config(c, fuel)
    out = drop_op(k, interp_qtype(s.ty)).apply_state(s)
    out.ty = s.ty
    return out


def config_dist(c, fuel=DEFAULT_FUEL):
    """Distribution over quantum values of an observable configuration."""
    s = reduced_state(c, fuel)
    return r_iso(s, s.ty)


def denote(t, fuel=DEFAULT_FUEL):
    """Denotation of a closed classical term (a SubDist) or a configuration
    (an AlgState on ``[[A]] (x) qbit^k``)."""
    if isinstance(t, Config):
        return interp_config(t, fuel)[0]
    return cdenote(t, fuel)


# ---------------------------------------------------------------- theorems as checks

def _defect(a, b):
    if isinstance(a, AlgState):
        return float(np.max(np.abs(a.row() - b.row()), initial=0.0))
    keys = set(a.keys()) | set(b.keys())
    pa, pb = dict(a.key_items()), dict(b.key_items())
    return max((abs(pa.get(k, 0.0) - pb.get(k, 0.0)) for k in keys), default=0.0)


def _node_meaning(t, fuel):
    if isinstance(t, Config):
        # successors may hold a different number of auxiliary qubits
        return reduced_state(t, fuel).row()
    return cdenote(t, fuel)


def _defect_at(lhs, succ):
    """Defect of the one-step identity given the meanings of the successors."""
    if isinstance(lhs, np.ndarray):
        rhs = sum(p * row for p, row in succ)
        return float(np.max(np.abs(lhs - rhs), initial=0.0))
    return _defect(lhs, convex_sum([p for p, _ in succ], [d for _, d in succ]))


def soundness_defect(t, fuel=DEFAULT_FUEL):
    """``max | [[t]] - sum_p p [[t']] |`` over one reduction step; 0 at values."""
    succ = step(t)
    if not succ:
        return 0.0
    return _defect_at(_node_meaning(t, fuel), [(p, _node_meaning(u, fuel)) for p, u in succ])


def soundness_walk(t, max_steps, fuel=DEFAULT_FUEL, max_nodes=5000):
    """Largest soundness defect over every node of the reduction tree up to
    depth ``max_steps``; each node is interpreted once."""
    worst, seen = 0.0, 0
    frontier = [(t, _node_meaning(t, fuel))]
    for _ in range(max_steps):
        nxt = []
        for u, mu in frontier:
            seen += 1
            if seen > max_nodes:
                return worst
            kids = [(p, v, _node_meaning(v, fuel)) for p, v in step(u)]
            if kids:
                worst = max(worst, _defect_at(mu, [(p, mv) for p, _, mv in kids]))
            nxt.extend((v, mv) for _, v, mv in kids)
        frontier = nxt
        if not frontier:
            break
    return worst


@dataclass
class AdequacyReport:
    denotational: SubDist
    operational: SubDist
    tv: float
    residual: float
    soundness_defect: float
    tol: float

    @property
    def passed(self):
        return self.tv <= self.tol + self.residual and self.soundness_defect <= max(self.tol, 1e-9)

    def to_json(self, show=str):
        return {
            "pass": self.passed,
            "tv": self.tv,
            "residual": self.residual,
            "soundness_defect": self.soundness_defect,
            "tol": self.tol,
            "denotational": self.denotational.outcomes(show),
            "operational": self.operational.outcomes(show),
        }


def adequacy_check(t, bound=200, tol=1e-9, fuel=DEFAULT_FUEL, walk=0):
    """Compare the denotational distribution with explored reduction paths.
    Configurations must have observable type; their values are read after
    discarding auxiliary qubits. The one-step soundness identity is checked
    at the root, or over the first ``walk`` levels of the tree if given."""
    rep = explore(t, bound)
    if isinstance(t, Config):
        den = config_dist(t, fuel)
        op = SubDist()
        for c, p in rep.dist.items():
            op.add(c.term, p)
    else:
        den = cdenote(t, fuel)
        op = rep.dist
    defect = soundness_walk(t, walk, fuel) if walk else soundness_defect(t, fuel)
    return AdequacyReport(den, op, total_variation(den, op), rep.residual, defect, tol)


__all__ = [
    "AdequacyReport", "AlgState", "FinAlg", "NCPSUReport", "Superoperator", "adequacy_check",
    "barycentre", "cdenote", "choi_blocks", "compose", "config_dist", "copair", "denote",
    "drop_op", "enum_values", "identity", "injection_op", "interp_config", "interp_qterm",
    "interp_qtype", "is_multiplicative", "meas_op", "ncpsu_check", "new_op", "permute_factors",
    "r_inv", "r_iso", "reduced_state", "soundness_defect", "soundness_walk", "state_op", "tensor", "tensor_all",
    "tr_op", "transpose_op", "unitary_op", "value_op", "zero_op"
]
