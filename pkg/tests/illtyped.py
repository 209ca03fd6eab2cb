"""Ill-typed programs with the rejection kind each must produce."""

ILL_TYPED = [
    # copying a quantum variable
    ('copy-tensor', 'NonLinearUse',
     'def main : Q(qbit, qbit (x) qbit) = qfun (q : qbit) . <q, q>'),
    ('copy-gate-arg', 'NonLinearUse',
     'def main : Q(qbit, qbit (x) qbit) = qfun (q : qbit) . CNOT <q, q>'),
    ('copy-seq', 'NonLinearUse',
     'def main : Q(I, I) = qfun (u : I) . u; u'),
    ('copy-lettensor', 'NonLinearUse',
     'def main : Q(qbit (x) qbit, qbit (x) qbit (x) qbit) = qfun (p : qbit (x) qbit) . let <a, b> = p in <a, b, a>'),
    ('copy-into-meas', 'NonLinearUse',
     'def main : Q(qbit, Bit (x) Bit) = qfun (q : qbit) . <meas q, meas q>'),
    ('copy-lift', 'NonLinearUse',
     'def main : Q(qbit, Bit) = qfun (q : qbit) . let c = lift (meas q) in meas q'),
    ('copy-case-scrut', 'NonLinearUse',
     'def main : Q(Bit, Bit) = qfun (b : Bit) . case b of in1 u => b | in2 v => v; b'),
    ('copy-after-gate', 'NonLinearUse',
     'def main : Q(qbit, qbit (x) qbit) = qfun (q : qbit) . <H q, q>'),
    ('copy-list', 'NonLinearUse',
     'def main : Q(qbit, QList(qbit)) = qfun (q : qbit) . [q, q]'),
    ('copy-two-params', 'NonLinearUse',
     'def main : Q(qbit (x) qbit, qbit (x) qbit) = qfun (a : qbit, b : qbit) . <a, a>'),
    # dropping a quantum variable
    ('drop-param', 'UnusedLinear',
     'def main : Q(qbit, I) = qfun (q : qbit) . *'),
    ('drop-one-of-two', 'UnusedLinear',
     'def main : Q(qbit (x) qbit, qbit) = qfun (a : qbit, b : qbit) . a'),
    ('drop-lettensor-half', 'UnusedLinear',
     'def main : Q(qbit (x) qbit, qbit) = qfun (p : qbit (x) qbit) . let <a, b> = p in a'),
    ('drop-case-var', 'UnusedLinear',
     'def main : Q(Bit, Bit) = qfun (b : Bit) . case b of in1 u => ff | in2 v => v; tt'),
    ('drop-unit-var', 'UnusedLinear',
     'def main : Q(I, Bit) = qfun (u : I) . tt'),
    ('drop-lift-body', 'UnusedLinear',
     'def main : Q(qbit (x) qbit, Bit) = qfun (a : qbit, b : qbit) . let c = lift (meas a) in tt'),
    ('drop-new', 'UnusedLinear',
     'def main : Q(qbit, qbit) = qfun (q : qbit) . let <a, b> = <q, new ff> in a'),
    ('drop-in-list-case', 'UnusedLinear',
     'def main : Q(QList(qbit), I) = qfun (l : QList(qbit)) . case l of nil => * | h :: t => let c = lift (meas h) in *'),
    # case branches that disagree on the context
    ('branch-one-uses', 'UnusedLinear',
     'def main : Q(Bit (x) qbit, qbit) = qfun (b : Bit, q : qbit) . case b of in1 u => u; q | in2 v => v; new ff'),
    ('branch-other-uses', 'UnusedLinear',
     'def main : Q(Bit (x) qbit, qbit) = qfun (b : Bit, q : qbit) . case b of in1 u => u; new tt | in2 v => v; q'),
    ('branch-different-vars', 'UnusedLinear',
     'def main : Q(Bit (x) qbit (x) qbit, qbit) = qfun (b : Bit, p : qbit, q : qbit) . case b of in1 u => u; p | in2 v => v; q'),
    ('branch-uses-scrut', 'NonLinearUse',
     'def main : Q(Bit, Bit) = qfun (b : Bit) . case b of in1 u => u; b | in2 v => v; tt'),
    ('branch-if-drops', 'UnusedLinear',
     'def main : Q(Bit (x) qbit, Bit) = qfun (b : Bit, q : qbit) . if b then meas q else ff'),
    ('branch-drops-half', 'UnusedLinear',
     'def main : Q(Bit (x) (qbit (x) qbit), qbit (x) qbit) = qfun (b : Bit, p : qbit (x) qbit) . case b of in1 u => u; p | in2 v => v; let <x, y> = p in <x, new ff>'),
    # observability, arity and mismatches
    ('lift-qbit', 'NotObservable',
     'def main : Q(qbit, I) = qfun (q : qbit) . let c = lift q in *'),
    ('run-qbit', 'NotObservable',
     'def main = run (new ff)'),
    ('init-drops-context', 'UnusedLinear',
     'def main : Q(qbit, Bit) = qfun (q : qbit) . init tt'),
    ('gate-on-bit', 'Mismatch',
     'def main : Q(Bit, Bit) = qfun (b : Bit) . H b'),
    ('gate-arity', 'ArityMismatch',
     'def main : Q(qbit, qbit) = qfun (q : qbit) . CNOT q'),
    ('meas-on-bit', 'Mismatch',
     'def main : Q(Bit, Bit) = qfun (b : Bit) . meas b'),
]
