"""Finite subprobability distributions over canonical value keys.

A :class:`SubDist` maps a canonical key to a probability and remembers one
representative value per key for display. Terms are keyed by their
alpha-normal form and configurations by :func:`vqpl.ast.config_key`; any
other hashable object is its own key, which keeps the algebra usable on
plain labels.
"""

from __future__ import annotations

import json

from .ast import Config, CTerm, QTerm, config_key, term_key
from .errors import WeightOverflow

SUM_TOL = 1e-12


def value_key(v):
    if isinstance(v, Config):
        return config_key(v)
    if isinstance(v, (CTerm, QTerm)):
        return term_key(v)
    return v


class SubDist:
    """Finite map from value keys to probabilities in (0, 1]."""

    __slots__ = ("_p", "_rep")

    def __init__(self, items=None):
        self._p = {}
        self._rep = {}
        if items:
            pairs = items.items() if isinstance(items, dict) else items
            for v, p in pairs:
                self.add(v, p)

    def add(self, value, prob):
        if prob <= 0.0:
            return
        k = value_key(value)
        if k in self._p:
            self._p[k] += prob
        else:
            self._p[k] = prob
            self._rep[k] = value

    def prob(self, value):
        return self._p.get(value_key(value), 0.0)

    def __getitem__(self, value):
        return self.prob(value)

    def __contains__(self, value):
        return value_key(value) in self._p

    def __len__(self):
        return len(self._p)

    def keys(self):
        return list(self._p)

    def items(self):
        """``(representative value, probability)`` pairs in insertion order."""
        return [(self._rep[k], p) for k, p in self._p.items()]

    def key_items(self):
        return list(self._p.items())

    def total(self):
        return float(sum(self._p.values()))

    def scaled(self, r):
        out = SubDist()
        for k, p in self._p.items():
            if p * r > 0.0:
                out._p[k] = p * r
                out._rep[k] = self._rep[k]
        return out

    def copy(self):
        return self.scaled(1.0)

    def close_to(self, other, tol=1e-9):
        return total_variation(self, other) <= tol and all(
            abs(self._p.get(k, 0.0) - other._p.get(k, 0.0)) <= tol for k in set(self._p) | set(other._p))

    def outcomes(self, show=str):
        """``[{"value": str, "prob": float}]`` sorted by the displayed value."""
        rows = [{"value": show(self._rep[k]), "prob": p} for k, p in self._p.items()]
        return sorted(rows, key=lambda r: (r["value"], r["prob"]))

    def to_json(self, show=str):
        return json.dumps(self.outcomes(show), sort_keys=True)

    def __repr__(self):
        body = ", ".join(f"{self._rep[k]!s}: {p:.6g}" for k, p in self._p.items())
        return "SubDist{" + body + "}"


def dirac(v):
    return SubDist([(v, 1.0)])


def halt(d):
    """Total terminating mass."""
    return d.total()


def convex_sum(weights, dists):
    weights = list(weights)
    dists = list(dists)
    if len(weights) != len(dists):
        raise ValueError("weights and distributions differ in length")
    if any(w < 0 for w in weights):
        raise WeightOverflow("negative weight")
    if sum(weights) > 1.0 + SUM_TOL:
        raise WeightOverflow(f"weights sum to {sum(weights)} > 1")
    out = SubDist()
    for w, d in zip(weights, dists):
        for k, p in d._p.items():
            if w * p <= 0.0:
                continue
            if k in out._p:
                out._p[k] += w * p
            else:
                out._p[k] = w * p
                out._rep[k] = d._rep[k]
    return out


def pushforward(f, d):
    """Image of ``d`` under ``f`` applied to representative values."""
    out = SubDist()
    for v, p in d.items():
        out.add(f(v), p)
    return out


def total_variation(d1, d2):
    keys = set(d1._p) | set(d2._p)
    return 0.5 * float(sum(abs(d1._p.get(k, 0.0) - d2._p.get(k, 0.0)) for k in keys))
