"""Parsing plus elaboration of whole programs, and the bundled corpus."""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .ast import Config
from .errors import TypeCheckError
from .parser import SourceFile, parse_program, parse_qterm
from .qstate import StateVector
from .typecheck import elaborate_classical, elaborate_classical_at, elaborate_config

CORPUS = ("coin", "bell", "teleport", "ts", "rus", "omega", "linear-fail")


@dataclass
class Checked:
    name: str
    term: object  # elaborated classical term
    ty: object


@dataclass
class Program:
    source: SourceFile
    checked: dict  # name -> Checked
    errors: dict  # name -> TypeCheckError

    def __getitem__(self, name):
        if name in self.errors:
            raise self.errors[name]
        return self.checked[name]

    @property
    def main(self):
        return self["main"]


def check_source(src):
    checked, errors = {}, {}
    for d in src.decls:
        try:
            if d.ty is None:
                term, ty = elaborate_classical({}, d.term)
            else:
                term, ty = elaborate_classical_at({}, d.term, d.ty), d.ty
            checked[d.name] = Checked(d.name, term, ty)
        except TypeCheckError as e:
            errors[d.name] = e
    return Program(src, checked, errors)


def load_text(text):
    return check_source(parse_program(text))


def corpus_text(name):
    return resources.files("vqpl").joinpath("corpus", f"{name}.vqpl").read_text(encoding="utf-8")


def corpus():
    """Bundled example programs as ``{name: source text}``."""
    return {n: corpus_text(n) for n in CORPUS}


def load_corpus(name):
    return load_text(corpus_text(name))


def resolve_path(path):
    """Read a program file. A missing ``examples/<name>.vqpl`` falls back to
    the bundled corpus program of that name."""
    p = Path(path)
    if p.exists():
        return p.read_text(encoding="utf-8")
    if p.suffix == ".vqpl" and p.stem in CORPUS:
        return corpus_text(p.stem)
    raise FileNotFoundError(f"no such file: {path}")


def config_from_fixture(data, program=None):
    """Build and elaborate a configuration from a fixture dict:
    ``{"state": {"qubits", "amps"}, "linking": {var: index}, "term": text}``."""
    state = StateVector.from_fixture(data["state"])
    link = {k: int(v) for k, v in data.get("linking", {}).items()}
    src = program.source if isinstance(program, Program) else program
    term = parse_qterm(data["term"], tuple(link), src)
    c, _, _ = elaborate_config({}, Config.make(state, link, term))
    return c
