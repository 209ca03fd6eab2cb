"""VQPL: a linear quantum lambda calculus with classical recursion, dynamic
lifting, an exact operational explorer and a finite denotational oracle."""

from .ast import Config, trivial_config
from .denot import adequacy_check, cdenote, interp_config, interp_qterm, interp_qtype, ncpsu_check
from .dist import SubDist, total_variation
from .errors import ErrorKind, ParseError, TypeCheckError, VQPLError
from .evaluator import explore, sample, step
from .loader import corpus, load_corpus, load_text
from .parser import parse_program, parse_qterm, parse_term, parse_type
from .printer import show_config, show_term, show_type
from .qstate import StateVector
from .typecheck import check_classical, check_config, check_quantum

__version__ = "0.1.0"

__all__ = [
    "Config", "ErrorKind", "ParseError", "StateVector", "SubDist", "TypeCheckError", "VQPLError",
    "adequacy_check", "cdenote", "check_classical", "check_config", "check_quantum", "corpus",
    "explore", "interp_config", "interp_qterm", "interp_qtype", "load_corpus", "load_text",
    "ncpsu_check", "parse_program", "parse_qterm", "parse_term", "parse_type", "sample",
    "show_config", "show_term", "show_type", "step", "total_variation", "trivial_config",
]
