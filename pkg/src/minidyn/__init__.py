"""Static analysis of nested associative arrays with dynamic indices and aliasing."""

from .cfg import Cfg, build_cfg
from .core import STAR, UNDEF, Atom, Seq, literal_path
from .engine import AnalysisResult, EngineConfig, analyze, analyze_source
from .lang import ParseError, parse
from .oracle import check_soundness
from .read import eval_path
from .state import State

__all__ = [
    "STAR", "UNDEF", "Atom", "Seq", "literal_path",
    "Cfg", "build_cfg", "ParseError", "parse",
    "State", "eval_path",
    "AnalysisResult", "EngineConfig", "analyze", "analyze_source",
    "check_soundness",
]
