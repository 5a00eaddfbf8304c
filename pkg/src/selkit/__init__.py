"""Epistemic logic workbench: S5n scenarios, derivability from hypotheses, finite models."""

from .formula import (
    And, Assumption, Atom, Bottom, Everybody, Formula, FragmentSpec, Iff, Implies, Knows,
    Mode, Not, Or, Scenario, Shape, Top, enumerate_fragment, expand_ck, expand_everybody,
    modal_depth, normalize,
)
from .kripke import (
    ExactReport, KripkeStructure, PointedModel, check, check_ck, exact_check, is_model, restrict,
)
from .parser import ParseError, parse_formula, parse_scenario, render, render_scenario
from .prover import (
    Derivable, NotDerivable, ResourceLimitError, completeness_check, derives, derives_scenario,
    necessitation_check, satisfiable, valid,
)

__version__ = "0.1.0"

__all__ = [
    "And", "Assumption", "Atom", "Bottom", "Derivable", "Everybody", "ExactReport", "Formula",
    "FragmentSpec", "Iff", "Implies", "KripkeStructure", "Knows", "Mode", "Not", "NotDerivable", "Or",
    "ParseError", "PointedModel", "ResourceLimitError", "Scenario", "Shape", "Top", "check", "check_ck",
    "completeness_check", "derives", "derives_scenario", "enumerate_fragment", "exact_check",
    "expand_ck", "expand_everybody", "is_model", "modal_depth", "necessitation_check", "normalize",
    "parse_formula", "parse_scenario", "render", "render_scenario", "restrict", "satisfiable", "valid",
]
