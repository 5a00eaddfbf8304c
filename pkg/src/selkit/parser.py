"""ASCII surface syntax for formulas and scenario files.

Grammar, loosest binding first::

    iff   := imp ('<->' iff)?          right-associative
    imp   := or ('->' imp)?            right-associative
    or    := and ('|' and)*            left-associative
    and   := unary ('&' unary)*        left-associative
    unary := '~' unary | 'K<digits>' unary | 'E' unary | atom
           | 'TRUE' | 'FALSE' | '(' iff ')'

Scenario files are line oriented::

    # comment
    agents: 2
    atoms: m1, m2
    assume: K1 m1
    assume-ck: m1 | m2
    goal: K2 K1 m1
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .formula import (
    ATOM_RE,
    BOTTOM,
    TOP,
    And,
    Assumption,
    Atom,
    Bottom,
    Everybody,
    Formula,
    Iff,
    Implies,
    Knows,
    Mode,
    Not,
    Or,
    Scenario,
    Top,
    expand_everybody,
)


@dataclass(frozen=True)
class SourceSpan:
    line: int
    column: int
    length: int = 1


@dataclass
class ParseError(Exception):
    span: SourceSpan
    message: str
    expected: list[str] = field(default_factory=list)

    def __str__(self) -> str:
        text = f"{self.span.line}:{self.span.column}: {self.message}"
        if self.expected:
            text += f" (expected {', '.join(self.expected)})"
        return text


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    column: int


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<iff><->)
  | (?P<imp>->)
  | (?P<op>[~&|()])
  | (?P<k>K(?P<agent>\d+))
  | (?P<word>[A-Za-z][A-Za-z0-9_]*)
    """,
    re.VERBOSE,
)


def _tokenize(text: str, line: int, col0: int) -> list[_Token]:
    tokens: list[_Token] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(SourceSpan(line, col0 + pos, 1), f"unexpected character {text[pos]!r}")
        kind = m.lastgroup if m.lastgroup != "agent" else "k"
        if kind != "ws":
            word = m.group()
            if kind == "word":
                if word == "E":
                    kind = "E"
                elif word in ("TRUE", "FALSE"):
                    kind = word
                elif ATOM_RE.match(word):
                    kind = "atom"
                else:
                    raise ParseError(SourceSpan(line, col0 + pos, len(word)), f"bad identifier {word!r}")
            elif kind in ("op", "imp", "iff"):
                kind = word
            tokens.append(_Token(kind, word, col0 + pos))
        pos = m.end()
    tokens.append(_Token("end", "", col0 + len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, agent_count: int, line: int, col0: int) -> None:
        self.tokens = _tokenize(text, line, col0)
        self.agent_count = agent_count
        self.line = line
        self.pos = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def take(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def error(self, tok: _Token, message: str, expected: list[str]) -> ParseError:
        return ParseError(SourceSpan(self.line, tok.column, max(1, len(tok.text))), message, expected)

    def parse(self) -> Formula:
        f = self.iff()
        tok = self.peek()
        if tok.kind != "end":
            raise self.error(tok, f"unexpected {tok.text!r}", ["end of formula", "&", "|", "->", "<->"])
        return f

    def iff(self) -> Formula:
        left = self.imp()
        if self.peek().kind == "<->":
            self.take()
            return Iff(left, self.iff())
        return left

    def imp(self) -> Formula:
        left = self.disj()
        if self.peek().kind == "->":
            self.take()
            return Implies(left, self.imp())
        return left

    def disj(self) -> Formula:
        f = self.conj()
        while self.peek().kind == "|":
            self.take()
            f = Or(f, self.conj())
        return f

    def conj(self) -> Formula:
        f = self.unary()
        while self.peek().kind == "&":
            self.take()
            f = And(f, self.unary())
        return f

    def unary(self) -> Formula:
        tok = self.take()
        if tok.kind == "~":
            return Not(self.unary())
        if tok.kind == "k":
            agent = int(tok.text[1:])
            if not 1 <= agent <= self.agent_count:
                raise self.error(tok, f"agent {agent} out of range 1..{self.agent_count}", [])
            return Knows(agent, self.unary())
        if tok.kind == "E":
            return Everybody(self.unary())
        if tok.kind == "atom":
            return Atom(tok.text)
        if tok.kind == "TRUE":
            return TOP
        if tok.kind == "FALSE":
            return BOTTOM
        if tok.kind == "(":
            f = self.iff()
            close = self.take()
            if close.kind != ")":
                raise self.error(close, "unbalanced parenthesis", ["')'"])
            return f
        what = "end of input" if tok.kind == "end" else repr(tok.text)
        raise self.error(tok, f"unexpected {what}", ["atom", "~", "K<agent>", "E", "TRUE", "FALSE", "("])


def parse_formula(text: str, agent_count: int, *, line: int = 1, column: int = 1) -> Formula:
    """Parse ``text`` into a formula over ``agent_count`` agents.

    ``line``/``column`` offset reported spans when the text is embedded in a
    larger file. The ``E`` macro is expanded before returning.
    """
    if agent_count < 1:
        raise ValueError("agent_count must be positive")
    f = _Parser(text, agent_count, line, column).parse()
    return expand_everybody(f, agent_count)


# -- scenario files ----------------------------------------------------------

_HEADER_RE = re.compile(r"\s*([a-z-]+)\s*:(.*)\Z")


def parse_scenario_file(text: str) -> tuple[Scenario, Formula | None]:
    """Parse a scenario file; also return its optional ``goal:`` formula."""
    headers: dict[str, tuple[int, int, str]] = {}
    bodies: list[tuple[str, int, int, str]] = []
    lines = text.replace("\r\n", "\n").split("\n")
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        m = _HEADER_RE.match(line)
        if m is None:
            col = len(line) - len(line.lstrip()) + 1
            raise ParseError(SourceSpan(lineno, col, len(line.strip())), "expected 'key: value'",
                             ["agents:", "atoms:", "assume:", "assume-ck:", "goal:"])
        key, value = m.group(1), m.group(2)
        col = m.start(2) + 1
        if key in ("agents", "atoms", "goal"):
            if key in headers:
                raise ParseError(SourceSpan(lineno, m.start(1) + 1, len(key)), f"duplicate {key!r} line")
            headers[key] = (lineno, col, value)
        elif key in ("assume", "assume-ck"):
            bodies.append((key, lineno, col, value))
        else:
            raise ParseError(SourceSpan(lineno, m.start(1) + 1, len(key)), f"unknown key {key!r}",
                             ["agents", "atoms", "assume", "assume-ck", "goal"])

    if "agents" not in headers:
        raise ParseError(SourceSpan(1, 1, 1), "missing 'agents:' line")
    lineno, col, value = headers["agents"]
    if not value.strip().isdigit() or int(value) < 1:
        raise ParseError(SourceSpan(lineno, col, max(1, len(value))), "agent count must be a positive integer")
    n = int(value)

    atoms: list[str] = []
    if "atoms" in headers:
        lineno, col, value = headers["atoms"]
        for m in re.finditer(r"[^\s,]+", value):
            name = m.group()
            span = SourceSpan(lineno, col + m.start(), len(name))
            if not ATOM_RE.match(name):
                raise ParseError(span, f"bad atom name {name!r}", ["identifier [a-z][a-zA-Z0-9_]*"])
            if name in atoms:
                raise ParseError(span, f"duplicate atom {name!r}")
            atoms.append(name)

    def formula_at(lineno: int, col: int, value: str) -> Formula:
        f = parse_formula(value, n, line=lineno, column=col)
        for sub in _atoms_with_spans(value, lineno, col):
            if sub[0] not in atoms:
                raise ParseError(sub[1], f"atom {sub[0]!r} not declared in 'atoms:'")
        return f

    assumptions = []
    for key, lineno, col, value in bodies:
        mode = Mode.COMMON if key == "assume-ck" else Mode.PLAIN
        assumptions.append(Assumption(formula_at(lineno, col, value), mode))
    goal = formula_at(*headers["goal"]) if "goal" in headers else None
    return Scenario(n, tuple(atoms), tuple(assumptions)), goal


def _atoms_with_spans(text: str, line: int, col0: int):
    for tok in _tokenize(text, line, col0):
        if tok.kind == "atom":
            yield tok.text, SourceSpan(line, tok.column, len(tok.text))


def parse_scenario(text: str) -> Scenario:
    return parse_scenario_file(text)[0]


# -- rendering ---------------------------------------------------------------

_PREC = {Iff: 1, Implies: 2, Or: 3, And: 4}
_SYMBOL = {Iff: "<->", Implies: "->", Or: "|", And: "&"}
_UNARY = 5


def _prec(f: Formula) -> int:
    return _PREC.get(type(f), _UNARY)


def render(f: Formula) -> str:
    """Minimal-parenthesis text that parses back to the same tree."""
    if isinstance(f, Atom):
        return f.name
    if isinstance(f, Top):
        return "TRUE"
    if isinstance(f, Bottom):
        return "FALSE"
    if isinstance(f, Everybody):
        return "E " + _wrap(f.arg, _prec(f.arg) < _UNARY)
    if isinstance(f, Not):
        return "~" + _wrap(f.arg, _prec(f.arg) < _UNARY)
    if isinstance(f, Knows):
        return f"K{f.agent} " + _wrap(f.arg, _prec(f.arg) < _UNARY)
    p = _PREC[type(f)]
    if isinstance(f, (And, Or)):
        left = _wrap(f.left, _prec(f.left) < p)
        right = _wrap(f.right, _prec(f.right) <= p)
    else:
        left = _wrap(f.left, _prec(f.left) <= p)
        right = _wrap(f.right, _prec(f.right) < p)
    return f"{left} {_SYMBOL[type(f)]} {right}"


def _wrap(f: Formula, parens: bool) -> str:
    text = render(f)
    return f"({text})" if parens else text


def render_scenario(s: Scenario, goal: Formula | None = None) -> str:
    lines = [f"agents: {s.agent_count}", f"atoms: {', '.join(s.atoms)}"]
    for a in s.assumptions:
        key = "assume-ck" if a.mode is Mode.COMMON else "assume"
        lines.append(f"{key}: {render(a.formula)}")
    if goal is not None:
        lines.append(f"goal: {render(goal)}")
    return "\n".join(lines) + "\n"
