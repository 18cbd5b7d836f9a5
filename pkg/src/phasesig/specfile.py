"""Reader and writer for the line-oriented system specification format.

Grammar (``#`` starts a comment; a statement ends at a newline outside
brackets, so long expressions may wrap, and a phase expression may start
on the line after its component set)::

    boundaries NUM NUM ...
    type NAME global DIST
    type NAME conditional DIST DIST ...        # one law per phase
    type NAME hazard NUM NUM ...               # one rate per phase
    component NAME NAME ... : TYPE
    phase INT { NAME, NAME, ... } EXPR
    option NAME VALUE ...

    DIST := exponential(RATE) | weibull(SCALE, SHAPE)
    EXPR := comp NAME | and(EXPR, ...) | or(EXPR, ...) | koutofn(INT, EXPR, ...)
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .errors import SpecSemanticError, SpecSyntaxError
from .lifetime import Exponential, GlobalCDF, PhaseConditional, PhaseHazard, Weibull
from .model import And, Comp, KOutOfN, Or, PhasedSystem, PhaseSpec, PhysicalType, validate_system

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<comment>\#[^\n]*)
  | (?P<nl>\n)
  | (?P<num>[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<punct>[(){},:])
""", re.VERBOSE)


@dataclass
class Token:
    kind: str
    text: str
    line: int
    col: int


@dataclass
class SpecOptions:
    relax_exponential: bool = False
    grid: int | list[float] | None = None
    trials: int | None = None
    seed: int | None = None
    threads: int | None = None


@dataclass
class _Draft:
    boundaries: list[float] | None = None
    types: dict[str, PhysicalType] = field(default_factory=dict)
    components: dict[str, str] = field(default_factory=dict)
    phases: dict[int, tuple[list[str], object]] = field(default_factory=dict)
    options: SpecOptions = field(default_factory=SpecOptions)


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    line, line_start, pos, depth = 1, 0, 0, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            raise SpecSyntaxError("unexpected character", line, col, text[pos])
        kind = m.lastgroup
        value = m.group()
        if kind == "nl":
            if depth == 0:
                tokens.append(Token("nl", value, line, col))
            line += 1
            line_start = m.end()
        elif kind in ("num", "name"):
            tokens.append(Token(kind, value, line, col))
        elif kind == "punct":
            if value in "({":
                depth += 1
            elif value in ")}":
                depth = max(0, depth - 1)
            tokens.append(Token(value, value, line, col))
        pos = m.end()
    tokens.append(Token("nl", "", line, pos - line_start + 1))
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.pos = 0
        self.draft = _Draft()

    # token helpers
    def peek(self) -> Token:
        return self.tokens[self.pos]

    def next(self) -> Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def fail(self, message: str, tok: Token | None = None):
        tok = tok or self.peek()
        text = "<end of statement>" if tok.kind in ("nl", "eof") else tok.text
        raise SpecSyntaxError(message, tok.line, tok.col, text)

    def expect(self, kind: str, what: str) -> Token:
        tok = self.peek()
        if tok.kind != kind:
            self.fail(f"expected {what}", tok)
        return self.next()

    def number(self, what: str) -> float:
        return float(self.expect("num", what).text)

    def integer(self, what: str) -> int:
        tok = self.expect("num", what)
        try:
            return int(tok.text)
        except ValueError:
            self.fail(f"expected {what} (an integer)", tok)

    def end_of_statement(self):
        if self.peek().kind != "nl":
            self.fail("unexpected token at end of statement")
        self.next()

    # grammar
    def parse(self) -> _Draft:
        while self.peek().kind != "eof":
            tok = self.peek()
            if tok.kind == "nl":
                self.next()
                continue
            if tok.kind != "name":
                self.fail("expected a statement keyword", tok)
            handler = getattr(self, f"stmt_{tok.text}", None)
            if handler is None:
                self.fail("unknown statement", tok)
            self.next()
            handler(tok)
            self.end_of_statement()
        return self.draft

    def stmt_boundaries(self, kw: Token):
        if self.draft.boundaries is not None:
            self.fail("boundaries given twice", kw)
        values = []
        while self.peek().kind == "num":
            values.append(float(self.next().text))
        if len(values) < 2:
            self.fail("boundaries need at least two times")
        self.draft.boundaries = values

    def dist(self) -> Exponential | Weibull:
        tok = self.expect("name", "a distribution (exponential or weibull)")
        self.expect("(", "'('")
        try:
            if tok.text == "exponential":
                d = Exponential(self.number("a rate"))
            elif tok.text == "weibull":
                scale = self.number("a Weibull scale")
                self.expect(",", "','")
                d = Weibull(scale, self.number("a Weibull shape"))
            else:
                self.fail("unknown distribution", tok)
        except ValueError as exc:
            self.fail(str(exc), tok)
        self.expect(")", "')'")
        return d

    def stmt_type(self, kw: Token):
        name = self.expect("name", "a type name")
        if name.text in self.draft.types:
            self.fail("duplicate type", name)
        mode = self.expect("name", "a lifetime mode (global, conditional or hazard)")
        if mode.text == "global":
            model = GlobalCDF(self.dist())
        elif mode.text == "conditional":
            laws = []
            while self.peek().kind == "name":
                laws.append(self.dist())
            if not laws:
                self.fail("conditional mode needs one law per phase")
            model = PhaseConditional(tuple(laws))
        elif mode.text == "hazard":
            rates = []
            while self.peek().kind == "num":
                rates.append(self.next())
            if not rates:
                self.fail("hazard mode needs one rate per phase")
            try:
                model = PhaseHazard(tuple(float(r.text) for r in rates))
            except ValueError as exc:
                self.fail(str(exc), rates[0])
        else:
            self.fail("unknown lifetime mode", mode)
        self.draft.types[name.text] = PhysicalType(name.text, model)

    def stmt_component(self, kw: Token):
        names = []
        while self.peek().kind == "name":
            names.append(self.next())
        if not names:
            self.fail("expected component names")
        self.expect(":", "':' before the type name")
        ptype = self.expect("name", "a type name")
        if ptype.text not in self.draft.types:
            self.fail("undefined type", ptype)
        for tok in names:
            if tok.text in self.draft.components:
                self.fail("duplicate component", tok)
            self.draft.components[tok.text] = ptype.text

    def stmt_phase(self, kw: Token):
        idx_tok = self.peek()
        idx = self.integer("a phase index")
        if idx in self.draft.phases:
            self.fail("duplicate phase", idx_tok)
        self.expect("{", "'{' opening the component set")
        present = []
        while self.peek().kind != "}":
            tok = self.expect("name", "a component name")
            present.append(tok.text)
            if self.peek().kind == ",":
                self.next()
        self.next()
        while self.peek().kind == "nl":  # expression may start on the next line
            self.next()
        expr = self.expr()
        self.draft.phases[idx] = (present, expr)

    def expr(self):
        tok = self.expect("name", "a structure node (comp, and, or, koutofn)")
        if tok.text == "comp":
            return Comp(self.expect("name", "a component name after 'comp'").text)
        if tok.text not in ("and", "or", "koutofn"):
            self.fail("unknown structure node", tok)
        node = tok.text
        self.expect("(", f"'(' after '{node}'")
        k = None
        if node == "koutofn":
            k = self.integer("the threshold k of 'koutofn'")
            self.expect(",", "',' after the threshold of 'koutofn'")
        children = []
        while True:
            if self.peek().kind != "name":
                self.fail(f"expected a child expression in '{node}' node")
            children.append(self.expr())
            sep = self.next()
            if sep.kind == ")":
                break
            if sep.kind != ",":
                self.fail(f"expected ',' or ')' in '{node}' node", sep)
        if node == "and":
            return And(*children)
        if node == "or":
            return Or(*children)
        return KOutOfN(k, *children)

    def stmt_option(self, kw: Token):
        name = self.expect("name", "an option name")
        opts = self.draft.options
        if name.text == "relax_exponential":
            val = self.expect("name", "true or false")
            if val.text not in ("true", "false"):
                self.fail("expected true or false", val)
            opts.relax_exponential = val.text == "true"
        elif name.text == "grid":
            values = []
            while self.peek().kind == "num":
                values.append(float(self.next().text))
            if not values:
                self.fail("grid needs a point count or a list of times")
            opts.grid = int(values[0]) if len(values) == 1 and values[0].is_integer() else values
        elif name.text in ("trials", "seed", "threads"):
            setattr(opts, name.text, self.integer(f"an integer {name.text}"))
        else:
            self.fail("unknown option", name)


def _assemble(draft: _Draft, text_end: Token) -> PhasedSystem:
    if draft.boundaries is None:
        raise SpecSyntaxError("missing 'boundaries' statement", text_end.line, text_end.col)
    n = len(draft.boundaries) - 1
    for i in range(1, n + 1):
        if i not in draft.phases:
            raise SpecSyntaxError(f"missing 'phase {i}' statement", text_end.line, text_end.col)
    extra = sorted(set(draft.phases) - set(range(1, n + 1)))
    if extra:
        raise SpecSyntaxError(f"phase {extra[0]} beyond the {n} phases set by boundaries",
                              text_end.line, text_end.col)
    comps = {name: draft.types[t] for name, t in draft.components.items()}
    phases = tuple(
        PhaseSpec(i, draft.boundaries[i - 1], draft.boundaries[i],
                  frozenset(draft.phases[i][0]), draft.phases[i][1])
        for i in range(1, n + 1)
    )
    return PhasedSystem(phases, comps)


def parse_spec_text(text: str) -> tuple[PhasedSystem, SpecOptions]:
    parser = _Parser(text)
    draft = parser.parse()
    system = _assemble(draft, parser.tokens[-1])
    report = validate_system(system)
    if not report.ok:
        raise SpecSemanticError(report)
    return system, draft.options


def fixture_names() -> list[str]:
    root = resources.files("phasesig.fixtures")
    return sorted(p.name[:-4] for p in root.iterdir() if p.name.endswith(".pms"))


def fixture_text(name: str) -> str:
    return (resources.files("phasesig.fixtures") / f"{name}.pms").read_text(encoding="utf-8")


def parse_spec(path) -> tuple[PhasedSystem, SpecOptions]:
    """Parse a spec file; a bare shipped fixture name (e.g. ``example1``) also works."""
    p = Path(path)
    if not p.exists() and str(path) in fixture_names():
        return parse_spec_text(fixture_text(str(path)))
    return parse_spec_text(p.read_text(encoding="utf-8"))


def load_fixture(name: str) -> tuple[PhasedSystem, SpecOptions]:
    return parse_spec_text(fixture_text(name))


# -- writer -------------------------------------------------------------------

def _fmt(x: float) -> str:
    return repr(float(x))


def _dist_text(d) -> str:
    if isinstance(d, Exponential):
        return f"exponential({_fmt(d.rate)})"
    return f"weibull({_fmt(d.scale)}, {_fmt(d.shape)})"


def _model_text(model) -> str:
    if isinstance(model, GlobalCDF):
        return "global " + _dist_text(model.dist)
    if isinstance(model, PhaseConditional):
        return "conditional " + " ".join(_dist_text(d) for d in model.laws)
    return "hazard " + " ".join(_fmt(r) for r in model.rates)


def dump_spec(sys: PhasedSystem, options: SpecOptions | None = None) -> str:
    """Canonical text; ``parse_spec_text`` on it reproduces an equal system."""
    lines = ["boundaries " + " ".join(_fmt(t) for t in sys.boundaries), ""]
    types = sys.physical_types
    for name in sorted(types):
        lines.append(f"type {name} {_model_text(types[name].lifetime)}")
    lines.append("")
    for name in sorted(types):
        members = sorted(c for c, t in sys.components.items() if t.name == name)
        lines.append(f"component {' '.join(members)} : {name}")
    lines.append("")
    for phase in sys.phases:
        lines.append(f"phase {phase.index} {{{', '.join(sorted(phase.components))}}} {phase.structure}")
    if options is not None:
        lines.append("")
        defaults = SpecOptions()
        if options.relax_exponential != defaults.relax_exponential:
            lines.append(f"option relax_exponential {'true' if options.relax_exponential else 'false'}")
        if options.grid is not None:
            grid = options.grid if isinstance(options.grid, list) else [options.grid]
            lines.append("option grid " + " ".join(str(g) if isinstance(g, int) else _fmt(g) for g in grid))
        for key in ("trials", "seed", "threads"):
            value = getattr(options, key)
            if value is not None:
                lines.append(f"option {key} {value}")
    return "\n".join(lines) + "\n"
