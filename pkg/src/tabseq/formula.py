"""First-order syntax: terms, formulas, parsing, canonical printing, classification.

The term language has three node kinds: bound-variable occurrences, free
metavariables (placeholders introduced by gamma expansions and written
``X1, X2, ...``), and function applications (constants are zero-argument
applications, Skolem symbols are applications named ``sko1, sko2, ...``).
Both generated name families are reserved and rejected in user input, so a
formula read back from a proof file can never confuse a user constant with
a generated symbol.

Bound-variable names are made unique per formula at parse time, after which
plain structural equality is the formula equality used everywhere else.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from typing import Iterator, Mapping, Union

SKOLEM_NAME = re.compile(r"sko[0-9]+\Z")
META_NAME = re.compile(r"X[0-9]+\Z")


class ParseError(ValueError):
    """Syntax or reserved-symbol error, with 1-based line/column position."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


# ------------------------------------------------------------------ terms


@dataclass(frozen=True)
class Var:
    """A bound-variable occurrence; never free in a well-formed formula."""

    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Meta:
    """A free variable introduced by a gamma rule, awaiting instantiation."""

    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class App:
    """Function application; constants are zero-argument applications."""

    symbol: str
    args: tuple["Term", ...] = ()

    @property
    def is_skolem(self) -> bool:
        return SKOLEM_NAME.match(self.symbol) is not None

    def __str__(self) -> str:
        return print_term(self)


Term = Union[Var, Meta, App]


def const(name: str) -> App:
    return App(name, ())


# --------------------------------------------------------------- formulas


@dataclass(frozen=True)
class Atom:
    predicate: str
    args: tuple[Term, ...] = ()

    def __str__(self) -> str:
        return print_formula(self)


@dataclass(frozen=True)
class Not:
    body: "Formula"

    def __str__(self) -> str:
        return print_formula(self)


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"

    def __str__(self) -> str:
        return print_formula(self)


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"

    def __str__(self) -> str:
        return print_formula(self)


@dataclass(frozen=True)
class Implies:
    left: "Formula"
    right: "Formula"

    def __str__(self) -> str:
        return print_formula(self)


@dataclass(frozen=True)
class Forall:
    var: str
    body: "Formula"

    def __str__(self) -> str:
        return print_formula(self)


@dataclass(frozen=True)
class Exists:
    var: str
    body: "Formula"

    def __str__(self) -> str:
        return print_formula(self)


Formula = Union[Atom, Not, And, Or, Implies, Forall, Exists]


# ----------------------------------------------------------- rule classes


class RuleClass(Enum):
    ALPHA = "alpha"
    BETA = "beta"
    GAMMA = "gamma"
    DELTA = "delta"
    LITERAL = "literal"


def classify(f: Formula) -> RuleClass:
    """Total classification of a formula into alpha/beta/gamma/delta/literal."""
    if isinstance(f, And):
        return RuleClass.ALPHA
    if isinstance(f, (Or, Implies)):
        return RuleClass.BETA
    if isinstance(f, Exists):
        return RuleClass.DELTA
    if isinstance(f, Forall):
        return RuleClass.GAMMA
    if isinstance(f, Atom):
        return RuleClass.LITERAL
    if isinstance(f, Not):
        g = f.body
        if isinstance(g, (Or, Implies, Not)):
            return RuleClass.ALPHA
        if isinstance(g, And):
            return RuleClass.BETA
        if isinstance(g, Forall):
            return RuleClass.DELTA
        if isinstance(g, Exists):
            return RuleClass.GAMMA
        if isinstance(g, Atom):
            return RuleClass.LITERAL
    raise TypeError(f"not a formula: {f!r}")


@dataclass(frozen=True)
class QuantBody:
    """Bound variable and body of a gamma/delta formula, with its polarity.

    ``negated`` is true for the negative forms (``~forall``/``~exists``),
    whose instances keep the pushed-in negation.
    """

    var: str
    body: Formula
    negated: bool

    def instantiate(self, t: Term) -> Formula:
        inst = subst_var(self.body, self.var, t)
        return Not(inst) if self.negated else inst


def alpha_parts(f: Formula) -> tuple[Formula, ...]:
    if isinstance(f, And):
        return (f.left, f.right)
    if isinstance(f, Not):
        g = f.body
        if isinstance(g, Or):
            return (Not(g.left), Not(g.right))
        if isinstance(g, Implies):
            return (g.left, Not(g.right))
        if isinstance(g, Not):
            return (g.body,)
    raise ValueError(f"not an alpha formula: {f}")


def beta_parts(f: Formula) -> tuple[Formula, Formula]:
    if isinstance(f, Or):
        return (f.left, f.right)
    if isinstance(f, Implies):
        return (Not(f.left), f.right)
    if isinstance(f, Not) and isinstance(f.body, And):
        return (Not(f.body.left), Not(f.body.right))
    raise ValueError(f"not a beta formula: {f}")


def quant_parts(f: Formula) -> QuantBody:
    if isinstance(f, Forall):
        return QuantBody(f.var, f.body, False)
    if isinstance(f, Exists):
        return QuantBody(f.var, f.body, False)
    if isinstance(f, Not) and isinstance(f.body, Forall):
        return QuantBody(f.body.var, f.body.body, True)
    if isinstance(f, Not) and isinstance(f.body, Exists):
        return QuantBody(f.body.var, f.body.body, True)
    raise ValueError(f"not a quantified formula: {f}")


def decompose(f: Formula):
    """Successor formulas of a non-literal formula.

    Alpha: one tuple of child formulas.  Beta: two singleton tuples, one per
    branch.  Gamma/delta: a QuantBody carrying variable, body and polarity.
    """
    c = classify(f)
    if c is RuleClass.ALPHA:
        return (alpha_parts(f),)
    if c is RuleClass.BETA:
        left, right = beta_parts(f)
        return ((left,), (right,))
    if c in (RuleClass.GAMMA, RuleClass.DELTA):
        return quant_parts(f)
    raise ValueError(f"cannot decompose a literal: {f}")


# ------------------------------------------------------------- traversals


def _term_iter(t: Term) -> Iterator[Term]:
    stack = [t]
    while stack:
        cur = stack.pop()
        yield cur
        if isinstance(cur, App):
            stack.extend(reversed(cur.args))


def formula_terms(f: Formula) -> Iterator[Term]:
    """All term positions of a formula, in left-to-right document order."""
    if isinstance(f, Atom):
        for a in f.args:
            yield from _term_iter(a)
    elif isinstance(f, Not):
        yield from formula_terms(f.body)
    elif isinstance(f, (And, Or, Implies)):
        yield from formula_terms(f.left)
        yield from formula_terms(f.right)
    elif isinstance(f, (Forall, Exists)):
        yield from formula_terms(f.body)
    else:
        raise TypeError(f"not a formula: {f!r}")


def term_metas(t: Term) -> tuple[Meta, ...]:
    out: list[Meta] = []
    for sub in _term_iter(t):
        if isinstance(sub, Meta) and sub not in out:
            out.append(sub)
    return tuple(out)


def free_metas(f: Formula) -> tuple[Meta, ...]:
    """Metavariables of a formula in first-occurrence order.

    The order is what fixes the argument order of Skolem terms.
    """
    out: list[Meta] = []
    for t in formula_terms(f):
        if isinstance(t, Meta) and t not in out:
            out.append(t)
    return tuple(out)


def term_symbols(t: Term) -> set[str]:
    return {sub.symbol for sub in _term_iter(t) if isinstance(sub, App)}


def formula_symbols(f: Formula) -> set[str]:
    """Function symbols (including constants) occurring anywhere in f."""
    out: set[str] = set()
    for t in formula_terms(f):
        if isinstance(t, App):
            out.add(t.symbol)
    return out


def outermost_skolem_terms(f: Formula) -> set[App]:
    """Maximal Skolem-rooted subterms of f (occurrences inside a larger
    Skolem term are not reported separately)."""
    out: set[App] = set()

    def walk(t: Term) -> None:
        if isinstance(t, App):
            if t.is_skolem:
                out.add(t)
            else:
                for a in t.args:
                    walk(a)

    if isinstance(f, Atom):
        for a in f.args:
            walk(a)
    elif isinstance(f, Not):
        out |= outermost_skolem_terms(f.body)
    elif isinstance(f, (And, Or, Implies)):
        out |= outermost_skolem_terms(f.left)
        out |= outermost_skolem_terms(f.right)
    elif isinstance(f, (Forall, Exists)):
        out |= outermost_skolem_terms(f.body)
    return out


def is_ground_term(t: Term) -> bool:
    return not any(isinstance(sub, (Meta, Var)) for sub in _term_iter(t))


def has_metas(f: Formula) -> bool:
    return any(isinstance(t, Meta) for t in formula_terms(f))


def is_subterm(s: Term, t: Term) -> bool:
    """True if s occurs in t (including s == t)."""
    return any(sub == s for sub in _term_iter(t))


# ----------------------------------------------------------- substitution


def apply_subst_term(bindings: Mapping[str, Term], t: Term) -> Term:
    if isinstance(t, Meta):
        return bindings.get(t.name, t)
    if isinstance(t, App):
        if not t.args:
            return t
        return App(t.symbol, tuple(apply_subst_term(bindings, a) for a in t.args))
    return t


def apply_subst(bindings: Mapping[str, Term], f: Formula) -> Formula:
    """Simultaneous replacement of metavariables by their images.

    Binders are untouched: metavariables are never bound, and after
    groundification the images are closed terms, so capture cannot occur.
    """
    if not bindings:
        return f
    if isinstance(f, Atom):
        return Atom(f.predicate, tuple(apply_subst_term(bindings, a) for a in f.args))
    if isinstance(f, Not):
        return Not(apply_subst(bindings, f.body))
    if isinstance(f, And):
        return And(apply_subst(bindings, f.left), apply_subst(bindings, f.right))
    if isinstance(f, Or):
        return Or(apply_subst(bindings, f.left), apply_subst(bindings, f.right))
    if isinstance(f, Implies):
        return Implies(apply_subst(bindings, f.left), apply_subst(bindings, f.right))
    if isinstance(f, Forall):
        return Forall(f.var, apply_subst(bindings, f.body))
    if isinstance(f, Exists):
        return Exists(f.var, apply_subst(bindings, f.body))
    raise TypeError(f"not a formula: {f!r}")


def subst_var(f: Formula, var: str, t: Term) -> Formula:
    """Replace free occurrences of the bound variable ``var`` by ``t``."""

    def in_term(u: Term) -> Term:
        if isinstance(u, Var) and u.name == var:
            return t
        if isinstance(u, App) and u.args:
            return App(u.symbol, tuple(in_term(a) for a in u.args))
        return u

    if isinstance(f, Atom):
        return Atom(f.predicate, tuple(in_term(a) for a in f.args))
    if isinstance(f, Not):
        return Not(subst_var(f.body, var, t))
    if isinstance(f, And):
        return And(subst_var(f.left, var, t), subst_var(f.right, var, t))
    if isinstance(f, Or):
        return Or(subst_var(f.left, var, t), subst_var(f.right, var, t))
    if isinstance(f, Implies):
        return Implies(subst_var(f.left, var, t), subst_var(f.right, var, t))
    if isinstance(f, (Forall, Exists)):
        if f.var == var:  # shadowed; cannot happen with unique binders
            return f
        ctor = Forall if isinstance(f, Forall) else Exists
        return ctor(f.var, subst_var(f.body, var, t))
    raise TypeError(f"not a formula: {f!r}")


def alpha_equal(f: Formula, g: Formula) -> bool:
    """Structural equality up to a renaming of bound variables."""

    def terms(s: Term, t: Term, env: dict[str, str]) -> bool:
        if isinstance(s, Var) and isinstance(t, Var):
            return env.get(s.name, s.name) == t.name
        if isinstance(s, Meta) and isinstance(t, Meta):
            return s.name == t.name
        if isinstance(s, App) and isinstance(t, App):
            return (
                s.symbol == t.symbol
                and len(s.args) == len(t.args)
                and all(terms(a, b, env) for a, b in zip(s.args, t.args))
            )
        return False

    def walk(a: Formula, b: Formula, env: dict[str, str]) -> bool:
        if type(a) is not type(b):
            return False
        if isinstance(a, Atom):
            return (
                a.predicate == b.predicate
                and len(a.args) == len(b.args)
                and all(terms(s, t, env) for s, t in zip(a.args, b.args))
            )
        if isinstance(a, Not):
            return walk(a.body, b.body, env)
        if isinstance(a, (And, Or, Implies)):
            return walk(a.left, b.left, env) and walk(a.right, b.right, env)
        if isinstance(a, (Forall, Exists)):
            inner = dict(env)
            inner[a.var] = b.var
            return walk(a.body, b.body, inner)
        return False

    return walk(f, g, {})


# ----------------------------------------------------------------- print


def print_term(t: Term) -> str:
    if isinstance(t, (Var, Meta)):
        return t.name
    if isinstance(t, App):
        if not t.args:
            return t.symbol
        return f"{t.symbol}({', '.join(print_term(a) for a in t.args)})"
    raise TypeError(f"not a term: {t!r}")


def print_formula(f: Formula) -> str:
    """Canonical fully-parenthesized rendering; inverse of ``parse``."""
    if isinstance(f, Atom):
        if not f.args:
            return f.predicate
        return f"{f.predicate}({', '.join(print_term(a) for a in f.args)})"
    if isinstance(f, Not):
        return f"(~{print_formula(f.body)})"
    if isinstance(f, And):
        return f"({print_formula(f.left)} & {print_formula(f.right)})"
    if isinstance(f, Or):
        return f"({print_formula(f.left)} | {print_formula(f.right)})"
    if isinstance(f, Implies):
        return f"({print_formula(f.left)} => {print_formula(f.right)})"
    if isinstance(f, Forall):
        return f"(forall {f.var}. {print_formula(f.body)})"
    if isinstance(f, Exists):
        return f"(exists {f.var}. {print_formula(f.body)})"
    raise TypeError(f"not a formula: {f!r}")


# ----------------------------------------------------------------- parse

_TOKEN_SPEC = [
    ("IMPLIES", r"=>"),
    ("IDENT", r"[A-Za-z][A-Za-z0-9_]*"),
    ("LPAR", r"\("),
    ("RPAR", r"\)"),
    ("COMMA", r","),
    ("DOT", r"\."),
    ("NOT", r"~"),
    ("AND", r"&"),
    ("OR", r"\|"),
    ("WS", r"[ \t\r\n]+"),
]
_TOKEN_RE = re.compile("|".join(f"(?P<{name}>{pat})" for name, pat in _TOKEN_SPEC))


@dataclass(frozen=True)
class _Token:
    kind: str
    value: str
    line: int
    column: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    line, line_start = 1, 0
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        value = m.group()
        if kind != "WS":
            tokens.append(_Token(kind, value, line, m.start() - line_start + 1))
        nl = value.count("\n")
        if nl:
            line += nl
            line_start = m.start() + value.rfind("\n") + 1
        pos = m.end()
    tokens.append(_Token("END", "", line, pos - line_start + 1))
    return tokens


class _Parser:
    """Recursive-descent parser for the formula grammar.

    Grammar (precedence ``~ > & > | > =>``, ``=>`` right-associative, a
    quantifier body extends as far right as possible)::

        formula := implies
        implies := or ("=>" implies)?
        or      := and ("|" and)*
        and     := unary ("&" unary)*
        unary   := "~" unary | "forall" ident "." implies
                 | "exists" ident "." implies | atom | "(" implies ")"
        atom    := ident ("(" term ("," term)* ")")?
        term    := ident ("(" term ("," term)* ")")?

    Identifiers match ``[A-Za-z][A-Za-z0-9_]*``; the generated families
    ``sko<digits>`` (Skolem symbols) and ``X<digits>`` (metavariables) are
    reserved and rejected unless ``allow_generated`` is set, which is the
    mode used when reading proof files back.
    """

    def __init__(self, tokens: list[_Token], allow_generated: bool):
        self.tokens = tokens
        self.pos = 0
        self.allow_generated = allow_generated
        self.env: list[tuple[str, str]] = []  # (source name, unique name)
        self.binder_names: set[str] = set()
        self.taken = {t.value for t in tokens if t.kind == "IDENT"}

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def next(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str, what: str) -> _Token:
        tok = self.peek()
        if tok.kind != kind:
            raise ParseError(f"expected {what}, found {tok.value or 'end of input'!r}",
                             tok.line, tok.column)
        return self.next()

    def ident(self, what: str) -> _Token:
        tok = self.expect("IDENT", what)
        if tok.value in ("forall", "exists"):
            raise ParseError(f"expected {what}, found keyword {tok.value!r}",
                             tok.line, tok.column)
        if not self.allow_generated and (SKOLEM_NAME.match(tok.value) or META_NAME.match(tok.value)):
            raise ParseError(f"identifier {tok.value!r} is reserved for generated symbols",
                             tok.line, tok.column)
        return tok

    def fresh_binder(self, name: str) -> str:
        if name not in self.binder_names:
            unique = name
        else:
            i = 1
            while f"{name}_{i}" in self.binder_names or f"{name}_{i}" in self.taken:
                i += 1
            unique = f"{name}_{i}"
        self.binder_names.add(unique)
        self.taken.add(unique)
        return unique

    def parse_formula(self) -> Formula:
        left = self.parse_or()
        if self.peek().kind == "IMPLIES":
            self.next()
            return Implies(left, self.parse_formula())
        return left

    def parse_or(self) -> Formula:
        f = self.parse_and()
        while self.peek().kind == "OR":
            self.next()
            f = Or(f, self.parse_and())
        return f

    def parse_and(self) -> Formula:
        f = self.parse_unary()
        while self.peek().kind == "AND":
            self.next()
            f = And(f, self.parse_unary())
        return f

    def parse_unary(self) -> Formula:
        tok = self.peek()
        if tok.kind == "NOT":
            self.next()
            return Not(self.parse_unary())
        if tok.kind == "IDENT" and tok.value in ("forall", "exists"):
            self.next()
            name_tok = self.ident("a bound-variable name")
            unique = self.fresh_binder(name_tok.value)
            self.expect("DOT", "'.' after the bound variable")
            self.env.append((name_tok.value, unique))
            body = self.parse_formula()
            self.env.pop()
            return Forall(unique, body) if tok.value == "forall" else Exists(unique, body)
        if tok.kind == "LPAR":
            self.next()
            f = self.parse_formula()
            self.expect("RPAR", "')'")
            return f
        if tok.kind == "IDENT":
            return self.parse_atom()
        raise ParseError(f"expected a formula, found {tok.value or 'end of input'!r}",
                         tok.line, tok.column)

    def parse_atom(self) -> Formula:
        name = self.ident("a predicate name")
        args: tuple[Term, ...] = ()
        if self.peek().kind == "LPAR":
            args = self.parse_args()
        return Atom(name.value, args)

    def parse_args(self) -> tuple[Term, ...]:
        self.expect("LPAR", "'('")
        args = [self.parse_term()]
        while self.peek().kind == "COMMA":
            self.next()
            args.append(self.parse_term())
        self.expect("RPAR", "')'")
        return tuple(args)

    def parse_term(self) -> Term:
        name = self.ident("a term")
        if self.peek().kind == "LPAR":
            return App(name.value, self.parse_args())
        for source, unique in reversed(self.env):
            if source == name.value:
                return Var(unique)
        if self.allow_generated and META_NAME.match(name.value):
            return Meta(name.value)
        return App(name.value, ())


def parse(text: str, *, allow_generated: bool = False) -> Formula:
    """Parse a formula; bound variables are renamed apart.

    ``allow_generated`` admits the reserved ``skoN``/``XN`` identifier
    families (Skolem symbols and metavariables) and is used only when
    reading tool-produced proof files.
    """
    parser = _Parser(_tokenize(text), allow_generated)
    f = parser.parse_formula()
    end = parser.peek()
    if end.kind != "END":
        raise ParseError(f"unexpected trailing input {end.value!r}", end.line, end.column)
    return f


def parse_term(text: str, *, allow_generated: bool = False) -> Term:
    parser = _Parser(_tokenize(text), allow_generated)
    t = parser.parse_term()
    end = parser.peek()
    if end.kind != "END":
        raise ParseError(f"unexpected trailing input {end.value!r}", end.line, end.column)
    return t
