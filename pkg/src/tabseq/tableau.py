"""Tableau trees and a bounded deterministic refutation engine.

A tableau is kept whole as a tree: nodes carry the multiset of formulas
collected so far (non-destructive rules only ever append), internal nodes
are labelled by the rule applied at them, and closure is itself recorded as
a one-child rule whose child is the closed leaf.  Paths address nodes as
0/1 sequences, the root being the empty sequence.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Iterator

from .formula import (
    App,
    Atom,
    Formula,
    Meta,
    Not,
    RuleClass,
    Term,
    alpha_parts,
    beta_parts,
    classify,
    formula_symbols,
    formula_terms,
    free_metas,
    parse,
    parse_term,
    print_formula,
    print_term,
    quant_parts,
)
from .unify import Constraint, ConstraintStore, Substitution, consistent, groundify, solve

Path = tuple[int, ...]

CLOSURE = "closure"


class TableauError(ValueError):
    pass


class AuditError(AssertionError):
    """A structural invariant of a tableau failed."""


class FormatError(ValueError):
    """A serialized proof file is malformed."""


def format_path(path: Path) -> str:
    return "".join(str(b) for b in path) or "(root)"


@dataclass(frozen=True)
class RuleInstance:
    """The rule applied at an internal node.

    ``kind`` is one of alpha/beta/gamma/delta/closure; ``introduced`` lists
    the formulas added per child.  Delta instances carry the Skolem term
    whose arguments are the metavariables of the principal's body; gamma
    instances carry the fresh metavariable; closures carry the
    complementary pair (positive literal, negated literal).
    """

    kind: str
    principal: Formula | None
    introduced: tuple[tuple[Formula, ...], ...]
    meta: Meta | None = None
    skolem: App | None = None
    closure_pair: tuple[Formula, Formula] | None = None


@dataclass(frozen=True)
class TableauNode:
    formulas: tuple[Formula, ...]
    rule: RuleInstance | None = None
    children: tuple["TableauNode", ...] = ()
    closed: bool = False

    @property
    def is_leaf(self) -> bool:
        return not self.children

    @property
    def is_open_leaf(self) -> bool:
        return not self.children and not self.closed


@dataclass(frozen=True)
class ClosedTableau:
    """A fully closed tableau with its final store and ground unifier."""

    root: TableauNode
    store: ConstraintStore
    unifier: Substitution


@dataclass(frozen=True)
class Exhausted:
    """Search gave up within its limits; the input may still be refutable."""

    reason: str
    steps: int


class NameSupply:
    """Per-session counters for fresh metavariables and Skolem symbols.

    Owned by one prover session; names already occurring in the input are
    skipped so generated symbols can never collide with user constants.
    """

    def __init__(self, avoid: Iterable[str] = ()):
        self._avoid = set(avoid)
        self._meta = 0
        self._skolem = 0

    def fresh_meta(self) -> Meta:
        while True:
            self._meta += 1
            name = f"X{self._meta}"
            if name not in self._avoid:
                return Meta(name)

    def fresh_skolem_symbol(self) -> str:
        while True:
            self._skolem += 1
            name = f"sko{self._skolem}"
            if name not in self._avoid:
                return name


# ------------------------------------------------------------- tree helpers


def node_at(root: TableauNode, path: Path) -> TableauNode:
    node = root
    for bit in path:
        try:
            node = node.children[bit]
        except IndexError:
            raise TableauError(f"no node at path {format_path(path)}") from None
    return node


def replace_at(root: TableauNode, path: Path, new: TableauNode) -> TableauNode:
    if not path:
        return new
    spine = [root]
    for bit in path[:-1]:
        spine.append(spine[-1].children[bit])
    node = new
    for parent, bit in zip(reversed(spine), reversed(path)):
        children = list(parent.children)
        children[bit] = node
        node = TableauNode(parent.formulas, parent.rule, tuple(children), parent.closed)
    return node


def iter_nodes(root: TableauNode) -> Iterator[tuple[Path, TableauNode]]:
    """Preorder traversal, left child before right."""
    stack: list[tuple[Path, TableauNode]] = [((), root)]
    while stack:
        path, node = stack.pop()
        yield path, node
        for bit in reversed(range(len(node.children))):
            stack.append((path + (bit,), node.children[bit]))


def open_leaves(root: TableauNode) -> list[Path]:
    return [p for p, n in iter_nodes(root) if n.is_open_leaf]


def rule_count(root: TableauNode) -> int:
    return sum(1 for _, n in iter_nodes(root) if n.rule is not None)


def rule_kinds(root: TableauNode) -> list[str]:
    """Rule kinds in preorder; on one-branch tableaux this is root-to-leaf order."""
    return [n.rule.kind for _, n in iter_nodes(root) if n.rule is not None]


# ------------------------------------------------------------------- rules


def expand(root: TableauNode, leaf: Path, principal: Formula, names: NameSupply) -> TableauNode:
    """Apply the alpha/beta/gamma/delta rule for ``principal`` at an open leaf.

    Children receive the leaf's multiset plus the introduced formulas; the
    constraint store is untouched by expansions.
    """
    node = node_at(root, leaf)
    if node.closed:
        raise TableauError(f"leaf {format_path(leaf)} is closed")
    if node.rule is not None:
        raise TableauError(f"node {format_path(leaf)} is not a leaf")
    if principal not in node.formulas:
        raise TableauError(f"principal {print_formula(principal)} not at leaf {format_path(leaf)}")
    cls = classify(principal)
    if cls is RuleClass.LITERAL:
        raise TableauError(f"cannot expand literal {print_formula(principal)}")

    if cls is RuleClass.ALPHA:
        intro: tuple[tuple[Formula, ...], ...] = (alpha_parts(principal),)
        rule = RuleInstance(RuleClass.ALPHA.value, principal, intro)
    elif cls is RuleClass.BETA:
        left, right = beta_parts(principal)
        intro = ((left,), (right,))
        rule = RuleInstance(RuleClass.BETA.value, principal, intro)
    elif cls is RuleClass.GAMMA:
        qb = quant_parts(principal)
        m = names.fresh_meta()
        intro = ((qb.instantiate(m),),)
        rule = RuleInstance(RuleClass.GAMMA.value, principal, intro, meta=m)
    else:  # delta
        qb = quant_parts(principal)
        sko = App(names.fresh_skolem_symbol(), tuple(free_metas(qb.body)))
        intro = ((qb.instantiate(sko),),)
        rule = RuleInstance(RuleClass.DELTA.value, principal, intro, skolem=sko)

    children = tuple(TableauNode(node.formulas + extra) for extra in intro)
    return replace_at(root, leaf, TableauNode(node.formulas, rule, children))


def close(
    root: TableauNode,
    store: ConstraintStore,
    leaf: Path,
    pos: Formula,
    neg: Formula,
    *,
    eager: bool = True,
) -> tuple[TableauNode, ConstraintStore] | None:
    """Close an open leaf on the complementary pair (pos, neg).

    Adds the constraint ``pos = neg'`` (neg being ``~neg'``) and marks the
    leaf closed, or returns None (refused) when the candidate constraint is
    inconsistent.  With ``eager`` unset, only the pair itself is checked and
    global satisfiability is deferred to the final solve.
    """
    node = node_at(root, leaf)
    if node.closed or node.rule is not None:
        raise TableauError(f"{format_path(leaf)} is not an open leaf")
    if not isinstance(pos, Atom) or not isinstance(neg, Not) or not isinstance(neg.body, Atom):
        raise TableauError("closure needs an atom and a negated atom")
    if pos not in node.formulas or neg not in node.formulas:
        raise TableauError("closure pair not present at leaf")
    if pos.predicate != neg.body.predicate or len(pos.args) != len(neg.body.args):
        raise TableauError("closure pair predicates do not match")

    c = Constraint(pos, neg.body)
    base = store if eager else ConstraintStore()
    if not consistent(base, [c]):
        return None
    rule = RuleInstance(CLOSURE, None, ((),), closure_pair=(pos, neg))
    child = TableauNode(node.formulas, closed=True)
    return replace_at(root, leaf, TableauNode(node.formulas, rule, (child,))), store.add(c)


# ------------------------------------------------------------------ search

_PRIORITY = {
    RuleClass.ALPHA: 0,
    RuleClass.DELTA: 1,
    RuleClass.BETA: 2,
    RuleClass.GAMMA: 3,
}


def _branch_uses(root: TableauNode, leaf: Path) -> dict[Formula, int]:
    uses: dict[Formula, int] = {}
    node = root
    for bit in leaf:
        if node.rule is not None and node.rule.principal is not None:
            uses[node.rule.principal] = uses.get(node.rule.principal, 0) + 1
        node = node.children[bit]
    return uses


def _closure_candidates(formulas: tuple[Formula, ...]) -> Iterator[tuple[Formula, Formula]]:
    for pos in formulas:
        if not isinstance(pos, Atom):
            continue
        for neg in formulas:
            if (
                isinstance(neg, Not)
                and isinstance(neg.body, Atom)
                and neg.body.predicate == pos.predicate
                and len(neg.body.args) == len(pos.args)
            ):
                yield pos, neg


def prove(
    formulas: Iterable[Formula],
    gamma_limit: int = 2,
    depth_limit: int = 200,
    *,
    eager_close: bool = True,
) -> ClosedTableau | Exhausted:
    """Search for a closed tableau refuting the given multiset.

    Deterministic strategy: always work on the leftmost open leaf, try
    every closure candidate first, then expand the best remaining formula,
    preferring alpha > delta > beta > gamma and, within a class, the least
    used and then the oldest occurrence.  Each gamma formula may be
    re-instantiated up to ``gamma_limit`` times per branch; a branch longer
    than ``depth_limit`` exhausts the search.
    """
    if gamma_limit < 1:
        raise ValueError("gamma_limit must be at least 1")
    if depth_limit < 1:
        raise ValueError("depth_limit must be at least 1")

    gamma = tuple(formulas)
    avoid: set[str] = set()
    for f in gamma:
        avoid |= formula_symbols(f)
    names = NameSupply(avoid)

    root = TableauNode(gamma)
    store = ConstraintStore()
    steps = 0

    while True:
        pending = open_leaves(root)
        if not pending:
            break
        leaf = min(pending)
        node = node_at(root, leaf)

        closed = None
        for pos, neg in _closure_candidates(node.formulas):
            closed = close(root, store, leaf, pos, neg, eager=eager_close)
            if closed is not None:
                break
        if closed is not None:
            root, store = closed
            steps += 1
            continue

        if len(leaf) >= depth_limit:
            return Exhausted("depth limit reached", steps)

        uses = _branch_uses(root, leaf)
        best: tuple[int, int, int] | None = None
        principal: Formula | None = None
        seen: set[Formula] = set()
        for index, f in enumerate(node.formulas):
            if f in seen:
                continue
            seen.add(f)
            cls = classify(f)
            if cls is RuleClass.LITERAL:
                continue
            used = uses.get(f, 0)
            limit = gamma_limit if cls is RuleClass.GAMMA else 1
            if used >= limit:
                continue
            key = (_PRIORITY[cls], used, index)
            if best is None or key < best:
                best = key
                principal = f
        if principal is None:
            return Exhausted("no closure and no usable formula on a branch", steps)

        root = expand(root, leaf, principal, names)
        steps += 1

    sigma = solve(store)
    if sigma is None:
        # only reachable with deferred closure checking
        return Exhausted("closure constraints are globally unsatisfiable", steps)

    metas: list[Meta] = []
    for _, n in iter_nodes(root):
        for f in n.formulas:
            for t in formula_terms(f):
                if isinstance(t, Meta) and t not in metas:
                    metas.append(t)
    symbols: set[str] = set()
    for _, n in iter_nodes(root):
        for f in n.formulas:
            symbols |= formula_symbols(f)
    ground = groundify(sigma, metas, symbols)
    return ClosedTableau(root, store, ground)


# ------------------------------------------------------------------ audits


def audit_closed_tableau(ct: ClosedTableau) -> None:
    """Check the structural invariants of a finished tableau.

    Raises AuditError on the first violation: every leaf closed, each child
    multiset equal to its parent plus the introduced formulas
    (non-destructivity), rule labels consistent with the recorded children,
    Skolem symbols unused before their introduction, and the unifier
    ground, solving the store, and equating every closure pair.
    """
    from collections import Counter

    def walk(node: TableauNode, path: Path) -> None:
        if node.rule is None:
            if node.children:
                raise AuditError(f"rule-less node {format_path(path)} has children")
            if not node.closed:
                raise AuditError(f"open leaf at {format_path(path)}")
            return
        if node.closed:
            raise AuditError(f"closed node {format_path(path)} carries a rule")
        rule = node.rule
        if len(node.children) != len(rule.introduced):
            raise AuditError(f"child count mismatch at {format_path(path)}")
        if rule.kind == CLOSURE:
            if rule.closure_pair is None:
                raise AuditError(f"closure without pair at {format_path(path)}")
            pos, neg = rule.closure_pair
            if pos not in node.formulas or neg not in node.formulas:
                raise AuditError(f"closure pair absent at {format_path(path)}")
            if not node.children[0].closed:
                raise AuditError(f"closure child not closed at {format_path(path)}")
        else:
            if rule.principal is None or rule.principal not in node.formulas:
                raise AuditError(f"principal absent at {format_path(path)}")
            if rule.kind == RuleClass.DELTA.value and rule.skolem is None:
                raise AuditError(f"delta without skolem at {format_path(path)}")
            if rule.kind == RuleClass.GAMMA.value and rule.meta is None:
                raise AuditError(f"gamma without metavariable at {format_path(path)}")
        for bit, (child, extra) in enumerate(zip(node.children, rule.introduced)):
            if Counter(child.formulas) != Counter(node.formulas) + Counter(extra):
                raise AuditError(
                    f"child multiset is not parent plus introduced at {format_path(path)}"
                )
            walk(child, path + (bit,))

    walk(ct.root, ())

    introduced: set[str] = set()
    for path, n in iter_nodes(ct.root):
        if n.rule is not None and n.rule.skolem is not None:
            sym = n.rule.skolem.symbol
            if sym in introduced:
                raise AuditError(f"skolem symbol {sym} introduced twice")
            introduced.add(sym)
            for f in n.formulas:
                if sym in formula_symbols(f):
                    raise AuditError(f"skolem {sym} occurs before its delta step")

    if not ct.unifier.ground:
        raise AuditError("unifier is not flagged ground")
    for name, t in ct.unifier.items():
        if term_has_meta(t):
            raise AuditError(f"unifier range for {name} contains a metavariable")
    if solve(ct.store) is None:
        raise AuditError("final store is unsatisfiable")
    for c in ct.store.constraints:
        lhs = ct.unifier.apply(c.lhs) if isinstance(c.lhs, (Atom, Not)) else ct.unifier.apply_term(c.lhs)
        rhs = ct.unifier.apply(c.rhs) if isinstance(c.rhs, (Atom, Not)) else ct.unifier.apply_term(c.rhs)
        if lhs != rhs:
            raise AuditError("unifier does not equate a stored constraint")
    for path, n in iter_nodes(ct.root):
        if n.rule is not None and n.rule.closure_pair is not None:
            pos, neg = n.rule.closure_pair
            if ct.unifier.apply(pos) != ct.unifier.apply(neg.body):
                raise AuditError(f"unifier does not equate closure pair at {format_path(path)}")


def term_has_meta(t: Term) -> bool:
    if isinstance(t, Meta):
        return True
    if isinstance(t, App):
        return any(term_has_meta(a) for a in t.args)
    return False


# --------------------------------------------------------------- serialize


def _rule_to_record(rule: RuleInstance) -> dict:
    record: dict = {
        "class": rule.kind,
        "principal": print_formula(rule.principal) if rule.principal is not None else None,
        "introduced": [[print_formula(f) for f in child] for child in rule.introduced],
    }
    if rule.meta is not None:
        record["meta"] = rule.meta.name
    if rule.skolem is not None:
        record["skolem"] = print_term(rule.skolem)
    if rule.closure_pair is not None:
        record["closure_pair"] = [print_formula(rule.closure_pair[0]),
                                  print_formula(rule.closure_pair[1])]
    return record


def _node_to_record(node: TableauNode) -> dict:
    return {
        "formulas": [print_formula(f) for f in node.formulas],
        "rule": _rule_to_record(node.rule) if node.rule is not None else None,
        "children": [_node_to_record(c) for c in node.children],
        "closed": node.closed,
    }


def tableau_to_json(ct: ClosedTableau) -> str:
    """Canonical serialization: sorted keys, no insignificant whitespace."""
    record = {
        "root": _node_to_record(ct.root),
        "store": [
            [_side_str(c.lhs), _side_str(c.rhs)] for c in ct.store.constraints
        ],
        "unifier": sorted(
            f"{name} := {print_term(t)}" for name, t in ct.unifier.items()
        ),
    }
    return json.dumps(record, sort_keys=True, separators=(",", ":")) + "\n"


def _side_str(side) -> str:
    if isinstance(side, (Atom, Not)):
        return print_formula(side)
    return print_term(side)


def _parse_formula_field(text, what: str) -> Formula:
    if not isinstance(text, str):
        raise FormatError(f"{what} must be a string")
    try:
        return parse(text, allow_generated=True)
    except ValueError as e:
        raise FormatError(f"bad {what}: {e}") from None


def _rule_from_record(record) -> RuleInstance:
    if not isinstance(record, dict):
        raise FormatError("rule must be an object")
    kind = record.get("class")
    if kind not in ("alpha", "beta", "gamma", "delta", CLOSURE):
        raise FormatError(f"unknown rule class {kind!r}")
    principal = record.get("principal")
    principal_f = _parse_formula_field(principal, "principal") if principal is not None else None
    introduced = record.get("introduced")
    if not isinstance(introduced, list):
        raise FormatError("introduced must be a list")
    intro = tuple(
        tuple(_parse_formula_field(f, "introduced formula") for f in child)
        for child in introduced
    )
    meta = None
    if "meta" in record:
        t = parse_term(record["meta"], allow_generated=True)
        if not isinstance(t, Meta):
            raise FormatError("meta field is not a metavariable")
        meta = t
    skolem = None
    if "skolem" in record:
        t = parse_term(record["skolem"], allow_generated=True)
        if not isinstance(t, App) or not t.is_skolem:
            raise FormatError("skolem field is not a Skolem term")
        skolem = t
    pair = None
    if "closure_pair" in record:
        raw = record["closure_pair"]
        if not isinstance(raw, list) or len(raw) != 2:
            raise FormatError("closure_pair must be a two-element list")
        pair = (_parse_formula_field(raw[0], "closure pair"),
                _parse_formula_field(raw[1], "closure pair"))
    return RuleInstance(kind, principal_f, intro, meta=meta, skolem=skolem, closure_pair=pair)


def _node_from_record(record) -> TableauNode:
    if not isinstance(record, dict):
        raise FormatError("node must be an object")
    formulas = record.get("formulas")
    if not isinstance(formulas, list):
        raise FormatError("formulas must be a list")
    fs = tuple(_parse_formula_field(f, "formula") for f in formulas)
    rule = record.get("rule")
    rule_i = _rule_from_record(rule) if rule is not None else None
    children = record.get("children", [])
    if not isinstance(children, list):
        raise FormatError("children must be a list")
    kids = tuple(_node_from_record(c) for c in children)
    return TableauNode(fs, rule_i, kids, bool(record.get("closed", False)))


def tableau_from_json(text: str) -> ClosedTableau:
    try:
        record = json.loads(text)
    except json.JSONDecodeError as e:
        raise FormatError(f"not valid JSON: {e}") from None
    if not isinstance(record, dict):
        raise FormatError("top level must be an object")
    root = _node_from_record(record.get("root"))
    store_raw = record.get("store")
    if not isinstance(store_raw, list):
        raise FormatError("store must be a list")
    constraints = []
    for item in store_raw:
        if not isinstance(item, list) or len(item) != 2:
            raise FormatError("store entries must be two-element lists")
        constraints.append(Constraint(
            _parse_formula_field(item[0], "constraint"),
            _parse_formula_field(item[1], "constraint"),
        ))
    unifier_raw = record.get("unifier")
    if not isinstance(unifier_raw, list):
        raise FormatError("unifier must be a list")
    bindings: dict[str, Term] = {}
    for entry in unifier_raw:
        if not isinstance(entry, str) or " := " not in entry:
            raise FormatError(f"bad unifier entry {entry!r}")
        name, _, rhs = entry.partition(" := ")
        t = parse_term(name, allow_generated=True)
        if not isinstance(t, Meta):
            raise FormatError(f"unifier binds non-metavariable {name!r}")
        bindings[t.name] = parse_term(rhs, allow_generated=True)
    unifier = Substitution(bindings, ground=True)
    return ClosedTableau(root, ConstraintStore(tuple(constraints)), unifier)


# ------------------------------------------------------------------ render


def render_tableau(ct: ClosedTableau) -> str:
    """Human-readable stacked rendering, root first, branches indented."""
    lines: list[str] = []

    def label(rule: RuleInstance) -> str:
        if rule.kind == CLOSURE:
            pos, neg = rule.closure_pair
            return f"closure on {print_formula(pos)} / {print_formula(neg)}"
        extra = ""
        if rule.meta is not None:
            extra = f" [{rule.meta.name}]"
        if rule.skolem is not None:
            extra = f" [{print_term(rule.skolem)}]"
        return f"{rule.kind} on {print_formula(rule.principal)}{extra}"

    def walk(node: TableauNode, indent: str) -> None:
        marker = "x " if node.closed else ""
        lines.append(indent + marker + ", ".join(print_formula(f) for f in node.formulas))
        if node.rule is not None:
            lines.append(indent + "-- " + label(node.rule))
            for child in node.children:
                walk(child, indent + ("    " if len(node.children) > 1 else ""))

    walk(ct.root, "")
    lines.append("store: " + ("; ".join(
        f"{_side_str(c.lhs)} = {_side_str(c.rhs)}" for c in ct.store.constraints
    ) or "(empty)"))
    lines.append("unifier: " + (", ".join(
        sorted(f"{n} := {print_term(t)}" for n, t in ct.unifier.items())
    ) or "(empty)"))
    return "\n".join(lines) + "\n"
