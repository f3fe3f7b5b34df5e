"""One-sided ground sequent calculus: proof trees, stepwise construction,
and an independent checker.

Sequents are multisets of ground formulas read "Delta |-".  Contraction is
implicit (every rule keeps its principal formula in the premises) and
weakening is explicit, dropping exactly one occurrence.  The existential
rules consume a witness constant that must be fresh for the conclusion
sequent; that locality is the whole trust story of the checker, so this
module deliberately depends on nothing but the formula syntax.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from typing import Iterator

from .formula import (
    And,
    App,
    Exists,
    Forall,
    Formula,
    Implies,
    Not,
    Or,
    Term,
    formula_symbols,
    has_metas,
    is_ground_term,
    outermost_skolem_terms,
    parse,
    parse_term,
    print_formula,
    print_term,
    subst_var,
)

Path = tuple[int, ...]
Sequent = tuple[Formula, ...]

ALPHA_RULES = ("not_not", "not_implies", "and", "not_or")
BETA_RULES = ("implies", "not_and", "or")
DELTA_RULES = ("exists", "not_forall")
GAMMA_RULES = ("not_exists", "forall")
RULE_NAMES = ALPHA_RULES + BETA_RULES + DELTA_RULES + GAMMA_RULES + ("axiom", "weaken")

SCHEMA_MISMATCH = "schema-mismatch"
FRESHNESS = "freshness-violation"
BAD_AXIOM = "bad-axiom"
OPEN_LEAF = "open-leaf"


def format_path(path: Path) -> str:
    return "".join(str(b) for b in path) or "(root)"


class StepError(ValueError):
    """A construction step violated its rule schema."""

    def __init__(self, reason: str, message: str):
        super().__init__(f"{reason}: {message}")
        self.reason = reason


class FormatError(ValueError):
    """A serialized sequent proof is malformed."""


@dataclass(frozen=True)
class GsRule:
    name: str
    witness: Term | None = None


@dataclass(frozen=True)
class GsProof:
    """A sequent-proof node; leaves without a rule are open."""

    sequent: Sequent
    rule: GsRule | None = None
    principal: Formula | None = None
    children: tuple["GsProof", ...] = ()

    @property
    def is_open(self) -> bool:
        return self.rule is None and not self.children


@dataclass(frozen=True)
class CheckResult:
    accepted: bool
    path: Path = ()
    reason: str = ""
    detail: str = ""

    def __bool__(self) -> bool:
        return self.accepted

    def describe(self) -> str:
        if self.accepted:
            return "Accepted"
        return f"Rejected: {self.reason} at path {format_path(self.path)}"


# ------------------------------------------------------------- tree helpers


def node_at(root: GsProof, path: Path) -> GsProof:
    node = root
    for bit in path:
        node = node.children[bit]
    return node


def replace_at(root: GsProof, path: Path, new: GsProof) -> GsProof:
    if not path:
        return new
    spine = [root]
    for bit in path[:-1]:
        spine.append(spine[-1].children[bit])
    node = new
    for parent, bit in zip(reversed(spine), reversed(path)):
        children = list(parent.children)
        children[bit] = node
        node = GsProof(parent.sequent, parent.rule, parent.principal, tuple(children))
    return node


def iter_nodes(root: GsProof) -> Iterator[tuple[Path, GsProof]]:
    stack: list[tuple[Path, GsProof]] = [((), root)]
    while stack:
        path, node = stack.pop()
        yield path, node
        for bit in reversed(range(len(node.children))):
            stack.append((path + (bit,), node.children[bit]))


def open_leaves(root: GsProof) -> list[Path]:
    return [p for p, n in iter_nodes(root) if n.is_open]


def inference_count(root: GsProof) -> int:
    return sum(1 for _, n in iter_nodes(root) if n.rule is not None)


def rule_names(root: GsProof) -> list[str]:
    """Rule names in preorder; on a single branch this is root-to-leaf order."""
    return [n.rule.name for _, n in iter_nodes(root) if n.rule is not None]


def spine_rule_names(root: GsProof, *, coalesce_weaken: bool = False) -> list[str]:
    """Rule names along the leftmost branch, root to leaf.

    With ``coalesce_weaken`` set, a run of consecutive weakenings counts as
    one entry, matching how stacked derivations display them.
    """
    names: list[str] = []
    node = root
    while node.rule is not None:
        names.append(node.rule.name)
        if not node.children:
            break
        node = node.children[0]
    if coalesce_weaken:
        out: list[str] = []
        for name in names:
            if name == "weaken" and out and out[-1] == "weaken":
                continue
            out.append(name)
        return out
    return names


def sequent_symbols(seq: Sequent) -> set[str]:
    out: set[str] = set()
    for f in seq:
        out |= formula_symbols(f)
    return out


# ----------------------------------------------------------------- schemas


def _group(name: str) -> str:
    if name in ALPHA_RULES:
        return "alpha"
    if name in BETA_RULES:
        return "beta"
    if name in DELTA_RULES:
        return "delta"
    if name in GAMMA_RULES:
        return "gamma"
    return name


def premise_additions(rule: GsRule, principal: Formula) -> tuple[tuple[Formula, ...], ...] | None:
    """Formulas each premise adds to the conclusion, or None on a shape clash."""
    name = rule.name
    if name == "not_not":
        if isinstance(principal, Not) and isinstance(principal.body, Not):
            return ((principal.body.body,),)
    elif name == "not_implies":
        if isinstance(principal, Not) and isinstance(principal.body, Implies):
            return ((principal.body.left, Not(principal.body.right)),)
    elif name == "and":
        if isinstance(principal, And):
            return ((principal.left, principal.right),)
    elif name == "not_or":
        if isinstance(principal, Not) and isinstance(principal.body, Or):
            return ((Not(principal.body.left), Not(principal.body.right)),)
    elif name == "implies":
        if isinstance(principal, Implies):
            return ((Not(principal.left),), (principal.right,))
    elif name == "not_and":
        if isinstance(principal, Not) and isinstance(principal.body, And):
            return ((Not(principal.body.left),), (Not(principal.body.right),))
    elif name == "or":
        if isinstance(principal, Or):
            return ((principal.left,), (principal.right,))
    elif name == "exists":
        if isinstance(principal, Exists) and rule.witness is not None:
            return ((subst_var(principal.body, principal.var, rule.witness),),)
    elif name == "not_forall":
        if isinstance(principal, Not) and isinstance(principal.body, Forall) and rule.witness is not None:
            inner = subst_var(principal.body.body, principal.body.var, rule.witness)
            return ((Not(inner),),)
    elif name == "not_exists":
        if isinstance(principal, Not) and isinstance(principal.body, Exists) and rule.witness is not None:
            inner = subst_var(principal.body.body, principal.body.var, rule.witness)
            return ((Not(inner),),)
    elif name == "forall":
        if isinstance(principal, Forall) and rule.witness is not None:
            return ((subst_var(principal.body, principal.var, rule.witness),),)
    return None


# ------------------------------------------------------------------- check


def check(proof: GsProof) -> CheckResult:
    """Verify a sequent proof against the rule schemas, locally per node.

    Premises must equal the conclusion multiset plus the schema's
    introduced formulas (the principal is retained), weakening must remove
    exactly its dropped occurrence, axiom leaves must contain a
    complementary pair, and every existential-group witness must be a
    constant absent from its conclusion sequent.  The first violation in
    preorder is reported.
    """
    for path, node in iter_nodes(proof):
        result = _check_node(path, node)
        if result is not None:
            return result
    return CheckResult(True)


def _check_node(path: Path, node: GsProof) -> CheckResult | None:
    for f in node.sequent:
        if has_metas(f):
            return CheckResult(False, path, SCHEMA_MISMATCH,
                               f"metavariable in sequent formula {print_formula(f)}")
    if node.rule is None:
        if node.children:
            return CheckResult(False, path, SCHEMA_MISMATCH, "rule-less node has children")
        return CheckResult(False, path, OPEN_LEAF, "open leaf")
    rule, principal = node.rule, node.principal
    if rule.name not in RULE_NAMES:
        return CheckResult(False, path, SCHEMA_MISMATCH, f"unknown rule {rule.name!r}")
    if principal is None:
        return CheckResult(False, path, SCHEMA_MISMATCH, "rule without principal")
    conclusion = Counter(node.sequent)
    if conclusion[principal] < 1:
        return CheckResult(False, path, SCHEMA_MISMATCH,
                           f"principal {print_formula(principal)} not in sequent")

    if rule.name == "axiom":
        if node.children:
            return CheckResult(False, path, SCHEMA_MISMATCH, "axiom with premises")
        if conclusion[Not(principal)] < 1:
            return CheckResult(False, path, BAD_AXIOM,
                               f"no complement for {print_formula(principal)}")
        return None

    if rule.name == "weaken":
        if len(node.children) != 1:
            return CheckResult(False, path, SCHEMA_MISMATCH, "weakening needs one premise")
        expected = conclusion.copy()
        expected[principal] -= 1
        if Counter(node.children[0].sequent) != +expected:
            return CheckResult(False, path, SCHEMA_MISMATCH,
                               "premise is not conclusion minus the dropped occurrence")
        return None

    additions = premise_additions(rule, principal)
    if additions is None:
        return CheckResult(False, path, SCHEMA_MISMATCH,
                           f"{rule.name} does not apply to {print_formula(principal)}")
    if len(node.children) != len(additions):
        return CheckResult(False, path, SCHEMA_MISMATCH, "wrong number of premises")

    group = _group(rule.name)
    if group in ("delta", "gamma"):
        w = rule.witness
        if w is None or not is_ground_term(w):
            return CheckResult(False, path, SCHEMA_MISMATCH, "witness must be a ground term")
        if group == "delta":
            if not isinstance(w, App) or w.args:
                return CheckResult(False, path, SCHEMA_MISMATCH,
                                   "existential witness must be a constant")
            if w.symbol in sequent_symbols(node.sequent):
                return CheckResult(False, path, FRESHNESS,
                                   f"witness {w.symbol} occurs in the conclusion sequent")

    for bit, extra in enumerate(additions):
        expected = conclusion + Counter(extra)
        if Counter(node.children[bit].sequent) != expected:
            return CheckResult(False, path, SCHEMA_MISMATCH,
                               f"premise {bit} is not conclusion plus introduced formulas")
    return None


# ------------------------------------------------------------- build steps


def build_step(
    proof: GsProof,
    leaf: Path,
    rule: GsRule,
    principal: Formula,
) -> GsProof:
    """Extend an open leaf by one inference, validating the schema eagerly.

    During tableau translation the existential witnesses are still Skolem
    terms; those are accepted here with the corresponding relaxed freshness
    reading (the witness term must not occur outermost in the conclusion),
    which coincides with the checker's constant freshness after the final
    Skolem-to-constant replacement.
    """
    node = node_at(proof, leaf)
    if not node.is_open:
        raise StepError(SCHEMA_MISMATCH, f"node {format_path(leaf)} is not an open leaf")
    conclusion = Counter(node.sequent)
    if conclusion[principal] < 1:
        raise StepError(SCHEMA_MISMATCH,
                        f"principal {print_formula(principal)} not in sequent")

    if rule.name == "axiom":
        if conclusion[Not(principal)] < 1:
            raise StepError(BAD_AXIOM, f"no complement for {print_formula(principal)}")
        closed = GsProof(node.sequent, rule, principal, ())
        return replace_at(proof, leaf, closed)

    if rule.name == "weaken":
        remaining = list(node.sequent)
        remaining.remove(principal)
        child = GsProof(tuple(remaining))
        return replace_at(proof, leaf, GsProof(node.sequent, rule, principal, (child,)))

    additions = premise_additions(rule, principal)
    if additions is None:
        raise StepError(SCHEMA_MISMATCH,
                        f"{rule.name} does not apply to {print_formula(principal)}")
    group = _group(rule.name)
    if group in ("delta", "gamma"):
        w = rule.witness
        if w is None or not is_ground_term(w):
            raise StepError(SCHEMA_MISMATCH, "witness must be a ground term")
        if group == "delta":
            if isinstance(w, App) and w.is_skolem:
                if any(w == t for f in node.sequent for t in outermost_skolem_terms(f)):
                    raise StepError(FRESHNESS,
                                    f"witness {print_term(w)} occurs in the conclusion")
            elif isinstance(w, App) and not w.args:
                if w.symbol in sequent_symbols(node.sequent):
                    raise StepError(FRESHNESS,
                                    f"witness {w.symbol} occurs in the conclusion")
            else:
                raise StepError(SCHEMA_MISMATCH,
                                "existential witness must be a constant or Skolem term")
    children = tuple(GsProof(node.sequent + extra) for extra in additions)
    return replace_at(proof, leaf, GsProof(node.sequent, rule, principal, children))


# --------------------------------------------------------------- serialize


def _node_to_record(node: GsProof) -> dict:
    counts = Counter(print_formula(f) for f in node.sequent)
    record: dict = {
        "sequent": [[text, n] for text, n in sorted(counts.items())],
        "rule": None,
        "children": [_node_to_record(c) for c in node.children],
    }
    if node.rule is not None:
        rule: dict = {"name": node.rule.name,
                      "principal": print_formula(node.principal)}
        if node.rule.witness is not None:
            rule["witness"] = print_term(node.rule.witness)
        record["rule"] = rule
    return record


def proof_to_json(proof: GsProof) -> str:
    """Canonical serialization: sorted keys and sequent entries, compact."""
    return json.dumps(_node_to_record(proof), sort_keys=True, separators=(",", ":")) + "\n"


def _parse_formula_field(text, what: str) -> Formula:
    if not isinstance(text, str):
        raise FormatError(f"{what} must be a string")
    try:
        return parse(text, allow_generated=True)
    except ValueError as e:
        raise FormatError(f"bad {what}: {e}") from None


def _node_from_record(record) -> GsProof:
    if not isinstance(record, dict):
        raise FormatError("proof node must be an object")
    seq_raw = record.get("sequent")
    if not isinstance(seq_raw, list):
        raise FormatError("sequent must be a list")
    formulas: list[Formula] = []
    for item in seq_raw:
        if not isinstance(item, list) or len(item) != 2 or not isinstance(item[1], int) or item[1] < 1:
            raise FormatError("sequent entries must be [formula, count] pairs")
        formulas.extend([_parse_formula_field(item[0], "sequent formula")] * item[1])
    rule_raw = record.get("rule")
    rule = None
    principal = None
    if rule_raw is not None:
        if not isinstance(rule_raw, dict) or "name" not in rule_raw:
            raise FormatError("rule must be an object with a name")
        witness = None
        if "witness" in rule_raw:
            try:
                witness = parse_term(rule_raw["witness"], allow_generated=True)
            except ValueError as e:
                raise FormatError(f"bad witness: {e}") from None
        rule = GsRule(str(rule_raw["name"]), witness)
        principal = _parse_formula_field(rule_raw.get("principal"), "principal")
    children_raw = record.get("children", [])
    if not isinstance(children_raw, list):
        raise FormatError("children must be a list")
    children = tuple(_node_from_record(c) for c in children_raw)
    return GsProof(tuple(formulas), rule, principal, children)


def proof_from_json(text: str) -> GsProof:
    try:
        record = json.loads(text)
    except json.JSONDecodeError as e:
        raise FormatError(f"not valid JSON: {e}") from None
    return _node_from_record(record)


# ------------------------------------------------------------------ render


def render_proof(proof: GsProof) -> str:
    """Human-readable stacked rendering, root first, branches indented."""
    lines: list[str] = []

    def label(node: GsProof) -> str:
        rule = node.rule
        text = rule.name
        if node.principal is not None:
            text += f" on {print_formula(node.principal)}"
        if rule.witness is not None:
            text += f" [{print_term(rule.witness)}]"
        return text

    def walk(node: GsProof, indent: str) -> None:
        seq = ", ".join(print_formula(f) for f in node.sequent)
        lines.append(f"{indent}{seq} |-")
        if node.rule is not None:
            lines.append(f"{indent}-- {label(node)}")
            for child in node.children:
                walk(child, indent + ("    " if len(node.children) > 1 else ""))
        elif node.is_open:
            lines.append(f"{indent}-- (open)")

    walk(proof, "")
    return "\n".join(lines) + "\n"
