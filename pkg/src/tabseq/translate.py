"""Compile a closed tableau with its ground unifier into a sequent proof.

The sequent proof is grown from the root by replaying tableau rules one at
a time.  A link maps every open sequent leaf to the tableau branch it
mirrors, with the invariant that the sigma-instances of the branch's
formulas are contained in the leaf's sequent.  Alpha, beta, gamma and
closure rules replay directly on all linked leaves.  An existential rule
cannot be replayed in place (its Skolem witness is generally stale there),
so it is grafted instead: clone the current proof, weaken the affected
leaves down to the root sequent plus the principal, apply the existential
rule there while it is still fresh, then regrow the saved proof on top of
the graft, carrying the new Skolem formula along as a side formula.  After
the last rule the Skolem terms are globally fresh and are replaced by
fresh constants, which yields a strictly rule-conforming proof.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Mapping

from . import gs3
from .formula import (
    And,
    App,
    Atom,
    Exists,
    Forall,
    Formula,
    Implies,
    Not,
    Or,
    Term,
    formula_symbols,
    is_subterm,
    outermost_skolem_terms,
    print_formula,
    print_term,
)
from .gs3 import GsProof, GsRule, build_step
from .tableau import (
    CLOSURE,
    ClosedTableau,
    Path,
    TableauNode,
    audit_closed_tableau,
    format_path,
    node_at,
)
from .tableau import iter_nodes as iter_tableau_nodes

DELTA_RULES = ("exists", "not_forall")


class TranslateError(AssertionError):
    """An internal invariant of the construction failed; unreachable from a
    valid closed tableau."""


@dataclass(frozen=True)
class InitialPart:
    """Prefix of a proof tree, as the set of nodes whose rule is replayed.

    Prefix-closed; the fringe (unmarked nodes with a marked parent, or the
    root) consists of open leaves over internal target nodes and closed
    leaves over closed target leaves.
    """

    marks: frozenset[Path] = frozenset()

    def extended(self, leaf: Path) -> "InitialPart":
        return InitialPart(self.marks | {leaf})


def initial_fringe(root: TableauNode, part: InitialPart) -> list[Path]:
    fringe: list[Path] = []

    def walk(node: TableauNode, path: Path) -> None:
        if path not in part.marks:
            fringe.append(path)
            return
        for bit, child in enumerate(node.children):
            walk(child, path + (bit,))

    walk(root, ())
    return fringe


def open_fringe(root: TableauNode, part: InitialPart) -> list[Path]:
    return [p for p in initial_fringe(root, part) if node_at(root, p).rule is not None]


def extend_initial(part: InitialPart, root: TableauNode, leaf: Path) -> InitialPart:
    """Mark the rule applied at an open fringe leaf; the result is again an
    initial part of the same tree."""
    if leaf in part.marks:
        raise TranslateError(f"{format_path(leaf)} already marked")
    if leaf not in initial_fringe(root, part):
        raise TranslateError(f"{format_path(leaf)} is not a fringe leaf")
    if node_at(root, leaf).rule is None:
        raise TranslateError(f"{format_path(leaf)} is closed in the full tableau")
    return part.extended(leaf)


@dataclass(frozen=True)
class LinkMapping:
    """Partial map from open sequent leaves to open target leaves.

    ``target_kind`` distinguishes links into a tableau (instances taken
    under the unifier) from links into another sequent proof (no unifier).
    """

    mapping: Mapping[Path, Path]
    target_kind: str = "tableau"

    def preimage(self, target: Path) -> list[Path]:
        return sorted(s for s, q in self.mapping.items() if q == target)


@dataclass(frozen=True)
class Bilink:
    mu0: LinkMapping
    mu1: LinkMapping

    def validate(self, leaves: list[Path]) -> None:
        dom0 = set(self.mu0.mapping)
        dom1 = set(self.mu1.mapping)
        if dom0 & dom1:
            raise TranslateError("bilink domains overlap")
        if dom0 | dom1 != set(leaves):
            raise TranslateError("bilink domains do not cover the open leaves")


@dataclass
class TranslateStats:
    steps: int = 0
    by_kind: Counter = field(default_factory=Counter)
    grafts: int = 0
    graft_case_iii: int = 0
    graft_case_iv: int = 0
    graft_case_v: int = 0
    graft_leaf_growth: list[tuple[int, int]] = field(default_factory=list)
    link_audits: int = 0
    bilink_audits: int = 0
    measures: list[tuple[int, int]] = field(default_factory=list)


def term_size(t: Term) -> int:
    if isinstance(t, App):
        return 1 + sum(term_size(a) for a in t.args)
    return 1


def _outermost_skolems_of_term(t: Term) -> set[App]:
    out: set[App] = set()

    def walk(u: Term) -> None:
        if isinstance(u, App):
            if u.is_skolem:
                out.add(u)
            else:
                for a in u.args:
                    walk(a)

    walk(t)
    return out


def skolem_ranks(ct: ClosedTableau) -> dict[App, int]:
    """Well-founded order on the instantiated Skolem terms of a tableau.

    A term depends on every Skolem term occurring outermost in its rule's
    premise formula, and on the outermost Skolem terms of its own
    arguments.  A graft of one term can only ever force a graft of a term
    it depends on (a copy of that term's rule would put its witness into
    the conclusion), so the rank of the grafted term strictly decreases
    across graft recursions.  The occurs check keeps this relation acyclic
    for any unifier of a closed tableau.
    """
    sigma = ct.unifier
    edges: dict[App, set[App]] = {}
    for _, n in iter_tableau_nodes(ct.root):
        rule = n.rule
        if rule is None or rule.skolem is None:
            continue
        term = sigma.apply_term(rule.skolem)
        assert isinstance(term, App)
        deps = outermost_skolem_terms(sigma.apply(rule.introduced[0][0]))
        for arg in term.args:
            deps |= _outermost_skolems_of_term(arg)
        deps.discard(term)
        edges.setdefault(term, set()).update(deps)

    ranks: dict[App, int] = {}
    visiting: set[App] = set()

    def rank(t: App) -> int:
        if t in ranks:
            return ranks[t]
        if t in visiting:
            raise TranslateError(f"cyclic Skolem dependency through {print_term(t)}")
        visiting.add(t)
        r = 1 + max((rank(d) for d in edges.get(t, ()) if d in edges), default=0)
        visiting.discard(t)
        ranks[t] = r
        return r

    for t in edges:
        rank(t)
    return ranks


def _gs_rule_name(principal: Formula) -> str:
    if isinstance(principal, And):
        return "and"
    if isinstance(principal, Or):
        return "or"
    if isinstance(principal, Implies):
        return "implies"
    if isinstance(principal, Exists):
        return "exists"
    if isinstance(principal, Forall):
        return "forall"
    if isinstance(principal, Not):
        body = principal.body
        if isinstance(body, Not):
            return "not_not"
        if isinstance(body, And):
            return "not_and"
        if isinstance(body, Or):
            return "not_or"
        if isinstance(body, Implies):
            return "not_implies"
        if isinstance(body, Forall):
            return "not_forall"
        if isinstance(body, Exists):
            return "not_exists"
    raise TranslateError(f"no sequent rule for {print_formula(principal)}")


def _is_prefix(p: Path, q: Path) -> bool:
    return q[: len(p)] == p


def _prefix_of_any(p: Path, paths: frozenset[Path]) -> bool:
    return any(_is_prefix(p, q) for q in paths)


# ------------------------------------------------------------- delta graft


def delta_graft(
    theta: GsProof,
    part: InitialPart | None,
    B: frozenset[Path],
    delta_term: Term,
    delta_formula: Formula,
    principal: Formula,
    stats: TranslateStats | None = None,
    audit: bool = True,
    ranks: Mapping[App, int] | None = None,
) -> tuple[GsProof, dict[Path, Path], dict[Path, Path], set[Path]]:
    """Graft ``principal``'s existential step over the leaves ``B`` of theta
    and regrow the initial part on top of it.

    ``part`` marks the rules of theta to regrow (None regrows all of them,
    which is the "initial part of itself" use).  Returns the new tree, the
    two halves of the bilink (a map into the regrown part's fringe and a
    map into theta's remaining open leaves), and the set of leaves that
    carry the Skolem formula as an extra side occurrence.  No leaf maps
    into ``B``; leaves mapped over a prefix of ``B`` either hold that extra
    occurrence or sit below a reused equal existential step whose target
    already accounts for it; all other leaves agree with their target
    exactly.
    """
    if stats is None:
        stats = TranslateStats()
    theta_open = gs3.open_leaves(theta)
    if not B <= set(theta_open):
        raise TranslateError("graft leaves must be open leaves of the target tree")
    if part is None:
        part = InitialPart(frozenset(p for p, n in gs3.iter_nodes(theta) if n.rule is not None))
    root_gamma = Counter(theta.sequent)

    stats.grafts += 1
    measure = ranks[delta_term] if ranks is not None else term_size(delta_term)
    stats.measures.append((measure, len(part.marks)))
    leaves_before = len(theta_open)

    # Base graft: clone theta; at each B leaf weaken down to the root
    # sequent plus the principal, apply the existential rule (legal there:
    # the root formulas contain no Skolem symbols), then weaken the
    # principal away again if it was an extra copy.
    pi1 = theta
    mu_theta: dict[Path, Path] = {p: p for p in theta_open if p not in B}
    mu_part: dict[Path, Path] = {}
    held: set[Path] = set()
    delta_rule = GsRule(_gs_rule_name(principal), delta_term)
    for b in sorted(B):
        leaf = gs3.node_at(pi1, b)
        target = root_gamma.copy()
        extra_principal = target[principal] == 0
        if extra_principal:
            target[principal] = 1
        drops = Counter(leaf.sequent) - target
        if Counter(leaf.sequent) - drops != target:
            raise TranslateError("graft leaf does not contain the root sequent")
        chain = GsProof(leaf.sequent)
        local: Path = ()
        for f in sorted(drops.elements(), key=print_formula):
            chain = build_step(chain, local, GsRule("weaken"), f)
            local += (0,)
        chain = build_step(chain, local, delta_rule, principal)
        local += (0,)
        if extra_principal:
            chain = build_step(chain, local, GsRule("weaken"), principal)
            local += (0,)
        pi1 = gs3.replace_at(pi1, b, chain)
        mu_part[b + local] = ()
        held.add(b + local)

    # Regrow the marked rules root-first (lexicographic order of paths is a
    # topological order), adapting around the grafted branches.  ``held``
    # leaves carry one occurrence of the Skolem formula beyond their
    # target; a reused equal existential step absorbs that occurrence into
    # the target content, and a later weakening of the Skolem formula is
    # then skipped on such leaves, which releases the occurrence again.
    for b in sorted(part.marks):
        node_th = gs3.node_at(theta, b)
        rule, rule_principal = node_th.rule, node_th.principal
        S = sorted(s for s, q in mu_part.items() if q == b)
        prefix = _prefix_of_any(b, B)

        if rule.name == "axiom":
            for s in S:
                pi1 = build_step(pi1, s, rule, rule_principal)
                del mu_part[s]
                held.discard(s)
            continue

        if rule.name == "weaken" and prefix and rule_principal == delta_formula:
            for s in S:
                del mu_part[s]
                if s in held:
                    pi1 = build_step(pi1, s, rule, rule_principal)
                    mu_part[s + (0,)] = b + (0,)
                    held.discard(s)
                    held.add(s + (0,))
                else:
                    # Absorbed leaf: the target loses its Skolem-formula
                    # occurrence here, ours becomes the side copy again.
                    mu_part[s] = b + (0,)
                    held.add(s)
            continue

        if rule.name in DELTA_RULES and prefix:
            eps = rule.witness
            if eps == delta_term:
                # The same existential step again: its premise formula is
                # the Skolem formula these leaves already hold, so reuse
                # the held occurrence and retarget below the rule.
                stats.graft_case_iv += 1
                for s in S:
                    if s not in held:
                        raise TranslateError(
                            "reused existential step on a leaf without the side formula"
                        )
                    held.discard(s)
                    mu_part[s] = b + (0,)
                continue
            if is_subterm(eps, delta_term) or eps in outermost_skolem_terms(delta_formula):
                # The witness is stale over the grafted region (it sits
                # inside the term being grafted, or occurs in the Skolem
                # formula these leaves carry); recursively graft it over
                # these leaves, with the current tree as its own target.
                stats.graft_case_v += 1
                e_formula = gs3.premise_additions(rule, rule_principal)[0][0]
                B_b = frozenset(S)
                if ranks is not None and not (ranks[eps] < ranks[delta_term]):
                    raise TranslateError("graft recursion measure did not decrease")
                pi2, mu1, mu2, held2 = delta_graft(
                    pi1, None, B_b, eps, e_formula, rule_principal, stats, audit, ranks
                )
                new_part: dict[Path, Path] = {}
                new_theta: dict[Path, Path] = {}
                new_held: set[Path] = set()
                for s2 in gs3.open_leaves(pi2):
                    if s2 in mu1:
                        q = mu1[s2]
                    elif s2 in mu2:
                        q = mu2[s2]
                    else:
                        raise TranslateError("bilink does not cover a grafted leaf")
                    if q in B_b:
                        if s2 not in held2:
                            raise TranslateError(
                                "recursive graft lost the inner Skolem side formula"
                            )
                        new_part[s2] = b + (0,)
                        if q in held:
                            new_held.add(s2)
                    elif q in mu_part:
                        new_part[s2] = mu_part[q]
                        if q in held:
                            new_held.add(s2)
                    elif q in mu_theta:
                        new_theta[s2] = mu_theta[q]
                    else:
                        raise TranslateError("grafted leaf maps outside both links")
                pi1, mu_part, mu_theta, held = pi2, new_part, new_theta, new_held
                continue
            # Incomparable witness, or one containing the grafted term: it
            # is still fresh over the side formula, copy the rule.
            stats.graft_case_iii += 1

        for s in S:
            was_held = s in held
            held.discard(s)
            pi1 = build_step(pi1, s, rule, rule_principal)
            del mu_part[s]
            for bit in range(len(node_th.children)):
                child_s = s + (bit,)
                child_b = b + (bit,)
                child_held = was_held
                if (
                    rule.name in gs3.BETA_RULES
                    and prefix
                    and not _prefix_of_any(child_b, B)
                    and was_held
                ):
                    # This side leaves the grafted region; drop the held
                    # Skolem side formula.
                    pi1 = build_step(pi1, child_s, GsRule("weaken"), delta_formula)
                    child_s += (0,)
                    child_held = False
                mu_part[child_s] = child_b
                if child_held:
                    held.add(child_s)

    if audit:
        _audit_graft(pi1, theta, B, delta_formula, mu_part, mu_theta, held, stats)
    stats.graft_leaf_growth.append((leaves_before, len(gs3.open_leaves(pi1))))
    return pi1, mu_part, mu_theta, held


def _audit_graft(
    pi1: GsProof,
    theta: GsProof,
    B: frozenset[Path],
    delta_formula: Formula,
    mu_part: dict[Path, Path],
    mu_theta: dict[Path, Path],
    held: set[Path],
    stats: TranslateStats,
) -> None:
    leaves = gs3.open_leaves(pi1)
    Bilink(LinkMapping(mu_part, "proof-tree"), LinkMapping(mu_theta, "proof-tree")).validate(leaves)
    stats.bilink_audits += 1
    for s, q in mu_theta.items():
        if q in B:
            raise TranslateError("a leaf is linked into the grafted region")
        if s in held:
            raise TranslateError("a cloned leaf claims to hold the side formula")
        if Counter(gs3.node_at(pi1, s).sequent) != Counter(gs3.node_at(theta, q).sequent):
            raise TranslateError("a cloned leaf does not match its target")
    for s, q in mu_part.items():
        here = Counter(gs3.node_at(pi1, s).sequent)
        target = Counter(gs3.node_at(theta, q).sequent)
        if s in held:
            if not _prefix_of_any(q, B):
                raise TranslateError("a held leaf is not linked over the grafted region")
            if here != target + Counter([delta_formula]):
                raise TranslateError(
                    "a held leaf does not carry exactly the Skolem side formula"
                )
        else:
            if here != target:
                raise TranslateError("a regrown leaf does not match its target")
            if q in B and target[delta_formula] < 1:
                raise TranslateError(
                    "a grafted leaf lost its Skolem formula occurrence"
                )


# ------------------------------------------------------- parallel extension


def parallel_extend(
    proof: GsProof,
    link: LinkMapping,
    ct: ClosedTableau,
    part: InitialPart,
    leaf: Path,
    stats: TranslateStats | None = None,
    audit: bool = True,
    ranks: Mapping[App, int] | None = None,
) -> tuple[GsProof, LinkMapping, InitialPart]:
    """Replay the tableau rule at ``leaf`` on every linked sequent leaf.

    Returns the extended proof, the updated total link and the extended
    initial part; the containment invariant (instances of the linked
    branch's formulas inside each leaf sequent) is re-checked afterwards.
    """
    if stats is None:
        stats = TranslateStats()
    sigma = ct.unifier
    node = node_at(ct.root, leaf)
    rule = node.rule
    if rule is None:
        raise TranslateError(f"tableau node {format_path(leaf)} has no rule to replay")
    mapping = dict(link.mapping)
    S = link.preimage(leaf)
    stats.steps += 1
    stats.by_kind[rule.kind] += 1

    if rule.kind == CLOSURE:
        pos, _neg = rule.closure_pair
        principal = sigma.apply(pos)
        for s in S:
            proof = build_step(proof, s, GsRule("axiom"), principal)
            del mapping[s]

    elif rule.kind == "delta":
        if S:
            delta_sigma = sigma.apply_term(rule.skolem)
            d_delta = sigma.apply(rule.introduced[0][0])
            principal = sigma.apply(rule.principal)
            B = frozenset(S)
            if ranks is None:
                ranks = skolem_ranks(ct)
            pi1, mu_part, mu_theta, _held = delta_graft(
                proof, None, B, delta_sigma, d_delta, principal, stats, audit, ranks
            )
            new_mapping: dict[Path, Path] = {}
            for s2 in gs3.open_leaves(pi1):
                q = mu_part.get(s2)
                if q is None:
                    q = mu_theta[s2]
                new_mapping[s2] = leaf + (0,) if q in B else mapping[q]
            proof, mapping = pi1, new_mapping

    else:
        principal = sigma.apply(rule.principal)
        name = _gs_rule_name(principal)
        witness = sigma.apply_term(rule.meta) if rule.kind == "gamma" else None
        gs_rule = GsRule(name, witness)
        for s in S:
            proof = build_step(proof, s, gs_rule, principal)
            del mapping[s]
            for bit in range(len(node.children)):
                mapping[s + (bit,)] = leaf + (bit,)

    new_part = extend_initial(part, ct.root, leaf)
    new_link = LinkMapping(mapping, "tableau")
    if audit:
        _audit_link(proof, new_link, ct, new_part, stats)
    return proof, new_link, new_part


def _audit_link(
    proof: GsProof,
    link: LinkMapping,
    ct: ClosedTableau,
    part: InitialPart,
    stats: TranslateStats,
) -> None:
    """Totality over open leaves plus the containment invariant."""
    sigma = ct.unifier
    open_set = set(gs3.open_leaves(proof))
    if set(link.mapping) != open_set:
        raise TranslateError("link is not total on the open sequent leaves")
    fringe = set(initial_fringe(ct.root, part))
    for s, q in link.mapping.items():
        if q not in fringe:
            raise TranslateError("link target is not a fringe leaf")
        instances = Counter(sigma.apply(f) for f in node_at(ct.root, q).formulas)
        sequent = Counter(gs3.node_at(proof, s).sequent)
        if instances - sequent:
            raise TranslateError(
                f"containment invariant broken at sequent leaf {format_path(s)}"
            )
    stats.link_audits += 1


# -------------------------------------------------- skolem term replacement


def _collect_skolems(proof: GsProof) -> dict[str, tuple[Term, ...]]:
    vectors: dict[str, tuple[Term, ...]] = {}
    seen: set[int] = set()  # formulas are shared wholesale between sequents

    def term(t: Term) -> None:
        if isinstance(t, App):
            if t.is_skolem:
                if t.symbol in vectors and vectors[t.symbol] != t.args:
                    raise TranslateError(
                        f"skolem symbol {t.symbol} used with two argument vectors"
                    )
                vectors[t.symbol] = t.args
            for a in t.args:
                term(a)

    def formula(f: Formula) -> None:
        if id(f) in seen:
            return
        seen.add(id(f))
        if isinstance(f, Atom):
            for a in f.args:
                term(a)
        elif isinstance(f, Not):
            formula(f.body)
        elif isinstance(f, (And, Or, Implies)):
            formula(f.left)
            formula(f.right)
        elif isinstance(f, (Forall, Exists)):
            formula(f.body)

    for _, n in gs3.iter_nodes(proof):
        for f in n.sequent:
            formula(f)
        if n.principal is not None:
            formula(n.principal)
        if n.rule is not None and n.rule.witness is not None:
            term(n.rule.witness)
    return vectors


def replace_skolem_terms(proof: GsProof) -> GsProof:
    """Replace each (now globally fresh) Skolem term by a distinct fresh
    constant, turning relaxed existential witnesses into strict ones."""
    vectors = _collect_skolems(proof)
    taken: set[str] = set()
    symbol_seen: set[int] = set()
    for _, n in gs3.iter_nodes(proof):
        for f in n.sequent:
            if id(f) not in symbol_seen:
                symbol_seen.add(id(f))
                taken |= formula_symbols(f)

    names: dict[str, str] = {}
    counter = 0
    for symbol in sorted(vectors, key=lambda s: int(s[3:])):
        while True:
            counter += 1
            candidate = f"c{counter}"
            if candidate not in taken:
                taken.add(candidate)
                names[symbol] = candidate
                break

    # Sequents share formula objects wholesale, so rewrite each distinct
    # object once.
    formula_cache: dict[int, Formula] = {}

    def term(t: Term) -> Term:
        if isinstance(t, App):
            if t.is_skolem:
                return App(names[t.symbol], ())
            if t.args:
                return App(t.symbol, tuple(term(a) for a in t.args))
        return t

    def rewrite(f: Formula) -> Formula:
        if isinstance(f, Atom):
            return Atom(f.predicate, tuple(term(a) for a in f.args))
        if isinstance(f, Not):
            return Not(formula(f.body))
        if isinstance(f, And):
            return And(formula(f.left), formula(f.right))
        if isinstance(f, Or):
            return Or(formula(f.left), formula(f.right))
        if isinstance(f, Implies):
            return Implies(formula(f.left), formula(f.right))
        if isinstance(f, Forall):
            return Forall(f.var, formula(f.body))
        return Exists(f.var, formula(f.body))

    def formula(f: Formula) -> Formula:
        out = formula_cache.get(id(f))
        if out is None:
            out = rewrite(f)
            formula_cache[id(f)] = out
        return out

    def node(n: GsProof) -> GsProof:
        rule = n.rule
        if rule is not None and rule.witness is not None:
            rule = GsRule(rule.name, term(rule.witness))
        principal = formula(n.principal) if n.principal is not None else None
        return GsProof(
            tuple(formula(f) for f in n.sequent),
            rule,
            principal,
            tuple(node(c) for c in n.children),
        )

    return node(proof)


# --------------------------------------------------------------- top level


def translate_detailed(
    ct: ClosedTableau, *, audit: bool = True
) -> tuple[GsProof, TranslateStats]:
    """Translate a closed tableau, returning the proof and step statistics."""
    if audit:
        audit_closed_tableau(ct)
    stats = TranslateStats()
    sigma = ct.unifier
    ranks = skolem_ranks(ct)
    root = tuple(sigma.apply(f) for f in ct.root.formulas)
    proof = GsProof(root)
    link = LinkMapping({(): ()}, "tableau")
    part = InitialPart(frozenset())

    while True:
        pending = open_fringe(ct.root, part)
        if not pending:
            break
        leaf = min(pending)
        proof, link, part = parallel_extend(proof, link, ct, part, leaf, stats, audit, ranks)

    if link.mapping:
        raise TranslateError("open sequent leaves remain after the last tableau rule")
    proof = replace_skolem_terms(proof)
    if audit:
        result = gs3.check(proof)
        if not result:
            raise TranslateError(f"translated proof fails the checker: {result.describe()}")
    return proof, stats


def translate(ct: ClosedTableau, *, audit: bool = True) -> GsProof:
    """Build a sequent proof of the unifier-instantiated root multiset."""
    proof, _ = translate_detailed(ct, audit=audit)
    return proof
