"""Syntactic unification over metavariables, constraint stores, groundification."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Union

from .formula import (
    And,
    App,
    Atom,
    Exists,
    Forall,
    Formula,
    Implies,
    Meta,
    Not,
    Or,
    Term,
    Var,
    apply_subst,
    apply_subst_term,
    term_metas,
)

Side = Union[Formula, Term]


@dataclass(frozen=True)
class Constraint:
    """A pair to be made syntactically equal.

    Closure steps add formula constraints between the two literals of a
    complementary pair; everything below the atom level is a term pair.
    """

    lhs: Side
    rhs: Side


@dataclass(frozen=True)
class ConstraintStore:
    """Monotone set of pending constraints: rules only ever add."""

    constraints: tuple[Constraint, ...] = ()

    def add(self, *extra: Constraint) -> "ConstraintStore":
        return ConstraintStore(self.constraints + tuple(extra))

    def __len__(self) -> int:
        return len(self.constraints)


@dataclass(frozen=True)
class Substitution:
    """Idempotent solution of a constraint store.

    With the ``ground`` flag set, no metavariable occurs in any range term.
    """

    bindings: Mapping[str, Term] = field(default_factory=dict)
    ground: bool = False

    def apply_term(self, t: Term) -> Term:
        return apply_subst_term(self.bindings, t)

    def apply(self, f: Formula) -> Formula:
        return apply_subst(self.bindings, f)

    def items(self):
        return self.bindings.items()

    def __len__(self) -> int:
        return len(self.bindings)


def _occurs(name: str, t: Term) -> bool:
    if isinstance(t, Meta):
        return t.name == name
    if isinstance(t, App):
        return any(_occurs(name, a) for a in t.args)
    return False


def _formula_equations(lhs: Formula, rhs: Formula) -> list[tuple[Term, Term]] | None:
    """Decompose a formula pair into term equations; None on a shape clash."""
    if isinstance(lhs, Atom) and isinstance(rhs, Atom):
        if lhs.predicate != rhs.predicate or len(lhs.args) != len(rhs.args):
            return None
        return list(zip(lhs.args, rhs.args))
    if isinstance(lhs, Not) and isinstance(rhs, Not):
        return _formula_equations(lhs.body, rhs.body)
    if type(lhs) is type(rhs) and isinstance(lhs, (And, Or, Implies)):
        left = _formula_equations(lhs.left, rhs.left)
        right = _formula_equations(lhs.right, rhs.right)
        if left is None or right is None:
            return None
        return left + right
    if isinstance(lhs, (Forall, Exists)) or isinstance(rhs, (Forall, Exists)):
        raise ValueError("unification under quantifiers is not supported")
    return None


def solve(store: ConstraintStore) -> Substitution | None:
    """Most general idempotent unifier of all constraints, or None.

    Robinson-style worklist with the occurs check always on; a None result
    (symbol clash or occurs-check failure) signals that a candidate closure
    is impossible.
    """
    work: list[tuple[Term, Term]] = []
    for c in store.constraints:
        if isinstance(c.lhs, (Var, Meta, App)) and isinstance(c.rhs, (Var, Meta, App)):
            work.append((c.lhs, c.rhs))
        else:
            eqs = _formula_equations(c.lhs, c.rhs)
            if eqs is None:
                return None
            work.extend(eqs)

    bindings: dict[str, Term] = {}
    while work:
        lhs, rhs = work.pop()
        lhs = apply_subst_term(bindings, lhs)
        rhs = apply_subst_term(bindings, rhs)
        if lhs == rhs:
            continue
        if not isinstance(lhs, Meta) and isinstance(rhs, Meta):
            lhs, rhs = rhs, lhs
        if isinstance(lhs, Meta):
            if _occurs(lhs.name, rhs):
                return None
            step = {lhs.name: rhs}
            for k in list(bindings):
                bindings[k] = apply_subst_term(step, bindings[k])
            bindings[lhs.name] = rhs
        elif isinstance(lhs, App) and isinstance(rhs, App):
            if lhs.symbol != rhs.symbol or len(lhs.args) != len(rhs.args):
                return None
            work.extend(zip(lhs.args, rhs.args))
        else:
            # distinct bound variables, or a bound variable against an
            # application: rigid, not unifiable
            return None
    return Substitution(bindings)


def consistent(store: ConstraintStore, extra: Iterable[Constraint]) -> bool:
    """True iff the store extended by ``extra`` still has a unifier."""
    return solve(store.add(*extra)) is not None


def groundify(
    sigma: Substitution,
    metas: Iterable[Meta] = (),
    avoid: Iterable[str] = (),
) -> Substitution:
    """Extend an idempotent unifier to a ground one.

    Every metavariable left in the range of ``sigma``, and every
    metavariable of ``metas`` unbound by ``sigma``, is mapped to a distinct
    fresh constant ``k1, k2, ...`` (skipping names in ``avoid``).  The
    result subsumes ``sigma``.
    """
    taken = set(avoid)
    counter = 0

    def fresh() -> App:
        nonlocal counter
        while True:
            counter += 1
            name = f"k{counter}"
            if name not in taken:
                taken.add(name)
                return App(name, ())

    kappa: dict[str, Term] = {}
    for name in sorted(sigma.bindings):
        for m in term_metas(sigma.bindings[name]):
            if m.name not in kappa:
                kappa[m.name] = fresh()
    for m in metas:
        if m.name not in sigma.bindings and m.name not in kappa:
            kappa[m.name] = fresh()

    out: dict[str, Term] = {}
    for name, t in sigma.bindings.items():
        out[name] = apply_subst_term(kappa, t)
    out.update(kappa)
    return Substitution(out, ground=True)
