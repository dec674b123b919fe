"""Computation trees, partial assignments, and equation systems.

A right-hand side is represented as a computation tree: either an immediate
answer, or a query for one variable whose continuation maps the looked-up
value to the rest of the computation.  Continuations are built on demand (the
value space may be infinite) and must be deterministic, which makes every
right-hand side pure: evaluation is a finite sequence of look-ups ending in a
value, and the set of variables touched along the way is well defined.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Hashable, Mapping

from .lattice import LatticeOps, Value

VarId = Hashable
Lookup = Callable[[VarId], Value]


class UnknownVariableError(KeyError):
    def __init__(self, var):
        super().__init__(var)
        self.var = var

    def __str__(self):
        return f"unknown variable {self.var!r}"


@dataclass(frozen=True)
class Answer:
    value: Value


@dataclass(frozen=True)
class Query:
    var: VarId
    cont: Callable[[Value], "Tree"]


Tree = Answer | Query


def as_lookup(source) -> Lookup:
    """Accept a callable or a mapping as the variable lookup."""
    if callable(source):
        return source

    def lookup(var):
        try:
            return source[var]
        except KeyError:
            raise UnknownVariableError(var) from None

    return lookup


def eval_tree(tree: Tree, lookup) -> Value:
    """Run a computation tree against a total lookup."""
    lookup = as_lookup(lookup)
    while isinstance(tree, Query):
        tree = tree.cont(lookup(tree.var))
    return tree.value


def tree_dep(tree: Tree, lookup) -> set:
    """Variables the tree touches when evaluated under `lookup`.

    Agreement of two lookups on this set forces equal evaluation results.
    """
    lookup = as_lookup(lookup)
    deps = set()
    while isinstance(tree, Query):
        deps.add(tree.var)
        tree = tree.cont(lookup(tree.var))
    return deps


def eval_tree_traced(tree: Tree, lookup) -> tuple[Value, list]:
    """Like eval_tree, also returning the query sequence in order."""
    lookup = as_lookup(lookup)
    trace = []
    while isinstance(tree, Query):
        trace.append(tree.var)
        tree = tree.cont(lookup(tree.var))
    return tree.value, trace


class Assignment:
    """Partial map from variables to values of one domain."""

    def __init__(self, ops: LatticeOps, values: Mapping[VarId, Value]):
        self.ops = ops
        self.values = dict(values)

    @property
    def dom(self) -> set:
        return set(self.values)

    def __getitem__(self, var):
        try:
            return self.values[var]
        except KeyError:
            raise UnknownVariableError(var) from None

    def __contains__(self, var):
        return var in self.values

    def __len__(self):
        return len(self.values)

    def __eq__(self, other):
        return isinstance(other, Assignment) and self.values == other.values

    def items(self):
        return self.values.items()

    def __repr__(self):
        body = ", ".join(
            f"{v!r}: {self.ops.format(d)}" for v, d in sorted(
                self.values.items(), key=lambda kv: str(kv[0]))
        )
        return "Assignment({%s})" % body


def extend_top(assignment: Assignment) -> Lookup:
    """Total lookup: the assignment's value inside its domain, top outside."""
    values = assignment.values
    top = assignment.ops.top

    def lookup(var):
        return values.get(var, top)

    return lookup


class EquationSystem:
    """Total mapping from variables to right-hand-side trees.

    The mapping may be defined lazily over an infinite variable space; for
    explicitly finite systems `all_vars` lists every variable.  Repeated
    requests for the same variable must yield behaviorally identical trees.
    """

    def __init__(self, rhs, all_vars: list | None = None):
        if callable(rhs):
            self._rhs = rhs
        else:
            mapping = dict(rhs)

            def from_map(var):
                try:
                    return mapping[var]
                except KeyError:
                    raise UnknownVariableError(var) from None

            self._rhs = from_map
            if all_vars is None:
                all_vars = list(mapping)
        self.all_vars = list(all_vars) if all_vars is not None else None

    def rhs(self, var) -> Tree:
        return self._rhs(var)


def is_closed(assignment: Assignment, system: EquationSystem) -> bool:
    """Does every domain variable's dependency set stay inside the domain?"""
    dom = assignment.dom
    lookup = extend_top(assignment)
    for var in dom:
        if not tree_dep(system.rhs(var), lookup) <= dom:
            return False
    return True


# --- finite-system expression DSL ------------------------------------------
#
# Expressions are tag-first tuples as produced by the file parser:
#   ("get", var) ("lit", value) ("join", e, e) ("meet", e, e) ("inc", e)
#   ("ite", (cmp, e, e), e, e)        with cmp in {"eq", "leq"}

DslExpr = tuple


def compile_rhs_dsl(expr: DslExpr, ops: LatticeOps) -> Tree:
    """Translate a DSL expression into a computation tree.

    Every `get` becomes exactly one query; `ite` evaluates both comparison
    operands, then continues in the selected branch only.
    """

    def build(e, k):
        tag = e[0]
        if tag == "lit":
            return k(e[1])
        if tag == "get":
            return Query(e[1], k)
        if tag == "join":
            return build(e[1], lambda a: build(e[2], lambda b: k(ops.join(a, b))))
        if tag == "meet":
            return build(e[1], lambda a: build(e[2], lambda b: k(ops.meet(a, b))))
        if tag == "inc":
            return build(e[1], lambda a: k(ops.succ(a)))
        if tag == "ite":
            cmp_op, lhs, rhs = e[1]

            def decide(a, b):
                if cmp_op == "eq":
                    taken = ops.eq(a, b)
                else:
                    taken = ops.leq(a, b)
                return build(e[2], k) if taken else build(e[3], k)

            return build(lhs, lambda a: build(rhs, lambda b: decide(a, b)))
        raise ValueError(f"bad DSL expression tag {tag!r}")

    return build(expr, Answer)
