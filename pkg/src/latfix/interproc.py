"""Interprocedural equation schemes with partial tabulation.

A scheme gives every program point one context-parameterized right-hand-side
expression.  Cells induce indirect addressing: the value of the inner
expression selects which (point, context) variable is read, so a scheme
denotes a family of equations over the possibly infinite variable space
(point, context-value).  Instantiation is lazy; the solvers materialize
variables on demand.

Stratification is the termination handle: if levels can be assigned so that
same-level cells pass the context through unchanged and all other cells go
strictly down, the demand-driven solvers only ever meet finitely many
contexts per point.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .eqsys import Answer, EquationSystem, Query, Tree, UnknownVariableError, as_lookup
from .lattice import LatticeOps, Value


class SchemeError(ValueError):
    pass


@dataclass(frozen=True)
class Const:
    value: Value


@dataclass(frozen=True)
class Ctx:
    """The current calling context."""


CTX = Ctx()


@dataclass(frozen=True)
class Apply:
    fn: str
    args: tuple


@dataclass(frozen=True)
class Cell:
    point: str
    arg: "Expr"


Expr = Const | Ctx | Apply | Cell


@dataclass(frozen=True)
class BuiltinFn:
    name: str
    arity: int
    fn: Callable


def resolve_builtin(name: str, ops: LatticeOps) -> BuiltinFn:
    """Look up a builtin, materializing `name:param` instances on the fly."""
    base, _, param = name.partition(":")
    if base == "join":
        return BuiltinFn(name, 2, ops.join)
    if base == "meet":
        return BuiltinFn(name, 2, ops.meet)
    if base == "id":
        return BuiltinFn(name, 1, lambda v: v)
    if base in ("inc", "dec", "add_const") and not ops.has_arith:
        raise SchemeError(f"{base!r} is not defined on {ops.name}")
    if base == "inc":
        return BuiltinFn(name, 1, ops.succ)
    if base == "dec":
        return BuiltinFn(name, 1, ops.pred)
    if base == "add_const":
        try:
            k = int(param)
        except ValueError:
            raise SchemeError(f"add_const needs an integer parameter, got {param!r}") from None
        return BuiltinFn(name, 1, lambda v: ops.add_const(v, k))
    if base == "meet_const":
        c = ops.parse(param)
        return BuiltinFn(name, 1, lambda v: ops.meet(v, c))
    if base == "join_const":
        c = ops.parse(param)
        return BuiltinFn(name, 1, lambda v: ops.join(v, c))
    raise SchemeError(f"unknown builtin {name!r}")


@dataclass
class Scheme:
    ops: LatticeOps
    points: tuple
    rhs: dict
    builtins: dict
    start: tuple

    def validate(self):
        points = set(self.points)
        if len(points) != len(self.points):
            raise SchemeError("duplicate point names")
        for u in self.points:
            if u not in self.rhs:
                raise SchemeError(f"point {u!r} has no equation")
        if self.start[0] not in points:
            raise SchemeError(f"start point {self.start[0]!r} is not declared")
        self.ops.validate(self.start[1])
        for u in self.points:
            self._validate_expr(self.rhs[u], points)
        return self

    def _validate_expr(self, expr, points):
        if isinstance(expr, (Const, Ctx)):
            return
        if isinstance(expr, Apply):
            fn = self.builtins.get(expr.fn)
            if fn is None:
                raise SchemeError(f"unknown builtin {expr.fn!r}")
            if fn.arity != len(expr.args):
                raise SchemeError(
                    f"builtin {expr.fn!r} takes {fn.arity} arguments, "
                    f"got {len(expr.args)}")
            for a in expr.args:
                self._validate_expr(a, points)
            return
        if isinstance(expr, Cell):
            if expr.point not in points:
                raise SchemeError(f"unknown point {expr.point!r}")
            self._validate_expr(expr.arg, points)
            return
        raise SchemeError(f"bad expression node {expr!r}")


def sem_expr(expr: Expr, ctx: Value, lookup, builtins: dict) -> Value:
    """Evaluate an expression at a context against a variable lookup."""
    lookup = as_lookup(lookup)

    def ev(e):
        if isinstance(e, Const):
            return e.value
        if isinstance(e, Ctx):
            return ctx
        if isinstance(e, Apply):
            try:
                fn = builtins[e.fn]
            except KeyError:
                raise SchemeError(f"unknown builtin {e.fn!r}") from None
            return fn.fn(*[ev(a) for a in e.args])
        # Cell: the inner expression's value picks the variable to read.
        return lookup((e.point, ev(e.arg)))

    return ev(expr)


def _expr_tree(expr: Expr, ctx: Value, scheme: Scheme) -> Tree:
    """Computation-tree realization of one (point, context) right-hand side."""

    def build(e, k):
        if isinstance(e, Const):
            return k(e.value)
        if isinstance(e, Ctx):
            return k(ctx)
        if isinstance(e, Apply):
            fn = scheme.builtins[e.fn]

            def args(i, vals):
                if i == len(e.args):
                    return k(fn.fn(*vals))
                return build(e.args[i], lambda v: args(i + 1, vals + [v]))

            return args(0, [])
        return build(e.arg, lambda d: Query((e.point, d), k))

    return build(expr, Answer)


def instantiate_system(scheme: Scheme) -> EquationSystem:
    """Lazy equation system over (point, context) variables."""

    def rhs(var):
        point, ctx = var
        try:
            expr = scheme.rhs[point]
        except KeyError:
            raise UnknownVariableError(var) from None
        return _expr_tree(expr, ctx, scheme)

    return EquationSystem(rhs)


# --- stratification -----------------------------------------------------------

@dataclass(frozen=True)
class CounterexampleCycle:
    """A call cycle that creates fresh contexts; points, first == last."""

    points: tuple


def _cell_edges(point, expr):
    """(caller, callee, strict) triples for all cells at any nesting depth."""
    out = []

    def walk(e):
        if isinstance(e, Apply):
            for a in e.args:
                walk(a)
        elif isinstance(e, Cell):
            out.append((point, e.point, not isinstance(e.arg, Ctx)))
            walk(e.arg)

    walk(expr)
    return out


def _tarjan_sccs(nodes, succs):
    """SCCs in completion order: successors' components come first."""
    index = {}
    low = {}
    stack = []
    on_stack = set()
    sccs = []
    counter = [0]

    def strongconnect(root):
        work = [(root, iter(succs[root]))]
        index[root] = low[root] = counter[0]
        counter[0] += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            node, it = work[-1]
            advanced = False
            for nxt in it:
                if nxt not in index:
                    index[nxt] = low[nxt] = counter[0]
                    counter[0] += 1
                    stack.append(nxt)
                    on_stack.add(nxt)
                    work.append((nxt, iter(succs[nxt])))
                    advanced = True
                    break
                if nxt in on_stack:
                    low[node] = min(low[node], index[nxt])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
            if low[node] == index[node]:
                component = []
                while True:
                    member = stack.pop()
                    on_stack.discard(member)
                    component.append(member)
                    if member == node:
                        break
                sccs.append(component)

    for node in nodes:
        if node not in index:
            strongconnect(node)
    return sccs


def _cycle_through(src, dst, scc, succs):
    """Path dst ->* src inside one SCC, returned as [src, dst, ..., src]."""
    if src == dst:
        return (src, src)
    component = set(scc)
    parent = {dst: None}
    frontier = [dst]
    while frontier:
        node = frontier.pop(0)
        if node == src:
            break
        for nxt in succs[node]:
            if nxt in component and nxt not in parent:
                parent[nxt] = node
                frontier.append(nxt)
    path = [src]
    node = parent[src]
    while node is not None:
        path.append(node)
        node = parent[node]
    path.reverse()
    return (src, *path)


def check_stratified(scheme: Scheme):
    """Levels witness, or a counterexample cycle through a strict call edge.

    An edge u -> u' exists for every cell of u' inside the equation of u; it
    is strict unless the cell's argument is exactly the context variable.
    The scheme is stratified iff no strict edge lies inside a strongly
    connected component; levels then count the longest strict-edge path in
    the condensation, with all points of one component sharing a level.
    """
    edges = []
    for u in scheme.points:
        edges.extend(_cell_edges(u, scheme.rhs[u]))
    succs = {u: [] for u in scheme.points}
    for u, u2, _ in edges:
        succs[u].append(u2)
    sccs = _tarjan_sccs(scheme.points, succs)
    scc_of = {}
    for i, component in enumerate(sccs):
        for node in component:
            scc_of[node] = i
    for u, u2, strict in edges:
        if strict and scc_of[u] == scc_of[u2]:
            return CounterexampleCycle(
                _cycle_through(u, u2, sccs[scc_of[u]], succs))
    level = [0] * len(sccs)
    for i, component in enumerate(sccs):
        members = set(component)
        best = 0
        for u, u2, strict in edges:
            if u in members and u2 not in members:
                best = max(best, level[scc_of[u2]] + (1 if strict else 0))
        level[i] = best
    return {u: level[scc_of[u]] for u in scheme.points}


def check_levels(scheme: Scheme, levels: dict) -> bool:
    """Independent check of the stratification invariants for a witness."""
    for u in scheme.points:
        if u not in levels:
            return False
        for caller, callee, strict in _cell_edges(u, scheme.rhs[u]):
            if levels[callee] == levels[caller]:
                if strict:
                    return False
            elif levels[callee] >= levels[caller]:
                return False
    return True
