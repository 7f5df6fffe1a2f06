"""Compilation of core programs to weighted Boolean formulas over BDDs.

Every expression compiles to a triple: a *formula tuple* (one BDD root per
Bool leaf of the expression's type, true exactly when the expression
evaluates to true on a given flip assignment, observations ignored), a
single *accepting* formula (true exactly when every observe succeeds), and a
weight map giving each flip variable's (theta, 1 - theta) literal weights.

The rules, in brief: values become terminals; each flip allocates one fresh
weighted variable; ``observe`` contributes its guard to the accepting
formula and is itself trivially true; conditionals select between branch
formulas under the compiled guard; ``let`` binds the bound expression's
formula tuple in the environment (realizing substitution eagerly) and
conjoins accepting formulas.  Functions compile once to a template over
placeholder argument variables; each call refreshes the template's flips
with fresh variables and substitutes the actual argument formulas by BDD
composition.  Inline mode instead splices function bodies syntactically
(with alpha-renaming) before compiling, as a differential baseline.

Flip variables enter the global BDD order in the syntactic order compilation
reaches them; a call's refreshed flips are allocated contiguously at the
call site.  Flips with parameter exactly 0 or 1 fold to terminals and
allocate no variable.

All formula roots and the accepting formula share one manager, so common
subgraphs are stored once (a multi-rooted BDD).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional, Union

from . import syntax as S
from ._util import grow_recursion_limit
from .bdd import FALSE, TRUE, BddManager
from .errors import FlipcError, InternalError, ShapeMismatchError


@dataclass(frozen=True)
class Leaf:
    node: int


@dataclass(frozen=True)
class Pair:
    left: "CompiledTuple"
    right: "CompiledTuple"


CompiledTuple = Union[Leaf, Pair]


def tuple_of_value(v: S.Value) -> CompiledTuple:
    if isinstance(v, bool):
        return Leaf(TRUE if v else FALSE)
    return Pair(tuple_of_value(v[0]), tuple_of_value(v[1]))


def iter_leaves(t: CompiledTuple):
    if isinstance(t, Leaf):
        yield t.node
    else:
        yield from iter_leaves(t.left)
        yield from iter_leaves(t.right)


def leaf_paths(t: CompiledTuple, prefix: str = ""):
    """(path, node) per leaf; 'l'/'r' steps, empty path for a bare leaf."""
    if isinstance(t, Leaf):
        yield prefix, t.node
    else:
        yield from leaf_paths(t.left, prefix + "l")
        yield from leaf_paths(t.right, prefix + "r")


def form(mgr: BddManager, name: str, ty: S.Ty) -> CompiledTuple:
    """Placeholder variables for an argument of type ``ty``: one free
    variable per Bool leaf, components suffixed _l and _r."""
    if isinstance(ty, S.BoolTy):
        return Leaf(mgr.var(mgr.new_free(name)))
    if isinstance(ty, S.ProdTy):
        return Pair(form(mgr, name + "_l", ty.left), form(mgr, name + "_r", ty.right))
    raise ShapeMismatchError(f"cannot build a form for type {ty}")


def broadcast_and(mgr: BddManager, g: int, t: CompiledTuple) -> CompiledTuple:
    if isinstance(t, Leaf):
        return Leaf(mgr.apply_and(g, t.node))
    return Pair(broadcast_and(mgr, g, t.left), broadcast_and(mgr, g, t.right))


def pointwise_or(mgr: BddManager, a: CompiledTuple, b: CompiledTuple) -> CompiledTuple:
    if isinstance(a, Leaf) and isinstance(b, Leaf):
        return Leaf(mgr.apply_or(a.node, b.node))
    if isinstance(a, Pair) and isinstance(b, Pair):
        return Pair(pointwise_or(mgr, a.left, b.left), pointwise_or(mgr, a.right, b.right))
    raise ShapeMismatchError("pointwise disjunction of mismatched shapes")


def pointwise_iff(mgr: BddManager, a: CompiledTuple, b: CompiledTuple) -> int:
    """Conjunction of per-leaf biconditionals, as a single formula."""
    if isinstance(a, Leaf) and isinstance(b, Leaf):
        return mgr.apply_iff(a.node, b.node)
    if isinstance(a, Pair) and isinstance(b, Pair):
        return mgr.apply_and(
            pointwise_iff(mgr, a.left, b.left), pointwise_iff(mgr, a.right, b.right)
        )
    raise ShapeMismatchError("pointwise iff of mismatched shapes")


def pointwise_ite(mgr: BddManager, g: int, t: CompiledTuple, e: CompiledTuple) -> CompiledTuple:
    # Leafwise ite(g, t, e) == (g and t) or (not g and e); one traversal.
    if isinstance(t, Leaf) and isinstance(e, Leaf):
        return Leaf(mgr.ite(g, t.node, e.node))
    if isinstance(t, Pair) and isinstance(e, Pair):
        return Pair(
            pointwise_ite(mgr, g, t.left, e.left), pointwise_ite(mgr, g, t.right, e.right)
        )
    raise ShapeMismatchError("conditional branches of mismatched shapes")


# ---------------------------------------------------------------------------
# Results


@dataclass
class CompiledExpr:
    formula: CompiledTuple
    accepting: int
    weights: dict  # level -> (weight_true, weight_false); shared registry


@dataclass
class CompiledFunction:
    formal_form: CompiledTuple
    formula: CompiledTuple
    accepting: int
    flip_levels: list  # template flips, refreshed per call


@dataclass
class CompiledProgram:
    manager: BddManager
    expr: CompiledExpr
    output_ty: S.Ty
    flip_count: int
    mode: str
    surface_output_ty: Optional[S.Ty] = None

    @property
    def formula(self) -> CompiledTuple:
        return self.expr.formula

    @property
    def accepting(self) -> int:
        return self.expr.accepting

    @property
    def weights(self) -> dict:
        return self.expr.weights

    def node_count(self) -> int:
        """Size of the multi-rooted BDD: all formula roots plus accepting."""
        roots = list(iter_leaves(self.expr.formula)) + [self.expr.accepting]
        return self.manager.node_count(*roots)


# ---------------------------------------------------------------------------
# Compilation proper


class _Compilation:
    def __init__(self, mgr: BddManager, order: Optional[list] = None):
        self.mgr = mgr
        self.weights: dict = {}
        self.funcs: dict = {}
        self.recording: Optional[list] = None
        self._order_levels: Optional[list] = None
        self._next_flip = 0
        if order is not None:
            self._order_levels = order

    def new_flip(self, theta: float) -> int:
        if self._order_levels is not None:
            if self._next_flip >= len(self._order_levels):
                raise FlipcError("variable order names fewer flips than the program has")
            level = self._order_levels[self._next_flip]
            self.mgr.set_flip_theta(level, theta)
        else:
            level = self.mgr.new_flip(theta)
        self._next_flip += 1
        if level in self.weights:
            raise InternalError(f"flip level {level} allocated twice")
        self.weights[level] = (theta, 1.0 - theta)
        if self.recording is not None:
            self.recording.append(level)
        return level


_MISSING = object()


def compile_expr(ctx: _Compilation, env: dict, e: S.Expr) -> CompiledExpr:
    formula, accepting = _compile(ctx, env, e)
    return CompiledExpr(formula, accepting, ctx.weights)


def _compile(ctx: _Compilation, env: dict, e: S.Expr):
    mgr = ctx.mgr
    if isinstance(e, S.Lit):
        return tuple_of_value(e.value), TRUE
    if isinstance(e, S.Ident):
        return env[e.name], TRUE
    if isinstance(e, S.Flip):
        if e.theta == 0.0:
            return Leaf(FALSE), TRUE
        if e.theta == 1.0:
            return Leaf(TRUE), TRUE
        level = ctx.new_flip(e.theta)
        return Leaf(mgr.var(level)), TRUE
    if isinstance(e, S.Fst):
        t = _compile_atom(ctx, env, e.arg)
        if not isinstance(t, Pair):
            raise ShapeMismatchError("fst of a non-tuple", e.span)
        return t.left, TRUE
    if isinstance(e, S.Snd):
        t = _compile_atom(ctx, env, e.arg)
        if not isinstance(t, Pair):
            raise ShapeMismatchError("snd of a non-tuple", e.span)
        return t.right, TRUE
    if isinstance(e, S.Tup):
        left = _compile_atom(ctx, env, e.left)
        right = _compile_atom(ctx, env, e.right)
        return Pair(left, right), TRUE
    if isinstance(e, S.Observe):
        guard = _compile_atom(ctx, env, e.arg)
        if not isinstance(guard, Leaf):
            raise ShapeMismatchError("observe of a non-boolean", e.span)
        return Leaf(TRUE), guard.node
    if isinstance(e, S.Ite):
        guard = _compile_atom(ctx, env, e.guard)
        if not isinstance(guard, Leaf):
            raise ShapeMismatchError("conditional on a non-boolean", e.span)
        g = guard.node
        then_formula, then_accepting = _compile(ctx, env, e.then)
        else_formula, else_accepting = _compile(ctx, env, e.orelse)
        formula = pointwise_ite(mgr, g, then_formula, else_formula)
        accepting = mgr.ite(g, then_accepting, else_accepting)
        return formula, accepting
    if isinstance(e, S.Let):
        # Let chains are handled in one loop: bind each formula tuple in the
        # environment, then conjoin all accepting formulas around the body's.
        undo = []
        gammas = []
        while isinstance(e, S.Let):
            bound_formula, bound_accepting = _compile(ctx, env, e.bound)
            if bound_accepting != TRUE:
                gammas.append(bound_accepting)
            undo.append((e.name, env.get(e.name, _MISSING)))
            env[e.name] = bound_formula
            e = e.body
        formula, accepting = _compile(ctx, env, e)
        for gamma in reversed(gammas):
            accepting = mgr.apply_and(gamma, accepting)
        for name, old in reversed(undo):
            if old is _MISSING:
                del env[name]
            else:
                env[name] = old
        return formula, accepting
    if isinstance(e, S.Call):
        arg = _compile_atom(ctx, env, e.arg)
        result = apply_call(ctx, e.func, arg)
        return result.formula, result.accepting
    raise InternalError(f"cannot compile non-core expression {type(e).__name__}")


def _compile_atom(ctx: _Compilation, env: dict, e: S.Expr) -> CompiledTuple:
    if isinstance(e, S.Lit):
        return tuple_of_value(e.value)
    if isinstance(e, S.Ident):
        return env[e.name]
    raise InternalError(f"non-atomic argument position: {type(e).__name__}")


def compile_function(ctx: _Compilation, func: S.Function) -> CompiledFunction:
    formal = form(ctx.mgr, func.formal, func.formal_ty)
    recorded: list = []
    previous = ctx.recording
    ctx.recording = recorded
    try:
        formula, accepting = _compile(ctx, {func.formal: formal}, func.body)
    finally:
        ctx.recording = previous
    return CompiledFunction(formal, formula, accepting, recorded)


def apply_call(ctx: _Compilation, func_name: str, arg: CompiledTuple) -> CompiledExpr:
    """Instantiate a compiled function: refresh its flips with fresh
    variables and substitute the argument formulas for the formal's
    placeholders, both in one simultaneous composition."""
    template = ctx.funcs[func_name]
    mgr = ctx.mgr
    mapping = {}
    for level in template.flip_levels:
        theta = ctx.weights[level][0]
        fresh = ctx.new_flip(theta)
        mapping[level] = mgr.var(fresh)
    formal_leaves = list(iter_leaves(template.formal_form))
    arg_leaves = list(iter_leaves(arg))
    if len(formal_leaves) != len(arg_leaves):
        raise ShapeMismatchError(
            f"call to {func_name}: argument shape does not match the formal"
        )
    for placeholder, actual in zip(formal_leaves, arg_leaves):
        mapping[mgr.level_of(placeholder)] = actual
    formula = _map_tuple(template.formula, lambda n: mgr.compose(n, mapping))
    accepting = mgr.compose(template.accepting, mapping)
    return CompiledExpr(formula, accepting, ctx.weights)


def _map_tuple(t: CompiledTuple, fn) -> CompiledTuple:
    if isinstance(t, Leaf):
        return Leaf(fn(t.node))
    return Pair(_map_tuple(t.left, fn), _map_tuple(t.right, fn))


def compile_program(
    program: S.Program,
    mode: str = "modular",
    max_nodes: Optional[int] = None,
    order: Optional[list] = None,
) -> CompiledProgram:
    """Compile a desugared core program.

    Modular mode compiles each function once and instantiates it per call;
    inline mode splices bodies syntactically first.  Both produce the same
    inference results.  An explicit variable ``order`` (flip names f1..fN,
    referring to syntactic order) is only meaningful for inline mode, where
    each syntactic flip maps to exactly one variable.
    """
    if mode not in ("modular", "inline"):
        raise FlipcError(f"unknown compilation mode {mode!r}")
    if mode == "inline":
        program = inline_program(program)
    grow_recursion_limit(sum(1 for _ in S.program_nodes(program)))
    mgr = BddManager(max_nodes=max_nodes)
    order_levels = None
    if order is not None:
        if mode != "inline":
            raise FlipcError("an explicit variable order requires inline mode")
        order_levels = _register_order(mgr, program, order)
    ctx = _Compilation(mgr, order=order_levels)
    for func in program.functions:
        ctx.funcs[func.name] = compile_function(ctx, func)
    expr = compile_expr(ctx, {}, program.main)
    output_ty = program.main.ty
    if output_ty is None:
        output_ty = _shape_ty(expr.formula)
    return CompiledProgram(mgr, expr, output_ty, len(ctx.weights), mode)


def _shape_ty(t: CompiledTuple) -> S.Ty:
    if isinstance(t, Leaf):
        return S.BOOL
    return S.ProdTy(_shape_ty(t.left), _shape_ty(t.right))


def _register_order(mgr: BddManager, program: S.Program, order: list) -> list:
    flips = [
        node
        for node in S.walk_nodes(program.main)
        if isinstance(node, S.Flip) and 0.0 < node.theta < 1.0
    ]
    expected = {f"f{i + 1}" for i in range(len(flips))}
    if len(order) != len(flips) or set(order) != expected:
        raise FlipcError(
            f"variable order must name every flip exactly once: expected "
            f"{{f1..f{len(flips)}}}, got {len(order)} names"
        )
    # Register the levels in the requested order; syntactic flip i then
    # claims the level registered under its name.
    level_by_name = {name: mgr.new_flip(None, name=name) for name in order}
    return [level_by_name[f"f{i + 1}"] for i in range(len(flips))]


# ---------------------------------------------------------------------------
# Syntactic inlining


def inline_program(program: S.Program) -> S.Program:
    """Replace every call with a freshly alpha-renamed copy of the callee's
    body; the result has no functions."""
    grow_recursion_limit(sum(1 for _ in S.program_nodes(program)))
    counter = itertools.count()
    completed: dict[str, S.Function] = {}

    def transform(e: S.Expr) -> S.Expr:
        if isinstance(e, (S.Lit, S.Ident, S.Flip)):
            return e
        if isinstance(e, S.Let):
            chain = []
            while isinstance(e, S.Let):
                chain.append((e.name, transform(e.bound)))
                e = e.body
            body = transform(e)
            for name, bound in reversed(chain):
                body = S.Let(name, bound, body)
            return body
        if isinstance(e, S.Fst):
            return S.Fst(transform(e.arg))
        if isinstance(e, S.Snd):
            return S.Snd(transform(e.arg))
        if isinstance(e, S.Tup):
            return S.Tup(transform(e.left), transform(e.right))
        if isinstance(e, S.Ite):
            return S.Ite(transform(e.guard), transform(e.then), transform(e.orelse))
        if isinstance(e, S.Observe):
            return S.Observe(transform(e.arg))
        if isinstance(e, S.Call):
            func = completed[e.func]
            return _instantiate(func.body, {func.formal: transform(e.arg)}, counter)
        raise InternalError(f"cannot inline non-core expression {type(e).__name__}")

    for func in program.functions:
        completed[func.name] = S.Function(
            func.name, func.params, func.return_ty, transform(func.body)
        )
    main = transform(program.main)
    result = S.Program([], main)
    result.main.ty = program.main.ty
    return result


def _instantiate(e: S.Expr, subst: dict, counter) -> S.Expr:
    """Copy ``e`` with every binder renamed fresh and ``subst`` applied to
    free identifiers (capture is impossible: fresh names are reserved)."""
    if isinstance(e, S.Lit):
        return e
    if isinstance(e, S.Ident):
        replacement = subst.get(e.name)
        return replacement if replacement is not None else e
    if isinstance(e, S.Flip):
        return S.Flip(e.theta)
    if isinstance(e, S.Let):
        chain = []
        scope = dict(subst)
        while isinstance(e, S.Let):
            bound = _instantiate(e.bound, scope, counter)
            fresh = f"$i{next(counter)}"
            scope[e.name] = S.Ident(fresh)
            chain.append((fresh, bound))
            e = e.body
        body = _instantiate(e, scope, counter)
        for name, bound in reversed(chain):
            body = S.Let(name, bound, body)
        return body
    if isinstance(e, S.Fst):
        return S.Fst(_instantiate(e.arg, subst, counter))
    if isinstance(e, S.Snd):
        return S.Snd(_instantiate(e.arg, subst, counter))
    if isinstance(e, S.Tup):
        return S.Tup(
            _instantiate(e.left, subst, counter), _instantiate(e.right, subst, counter)
        )
    if isinstance(e, S.Ite):
        return S.Ite(
            _instantiate(e.guard, subst, counter),
            _instantiate(e.then, subst, counter),
            _instantiate(e.orelse, subst, counter),
        )
    if isinstance(e, S.Observe):
        return S.Observe(_instantiate(e.arg, subst, counter))
    if isinstance(e, S.Call):
        raise InternalError("call survived inlining")
    raise InternalError(f"cannot instantiate {type(e).__name__}")


# ---------------------------------------------------------------------------
# Convenience front end


def compile_source(
    text: str,
    filename: str = "<input>",
    mode: str = "modular",
    max_nodes: Optional[int] = None,
    order: Optional[list] = None,
):
    """parse -> typecheck -> desugar -> compile; returns the compiled program
    and the desugared core program (the oracle's input)."""
    from .desugar import desugar_program
    from .parser import parse_program
    from .typecheck import typecheck_program

    ast = parse_program(text, filename)
    typecheck_program(ast)
    surface_ty = ast.main.ty
    core = desugar_program(ast)
    compiled = compile_program(core, mode=mode, max_nodes=max_nodes, order=order)
    compiled.surface_output_ty = surface_ty
    return compiled, core
