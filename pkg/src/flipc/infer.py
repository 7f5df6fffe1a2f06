"""Inference queries over a compiled program.

Every query is a ratio of weighted model counts on the shared manager: the
accepting formula's count is the normalizing constant, and conjoining the
formula tuple's agreement with a concrete value (pointwise iff) selects that
value's mass.  A zero normalizing constant makes every posterior zero.

Compilation happens once; queries reuse the manager.  The iff/conjunction
scaffolding a query builds does create nodes, so queries are serialized (run
them from one thread); they perform no other construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from . import syntax as S
from .compiler import (
    CompiledProgram,
    Leaf,
    iter_leaves,
    leaf_paths,
    pointwise_iff,
    tuple_of_value,
)
from .errors import OutputTooWideError, ShapeMismatchError, UnboundFreeVariableError

DEFAULT_MAX_LEAVES = 20


@dataclass
class InferenceResult:
    accepting: float
    query: str
    entries: list  # (display key, probability) pairs in enumeration order


def check_closed(cp: CompiledProgram) -> None:
    """A queryable program may not mention placeholder argument variables."""
    mgr = cp.manager
    roots = list(iter_leaves(cp.formula)) + [cp.accepting]
    for level in mgr.support(*roots):
        if mgr.labels[level].kind == "free":
            raise UnboundFreeVariableError(
                f"free variable {mgr.labels[level].name} reachable from the program"
            )


def accepting_probability(cp: CompiledProgram) -> float:
    check_closed(cp)
    return cp.manager.wmc(cp.accepting, cp.weights)


def prob_of_value(cp: CompiledProgram, value: S.Value) -> float:
    check_closed(cp)
    if not _shape_matches(cp.formula, value):
        raise ShapeMismatchError(f"value {S.format_value(value)} does not match the output shape")
    mgr = cp.manager
    denominator = mgr.wmc(cp.accepting, cp.weights)
    if denominator == 0.0:
        return 0.0
    selected = mgr.apply_and(pointwise_iff(mgr, cp.formula, tuple_of_value(value)), cp.accepting)
    return mgr.wmc(selected, cp.weights) / denominator


def _shape_matches(t, v: S.Value) -> bool:
    if isinstance(t, Leaf):
        return isinstance(v, bool)
    return (
        isinstance(v, tuple)
        and _shape_matches(t.left, v[0])
        and _shape_matches(t.right, v[1])
    )


def full_distribution(cp: CompiledProgram, max_leaves: int = DEFAULT_MAX_LEAVES) -> dict:
    """Posterior over every inhabitant of the output type.

    One wmc for the normalizing constant plus one per value.
    """
    check_closed(cp)
    leaves = S.bool_leaf_count(cp.output_ty)
    if leaves > max_leaves:
        raise OutputTooWideError(leaves, max_leaves)
    mgr = cp.manager
    denominator = mgr.wmc(cp.accepting, cp.weights)
    out = {}
    for value in S.enumerate_values(cp.output_ty):
        if denominator == 0.0:
            out[value] = 0.0
            continue
        selected = mgr.apply_and(
            pointwise_iff(mgr, cp.formula, tuple_of_value(value)), cp.accepting
        )
        out[value] = mgr.wmc(selected, cp.weights) / denominator
    return out


def marginals(cp: CompiledProgram) -> list:
    """Per-leaf true-probabilities: [(path, probability)] with 'l'/'r' paths."""
    check_closed(cp)
    mgr = cp.manager
    denominator = mgr.wmc(cp.accepting, cp.weights)
    out = []
    for path, node in leaf_paths(cp.formula):
        if denominator == 0.0:
            out.append((path, 0.0))
            continue
        numerator = mgr.wmc(mgr.apply_and(node, cp.accepting), cp.weights)
        out.append((path, numerator / denominator))
    return out


# ---------------------------------------------------------------------------
# Display helpers


def render_value(value: S.Value, surface_ty: Optional[S.Ty]) -> str:
    """Format a core value; one-hot integer components print as indices."""
    if isinstance(surface_ty, S.IntTy):
        index = S.one_hot_index(value)
        if index is not None:
            return str(index)
    if isinstance(surface_ty, S.ProdTy) and isinstance(value, tuple):
        left = render_value(value[0], surface_ty.left)
        right = render_value(value[1], surface_ty.right)
        return f"({left}, {right})"
    return S.format_value(value)


def distribution_result(cp: CompiledProgram, max_leaves: int = DEFAULT_MAX_LEAVES) -> InferenceResult:
    accepting = accepting_probability(cp)
    dist = full_distribution(cp, max_leaves)
    entries = [
        (render_value(value, cp.surface_output_ty), probability)
        for value, probability in dist.items()
    ]
    return InferenceResult(accepting, "distribution", entries)


def marginals_result(cp: CompiledProgram) -> InferenceResult:
    accepting = accepting_probability(cp)
    entries = [(path if path else "value", p) for path, p in marginals(cp)]
    return InferenceResult(accepting, "marginals", entries)


def accepting_result(cp: CompiledProgram) -> InferenceResult:
    return InferenceResult(accepting_probability(cp), "accepting", [])
