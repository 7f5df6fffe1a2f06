"""Shared helpers: benchmark loading, pipeline shortcuts, comparisons."""

from __future__ import annotations

import random

import pytest

from flipc import infer
from flipc.compiler import compile_program
from flipc.desugar import desugar_program
from flipc.oracle import eval_program
from flipc.parser import parse_program
from flipc.suites import benchmark_names, benchmark_text
from flipc.typecheck import typecheck_program


def frontend(text: str, filename: str = "<test>"):
    """parse + typecheck + desugar; returns (surface ast, core program)."""
    ast = parse_program(text, filename)
    typecheck_program(ast)
    core = desugar_program(ast)
    return ast, core


def compile_text(text: str, mode: str = "modular"):
    _, core = frontend(text)
    return compile_program(core, mode=mode), core


def max_distribution_delta(a: dict, b: dict) -> float:
    keys = set(a) | set(b)
    return max((abs(a.get(k, 0.0) - b.get(k, 0.0)) for k in keys), default=0.0)


def compiled_vs_oracle_delta(compiled, core) -> float:
    """Worst absolute difference across accepting and the full posterior."""
    reference = eval_program(core)
    delta = abs(infer.accepting_probability(compiled) - reference.accepting)
    distribution = infer.full_distribution(compiled)
    return max(delta, max_distribution_delta(distribution, reference.distribution))


@pytest.fixture(scope="session")
def all_benchmarks():
    return {name: benchmark_text(name) for name in benchmark_names()}


@pytest.fixture
def rng():
    return random.Random(20240817)
