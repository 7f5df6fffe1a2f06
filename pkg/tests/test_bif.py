"""BIF-subset ingestion and the network-to-program translation."""

import itertools
import random

import pytest

from flipc import infer, syntax as S
from flipc.bif import (
    BayesNet,
    joint_enumeration_marginal,
    net_to_program,
    parse_bif,
)
from flipc.compiler import compile_program
from flipc.desugar import desugar_program
from flipc.errors import (
    BifParseError,
    CyclicNetworkError,
    MalformedCptError,
    UnknownQueryVariableError,
)
from flipc.parser import parse_program, pretty_program
from flipc.typecheck import typecheck_program

def load_cancer() -> str:
    from importlib import resources

    return resources.files("flipc").joinpath("benchmarks", "cancer.bif").read_text()


SINGLE = """
network tiny { }
variable A { type discrete [ 2 ] { yes, no }; }
probability ( A ) { table 0.3, 0.7; }
"""

CHAIN = """
network chain { }
variable A { type discrete [ 2 ] { a0, a1 }; }
variable B { type discrete [ 2 ] { b0, b1 }; }
probability ( A ) { table 0.6, 0.4; }
probability ( B | A ) {
  ( a0 ) 1.0, 0.0;
  ( a1 ) 0.0, 1.0;
}
"""


class TestParseBif:
    def test_cancer_network_shape(self):
        net = parse_bif(load_cancer())
        assert len(net.variables) == 5
        assert net.parameter_count() == 10
        assert net.parents["Cancer"] == ["Pollution", "Smoker"]
        assert len(net.cpts["Cancer"]) == 4

    def test_single_variable(self):
        net = parse_bif(SINGLE)
        assert net.variable_names() == ["A"]
        assert net.cpts["A"][()] == [0.3, 0.7]

    def test_row_sum_checked(self):
        bad = SINGLE.replace("0.3, 0.7", "0.3, 0.6")
        with pytest.raises(MalformedCptError):
            parse_bif(bad)

    def test_missing_rows_detected(self):
        bad = CHAIN.replace("( a1 ) 0.0, 1.0;", "")
        with pytest.raises(MalformedCptError):
            parse_bif(bad)

    def test_duplicate_rows_detected(self):
        bad = CHAIN.replace("( a1 ) 0.0, 1.0;", "( a0 ) 0.0, 1.0;")
        with pytest.raises(MalformedCptError):
            parse_bif(bad)

    def test_cyclic_network_detected(self):
        cyclic = """
        network loop { }
        variable A { type discrete [ 2 ] { x, y }; }
        variable B { type discrete [ 2 ] { x, y }; }
        probability ( A | B ) { ( x ) 0.5, 0.5; ( y ) 0.5, 0.5; }
        probability ( B | A ) { ( x ) 0.5, 0.5; ( y ) 0.5, 0.5; }
        """
        with pytest.raises(CyclicNetworkError):
            parse_bif(cyclic)

    def test_continuous_variables_rejected_with_location(self):
        bad = SINGLE.replace("type discrete [ 2 ] { yes, no };", "type continuous;")
        with pytest.raises(BifParseError) as err:
            parse_bif(bad)
        assert err.value.span is not None

    def test_property_rejected(self):
        bad = SINGLE.replace(
            "variable A {", 'variable A {\n  property "position = (1, 2)";'
        )
        with pytest.raises(BifParseError):
            parse_bif(bad)

    def test_unknown_parent_rejected(self):
        bad = """
        network broken { }
        variable A { type discrete [ 2 ] { x, y }; }
        probability ( A | Ghost ) { ( x ) 0.5, 0.5; }
        """
        with pytest.raises(BifParseError):
            parse_bif(bad)


class TestNetToProgram:
    def test_unknown_query(self):
        with pytest.raises(UnknownQueryVariableError):
            net_to_program(parse_bif(SINGLE), "Ghost")

    def test_single_variable_is_one_discrete(self):
        program = net_to_program(parse_bif(SINGLE), "A")
        assert isinstance(program.main, S.Let)
        assert isinstance(program.main.bound, S.Discrete)
        assert program.main.bound.params == [0.3, 0.7]
        assert program.main.body == S.Ident("A")

    def test_deterministic_chain_propagates(self):
        net = parse_bif(CHAIN)
        marginal_a = _pipeline_marginal(net, "A")
        marginal_b = _pipeline_marginal(net, "B")
        assert marginal_b == pytest.approx(marginal_a, abs=1e-12)

    def test_cancer_marginal_matches_joint_enumeration(self):
        net = parse_bif(load_cancer())
        for query in ("Xray", "Dyspnoea", "Cancer"):
            got = _pipeline_marginal(net, query)
            want = joint_enumeration_marginal(net, query)
            assert got == pytest.approx(want, abs=1e-9)

    def test_translation_round_trips_through_text(self):
        net = parse_bif(load_cancer())
        program = net_to_program(net, "Xray")
        printed = pretty_program(program)
        assert parse_program(printed) == program

    def test_random_small_networks_all_marginals(self):
        rng = random.Random(99)
        for _ in range(10):
            net = _random_net(rng)
            for var in net.variable_names():
                got = _pipeline_marginal(net, var)
                want = joint_enumeration_marginal(net, var)
                assert got == pytest.approx(want, abs=1e-9)

    def test_leaf_marginals_query_matches_joint_enumeration(self):
        net = parse_bif(load_cancer())
        query = "Dyspnoea"
        program = net_to_program(net, query)
        typecheck_program(program)
        compiled = compile_program(desugar_program(program))
        got = [p for _, p in infer.marginals(compiled)]
        want = joint_enumeration_marginal(net, query)
        assert got == pytest.approx(want, abs=1e-9)

    def test_emitted_tree_linear_in_cpt_entries(self):
        rng = random.Random(7)
        for _ in range(8):
            net = _random_net(rng, max_vars=5, max_states=4)
            entries = sum(
                len(rows) * len(net.states(var)) for var, rows in net.cpts.items()
            )
            program = net_to_program(net, net.variable_names()[-1])
            nodes = sum(1 for _ in S.program_nodes(program))
            assert nodes <= 24 * entries


def _pipeline_marginal(net: BayesNet, query: str):
    program = net_to_program(net, query)
    typecheck_program(program)
    core = desugar_program(program)
    compiled = compile_program(core)
    size = len(net.states(query))
    totals = [0.0] * size
    for value, p in infer.full_distribution(compiled).items():
        index = S.one_hot_index(value)
        if index is not None and p:
            totals[index] += p
    return totals


def _random_net(rng: random.Random, max_vars: int = 5, max_states: int = 3) -> BayesNet:
    n = rng.randint(1, max_vars)
    variables = []
    parents = {}
    cpts = {}
    for i in range(n):
        name = f"V{i}"
        card = rng.randint(2, max_states)
        variables.append((name, [f"s{k}" for k in range(card)]))
        available = [v for v, _ in variables[:-1]]
        rng.shuffle(available)
        parents[name] = sorted(available[: rng.randint(0, min(2, len(available)))])
        cards = [len(dict(variables)[p]) for p in parents[name]]
        rows = {}
        for combo in itertools.product(*(range(c) for c in cards)):
            raw = [rng.random() + 0.01 for _ in range(card)]
            total = sum(raw)
            row = [x / total for x in raw]
            row[-1] = 1.0 - sum(row[:-1])
            rows[combo] = row
        cpts[name] = rows
    return BayesNet("random", variables, parents, cpts)
