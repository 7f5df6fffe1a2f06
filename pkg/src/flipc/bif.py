"""Bayesian-network ingestion: a BIF subset parser and a translator that
turns discrete networks into source programs.

Supported BIF constructs::

    network <name> { }
    variable <name> { type discrete [ <n> ] { <state>, ... }; }
    probability ( <child> ) { table p1, ..., pn; }
    probability ( <child> | <parent>, ... ) { ( <state>, ... ) p1, ..., pn; ... }

Anything else (continuous variables, ``property`` lines, ``default`` rows)
is rejected with its location.  Every conditional-probability row must sum
to one (within 1e-6) and every parent-state combination must appear exactly
once.

The translation emits variables in topological order.  A root becomes a
``discrete(...)``; a child dispatches on its parents' one-hot indicators
with nested conditionals (testing states in order, the last state as the
final else) and selects the matching ``discrete`` row.  Main returns the
query variable's one-hot tuple, so inferring the program's distribution is
the single-marginal task.  The emitted tree is linear in the total number of
CPT entries.  Evidence is not translated; add observes to the emitted
program by hand.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from . import syntax as S
from .errors import BifParseError, CyclicNetworkError, MalformedCptError, UnknownQueryVariableError

CPT_ROW_TOLERANCE = 1e-6


@dataclass
class BayesNet:
    name: str
    variables: list  # (name, [state labels]) in declaration order
    parents: dict  # var -> ordered parent list
    cpts: dict  # var -> {parent-state-index tuple: [probability per state]}

    def states(self, var: str) -> list:
        for name, states in self.variables:
            if name == var:
                return states
        raise KeyError(var)

    def variable_names(self) -> list:
        return [name for name, _ in self.variables]

    def parameter_count(self) -> int:
        """Free parameters: per CPT row, states - 1."""
        total = 0
        for var, rows in self.cpts.items():
            total += len(rows) * (len(self.states(var)) - 1)
        return total

    def topological_order(self) -> list:
        order = []
        placed: set = set()
        remaining = self.variable_names()
        while remaining:
            progress = [v for v in remaining if all(p in placed for p in self.parents[v])]
            if not progress:
                raise CyclicNetworkError(
                    f"network has no topological order (cycle through {remaining[0]!r})"
                )
            for v in progress:
                order.append(v)
                placed.add(v)
            remaining = [v for v in remaining if v not in placed]
        return order


# ---------------------------------------------------------------------------
# Parsing

_BIF_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>//[^\n]*|/\*.*?\*/)
  | (?P<number>\d+(?:\.\d+)?(?:[eE][-+]?\d+)?)
  | (?P<word>[A-Za-z_][A-Za-z0-9_.\-]*)
  | (?P<punct>[{}()\[\];,|])
    """,
    re.VERBOSE | re.DOTALL,
)


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


class _BifParser:
    def __init__(self, text: str, filename: str):
        self.filename = filename
        self.tokens = self._lex(text)
        self.pos = 0

    def _lex(self, text: str) -> list:
        tokens = []
        line, col, pos = 1, 1, 0
        while pos < len(text):
            m = _BIF_TOKEN.match(text, pos)
            if m is None:
                raise BifParseError(
                    f"unexpected character {text[pos]!r}",
                    S.Span(self.filename, line, col, line, col + 1),
                )
            if m.lastgroup not in ("ws", "comment"):
                tokens.append(_Tok(m.lastgroup, m.group(), line, col))
            newlines = m.group().count("\n")
            if newlines:
                line += newlines
                col = len(m.group()) - m.group().rfind("\n")
            else:
                col += len(m.group())
            pos = m.end()
        tokens.append(_Tok("eof", "", line, col))
        return tokens

    def peek(self) -> _Tok:
        return self.tokens[self.pos]

    def next(self) -> _Tok:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def span(self, tok: _Tok) -> S.Span:
        return S.Span(self.filename, tok.line, tok.col, tok.line, tok.col + max(1, len(tok.text)))

    def fail(self, message: str):
        tok = self.peek()
        shown = tok.text if tok.kind != "eof" else "end of input"
        raise BifParseError(f"{message}, found {shown!r}", self.span(tok))

    def eat(self, text: str) -> _Tok:
        tok = self.peek()
        if tok.text != text:
            self.fail(f"expected {text!r}")
        return self.next()

    def word(self, what: str) -> str:
        tok = self.peek()
        if tok.kind != "word":
            self.fail(f"expected {what}")
        return self.next().text

    def number(self) -> float:
        tok = self.peek()
        if tok.kind != "number":
            self.fail("expected a number")
        return float(self.next().text)

    def numbers(self) -> list:
        values = [self.number()]
        while self.peek().text == ",":
            self.next()
            values.append(self.number())
        return values

    # -- grammar -----------------------------------------------------------

    def parse(self) -> BayesNet:
        self.eat("network")
        name = self.word("network name")
        self.eat("{")
        while self.peek().text != "}":
            if self.peek().text == "property":
                self.fail("unsupported construct 'property'")
            self.fail("unexpected token in network block")
        self.eat("}")
        variables: list = []
        declared: dict = {}
        parents: dict = {}
        cpts: dict = {}
        while self.peek().kind != "eof":
            tok = self.peek()
            if tok.text == "variable":
                var_name, states = self.variable_block()
                if var_name in declared:
                    raise BifParseError(f"duplicate variable {var_name!r}", self.span(tok))
                declared[var_name] = states
                variables.append((var_name, states))
            elif tok.text == "probability":
                child, parent_list, rows = self.probability_block(declared)
                if child in cpts:
                    raise BifParseError(f"duplicate probability block for {child!r}", self.span(tok))
                parents[child] = parent_list
                cpts[child] = rows
            else:
                self.fail("expected 'variable' or 'probability'")
        for var_name, _ in variables:
            if var_name not in cpts:
                raise BifParseError(f"variable {var_name!r} has no probability block", None)
        net = BayesNet(name, variables, parents, cpts)
        net.topological_order()  # raises on cycles
        return net

    def variable_block(self):
        self.eat("variable")
        name = self.word("variable name")
        self.eat("{")
        type_tok = self.peek()
        self.eat("type")
        kind = self.word("variable type")
        if kind != "discrete":
            raise BifParseError(
                f"unsupported variable type {kind!r} (only discrete)", self.span(type_tok)
            )
        self.eat("[")
        count_tok = self.peek()
        count = int(self.number())
        self.eat("]")
        self.eat("{")
        states = [self.word("state label")]
        while self.peek().text == ",":
            self.next()
            states.append(self.word("state label"))
        self.eat("}")
        self.eat(";")
        if self.peek().text == "property":
            self.fail("unsupported construct 'property'")
        self.eat("}")
        if count != len(states):
            raise BifParseError(
                f"variable {name!r} declares {count} states but lists {len(states)}",
                self.span(count_tok),
            )
        if len(states) < 2:
            raise BifParseError(f"variable {name!r} needs at least two states", self.span(count_tok))
        return name, states

    def probability_block(self, declared: dict):
        start = self.peek()
        self.eat("probability")
        self.eat("(")
        child = self.word("variable name")
        if child not in declared:
            raise BifParseError(f"probability block for undeclared variable {child!r}", self.span(start))
        parent_list: list = []
        if self.peek().text == "|":
            self.next()
            parent_list.append(self.word("parent name"))
            while self.peek().text == ",":
                self.next()
                parent_list.append(self.word("parent name"))
        self.eat(")")
        for parent in parent_list:
            if parent not in declared:
                raise BifParseError(f"undeclared parent {parent!r}", self.span(start))
        child_states = declared[child]
        self.eat("{")
        rows: dict = {}
        if not parent_list:
            tok = self.peek()
            self.eat("table")
            values = self.numbers()
            self.eat(";")
            self._check_row(child, values, len(child_states), tok)
            rows[()] = values
        else:
            parent_state_lists = [declared[p] for p in parent_list]
            while self.peek().text != "}":
                tok = self.peek()
                if tok.text in ("table", "default"):
                    self.fail(f"unsupported row form {tok.text!r} in a conditional block")
                self.eat("(")
                labels = [self.word("state label")]
                while self.peek().text == ",":
                    self.next()
                    labels.append(self.word("state label"))
                self.eat(")")
                if len(labels) != len(parent_list):
                    raise BifParseError(
                        f"row names {len(labels)} states for {len(parent_list)} parents",
                        self.span(tok),
                    )
                combo = []
                for parent, states, label in zip(parent_list, parent_state_lists, labels):
                    if label not in states:
                        raise BifParseError(
                            f"{label!r} is not a state of parent {parent!r}", self.span(tok)
                        )
                    combo.append(states.index(label))
                key = tuple(combo)
                if key in rows:
                    raise MalformedCptError(
                        f"duplicate row for parent states {labels}", self.span(tok)
                    )
                values = self.numbers()
                self.eat(";")
                self._check_row(child, values, len(child_states), tok)
                rows[key] = values
            expected_rows = 1
            for states in parent_state_lists:
                expected_rows *= len(states)
            if len(rows) != expected_rows:
                raise MalformedCptError(
                    f"probability block for {child!r} has {len(rows)} rows, "
                    f"expected {expected_rows}",
                    self.span(start),
                )
        self.eat("}")
        return child, parent_list, rows

    def _check_row(self, child: str, values: list, arity: int, tok):
        if len(values) != arity:
            raise MalformedCptError(
                f"row for {child!r} has {len(values)} entries, expected {arity}",
                self.span(tok),
            )
        if any(v < 0 for v in values):
            raise MalformedCptError(f"negative probability in a row for {child!r}", self.span(tok))
        if abs(sum(values) - 1.0) > CPT_ROW_TOLERANCE:
            raise MalformedCptError(
                f"row for {child!r} sums to {sum(values)!r}, not 1", self.span(tok)
            )


def parse_bif(text: str, filename: str = "<bif>") -> BayesNet:
    return _BifParser(text, filename).parse()


# ---------------------------------------------------------------------------
# Translation to a program

_KEYWORD_SAFE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*$")


def _sanitize_names(names: list) -> dict:
    from .parser import KEYWORDS

    mapping = {}
    used: set = set()
    for name in names:
        candidate = re.sub(r"[^A-Za-z0-9_]", "_", name)
        if not _KEYWORD_SAFE.match(candidate) or candidate in KEYWORDS:
            candidate = "v_" + candidate
        base = candidate
        suffix = 1
        while candidate in used:
            suffix += 1
            candidate = f"{base}_{suffix}"
        used.add(candidate)
        mapping[name] = candidate
    return mapping


def net_to_program(net: BayesNet, query: str) -> S.Program:
    """Emit the single-marginal program for ``query``."""
    if query not in net.variable_names():
        raise UnknownQueryVariableError(f"unknown query variable {query!r}")
    order = net.topological_order()
    names = _sanitize_names(order)
    body: S.Expr = S.Ident(names[query])
    for var in reversed(order):
        expr = _dispatch(net, names, net.parents[var], [], net.cpts[var])
        body = S.Let(names[var], expr, body)
    return S.Program([], body)


def _dispatch(net: BayesNet, names: dict, parents: list, chosen: list, rows: dict) -> S.Expr:
    """Nested conditionals testing the first parent's states in order; the
    final else covers its last state.  Emits a constant number of nodes per
    test, so the tree is linear in the row count."""
    if not parents:
        return S.Discrete(list(rows[tuple(chosen)]))
    parent, rest = parents[0], parents[1:]
    cardinality = len(net.states(parent))
    result = _dispatch(net, names, rest, chosen + [cardinality - 1], rows)
    for state in range(cardinality - 2, -1, -1):
        test = S.Eq(S.Ident(names[parent]), S.IntLit(cardinality, state))
        taken = _dispatch(net, names, rest, chosen + [state], rows)
        result = S.Ite(test, taken, result)
    return result


def joint_enumeration_marginal(net: BayesNet, query: str) -> list:
    """Marginal of ``query`` by direct summation over the joint table.

    Independent of the program pipeline; intended as the reference value.
    """
    import itertools

    if query not in net.variable_names():
        raise UnknownQueryVariableError(f"unknown query variable {query!r}")
    order = net.topological_order()
    cards = {v: len(net.states(v)) for v in order}
    query_card = cards[query]
    totals = [0.0] * query_card
    for combo in itertools.product(*(range(cards[v]) for v in order)):
        assignment = dict(zip(order, combo))
        probability = 1.0
        for v in order:
            key = tuple(assignment[p] for p in net.parents[v])
            probability *= net.cpts[v][key][assignment[v]]
        totals[assignment[query]] += probability
    return totals
