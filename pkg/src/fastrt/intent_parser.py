"""Recursive-descent parser for the intent specification language.

Grammar (whitespace between tokens is insignificant, ``//`` starts a
line comment)::

    spec   := "intent" NAME ("min" | "max") "(" expr ")"
              [ "such" "that" NAME "==" signed ]
              "measures" ( NAME ":" NAME )+
              "knobs" ( NAME "=" "[" signed ("," signed)* "]"
                        [ "reference" signed ] )+
              [ "such" "that" expr ]

    expr   := or ;  or := and ("or" and)* ;  and := not ("and" not)*
    not    := "not" not | cmp
    cmp    := add (("<"|"<="|">"|">="|"=="|"!=") add)?
    add    := mul (("+"|"-") mul)* ;  mul := unary (("*"|"/") unary)*
    unary  := "-" unary | atom
    atom   := NUMBER | NAME | "(" expr ")"

Numeric literals are integers or decimal floats; scientific notation is
not part of the language. Identifiers appearing in the objective resolve
to measures, identifiers in the knob constraint resolve to knobs.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import IntentSyntaxError
from .intent import (
    Apply,
    Constant,
    IntentSpec,
    KnobDecl,
    KnobRef,
    MeasureRef,
    OptimizationType,
    validate_spec,
)

KEYWORDS = frozenset(
    {"intent", "min", "max", "such", "that", "measures", "knobs", "reference",
     "and", "or", "not"}
)

# Longest symbols first so "==" wins over "=".
_SYMBOLS = ("==", "!=", "<=", ">=", "<", ">", "=", "(", ")", "[", "]", ",", ":",
            "+", "-", "*", "/")


@dataclass(frozen=True)
class Token:
    kind: str  # "kw" | "ident" | "number" | "sym" | "eof"
    text: str
    value: object
    line: int
    column: int

    def describe(self):
        if self.kind == "eof":
            return "end of input"
        return repr(self.text)


def tokenize(source: str):
    tokens = []
    line, col, i, n = 1, 1, 0, len(source)
    while i < n:
        ch = source[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch.isspace():
            i += 1
            col += 1
            continue
        if source.startswith("//", i):
            while i < n and source[i] != "\n":
                i += 1
            continue
        if ch.isalpha() or ch == "_":
            start = i
            while i < n and (source[i].isalnum() or source[i] == "_"):
                i += 1
            text = source[start:i]
            kind = "kw" if text in KEYWORDS else "ident"
            tokens.append(Token(kind, text, text, line, col))
            col += i - start
            continue
        if ch.isdigit() or (ch == "." and i + 1 < n and source[i + 1].isdigit()):
            start = i
            while i < n and source[i].isdigit():
                i += 1
            if i < n and source[i] == "." and i + 1 < n and source[i + 1].isdigit():
                i += 1
                while i < n and source[i].isdigit():
                    i += 1
            text = source[start:i]
            value = float(text) if "." in text else int(text)
            tokens.append(Token("number", text, value, line, col))
            col += i - start
            continue
        for sym in _SYMBOLS:
            if source.startswith(sym, i):
                tokens.append(Token("sym", sym, sym, line, col))
                i += len(sym)
                col += len(sym)
                break
        else:
            raise IntentSyntaxError(f"unexpected character {ch!r}", line, col)
    tokens.append(Token("eof", "", None, line, col))
    return tokens


class _Parser:
    def __init__(self, source):
        self.tokens = tokenize(source)
        self.pos = 0

    # -- token plumbing ---------------------------------------------------

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def fail(self, expected):
        tok = self.peek()
        wanted = ", ".join(sorted(expected))
        raise IntentSyntaxError(
            f"expected {wanted}, found {tok.describe()}",
            tok.line,
            tok.column,
            expected=expected,
        )

    def expect_kw(self, word):
        tok = self.peek()
        if tok.kind == "kw" and tok.text == word:
            return self.advance()
        self.fail({f"keyword {word!r}"})

    def expect_sym(self, sym):
        tok = self.peek()
        if tok.kind == "sym" and tok.text == sym:
            return self.advance()
        self.fail({f"{sym!r}"})

    def expect_ident(self, what="identifier"):
        tok = self.peek()
        if tok.kind == "ident":
            return self.advance()
        self.fail({what})

    def at_kw(self, word):
        tok = self.peek()
        return tok.kind == "kw" and tok.text == word

    def at_sym(self, sym):
        tok = self.peek()
        return tok.kind == "sym" and tok.text == sym

    # -- grammar ----------------------------------------------------------

    def parse_spec(self):
        self.expect_kw("intent")
        name = self.expect_ident("intent name").text
        if self.at_kw("min"):
            self.advance()
            opt = OptimizationType.MIN
        elif self.at_kw("max"):
            self.advance()
            opt = OptimizationType.MAX
        else:
            self.fail({"keyword 'min'", "keyword 'max'"})
        self.expect_sym("(")
        objective = self.parse_expr(MeasureRef)
        self.expect_sym(")")

        constraint_measure = constraint_goal = None
        if self.at_kw("such"):
            self.advance()
            self.expect_kw("that")
            constraint_measure = self.expect_ident("constraint measure").text
            self.expect_sym("==")
            constraint_goal = self.parse_signed_number()

        self.expect_kw("measures")
        measures = []
        while self.peek().kind == "ident":
            mname = self.advance().text
            self.expect_sym(":")
            tname = self.expect_ident("type name").text
            measures.append((mname, tname))
        if not measures:
            self.fail({"measure declaration"})

        self.expect_kw("knobs")
        knobs = []
        while self.peek().kind == "ident":
            kname = self.advance().text
            self.expect_sym("=")
            rng = self.parse_range()
            reference = None
            if self.at_kw("reference"):
                self.advance()
                reference = self.parse_signed_number()
            knobs.append(KnobDecl(kname, rng, reference))
        if not knobs:
            self.fail({"knob declaration"})

        knob_constraint = None
        if self.at_kw("such"):
            self.advance()
            self.expect_kw("that")
            knob_constraint = self.parse_expr(KnobRef)

        if self.peek().kind != "eof":
            self.fail({"end of input"})

        return IntentSpec(
            name=name,
            optimization_type=opt,
            objective=objective,
            constraint_measure=constraint_measure,
            constraint_goal=constraint_goal,
            measures=tuple(measures),
            knobs=tuple(knobs),
            knob_constraint=knob_constraint,
        )

    def parse_range(self):
        self.expect_sym("[")
        values = [self.parse_signed_number()]
        while self.at_sym(","):
            self.advance()
            values.append(self.parse_signed_number())
        self.expect_sym("]")
        return tuple(values)

    def parse_signed_number(self):
        negative = False
        if self.at_sym("-"):
            self.advance()
            negative = True
        tok = self.peek()
        if tok.kind != "number":
            self.fail({"number"})
        self.advance()
        return -tok.value if negative else tok.value

    # Expressions. `ref` is MeasureRef in objectives and KnobRef in knob
    # constraints; whether the name is declared is checked by validation.

    def parse_expr(self, ref):
        return self.parse_or(ref)

    def parse_or(self, ref):
        node = self.parse_and(ref)
        while self.at_kw("or"):
            self.advance()
            node = Apply("or", (node, self.parse_and(ref)))
        return node

    def parse_and(self, ref):
        node = self.parse_not(ref)
        while self.at_kw("and"):
            self.advance()
            node = Apply("and", (node, self.parse_not(ref)))
        return node

    def parse_not(self, ref):
        if self.at_kw("not"):
            self.advance()
            return Apply("not", (self.parse_not(ref),))
        return self.parse_comparison(ref)

    def parse_comparison(self, ref):
        node = self.parse_additive(ref)
        tok = self.peek()
        if tok.kind == "sym" and tok.text in ("<", "<=", ">", ">=", "==", "!="):
            self.advance()
            node = Apply(tok.text, (node, self.parse_additive(ref)))
        return node

    def parse_additive(self, ref):
        node = self.parse_multiplicative(ref)
        while self.peek().kind == "sym" and self.peek().text in ("+", "-"):
            op = self.advance().text
            node = Apply(op, (node, self.parse_multiplicative(ref)))
        return node

    def parse_multiplicative(self, ref):
        node = self.parse_unary(ref)
        while self.peek().kind == "sym" and self.peek().text in ("*", "/"):
            op = self.advance().text
            node = Apply(op, (node, self.parse_unary(ref)))
        return node

    def parse_unary(self, ref):
        if self.at_sym("-"):
            self.advance()
            inner = self.parse_unary(ref)
            if isinstance(inner, Constant):
                return Constant(-inner.value)
            return Apply("neg", (inner,))
        return self.parse_atom(ref)

    def parse_atom(self, ref):
        tok = self.peek()
        if tok.kind == "number":
            self.advance()
            return Constant(tok.value)
        if tok.kind == "ident":
            self.advance()
            return ref(tok.text)
        if tok.kind == "sym" and tok.text == "(":
            self.advance()
            node = self.parse_expr(ref)
            self.expect_sym(")")
            return node
        self.fail({"number", "identifier", "'('"})


def parse_intent(source: str) -> IntentSpec:
    """Parse and validate an intent specification from text."""
    spec = _Parser(source).parse_spec()
    return validate_spec(spec)


def parse_expression(source: str, ref=MeasureRef):
    """Parse a bare expression (used for objective perturbations)."""
    parser = _Parser(source)
    node = parser.parse_expr(ref)
    if parser.peek().kind != "eof":
        parser.fail({"end of input"})
    return node
