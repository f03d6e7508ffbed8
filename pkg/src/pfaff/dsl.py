"""System-definition DSL: tokenizer, expression parser, file parser.

Grammar (UTF-8 text, # comments):

    file    := decl+
    decl    := "vars" ident+
             | "func" ident "(" ident ("," ident)* ")"
             | "scalar" ident
             | "form" ident "=" form
             | "field" ident "=" "[" expr ("," expr)* "]" ("rho" expr)?
    form    := term (("+"|"-") term)*
    term    := expr "*" basis | basis | expr
    basis   := "d" ident ("^" "d" ident)*        # wedge written as ^
    expr    := precedence grammar over + - * / ^(integer), parentheses,
               integer/rational literals, idents, i, exp|sin|cos|ln,
               declared funcs

Every parse failure carries a line/column position; identifiers must be
declared before use.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import sympy as sp

from .errors import ParseError, UnknownIdentifierError
from .exterior import DifferentialForm, Variety
from .symbolic import KNOWN_FUNCTIONS, Expr

KEYWORDS = {"vars", "func", "scalar", "form", "field", "rho"}
RESERVED = KEYWORDS | {"i", "exp", "sin", "cos", "ln"}

_OPERATORS = set("+-*/^()[],=")


@dataclass(frozen=True)
class Token:
    kind: str  # "number" | "ident" | "keyword" | "op" | "eof"
    text: str
    line: int
    column: int


def tokenize(source: str) -> List[Token]:
    tokens: List[Token] = []
    line, column = 1, 1
    i = 0
    while i < len(source):
        ch = source[i]
        if ch == "\n":
            line += 1
            column = 1
            i += 1
            continue
        if ch in " \t\r":
            column += 1
            i += 1
            continue
        if ch == "#":
            while i < len(source) and source[i] != "\n":
                i += 1
            continue
        start_col = column
        if ch.isdigit():
            j = i
            while j < len(source) and source[j].isdigit():
                j += 1
            if j < len(source) and source[j] == ".":
                raise ParseError("decimal literals are not part of the grammar; "
                                 "write an exact ratio like 1/2", line, start_col)
            tokens.append(Token("number", source[i:j], line, start_col))
            column += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < len(source) and (source[j].isalnum() or source[j] == "_"):
                j += 1
            text = source[i:j]
            kind = "keyword" if text in KEYWORDS else "ident"
            tokens.append(Token(kind, text, line, start_col))
            column += j - i
            i = j
            continue
        if ch in _OPERATORS:
            tokens.append(Token("op", ch, line, start_col))
            column += 1
            i += 1
            continue
        raise ParseError(f"unexpected character {ch!r}", line, start_col)
    tokens.append(Token("eof", "", line, column))
    return tokens


@dataclass
class Declarations:
    """Names visible to the expression parser."""

    variables: Tuple[str, ...] = ()
    scalars: Tuple[str, ...] = ()
    functions: Dict[str, Tuple[str, ...]] = field(default_factory=dict)

    def basis_variable(self, text: str) -> Optional[str]:
        """The variable v when text is the covector name 'd'+v."""
        if len(text) > 1 and text.startswith("d") and text[1:] in self.variables:
            return text[1:]
        return None


class _Parser:
    def __init__(self, tokens: List[Token], decls: Declarations):
        self.tokens = tokens
        self.decls = decls
        self.pos = 0

    # -- token helpers ------------------------------------------------------

    def peek(self, offset: int = 0) -> Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def expect(self, kind: str, text: Optional[str] = None,
               expected: Optional[str] = None) -> Token:
        tok = self.peek()
        if tok.kind != kind or (text is not None and tok.text != text):
            what = expected or text or kind
            raise ParseError(f"found {tok.text!r}" if tok.text else "unexpected end "
                             "of input", tok.line, tok.column, expected=what)
        return self.advance()

    def at_op(self, text: str) -> bool:
        tok = self.peek()
        return tok.kind == "op" and tok.text == text

    def at_basis(self, offset: int = 0) -> bool:
        tok = self.peek(offset)
        return (tok.kind == "ident"
                and self.decls.basis_variable(tok.text) is not None)

    # -- expressions --------------------------------------------------------

    def parse_expression(self, stop_at_basis: bool = False) -> Expr:
        return self._parse_sum(stop_at_basis)

    def _parse_sum(self, stop: bool) -> Expr:
        # inside a form, top-level +/- separates terms, so a term's
        # coefficient expression never crosses them (parenthesize to group)
        value = self._parse_product(stop)
        while not stop and self.peek().kind == "op" and self.peek().text in "+-":
            op = self.advance().text
            rhs = self._parse_product(stop)
            value = value + rhs if op == "+" else value - rhs
        return value

    def _parse_product(self, stop: bool) -> Expr:
        value = self._parse_unary(stop)
        while self.peek().kind == "op" and self.peek().text in "*/":
            if stop and self.peek().text == "*" and self.at_basis(1):
                break  # the '*' belongs to `expr * basis`
            op = self.advance().text
            rhs = self._parse_unary(stop)
            value = value * rhs if op == "*" else value / rhs
        return value

    def _parse_unary(self, stop: bool) -> Expr:
        if self.peek().kind == "op" and self.peek().text in "+-":
            op = self.advance().text
            value = self._parse_unary(stop)
            return value if op == "+" else -value
        return self._parse_power(stop)

    def _parse_power(self, stop: bool) -> Expr:
        base = self._parse_atom(stop)
        if self.at_op("^"):
            self.advance()
            tok = self.peek()
            exponent = self._parse_unary(stop)
            if not getattr(exponent, "is_Integer", False):
                raise ParseError("exponent must be an integer literal",
                                 tok.line, tok.column, expected="integer")
            return base ** exponent
        return base

    def _parse_atom(self, stop: bool) -> Expr:
        tok = self.peek()
        if tok.kind == "number":
            self.advance()
            return sp.Integer(int(tok.text))
        if tok.kind == "op" and tok.text == "(":
            self.advance()
            inner = self.parse_expression(stop_at_basis=False)
            self.expect("op", ")")
            return inner
        if tok.kind == "ident":
            return self._parse_identifier(stop)
        raise ParseError(f"found {tok.text!r}" if tok.text else
                         "unexpected end of input", tok.line, tok.column,
                         expected="an expression")

    def _parse_identifier(self, stop: bool) -> Expr:
        tok = self.advance()
        name = tok.text
        if name == "i":
            return sp.I
        if name in KNOWN_FUNCTIONS:
            args = self._parse_call_args(tok)
            if len(args) != 1:
                raise ParseError(f"{name} takes one argument", tok.line,
                                 tok.column)
            return KNOWN_FUNCTIONS[name](*args)
        if name in self.decls.functions:
            params = self.decls.functions[name]
            args = self._parse_call_args(tok)
            if len(args) != len(params):
                raise ParseError(
                    f"{name} takes {len(params)} argument(s), got {len(args)}",
                    tok.line, tok.column)
            return sp.Function(name)(*args)
        if name in self.decls.variables or name in self.decls.scalars:
            if self.at_op("("):
                raise ParseError(f"'{name}' is not a function", tok.line,
                                 tok.column)
            return sp.Symbol(name)
        raise UnknownIdentifierError(name, tok.line, tok.column)

    def _parse_call_args(self, name_tok: Token) -> List[Expr]:
        self.expect("op", "(", expected=f"'(' after function {name_tok.text}")
        args = [self.parse_expression()]
        while self.at_op(","):
            self.advance()
            args.append(self.parse_expression())
        self.expect("op", ")")
        return args

    # -- forms ---------------------------------------------------------------

    def parse_basis(self) -> Tuple[str, ...]:
        names = []
        tok = self.expect("ident", expected="a basis covector like dx")
        var = self.decls.basis_variable(tok.text)
        if var is None:
            raise ParseError(f"{tok.text!r} is not d<declared variable>",
                             tok.line, tok.column, expected="basis covector")
        names.append(var)
        while self.at_op("^"):
            self.advance()
            tok = self.expect("ident", expected="a basis covector after ^")
            var = self.decls.basis_variable(tok.text)
            if var is None:
                raise ParseError(f"{tok.text!r} is not d<declared variable>",
                                 tok.line, tok.column, expected="basis covector")
            names.append(var)
        return tuple(names)

    def parse_form(self, variety: Variety) -> DifferentialForm:
        terms: List[Tuple[Tuple[int, ...], Expr]] = []
        degree: Optional[int] = None
        sign = sp.Integer(1)
        while True:
            tok = self.peek()
            coeff, basis = self._parse_term()
            term_degree = len(basis)
            if degree is None:
                degree = term_degree
            elif degree != term_degree:
                raise ParseError(
                    f"term of degree {term_degree} in a degree-{degree} form",
                    tok.line, tok.column)
            indices = tuple(variety.index(nm) for nm in basis)
            terms.append((indices, sign * coeff))
            if self.peek().kind == "op" and self.peek().text in "+-":
                sign = sp.Integer(1) if self.advance().text == "+" else sp.Integer(-1)
                continue
            break
        return DifferentialForm.from_terms(variety, degree or 0, terms)

    def _parse_term(self) -> Tuple[Expr, Tuple[str, ...]]:
        if self.at_basis():
            return sp.Integer(1), self.parse_basis()
        coeff = self.parse_expression(stop_at_basis=True)
        if self.at_op("*") and self.at_basis(1):
            self.advance()
            return coeff, self.parse_basis()
        return coeff, ()


def parse_expr(text: str, vars: Sequence[str], funcs=None, scalars=None) -> Expr:
    """Parse a standalone expression over the declared names."""
    decls = Declarations(
        variables=tuple(vars),
        scalars=tuple(scalars or ()),
        functions={name: tuple(params) for name, params in (funcs or {}).items()},
    )
    parser = _Parser(tokenize(text), decls)
    value = parser.parse_expression()
    tok = parser.peek()
    if tok.kind != "eof":
        raise ParseError(f"trailing input {tok.text!r}", tok.line, tok.column,
                         expected="end of expression")
    return value


# ---------------------------------------------------------------------------
# system files


@dataclass
class RawField:
    """A declared direction field; component count is validated at use time."""

    name: str
    components: Tuple[Expr, ...]
    rho: Expr


@dataclass
class SystemFile:
    """Parsed system definition: variety, named forms, fields, scalars."""

    variety: Variety
    forms: Dict[str, DifferentialForm]
    fields: Dict[str, RawField]
    scalars: Tuple[str, ...]
    functions: Dict[str, Tuple[str, ...]]
    source: str

    def form(self, name: Optional[str] = None) -> DifferentialForm:
        if name is None:
            if not self.forms:
                raise ParseError("no form declared", 1, 1)
            name = next(iter(self.forms))
        if name not in self.forms:
            raise ParseError(f"no form named {name!r}", 1, 1)
        return self.forms[name]


class _FileParser(_Parser):
    def __init__(self, tokens: List[Token]):
        super().__init__(tokens, Declarations())
        self.variety: Optional[Variety] = None
        self.forms: Dict[str, DifferentialForm] = {}
        self.fields: Dict[str, RawField] = {}
        self.order: List[str] = []
        self.names_seen: Dict[str, Token] = {}

    def _declare(self, tok: Token):
        name = tok.text
        if name in RESERVED:
            raise ParseError(f"{name!r} is reserved", tok.line, tok.column)
        if name in self.names_seen:
            raise ParseError(f"{name!r} was already declared", tok.line,
                             tok.column)
        if self.decls.basis_variable(name) is not None:
            raise ParseError(f"{name!r} collides with the covector of "
                             f"variable {name[1:]!r}", tok.line, tok.column)
        self.names_seen[name] = tok

    def _need_variety(self, tok: Token) -> Variety:
        if self.variety is None:
            raise ParseError("declare base variables first: vars x y ...",
                             tok.line, tok.column)
        return self.variety

    def parse_file(self, source: str) -> SystemFile:
        if self.peek().kind == "eof":
            tok = self.peek()
            raise ParseError("empty system file", tok.line, tok.column,
                             expected="a declaration")
        while self.peek().kind != "eof":
            tok = self.peek()
            if tok.kind != "keyword":
                raise ParseError(
                    f"found {tok.text!r}", tok.line, tok.column,
                    expected="one of vars/func/scalar/form/field")
            handler = {
                "vars": self._parse_vars,
                "func": self._parse_func,
                "scalar": self._parse_scalar,
                "form": self._parse_form_decl,
                "field": self._parse_field_decl,
            }.get(tok.text)
            if handler is None:
                raise ParseError(f"{tok.text!r} cannot start a declaration",
                                 tok.line, tok.column,
                                 expected="vars/func/scalar/form/field")
            handler()
        if self.variety is None:
            tok = self.peek()
            raise ParseError("no vars declaration", tok.line, tok.column)
        return SystemFile(
            variety=self.variety,
            forms=self.forms,
            fields=self.fields,
            scalars=self.decls.scalars,
            functions=dict(self.decls.functions),
            source=source,
        )

    def _parse_vars(self):
        tok = self.advance()
        if self.variety is not None:
            raise ParseError("vars was already declared", tok.line, tok.column)
        names = []
        while self.peek().kind == "ident":
            name_tok = self.advance()
            self._declare(name_tok)
            names.append(name_tok.text)
        if not names:
            raise ParseError("vars needs at least one variable name",
                             tok.line, tok.column, expected="identifier")
        for name in names:
            if len(name) > 1 and name.startswith("d") and name[1:] in names:
                raise ParseError(
                    f"variable {name!r} collides with the covector d{name[1:]}",
                    tok.line, tok.column)
        self.variety = Variety(tuple(names))
        self.decls.variables = tuple(names)

    def _parse_func(self):
        self.advance()
        name_tok = self.expect("ident", expected="function name")
        self._declare(name_tok)
        self.expect("op", "(")
        params = [self.expect("ident", expected="parameter name").text]
        while self.at_op(","):
            self.advance()
            params.append(self.expect("ident", expected="parameter name").text)
        self.expect("op", ")")
        for p in params:
            if p not in self.decls.variables:
                raise ParseError(f"parameter {p!r} is not a declared variable",
                                 name_tok.line, name_tok.column)
        self.decls.functions[name_tok.text] = tuple(params)

    def _parse_scalar(self):
        self.advance()
        name_tok = self.expect("ident", expected="scalar name")
        self._declare(name_tok)
        self.decls.scalars = self.decls.scalars + (name_tok.text,)

    def _parse_form_decl(self):
        tok = self.advance()
        variety = self._need_variety(tok)
        name_tok = self.expect("ident", expected="form name")
        self._declare(name_tok)
        self.expect("op", "=")
        self.forms[name_tok.text] = self.parse_form(variety)

    def _parse_field_decl(self):
        tok = self.advance()
        variety = self._need_variety(tok)
        name_tok = self.expect("ident", expected="field name")
        self._declare(name_tok)
        self.expect("op", "=")
        self.expect("op", "[")
        comps = [self.parse_expression()]
        while self.at_op(","):
            self.advance()
            comps.append(self.parse_expression())
        self.expect("op", "]")
        rho: Expr = sp.Integer(1)
        if self.peek().kind == "keyword" and self.peek().text == "rho":
            self.advance()
            rho = self.parse_expression()
        self.fields[name_tok.text] = RawField(name_tok.text, tuple(comps), rho)


def parse_system(source: str) -> SystemFile:
    """Parse a complete system-definition file."""
    return _FileParser(tokenize(source)).parse_file(source)
