"""
MiniDyn: a tiny PHP-like language with nested associative arrays,
dynamic index expressions and explicit aliasing (``$a = &$b``).

Grammar::

    program := stmt*
    stmt    := access "=" expr ";" | access "=" "&" access ";" | if | while
    if      := "if" "(" expr ")" block ("else" block)?
    while   := "while" "(" expr ")" block
    block   := "{" stmt* "}"
    expr    := INT | SQ_STRING | "input" "(" ")" | access
    access  := "$" (IDENT | "{" expr "}" | access) ("[" expr "]")*

``$_GET[<string>]`` is accepted as sugar for ``input()``.
"""

import re
from dataclasses import dataclass, field

from .core import BULLET, STAR, Atom, Seq


class ParseError(Exception):
    def __init__(self, message, line, column):
        super().__init__("%d:%d: %s" % (line, column, message))
        self.message = message
        self.line = line
        self.column = column


@dataclass(frozen=True)
class SourceSpan:
    line: int
    column: int
    length: int = 0


# ---------------------------------------------------------------- AST nodes


@dataclass(frozen=True)
class Lit:
    value: object


@dataclass(frozen=True)
class Input:
    pass


@dataclass(frozen=True)
class QueryAtom:
    """``*`` or ``@unknown`` inside a query path; never produced for programs."""

    value: object


@dataclass(frozen=True)
class Access:
    base: object  # identifier str, or a nested expression for ``${e}``
    indices: tuple = ()

    @property
    def depth(self):
        return 1 + len(self.indices)


@dataclass(frozen=True)
class Assign:
    lhs: Access
    rhs: object
    span: SourceSpan = field(default=None, compare=False)


@dataclass(frozen=True)
class AliasAssign:
    lhs: Access
    rhs: Access
    span: SourceSpan = field(default=None, compare=False)


@dataclass(frozen=True)
class If:
    cond: object
    then: tuple
    orelse: tuple = ()
    span: SourceSpan = field(default=None, compare=False)
    end_line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class While:
    cond: object
    body: tuple
    span: SourceSpan = field(default=None, compare=False)
    end_line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Program:
    body: tuple = ()


# ---------------------------------------------------------------- tokenizer

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>//[^\n]*)
  | (?P<int>-?\d+)
  | (?P<str>'(?:[^'\\\n]|\\.)*')
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<bullet>•|@unknown)
  | (?P<punct>[$=&;(){}\[\]*])
    """,
    re.VERBOSE,
)


@dataclass
class Token:
    kind: str
    text: str
    line: int
    column: int


def tokenize(source):
    tokens = []
    line, line_start, pos = 1, 0, 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise ParseError("unexpected character %r" % source[pos], line, pos - line_start + 1)
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind not in ("ws", "comment"):
            text = m.group()
            tokens.append(Token(text if kind == "punct" else kind, text, line, pos - line_start + 1))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


def _unquote(text):
    return re.sub(r"\\(.)", r"\1", text[1:-1])


# ---------------------------------------------------------------- parser


class Parser:
    def __init__(self, source, query=False):
        self.tokens = tokenize(source)
        self.pos = 0
        self.query = query

    @property
    def tok(self):
        return self.tokens[self.pos]

    def error(self, message, tok=None):
        tok = tok or self.tok
        return ParseError(message, tok.line, tok.column)

    def eat(self, kind):
        tok = self.tok
        if tok.kind != kind:
            found = tok.text or "end of input"
            raise self.error("expected %r, found %r" % (kind, found))
        self.pos += 1
        return tok

    def at_keyword(self, word):
        return self.tok.kind == "ident" and self.tok.text == word

    def program(self):
        body = []
        while self.tok.kind != "eof":
            body.append(self.statement())
        return Program(tuple(body))

    def block(self):
        self.eat("{")
        body = []
        while self.tok.kind != "}":
            if self.tok.kind == "eof":
                raise self.error("unterminated block")
            body.append(self.statement())
        end = self.eat("}")
        return tuple(body), end.line

    def statement(self):
        start = self.tok
        if self.at_keyword("if"):
            self.pos += 1
            self.eat("(")
            cond = self.expr()
            self.eat(")")
            then, end_line = self.block()
            orelse = ()
            if self.at_keyword("else"):
                self.pos += 1
                orelse, end_line = self.block()
            return If(cond, then, orelse, SourceSpan(start.line, start.column, 2), end_line)
        if self.at_keyword("while"):
            self.pos += 1
            self.eat("(")
            cond = self.expr()
            self.eat(")")
            body, end_line = self.block()
            return While(cond, body, SourceSpan(start.line, start.column, 5), end_line)
        if self.tok.kind != "$":
            raise self.error("expected a statement, found %r" % (self.tok.text or "end of input"))
        lhs = self.access()
        if isinstance(lhs, Input):
            raise self.error("cannot assign to input", start)
        self.eat("=")
        if self.tok.kind == "&":
            self.pos += 1
            if self.tok.kind != "$":
                raise self.error("alias right-hand side must be a variable access")
            rhs = self.access()
            if isinstance(rhs, Input):
                raise self.error("alias right-hand side must be a variable access", start)
            end = self.eat(";")
            return AliasAssign(lhs, rhs, _span(start, end))
        rhs = self.expr()
        end = self.eat(";")
        return Assign(lhs, rhs, _span(start, end))

    def expr(self):
        tok = self.tok
        if tok.kind == "int":
            self.pos += 1
            return Lit(int(tok.text))
        if tok.kind == "str":
            self.pos += 1
            return Lit(_unquote(tok.text))
        if tok.kind == "$":
            return self.access()
        if self.at_keyword("input"):
            self.pos += 1
            self.eat("(")
            self.eat(")")
            return Input()
        if self.query and tok.kind == "*":
            self.pos += 1
            return QueryAtom(STAR)
        if self.query and tok.kind == "bullet":
            self.pos += 1
            return QueryAtom(BULLET)
        raise self.error("expected an expression, found %r" % (tok.text or "end of input"))

    def name(self):
        self.eat("$")
        tok = self.tok
        if tok.kind == "ident":
            self.pos += 1
            return tok.text
        if tok.kind == "{":
            self.pos += 1
            base = self.expr()
            self.eat("}")
            return base
        if tok.kind == "$":
            return Access(self.name())
        if self.query and tok.kind in ("*", "bullet"):
            return self.expr()
        raise self.error("expected a variable name after '$'")

    def access(self):
        base = self.name()
        indices = []
        while self.tok.kind == "[":
            self.pos += 1
            indices.append(self.expr())
            self.eat("]")
        if base == "_GET" and len(indices) == 1 and isinstance(indices[0], Lit):
            return Input()
        return Access(base, tuple(indices))


def _span(start, end):
    length = end.column - start.column + 1 if end.line == start.line else 0
    return SourceSpan(start.line, start.column, length)


def parse(source):
    """Parse MiniDyn source text into a `Program`; raises `ParseError`."""
    return Parser(source).program()


def parse_query_path(text):
    """Parse a query path such as ``$arr[*][@unknown][2]``."""
    p = Parser(text, query=True)
    if p.tok.kind != "$":
        raise p.error("query path must start with '$'")
    acc = p.access()
    if p.tok.kind != "eof":
        raise p.error("trailing input after query path")
    if isinstance(acc, Input):
        raise p.error("query path must be a variable access")
    return acc


# ---------------------------------------------------------------- printing

_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z_0-9]*\Z")


def format_expr(e):
    if isinstance(e, Lit):
        if isinstance(e.value, str):
            return "'%s'" % e.value.replace("\\", "\\\\").replace("'", "\\'")
        return str(e.value)
    if isinstance(e, Input):
        return "input()"
    if isinstance(e, QueryAtom):
        return "*" if e.value is STAR else "@unknown"
    if isinstance(e, Access):
        if isinstance(e.base, str):
            head = "$" + e.base
        else:
            head = "${%s}" % format_expr(e.base)
        return head + "".join("[%s]" % format_expr(i) for i in e.indices)
    raise TypeError(e)


def format_program(program, indent="    "):
    lines = []

    def emit(stmts, level):
        pad = indent * level
        for s in stmts:
            if isinstance(s, Assign):
                lines.append("%s%s = %s;" % (pad, format_expr(s.lhs), format_expr(s.rhs)))
            elif isinstance(s, AliasAssign):
                lines.append("%s%s = &%s;" % (pad, format_expr(s.lhs), format_expr(s.rhs)))
            elif isinstance(s, If):
                lines.append("%sif (%s) {" % (pad, format_expr(s.cond)))
                emit(s.then, level + 1)
                if s.orelse:
                    lines.append("%s} else {" % pad)
                    emit(s.orelse, level + 1)
                lines.append("%s}" % pad)
            elif isinstance(s, While):
                lines.append("%swhile (%s) {" % (pad, format_expr(s.cond)))
                emit(s.body, level + 1)
                lines.append("%s}" % pad)

    emit(program.body, 0)
    return "\n".join(lines) + ("\n" if lines else "")


# ---------------------------------------------------------------- lowering


def lower_expr(e):
    if isinstance(e, Lit):
        return Atom(e.value)
    if isinstance(e, Input):
        return Atom(STAR)
    if isinstance(e, QueryAtom):
        return Atom(e.value)
    if isinstance(e, Access):
        return lower_access(e)
    raise TypeError(e)


def lower_access(e):
    """Lower an access expression to an access path rooted at the symbol table.

    ``$a[$b]`` becomes ``[][a][[][b]]``: the base name is the first element and
    every index expression contributes one further element.
    """
    head = Atom(e.base) if isinstance(e.base, str) else lower_expr(e.base)
    return Seq((head,) + tuple(lower_expr(i) for i in e.indices))


def iter_statements(stmts):
    for s in stmts:
        yield s
        if isinstance(s, If):
            yield from iter_statements(s.then)
            yield from iter_statements(s.orelse)
        elif isinstance(s, While):
            yield from iter_statements(s.body)
