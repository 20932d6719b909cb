"""Tokenizer and recursive-descent parser for the query language."""

from __future__ import annotations

import re
from dataclasses import dataclass

from .ast import (
    ColumnRef,
    Comparison,
    ConePredicate,
    QueryAst,
    QueryError,
    SourceRef,
)

KEYWORDS = {
    "SELECT", "FROM", "XMATCH", "WITHIN", "ARCSEC", "WHERE", "AND",
    "CONE", "LIMIT", "INTO",
}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>[+-]?(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<string>'(?:[^']|'')*')
  | (?P<op><=|>=|<>|=|<|>)
  | (?P<punct>[().,*])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # keyword | ident | number | string | op | punct | eof
    text: str
    line: int
    col: int


class QuerySyntaxError(QueryError):
    def __init__(self, message: str, line: int, col: int, expected: str = ""):
        self.line = line
        self.col = col
        self.expected = expected
        detail = f"line {line}, column {col}: {message}"
        if expected:
            detail += f" (expected {expected})"
        super().__init__(detail)


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    line, col, pos = 1, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise QuerySyntaxError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        chunk = m.group()
        if kind != "ws":
            if kind == "ident" and chunk.upper() in KEYWORDS:
                tokens.append(Token("keyword", chunk.upper(), line, col))
            elif kind == "string":
                tokens.append(Token("string", chunk[1:-1].replace("''", "'"), line, col))
            else:
                tokens.append(Token(kind, chunk, line, col))
        newlines = chunk.count("\n")
        if newlines:
            line += newlines
            col = len(chunk) - chunk.rfind("\n")
        else:
            col += len(chunk)
        pos = m.end()
    tokens.append(Token("eof", "", line, col))
    return tokens


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.i = 0

    @property
    def cur(self) -> Token:
        return self.tokens[self.i]

    def advance(self) -> Token:
        t = self.cur
        self.i += 1
        return t

    def error(self, expected: str):
        t = self.cur
        what = "end of input" if t.kind == "eof" else repr(t.text)
        raise QuerySyntaxError(f"unexpected {what}", t.line, t.col, expected)

    def expect_keyword(self, kw: str) -> Token:
        if self.cur.kind == "keyword" and self.cur.text == kw:
            return self.advance()
        self.error(kw)

    def accept_keyword(self, kw: str) -> bool:
        if self.cur.kind == "keyword" and self.cur.text == kw:
            self.advance()
            return True
        return False

    def expect_punct(self, ch: str) -> Token:
        if self.cur.kind == "punct" and self.cur.text == ch:
            return self.advance()
        self.error(repr(ch))

    def ident(self, what: str) -> str:
        if self.cur.kind == "ident":
            return self.advance().text
        self.error(what)

    def number(self, what: str) -> float:
        if self.cur.kind == "number":
            return float(self.advance().text)
        self.error(what)

    # grammar ----------------------------------------------------------------

    def query(self) -> QueryAst:
        self.expect_keyword("SELECT")
        select = self.select_list()
        self.expect_keyword("FROM")
        source = self.source_ref()
        xmatch: tuple[SourceRef, ...] = ()
        tolerance = None
        if self.accept_keyword("XMATCH"):
            refs = [self.source_ref()]
            while self.cur.kind == "punct" and self.cur.text == ",":
                self.advance()
                refs.append(self.source_ref())
            self.expect_keyword("WITHIN")
            tol_tok = self.cur
            tolerance = self.number("tolerance in arcseconds")
            self.expect_keyword("ARCSEC")
            if tolerance <= 0:
                raise QuerySyntaxError(
                    "XMATCH tolerance must be positive", tol_tok.line, tol_tok.col
                )
            xmatch = tuple(refs)
        where: tuple = ()
        if self.accept_keyword("WHERE"):
            preds = [self.predicate()]
            while self.accept_keyword("AND"):
                preds.append(self.predicate())
            where = tuple(preds)
        limit = None
        if self.accept_keyword("LIMIT"):
            tok = self.cur
            value = self.number("row limit")
            if value != int(value) or int(value) < 1:
                raise QuerySyntaxError(
                    f"LIMIT must be a positive integer, got {tok.text}",
                    tok.line,
                    tok.col,
                )
            limit = int(value)
        into = None
        if self.accept_keyword("INTO"):
            into = self.ident("workspace table name")
        if self.cur.kind != "eof":
            self.error("end of query")
        return QueryAst(
            select=select,
            source=source,
            xmatch=xmatch,
            tolerance_arcsec=tolerance,
            where=where,
            limit=limit,
            into=into,
        )

    def select_list(self):
        if self.cur.kind == "punct" and self.cur.text == "*":
            self.advance()
            return None
        cols = [self.column_ref()]
        while self.cur.kind == "punct" and self.cur.text == ",":
            self.advance()
            cols.append(self.column_ref())
        return tuple(cols)

    def column_ref(self) -> ColumnRef:
        first = self.ident("column name")
        if self.cur.kind == "punct" and self.cur.text == ".":
            self.advance()
            return ColumnRef(self.ident("column name"), qualifier=first)
        return ColumnRef(first)

    def source_ref(self) -> SourceRef:
        archive = self.ident("archive name")
        self.expect_punct(".")
        return SourceRef(archive, self.ident("table name"))

    def predicate(self):
        if self.cur.kind == "keyword" and self.cur.text == "CONE":
            self.advance()
            self.expect_punct("(")
            ra = self.number("cone ra")
            self.expect_punct(",")
            dec = self.number("cone dec")
            self.expect_punct(",")
            radius = self.number("cone radius")
            rpar = self.cur
            self.expect_punct(")")
            if not -90.0 <= dec <= 90.0 or not 0.0 <= radius <= 180.0:
                raise QuerySyntaxError(
                    "CONE arguments out of range", rpar.line, rpar.col
                )
            return ConePredicate(ra, dec, radius)
        col = self.column_ref()
        if self.cur.kind != "op":
            self.error("comparison operator")
        op = self.advance().text
        t = self.cur
        if t.kind == "number":
            raw = self.advance().text
            value = int(raw) if re.fullmatch(r"[+-]?\d+", raw) else float(raw)
        elif t.kind == "string":
            value = self.advance().text
        else:
            self.error("literal value")
        return Comparison(col, op, value)


def parse(text: str) -> QueryAst:
    """Parse query text; raises QuerySyntaxError with line/column on errors."""
    return _Parser(tokenize(text)).query()
