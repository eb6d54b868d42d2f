"""Tokenizer, parser and printer for the line-oriented scene language.

    space NAME = KIND(args)
    iso NAME = CONSTRUCTOR(args)
    group NAME = <iso, ...> [factors = [[names]; [names]]] [horizon = N]
    task TASKNAME(args)
    meta NAME = value
    # comment

Statements begin with a keyword, so several may share a line.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction

from ..errors import SceneSyntaxError

KEYWORDS = ("space", "iso", "group", "task", "meta")

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>\#[^\n]*)
  | (?P<num>-?\d+(?:/\d+)?)
  | (?P<str>"[^"\n]*")
  | (?P<badstr>"[^"\n]*)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<punct>[()\[\]<>,=;])
""", re.VERBOSE)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    out = []
    line, start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        col = pos - start + 1
        if m is None:
            raise SceneSyntaxError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        if kind == "badstr":
            raise SceneSyntaxError("unterminated string", line, col)
        if kind == "nl":
            line, start = line + 1, m.end()
        elif kind not in ("ws", "comment"):
            out.append(Token(kind, m.group(), line, col))
        pos = m.end()
    out.append(Token("eof", "", line, pos - start + 1))
    return out


# --------------------------------------------------------------------------
# syntax tree; positions are excluded from equality


@dataclass(frozen=True)
class Num:
    value: int | Fraction
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Str:
    value: str
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Ref:
    name: str
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass(frozen=True)
class ListV:
    items: tuple
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Call:
    fn: str
    args: tuple = ()
    kwargs: tuple = ()  # (key, value) pairs in source order
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)

    def kw(self) -> dict:
        return dict(self.kwargs)


@dataclass(frozen=True)
class Decl:
    kind: str  # space | iso
    name: str
    call: Call
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass(frozen=True)
class GroupDecl:
    name: str
    gens: tuple  # Ref
    factors: tuple | None = None  # tuple of tuples of Ref
    options: tuple = ()  # (key, value)
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)

    kind = "group"


@dataclass(frozen=True)
class Task:
    call: Call
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)

    @property
    def name(self) -> str:
        return self.call.fn


@dataclass(frozen=True)
class Meta:
    name: str
    value: object
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass
class Scene:
    statements: list
    text: str = field(default="", compare=False)

    @property
    def declarations(self) -> list:
        return [s for s in self.statements if isinstance(s, (Decl, GroupDecl))]

    @property
    def tasks(self) -> list:
        return [s for s in self.statements if isinstance(s, Task)]

    @property
    def meta(self) -> dict:
        return {s.name: s.value for s in self.statements if isinstance(s, Meta)}


# --------------------------------------------------------------------------
# parser


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.toks = tokens
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def next(self) -> Token:
        t = self.toks[self.i]
        self.i += 1
        return t

    def error(self, msg: str, t: Token | None = None):
        t = t or self.tok
        found = "end of input" if t.kind == "eof" else repr(t.text)
        raise SceneSyntaxError(f"{msg}, found {found}", t.line, t.col)

    def expect(self, text: str) -> Token:
        if self.tok.text != text or self.tok.kind in ("str",):
            self.error(f"expected {text!r}")
        return self.next()

    def name(self, what: str = "a name") -> Token:
        t = self.tok
        if t.kind != "name" or t.text in KEYWORDS:
            self.error(f"expected {what}")
        return self.next()

    def scene(self) -> list:
        out = []
        while self.tok.kind != "eof":
            t = self.tok
            if t.kind != "name" or t.text not in KEYWORDS:
                self.error("expected a statement keyword (space, iso, group, task, meta)")
            out.append(getattr(self, "stmt_" + t.text)())
        return out

    def stmt_space(self):
        return self._decl("space")

    def stmt_iso(self):
        return self._decl("iso")

    def _decl(self, kind: str):
        kw = self.next()
        n = self.name(f"a {kind} name")
        self.expect("=")
        fn = self.name("a constructor")
        return Decl(kind, n.text, self.call(fn), kw.line, kw.col)

    def stmt_group(self):
        kw = self.next()
        n = self.name("a group name")
        self.expect("=")
        self.expect("<")
        gens = [self.ref()]
        while self.tok.text == ",":
            self.next()
            gens.append(self.ref())
        self.expect(">")
        factors, options = None, []
        while self.tok.kind == "name" and self.tok.text not in KEYWORDS:
            key = self.next()
            self.expect("=")
            if key.text == "factors":
                factors = self.factor_list()
            else:
                options.append((key.text, self.value()))
        return GroupDecl(n.text, tuple(gens), factors, tuple(options), kw.line, kw.col)

    def factor_list(self) -> tuple:
        self.expect("[")
        blocks = [self.name_list()]
        while self.tok.text in (";", ","):
            self.next()
            blocks.append(self.name_list())
        self.expect("]")
        return tuple(blocks)

    def name_list(self) -> tuple:
        self.expect("[")
        names = []
        if self.tok.text != "]":
            names.append(self.ref())
            while self.tok.text == ",":
                self.next()
                names.append(self.ref())
        self.expect("]")
        return tuple(names)

    def ref(self) -> Ref:
        t = self.name()
        return Ref(t.text, t.line, t.col)

    def stmt_task(self):
        kw = self.next()
        fn = self.name("a task name")
        return Task(self.call(fn), kw.line, kw.col)

    def stmt_meta(self):
        kw = self.next()
        n = self.name("a meta key")
        self.expect("=")
        return Meta(n.text, self.value(), kw.line, kw.col)

    def call(self, fn: Token) -> Call:
        self.expect("(")
        args, kwargs = [], []
        if self.tok.text != ")":
            while True:
                if self.tok.kind == "name" and self.toks[self.i + 1].text == "=":
                    key = self.next()
                    self.next()
                    if key.text in dict(kwargs):
                        self.error(f"duplicate argument {key.text!r}", key)
                    kwargs.append((key.text, self.value()))
                else:
                    if kwargs:
                        self.error("positional argument after keyword argument")
                    args.append(self.value())
                if self.tok.text != ",":
                    break
                self.next()
        self.expect(")")
        return Call(fn.text, tuple(args), tuple(kwargs), fn.line, fn.col)

    def value(self):
        t = self.tok
        if t.kind == "num":
            self.next()
            v = Fraction(t.text)
            return Num(int(v) if v.denominator == 1 else v, t.line, t.col)
        if t.kind == "str":
            self.next()
            return Str(t.text[1:-1], t.line, t.col)
        if t.text == "[":
            self.next()
            items = []
            if self.tok.text != "]":
                items.append(self.value())
                while self.tok.text == ",":
                    self.next()
                    items.append(self.value())
            self.expect("]")
            return ListV(tuple(items), t.line, t.col)
        if t.kind == "name" and t.text not in KEYWORDS:
            self.next()
            if self.tok.text == "(":
                return self.call(t)
            return Ref(t.text, t.line, t.col)
        self.error("expected a value")


def parse(text: str) -> Scene:
    """Syntax only; see ``parse_scene`` for the checked entry point."""
    return Scene(_Parser(tokenize(text)).scene(), text)


# --------------------------------------------------------------------------
# printer


def format_value(v) -> str:
    if isinstance(v, Num):
        return str(v.value)
    if isinstance(v, Str):
        return f'"{v.value}"'
    if isinstance(v, Ref):
        return v.name
    if isinstance(v, ListV):
        return "[" + ", ".join(format_value(x) for x in v.items) + "]"
    if isinstance(v, Call):
        return format_call(v)
    raise TypeError(f"cannot print {v!r}")


def format_call(c: Call) -> str:
    parts = [format_value(a) for a in c.args] + [f"{k}={format_value(v)}" for k, v in c.kwargs]
    return f"{c.fn}({', '.join(parts)})"


def format_statement(s) -> str:
    if isinstance(s, Decl):
        return f"{s.kind} {s.name} = {format_call(s.call)}"
    if isinstance(s, GroupDecl):
        out = f"group {s.name} = <{', '.join(g.name for g in s.gens)}>"
        if s.factors is not None:
            out += " factors = [" + "; ".join(
                "[" + ", ".join(r.name for r in b) + "]" for b in s.factors) + "]"
        for k, v in s.options:
            out += f" {k} = {format_value(v)}"
        return out
    if isinstance(s, Task):
        return f"task {format_call(s.call)}"
    if isinstance(s, Meta):
        return f"meta {s.name} = {format_value(s.value)}"
    raise TypeError(f"cannot print {s!r}")


def print_scene(scene: Scene) -> str:
    return "".join(format_statement(s) + "\n" for s in scene.statements)
