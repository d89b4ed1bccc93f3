"""Recursive-descent parser for programs: sort declarations, predicate
definitions and entailment queries.

Variable kinds (address or integer) are inferred over the whole program;
variables whose kind is never constrained default to addresses.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from . import syntax as S
from .syntax import (
    ADDR, INT, NIL, Add, And, BoolConst, Cmp, DefinitionError, Entailment, Eq, Exists,
    Forall, Implies, IntConst, Ne, Neg, Not, Or, PointsTo, PredApp, PredDef, PredEnv,
    Sort, Sub, SymbolicHeap, Var,
)

UNKNOWN = "?"

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+|//[^\n]*)
  | (?P<int>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*(?:\#\d+)?)
  | (?P<sym>\\/|\|-|->|:=|=>|!=|<=|>=|[(){},;.:*&|!=<>+\-])
    """,
    re.VERBOSE,
)

KEYWORDS = {
    "sort", "pred", "name", "checkentail", "exists", "forall", "emp", "nil",
    "true", "false", "addr", "int",
}


class ParseError(ValueError):
    def __init__(self, msg: str, line: int = 0, col: int = 0, expected=()):
        self.msg = msg
        self.line = line
        self.col = col
        self.expected = tuple(expected)
        where = f"{line}:{col}: " if line else ""
        exp = f" (expected {', '.join(repr(e) for e in self.expected)})" if self.expected else ""
        super().__init__(f"{where}{msg}{exp}")


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    out = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        tok = m.group()
        if kind != "ws":
            if kind == "ident" and tok in KEYWORDS:
                kind = "kw"
            out.append(Token(kind, tok, line, pos - line_start + 1))
        nl = tok.count("\n")
        if nl:
            line += nl
            line_start = pos + tok.rindex("\n") + 1
        pos = m.end()
    out.append(Token("eof", "", line, pos - line_start + 1))
    return out


@dataclass
class Program:
    sorts: dict = field(default_factory=dict)
    preds: PredEnv = field(default_factory=PredEnv)
    queries: list = field(default_factory=list)  # (name, Entailment)


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0
        self.sorts: dict[str, Sort] = {}
        self.pred_sigs: dict[str, tuple] = {}
        self.raw_preds: list[PredDef] = []
        self.queries: list = []
        # kind inference: union-find over variable ids plus the two kind constants
        self.parent: dict = {}
        self.scope: list[dict] = []
        self.defined: set[str] = set()
        self._prescan()
        self.all_pred_names = set(self.pred_sigs)

    def _prescan(self):
        # predicate signatures are visible before their definition (mutual recursion)
        toks = self.toks
        for i, t in enumerate(toks[:-2]):
            if t.kind == "kw" and t.text == "pred" and toks[i + 1].kind == "ident" and toks[i + 2].text == "(":
                name = toks[i + 1].text
                if name in self.pred_sigs:
                    continue
                params, j = [], i + 3
                while toks[j].kind == "ident":
                    params.append(S.new_var(toks[j].text, UNKNOWN))
                    j += 1
                    if toks[j].text == ",":
                        j += 1
                self.pred_sigs[name] = tuple(params)

    # -- token helpers
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, *texts: str) -> bool:
        return self.tok.text in texts and self.tok.kind in ("sym", "kw")

    def error(self, msg: str, expected=()):
        raise ParseError(msg, self.tok.line, self.tok.col, expected)

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.error(f"unexpected {self.tok.text or 'end of input'!r}", [text])
        t = self.tok
        self.i += 1
        return t

    def ident(self) -> str:
        if self.tok.kind != "ident":
            self.error(f"unexpected {self.tok.text or 'end of input'!r}", ["identifier"])
        t = self.tok.text
        self.i += 1
        return t

    # -- kinds
    def _find(self, x):
        self.parent.setdefault(x, x)
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def unify(self, a, b, where: Token | None = None):
        ra, rb = self._find(a), self._find(b)
        if ra == rb:
            return
        if ra in (ADDR, INT) and rb in (ADDR, INT):
            t = where or self.tok
            raise ParseError("sort error: address and integer mixed", t.line, t.col)
        if ra in (ADDR, INT):
            ra, rb = rb, ra
        self.parent[ra] = rb

    def kind_of(self, e) -> object:
        if isinstance(e, Var):
            return ("v", e.id)
        if e is NIL:
            return ADDR
        return INT

    # -- variables
    def lookup(self, name: str, create_free: dict | None = None) -> Var:
        for frame in reversed(self.scope):
            if name in frame:
                return frame[name]
        if create_free is None:
            self.error(f"unbound variable {name!r}")
        v = S.new_var(name, UNKNOWN)
        create_free[name] = v
        self.scope[0][name] = v
        return v

    # -- program
    def program(self) -> Program:
        while self.tok.kind != "eof":
            if self.at("sort"):
                self.sort_decl()
            elif self.at("pred"):
                self.pred_def()
            elif self.at("name", "checkentail"):
                self.query()
            else:
                self.error(f"unexpected {self.tok.text!r}", ["sort", "pred", "checkentail", "name"])
        return self.finish()

    def sort_decl(self):
        self.expect("sort")
        start = self.tok
        name = self.ident()
        if name in self.sorts:
            raise ParseError(f"duplicate sort {name}", start.line, start.col)
        self.expect("{")
        fields = []
        if not self.at("}"):
            while True:
                if not self.at("addr", "int"):
                    self.error(f"unexpected {self.tok.text!r}", ["addr", "int"])
                kind = self.tok.text
                self.i += 1
                fields.append((kind, self.ident()))
                if not self.at(","):
                    break
                self.i += 1
        self.expect("}")
        self.expect(";")
        self.sorts[name] = Sort(name, tuple(fields))

    def pred_def(self):
        self.expect("pred")
        start = self.tok
        name = self.ident()
        if name in self.defined:
            raise ParseError(f"duplicate definition of predicate {name}", start.line, start.col)
        self.defined.add(name)
        self.expect("(")
        names = []
        if not self.at(")"):
            while True:
                names.append(self.ident())
                if not self.at(","):
                    break
                self.i += 1
        self.expect(")")
        if len(set(names)) != len(names):
            raise ParseError(f"repeated parameter in {name}", start.line, start.col)
        params = list(self.pred_sigs[name])
        self.expect(":=")
        cases = []
        while True:
            self.scope = [{p.name: p for p in params}]
            locals_: dict = {}
            f = self.formula(locals_)
            # undeclared case-local variables are implicitly existential
            if locals_:
                f = f.with_(exists=tuple(locals_.values()) + f.exists)
            cases.append(f)
            if not self.at("\\/"):
                break
            self.i += 1
        self.expect(";")
        self.scope = []
        self.raw_preds.append(PredDef(name, tuple(params), tuple(cases)))

    def query(self):
        qname = None
        if self.at("name"):
            self.i += 1
            qname = self.ident()
            self.expect(":")
        self.expect("checkentail")
        self.scope = [{}]
        free: dict = {}
        ante = self.formula(free)
        self.expect("|-")
        cons = self.formula(free)
        self.expect(";")
        self.scope = []
        self.queries.append((qname, Entailment(ante, cons)))

    # -- formulas
    def formula(self, free: dict) -> SymbolicHeap:
        exists = []
        if self.at("exists"):
            self.i += 1
            frame = {}
            while self.tok.kind == "ident":
                v = S.new_var(self.ident(), UNKNOWN)
                frame[v.name] = v
                exists.append(v)
                if self.at(",") and self.peek().kind == "ident":
                    self.i += 1
            if not exists:
                self.error("empty binder", ["identifier"])
            self.expect(".")
            self.scope.append(frame)
            try:
                inner = self.formula(free)
            finally:
                self.scope.pop()
            return inner.with_(exists=tuple(exists) + inner.exists)
        save = self.i
        if self.at("("):
            try:
                self.i += 1
                inner = self.formula(free)
                self.expect(")")
                if self.at("&"):
                    self.i += 1
                    inner = inner.and_([self.pure(free)])
                return inner
            except ParseError:
                self.i = save
        if self._starts_spatial():
            atoms = [self.satom(free)]
            while self.at("*"):
                self.i += 1
                atoms.append(self.satom(free))
            pure = []
            if self.at("&"):
                self.i += 1
                pure.append(self.pure(free))
            return SymbolicHeap((), tuple(atoms), tuple(pure))
        return SymbolicHeap((), (S.EMP,), (self.pure(free),))

    def _starts_spatial(self) -> bool:
        if self.at("emp"):
            return True
        if self.tok.kind == "ident" and self.peek().text in ("(", "->"):
            return True
        return False

    def satom(self, free: dict):
        if self.at("emp"):
            self.i += 1
            return S.EMP
        start = self.tok
        name = self.ident()
        if self.at("->"):
            self.i += 1
            root = self.lookup(name, free)
            sort_name = self.ident()
            self.expect("{")
            args = self.args(free)
            self.expect("}")
            sort = self.sorts.get(sort_name)
            if sort is None:
                raise ParseError(f"unknown sort {sort_name}", start.line, start.col)
            if len(args) != sort.arity:
                raise ParseError(
                    f"arity mismatch: sort {sort_name} has {sort.arity} fields, got {len(args)}",
                    start.line, start.col)
            self.unify(self.kind_of(root), ADDR, start)
            for (k, _), a in zip(sort.fields, args):
                self.unify(self.kind_of(a), k, start)
            return PointsTo(root, sort_name, tuple(args))
        self.expect("(")
        args = self.args(free)
        self.expect(")")
        params = self.pred_sigs.get(name)
        if params is None or name not in self.all_pred_names:
            raise ParseError(f"unknown predicate {name}", start.line, start.col)
        if len(args) != len(params):
            raise ParseError(
                f"arity mismatch: {name} expects {len(params)} arguments, got {len(args)}",
                start.line, start.col)
        for p, a in zip(params, args):
            self.unify(self.kind_of(a), ("v", p.id), start)
        return PredApp(name, tuple(args))

    def args(self, free: dict) -> list:
        out = []
        if self.at(")", "}"):
            return out
        while True:
            out.append(self.arith(free))
            if not self.at(","):
                return out
            self.i += 1

    # -- pure formulas
    def pure(self, free: dict):
        left = self.pure_or(free)
        if self.at("=>"):
            self.i += 1
            return Implies(left, self.pure(free))
        return left

    def pure_or(self, free):
        parts = [self.pure_and(free)]
        while self.at("|"):
            self.i += 1
            parts.append(self.pure_and(free))
        return parts[0] if len(parts) == 1 else Or(tuple(parts))

    def pure_and(self, free):
        parts = [self.pure_unary(free)]
        while self.at("&"):
            self.i += 1
            parts.append(self.pure_unary(free))
        return parts[0] if len(parts) == 1 else And(tuple(parts))

    def pure_unary(self, free):
        if self.at("!"):
            self.i += 1
            return Not(self.pure_unary(free))
        if self.at("true", "false"):
            v = self.tok.text == "true"
            self.i += 1
            return BoolConst(v)
        if self.at("forall", "exists"):
            cls = Forall if self.tok.text == "forall" else Exists
            self.i += 1
            vs = []
            while self.tok.kind == "ident":
                vs.append(S.new_var(self.ident(), UNKNOWN))
                if self.at(",") and self.peek().kind == "ident":
                    self.i += 1
            if not vs:
                self.error("empty binder", ["identifier"])
            self.expect(".")
            self.scope.append({v.name: v for v in vs})
            try:
                body = self.pure(free)
            finally:
                self.scope.pop()
            for v in reversed(vs):
                body = cls(v, body)
            return body
        if self.at("("):
            save = self.i
            try:
                self.i += 1
                p = self.pure(free)
                self.expect(")")
                return p
            except ParseError:
                self.i = save
        return self.comparison(free)

    def comparison(self, free):
        start = self.tok
        left = self.arith(free)
        if not self.at("=", "!=", "<", "<=", ">", ">="):
            self.error(f"unexpected {self.tok.text or 'end of input'!r}", ["=", "!=", "<", "<=", ">", ">="])
        op = self.tok.text
        self.i += 1
        right = self.arith(free)
        if op in ("=", "!="):
            self.unify(self.kind_of(left), self.kind_of(right), start)
            return Eq(left, right) if op == "=" else Ne(left, right)
        self.unify(self.kind_of(left), INT, start)
        self.unify(self.kind_of(right), INT, start)
        return Cmp(op, left, right)

    def arith(self, free):
        start = self.tok
        e = self.term(free)
        while self.at("+", "-"):
            op = self.tok.text
            self.i += 1
            r = self.term(free)
            self.unify(self.kind_of(e), INT, start)
            self.unify(self.kind_of(r), INT, start)
            e = Add(e, r) if op == "+" else Sub(e, r)
        return e

    def term(self, free):
        start = self.tok
        if self.at("-"):
            self.i += 1
            t = self.term(free)
            if isinstance(t, IntConst):
                return IntConst(-t.value)
            self.unify(self.kind_of(t), INT, start)
            return Neg(t)
        if self.tok.kind == "int":
            v = int(self.tok.text)
            self.i += 1
            return IntConst(v)
        if self.at("nil"):
            self.i += 1
            return NIL
        if self.at("("):
            self.i += 1
            e = self.arith(free)
            self.expect(")")
            return e
        if self.tok.kind == "ident":
            return self.lookup(self.ident(), free)
        self.error(f"unexpected {self.tok.text or 'end of input'!r}", ["identifier", "integer", "nil", "("])

    # -- finish: resolve kinds and build the environment
    def finish(self) -> Program:
        cache: dict[int, Var] = {}

        def rekind(v: Var) -> Var:
            if v.id not in cache:
                r = self._find(("v", v.id))
                cache[v.id] = Var(v.name, v.id, r if r in (ADDR, INT) else ADDR)
            return cache[v.id]

        preds = []
        for p in self.raw_preds:
            preds.append(PredDef(
                p.name, tuple(rekind(v) for v in p.params),
                tuple(S.map_vars_heap(c, rekind) for c in p.cases)))
        try:
            env = PredEnv(preds, self.sorts.values())
        except DefinitionError as e:
            raise ParseError(str(e)) from None
        queries = []
        used = set()
        for n, (qname, e) in enumerate(self.queries, 1):
            if qname is None:
                qname = f"q{n}"
                while qname in used:
                    qname += "_"
            if qname in used:
                raise ParseError(f"duplicate query name {qname}")
            used.add(qname)
            queries.append((qname, Entailment(S.map_vars_heap(e.ante, rekind), S.map_vars_heap(e.cons, rekind))))
        return Program(dict(self.sorts), env, queries)


def parse_program(text: str) -> Program:
    """Parse a whole program; raises :class:`ParseError` with a line/column."""
    return _Parser(text).program()


def parse_entailment(text: str, program: Program | str) -> Entailment:
    """Parse a single ``ante |- cons`` against the declarations of ``program``."""
    src = program if isinstance(program, str) else show_program(program, queries=False)
    prog = parse_program(f"{src}\ncheckentail {text};")
    return prog.queries[-1][1]


def parse_formula(text: str, program: Program | str) -> SymbolicHeap:
    return parse_entailment(f"{text} |- emp", program).ante


def show_sort(s: Sort) -> str:
    return f"sort {s.name} {{{', '.join(f'{k} {n}' for k, n in s.fields)}}};"


def show_pred(d: PredDef) -> str:
    cases = []
    pnames = {p.name for p in d.params}
    for c in d.cases:
        names = {p: p.name for p in d.params}
        others = S.all_vars(c) - set(d.params)
        for v, n in S.display_names(others).items():
            names[v] = f"{v.name}#{v.id}" if n in pnames else n
        cases.append(S.show_heap(c, names))
    params = ", ".join(p.name for p in d.params)
    return f"pred {d.name}({params}) := " + " \\/ ".join(cases) + ";"


def show_program(prog: Program, queries: bool = True) -> str:
    lines = [show_sort(s) for s in prog.sorts.values()]
    lines += [show_pred(d) for d in prog.preds.values()]
    if queries:
        for name, e in prog.queries:
            lines.append(f"name {name}: checkentail {S.show_entailment(e)};")
    return "\n".join(lines) + "\n"
