"""Recursive-descent parser for ``.fmp`` program files.

Lexical conventions: identifiers starting with an uppercase letter are
constants, function symbols, predicates, concepts and roles; identifiers
starting with a lowercase letter or underscore are variables; a lone ``_``
is a fresh anonymous variable.  ``//`` starts a comment.
"""
from __future__ import annotations

import itertools
import json
import re
from dataclasses import dataclass

from . import dl
from .errors import ParseError, StaticError
from .kernel import (
    ANON_PREFIX, COMPARISONS, HASA, HASAAT, ISA, ISAAT, Atom, Const, Fn, Num,
    Plus, SetVal, Str, Var, hasa, isa, term_vars, time_index,
)
from .rules import (
    AboxAt, Builtin, Choose, Collect, Comprehension, DlCall, Let, MapRole,
    Not, Ordinary, Program, Rule, TimeCmp, check_collect_scoping,
    check_nested_not, check_range_restricted,
)

_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r\n]+|//[^\n]*)
  | (?P<string>"(?:[^"\\]|\\.)*")
  | (?P<int>[0-9]+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<op>:--|:-|\|=|\[=|<=|>=|!=|==|\+\+|[←⊑≡⊨≤≥≠∋∈∪(){}\[\],.:@+\-<>=\#])
""", re.VERBOSE)

_ALIASES = {":--": ":-", "←": ":-", "⊨": "|=", "[=": "⊑", "==": "=",
            "≤": "<=", "≥": ">=", "≠": "!=", "∪": "++"}

_BUILTIN_OPS = ("<", "<=", ">", ">=", "=", "!=", "∋", "∈")

_SPECIAL_FORMS = {"COLLECT", "LET", "CHOOSE", "MAPROLE", "DLISSAT", "DLISUNSAT",
                  "collect", "let", "choose"}


@dataclass(frozen=True)
class Token:
    kind: str  # 'ident', 'int', 'string', 'op', 'eof'
    text: str
    line: int
    col: int


def tokenize(text, source=None):
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line,
                             pos - line_start + 1, source)
        kind = m.lastgroup
        chunk = m.group()
        if kind != "ws":
            value = _ALIASES.get(chunk, chunk) if kind == "op" else chunk
            tokens.append(Token(kind, value, line, pos - line_start + 1))
        newlines = chunk.count("\n")
        if newlines:
            line += newlines
            line_start = pos + chunk.rindex("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


class _Backtrack(Exception):
    pass


class Parser:
    def __init__(self, text, source=None):
        self.source = source
        self.tokens = tokenize(text, source)
        self.pos = 0
        self._anon = itertools.count()

    # -- token helpers ------------------------------------------------------
    @property
    def tok(self):
        return self.tokens[self.pos]

    def peek(self, k=1):
        return self.tokens[min(self.pos + k, len(self.tokens) - 1)]

    def error(self, message, tok=None):
        tok = tok or self.tok
        return ParseError(message, tok.line, tok.col, self.source)

    def at(self, text, k=0):
        t = self.peek(k) if k else self.tok
        return t.kind in ("op", "ident") and t.text == text

    def accept(self, text):
        if self.at(text):
            self.pos += 1
            return True
        return False

    def expect(self, text):
        if not self.accept(text):
            found = self.tok.text or "end of input"
            raise self.error(f"expected {text!r} but found {found!r}")

    def ident(self):
        t = self.tok
        if t.kind != "ident":
            raise self.error(f"expected an identifier but found {t.text or 'end of input'!r}")
        self.pos += 1
        return t.text

    def attempt(self, fn):
        """Run ``fn``; on a parse error restore the position and return None."""
        saved = self.pos
        try:
            return fn()
        except (ParseError, _Backtrack):
            self.pos = saved
            return None

    # -- program ------------------------------------------------------------
    def program(self):
        prog = Program()
        while self.tok.kind != "eof":
            if self.at("tbox") and self.peek().kind == "ident" and self.at("{", 2):
                name, tbox = self.tbox_block()
                if name in prog.tboxes:
                    raise self.error(f"tbox {name!r} declared twice")
                prog.tboxes[name] = tbox
            elif self.at("#"):
                self.directive(prog)
            else:
                prog.rules.append(self.rule())
        return prog

    def directive(self, prog):
        self.expect("#")
        tok = self.tok
        name = self.ident()
        if name != "horizon":
            raise self.error(f"unknown directive #{name}", tok)
        values = [self.integer()]
        while self.accept(","):
            values.append(self.integer())
        self.expect(".")
        prog.directives.setdefault("horizon", []).extend(values)

    def integer(self):
        neg = self.accept("-")
        t = self.tok
        if t.kind != "int":
            raise self.error("expected an integer")
        self.pos += 1
        return -int(t.text) if neg else int(t.text)

    def tbox_block(self):
        self.expect("tbox")
        name = self.ident()
        self.expect("{")
        gcis, functional = [], set()
        while not self.accept("}"):
            if self.at("functional"):
                self.pos += 1
                functional.add(self.role())
            else:
                lhs = self.concept()
                if self.accept("⊑"):
                    gcis.append((lhs, self.concept()))
                elif self.accept("≡") or self.accept("="):
                    rhs = self.concept()
                    gcis.append((lhs, rhs))
                    gcis.append((rhs, lhs))
                else:
                    raise self.error("expected '⊑' or '≡' in tbox axiom")
            self.expect(".")
        return name, dl.TBox(tuple(gcis), frozenset(functional))

    def concept(self):
        tok = self.tok
        try:
            return dl.concept_from_term(self.term(allow_isa=False))
        except StaticError as e:
            raise self.error(str(e), tok) from None

    def role(self):
        tok = self.tok
        try:
            return dl.role_from_term(self.term(allow_isa=False))
        except StaticError as e:
            raise self.error(str(e), tok) from None

    # -- rules --------------------------------------------------------------
    def rule(self):
        start = self.tok
        if self.at("fail") and (self.at(":-", 1) or self.at(".", 1)):
            self.pos += 1
            head = None
        else:
            head = self.head()
        body = ()
        if self.accept(":-"):
            body = self.body(allow_empty=True)
        self.expect(".")
        rule = Rule(head, body)
        rule = _classify_time_comparisons(rule)
        where = f"{self.source or '<input>'}:{start.line}:{start.col}"
        try:
            check_range_restricted(rule)
            check_nested_not(rule)
            check_collect_scoping(rule)
        except StaticError as e:
            e.args = (f"{where}: {e}",)
            raise
        if head is not None and not body:
            for a in rule.head_atoms():
                if any(term_vars(t) for t in a.args):
                    raise ParseError(f"fact {a} is not ground", start.line, start.col,
                                     self.source)
        return rule

    def head(self):
        disjuncts = [self.disjunct()]
        while self.accept("or"):
            disjuncts.append(self.disjunct())
        return tuple(disjuncts)

    def disjunct(self):
        if self.at("("):
            def grouped():
                self.expect("(")
                conj = self.conjunction()
                self.expect(")")
                if not (self.at("or") or self.at(":-") or self.at(".")):
                    raise _Backtrack()
                return conj
            conj = self.attempt(grouped)
            if conj is not None:
                return conj
        return self.conjunction()

    def conjunction(self):
        atoms = [self.head_atom()]
        while self.accept("and"):
            atoms.append(self.head_atom())
        return tuple(atoms)

    def head_atom(self):
        if self.at("neg"):
            return self.neg_atom()
        return self.atom()

    def neg_atom(self):
        self.expect("neg")
        if self.at("("):
            saved = self.pos
            self.pos += 1
            a = self.attempt(self.atom)
            if a is not None and self.accept(")"):
                return Atom(a.pred, a.args, True)
            self.pos = saved
        a = self.atom()
        return Atom(a.pred, a.args, True)

    def atom(self):
        tok = self.tok
        t = self.term(allow_isa=True)
        if self.accept("@"):
            tt = self.term(allow_isa=False)
            if isinstance(t, Fn) and t.name == ISA:
                return Atom(ISAAT, (t.args[0], t.args[1], tt))
            if isinstance(t, Fn) and t.name == HASA:
                x, r, y = t.args
                return Atom(HASAAT, (x, r, y, tt))
            raise self.error("only DL-atoms can be timed with '@'", tok)
        if isinstance(t, Fn) and t.name in (ISA, HASA):
            raise self.error("an untimed DL-atom needs a time: write 'x : C @ time'", tok)
        if isinstance(t, Const):
            return Atom(t.name, ())
        if isinstance(t, Var) and not t.name.startswith(ANON_PREFIX):
            return Atom(t.name, ())  # propositional atom such as `a`
        if isinstance(t, Fn) and t.name not in ("Set", "List"):
            return Atom(t.name, t.args)
        raise self.error(f"expected an atom but found {t}", tok)

    # -- bodies -------------------------------------------------------------
    def body(self, allow_empty=False):
        if allow_empty and self.at("."):
            return ()
        lits = [self.literal()]
        while self.accept(","):
            lits.append(self.literal())
        return tuple(lits)

    def guard(self):
        """A STH guard: a parenthesized body or a single literal."""
        if self.at("("):
            def grouped():
                self.expect("(")
                b = self.body()
                self.expect(")")
                if not self._at_literal_end():
                    raise _Backtrack()
                return b
            b = self.attempt(grouped)
            if b is not None:
                return b
        return (self.literal(),)

    def _at_literal_end(self):
        return self.tok.kind == "eof" or any(self.at(x) for x in (",", ".", ")", "]"))

    def literal(self):
        tok = self.tok
        start = self.pos
        if self.at("not") and not self.at("|=", 1):
            self.pos += 1
            if self.at("("):
                def grouped():
                    self.expect("(")
                    b = self.body()
                    self.expect(")")
                    if not self._at_literal_end():
                        raise _Backtrack()
                    return b
                b = self.attempt(grouped)
                if b is not None:
                    return Not(b)
            return Not((self.literal(),))
        if self.at("neg"):
            return Ordinary(self.neg_atom())
        if tok.kind == "ident" and tok.text in _SPECIAL_FORMS and self.at("(", 1):
            return self.special_form()
        if tok.kind == "ident" and self.at("|=", 1):
            name = self.ident()
            self.expect("|=")
            return DlCall("entails", name, None, self.dl_query())
        if self.at("("):
            call = self.attempt(self.explicit_entails)
            if call is not None:
                return call
        if tok.kind == "ident" and self.at("(", 1) \
                and self.peek(2).kind == "ident" and _is_var_name(self.peek(2).text) \
                and self.peek(3).text in COMPARISONS:
            return self.comprehension()
        t = self.attempt(lambda: self.term(allow_isa=True))
        if t is not None and self.tok.kind == "op" and self.tok.text in _BUILTIN_OPS:
            op = self.tok.text
            self.pos += 1
            rhs = self.term(allow_isa=True)
            return Builtin(op, (t, rhs))
        self.pos = start
        return Ordinary(self.atom())

    def explicit_entails(self):
        self.expect("(")
        parts = self.abox_expr()
        self.expect(",")
        name = self.ident()
        self.expect(")")
        self.expect("|=")
        return DlCall("entails", name, parts, self.dl_query())

    def abox_expr(self):
        parts = [self.abox_part()]
        while self.accept("++"):
            parts.append(self.abox_part())
        return tuple(parts)

    def abox_part(self):
        if self.at("ABOXAT") and self.at("(", 1):
            self.pos += 2
            t = self.term(allow_isa=False)
            self.expect(")")
            return AboxAt(t)
        return self.term(allow_isa=True)

    def dl_query(self):
        if self.accept("["):
            items = [self.dl_query_atom()]
            while self.accept(","):
                items.append(self.dl_query_atom())
            self.expect("]")
            return tuple(items)
        return (self.dl_query_atom(),)

    def dl_query_atom(self):
        tok = self.tok
        t = self.term(allow_isa=True)
        if not (isinstance(t, Fn) and t.name in (ISA, HASA)):
            raise self.error("a DL query is 'x : C' or '(x, y) : r'", tok)
        return t

    def comprehension(self):
        pred = self.ident()
        self.expect("(")
        var = self.ident()
        op = self.tok.text
        self.pos += 1
        bound = self.term(allow_isa=False)
        args = [Var(var)]
        while self.accept(","):
            args.append(self.term(allow_isa=True))
        self.expect(")")
        guard = ()
        if self.accept("STH"):
            guard = self.guard()
        return Comprehension(var, op, bound, Atom(pred, tuple(args)), guard)

    def variable(self):
        tok = self.tok
        name = self.ident()
        if not _is_var_name(name) or name == "_":
            raise self.error(f"expected a variable but found {name!r}", tok)
        return name

    def special_form(self):
        kw = self.ident().upper()
        self.expect("(")
        if kw == "COLLECT":
            var = self.variable()
            self.expect(",")
            template = self.term(allow_isa=True)
            self.expect("STH")
            guard = self.guard()
            self.expect(")")
            return Collect(var, template, guard)
        if kw in ("LET", "CHOOSE"):
            var = self.variable()
            self.expect(",")
            t = self.term(allow_isa=True)
            self.expect(")")
            return Let(var, t) if kw == "LET" else Choose(var, t)
        if kw == "MAPROLE":
            var = self.variable()
            self.expect(",")
            items = self.term(allow_isa=False)
            self.expect(",")
            role = self.term(allow_isa=False)
            self.expect(",")
            filler = self.term(allow_isa=False)
            self.expect(")")
            return MapRole(var, items, role, filler)
        kind = "sat" if kw == "DLISSAT" else "unsat"
        if self.tok.kind == "ident" and self.at(")", 1):
            name = self.ident()
            self.expect(")")
            return DlCall(kind, name, None, ())
        parts = self.abox_expr()
        self.expect(",")
        name = self.ident()
        self.expect(")")
        return DlCall(kind, name, parts, ())

    # -- terms --------------------------------------------------------------
    def term(self, allow_isa=True):
        t = self.simple_term()
        while self.at("+") or (self.at("-") and self.peek().kind == "int"):
            sign = 1 if self.tok.text == "+" else -1
            self.pos += 1
            k = self.tok
            if k.kind != "int":
                raise self.error("expected an integer offset")
            self.pos += 1
            if isinstance(t, Num):
                t = Num(t.value + sign * int(k.text))
            elif isinstance(t, Var):
                t = Plus(t, sign * int(k.text))
            elif isinstance(t, Plus):
                t = Plus(t.base, t.offset + sign * int(k.text))
            else:
                raise self.error(f"cannot add an offset to {t}", k)
        if isinstance(t, Fn) and t.name == HASA:
            return t
        if allow_isa and self.at(":"):
            self.pos += 1
            t = isa(t, self.term(allow_isa=False))
        return t

    def simple_term(self):
        tok = self.tok
        if tok.kind == "int":
            self.pos += 1
            return Num(int(tok.text))
        if tok.kind == "op" and tok.text == "-" and self.peek().kind == "int":
            self.pos += 2
            return Num(-int(self.tokens[self.pos - 1].text))
        if tok.kind == "string":
            self.pos += 1
            return Str(json.loads(tok.text))
        if self.at("("):
            self.pos += 1
            x = self.term(allow_isa=False)
            self.expect(",")
            y = self.term(allow_isa=False)
            self.expect(")")
            self.expect(":")
            return hasa(x, self.term(allow_isa=False), y)
        if tok.kind == "ident":
            self.pos += 1
            name = tok.text
            if name == "_":
                return Var(f"{ANON_PREFIX}{next(self._anon)}")
            if _is_var_name(name) and not self.at("("):
                return Var(name)
            if self.accept("("):
                args = []
                if not self.at(")"):
                    args.append(self.term(allow_isa=True))
                    while self.accept(","):
                        args.append(self.term(allow_isa=True))
                self.expect(")")
                if name == "Set":
                    return SetVal(frozenset(args))
                return Fn(name, tuple(args))
            return Const(name)
        raise self.error(f"expected a term but found {tok.text or 'end of input'!r}")


def _is_var_name(name):
    return name[:1].islower() or name[:1] == "_"


def _time_vars(rule):
    """Variables used as time terms anywhere in a rule."""
    out = set()

    def from_atom(a):
        i = time_index(a.pred, len(a.args))
        if i is not None:
            term_vars(a.args[i], out)

    def walk(body):
        for lit in body:
            if isinstance(lit, Ordinary):
                from_atom(lit.atom)
            elif isinstance(lit, Comprehension):
                out.add(lit.var)
                term_vars(lit.bound, out)
                walk(lit.guard)
            elif isinstance(lit, (Collect, Not)):
                walk(lit.guard if isinstance(lit, Collect) else lit.body)
            elif isinstance(lit, DlCall):
                for part in lit.abox or ():
                    if isinstance(part, AboxAt):
                        term_vars(part.time, out)

    for a in rule.head_atoms():
        from_atom(a)
    walk(rule.body)
    return out


def _is_time_term(t, tvars):
    if isinstance(t, Plus):
        return True
    return isinstance(t, Var) and t.name in tvars


def _classify_time_comparisons(rule):
    tvars = _time_vars(rule)

    def fix(body):
        out = []
        for lit in body:
            if isinstance(lit, Builtin) and lit.op in COMPARISONS and \
                    any(_is_time_term(a, tvars) for a in lit.args):
                lit = TimeCmp(lit.op, lit.args[0], lit.args[1])
            elif isinstance(lit, Not):
                lit = Not(fix(lit.body))
            elif isinstance(lit, Collect):
                lit = Collect(lit.var, lit.template, fix(lit.guard))
            elif isinstance(lit, Comprehension):
                lit = Comprehension(lit.var, lit.op, lit.bound, lit.atom, fix(lit.guard))
            out.append(lit)
        return tuple(out)

    return Rule(rule.head, fix(rule.body), rule.name, rule.origin)


def parse_program(text, source=None) -> Program:
    """Parse program text; raises ParseError (with position) on bad input."""
    return Parser(text, source).program()


def parse_rule(text) -> Rule:
    prog = parse_program(text)
    if len(prog.rules) != 1:
        raise ParseError(f"expected exactly one rule, found {len(prog.rules)}")
    return prog.rules[0]


def parse_term(text):
    p = Parser(text)
    t = p.term(allow_isa=True)
    if p.tok.kind != "eof":
        raise p.error("trailing input after term")
    return t


def parse_body(text):
    p = Parser(text)
    b = p.body()
    if p.tok.kind != "eof":
        raise p.error("trailing input after body")
    return _classify_time_comparisons(Rule(None, b)).body


def parse_files(paths) -> Program:
    prog = Program()
    for path in paths:
        with open(path, encoding="utf-8") as fh:
            prog.extend(parse_program(fh.read(), source=str(path)))
    return prog
