"""Input DSL, CK-form validation and reduction of scalar equations to
first-order systems.

Example input::

    system kdv
    ck_var: t
    vars: x
    unknowns: u
    eq: dt(u) = -(u*dx(u) + dx(u,3))
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction

from .determining import MultiplierSet, omega_chain
from .errors import (DSLSyntaxError, NotChainConsistent, NotCKForm, NotNormalForm,
                     UnknownSymbol, UnsupportedExpression)
from .jet import IND, JET, PAR, DiffPoly, JetVar, PDESystem, atom_key, jet_atom

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<num>\d+(?:\.\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>\*\*|[-+*/^(),=])
""", re.VERBOSE)

_HEADERS = ("ck_var", "vars", "unknowns", "params", "eq")


@dataclass
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str, line: int = 1, col0: int = 1) -> list[Token]:
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise DSLSyntaxError(f"unexpected character {text[pos]!r}", line, col0 + pos)
        if m.lastgroup != "ws":
            out.append(Token(m.lastgroup, m.group(), line, col0 + pos))
        pos = m.end()
    out.append(Token("end", "", line, col0 + len(text)))
    return out


@dataclass
class SymbolTable:
    ck_var: str = "t"
    spatial: tuple = ("x",)
    fields: tuple = ("u",)
    params: tuple = ()

    @property
    def var_names(self) -> tuple:
        return (self.ck_var,) + tuple(self.spatial)

    def direction(self, name: str):
        names = self.var_names
        return names.index(name) if name in names else None

    @classmethod
    def for_system(cls, sys: PDESystem) -> "SymbolTable":
        return cls(sys.var_names[0], tuple(sys.var_names[1:]), sys.fields, sys.params)


class _Parser:
    """Recursive descent over ``expr := term (('+'|'-') term)*`` etc."""

    def __init__(self, tokens: list[Token], table: SymbolTable):
        self.toks = tokens
        self.k = 0
        self.table = table

    def peek(self) -> Token:
        return self.toks[self.k]

    def take(self, text=None, kind=None) -> Token:
        tok = self.toks[self.k]
        if (text is not None and tok.text != text) or (kind is not None and tok.kind != kind):
            want = repr(text) if text is not None else kind
            got = repr(tok.text) if tok.text else "end of input"
            raise DSLSyntaxError(f"expected {want}, found {got}", tok.line, tok.col)
        self.k += 1
        return tok

    def parse(self) -> DiffPoly:
        e = self.expr()
        if self.peek().kind != "end":
            tok = self.peek()
            raise DSLSyntaxError(f"unexpected {tok.text!r}", tok.line, tok.col)
        return e

    def expr(self) -> DiffPoly:
        acc = self.term()
        while self.peek().text in ("+", "-"):
            op = self.take().text
            rhs = self.term()
            acc = acc + rhs if op == "+" else acc - rhs
        return acc

    def term(self) -> DiffPoly:
        acc = self.unary()
        while self.peek().text in ("*", "/"):
            tok = self.take()
            rhs = self.unary()
            if tok.text == "*":
                acc = acc * rhs
            else:
                if not rhs.is_constant() or rhs.is_zero():
                    raise UnsupportedExpression(
                        f"line {tok.line}, col {tok.col}: division only by nonzero constants")
                acc = acc / rhs
        return acc

    def unary(self) -> DiffPoly:
        if self.peek().text == "-":
            self.take()
            return -self.unary()
        if self.peek().text == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self) -> DiffPoly:
        base = self.atom()
        if self.peek().text in ("^", "**"):
            tok = self.take()
            neg = False
            if self.peek().text == "-":
                self.take()
                neg = True
            if self.peek().text == "(":
                self.take("(")
                e = self.expr()
                self.take(")")
                if not e.is_constant():
                    raise UnsupportedExpression(f"line {tok.line}: non-constant exponent")
                k = e.constant_value()
            else:
                k = Fraction(self.take(kind="num").text)
            if neg or k < 0 or k != int(k):
                raise UnsupportedExpression(
                    f"line {tok.line}, col {tok.col}: exponent must be a non-negative integer")
            return base ** int(k)
        return base

    def atom(self) -> DiffPoly:
        tok = self.peek()
        if tok.kind == "num":
            self.take()
            return DiffPoly.const(Fraction(tok.text))
        if tok.text == "(":
            self.take()
            e = self.expr()
            self.take(")")
            return e
        if tok.kind == "name":
            self.take()
            return self.symbol(tok)
        raise DSLSyntaxError(f"unexpected {tok.text or 'end of input'!r}", tok.line, tok.col)

    def symbol(self, tok: Token) -> DiffPoly:
        name = tok.text
        tab = self.table
        if name in tab.fields:
            return DiffPoly.jet(name)
        if name in tab.params:
            return DiffPoly.param(name)
        d = tab.direction(name)
        if d is not None:
            return DiffPoly.indep(d)
        if name.startswith("d") and tab.direction(name[1:]) is not None \
                and self.peek().text == "(":
            return self.derivative(tab.direction(name[1:]))
        raise UnknownSymbol(f"unknown symbol {name!r}", tok.line, tok.col)

    def derivative(self, direction: int) -> DiffPoly:
        self.take("(")
        e = self.expr()
        k = 1
        if self.peek().text == ",":
            self.take(",")
            tok = self.take(kind="num")
            if "." in tok.text:
                raise DSLSyntaxError("derivative order must be an integer", tok.line, tok.col)
            k = int(tok.text)
        self.take(")")
        return e.Dmulti((direction,) * k)


def parse_expression(text: str, table, line: int = 1, col: int = 1) -> DiffPoly:
    """Parse one expression; ``table`` is a SymbolTable or a PDESystem."""
    if isinstance(table, PDESystem):
        table = SymbolTable.for_system(table)
    return _Parser(tokenize(text, line, col), table).parse()


def parse_expression_list(text: str, table) -> list[DiffPoly]:
    """Comma-separated expressions (commas inside parentheses don't split)."""
    parts = []
    depth = 0
    cur = []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    parts.append("".join(cur))
    return [parse_expression(p, table) for p in parts]


# ---------------------------------------------------------------------------
# source files


@dataclass
class SourceSpec:
    name: str = "system"
    ck_var: str = "t"
    spatial: tuple = ()
    unknowns: tuple = ()
    params: tuple = ()
    equations: list = field(default_factory=list)  # [(line, text)]


def _ident_list(value: str, line: int, col: int) -> tuple:
    names = tuple(v.strip() for v in value.split(",") if v.strip())
    for v in names:
        if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", v):
            raise DSLSyntaxError(f"invalid identifier {v!r}", line, col)
    return names


def read_source(text: str) -> SourceSpec:
    source = SourceSpec()
    seen_vars = False
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        indent = len(line) - len(line.lstrip())
        body = line.strip()
        m = re.match(r"system\s+(\S+)$", body)
        if m:
            source.name = m.group(1)
            continue
        m = re.match(r"([A-Za-z_]+)\s*:(.*)$", body)
        if not m or m.group(1) not in _HEADERS:
            raise DSLSyntaxError(f"unrecognised line {body!r}", lineno, indent + 1)
        key, value = m.group(1), m.group(2)
        col = indent + body.index(":") + 2
        if key == "ck_var":
            names = _ident_list(value, lineno, col)
            if len(names) != 1:
                raise DSLSyntaxError("ck_var takes exactly one name", lineno, col)
            source.ck_var = names[0]
        elif key == "vars":
            source.spatial = _ident_list(value, lineno, col)
            seen_vars = True
        elif key == "unknowns":
            source.unknowns = _ident_list(value, lineno, col)
        elif key == "params":
            source.params = _ident_list(value, lineno, col)
        else:
            source.equations.append((lineno, col, value))
    if not seen_vars:
        source.spatial = ("x",)
    source.spatial = tuple(v for v in source.spatial if v != source.ck_var)
    if not source.unknowns:
        raise DSLSyntaxError("missing 'unknowns:' header", 1, 1)
    if not source.spatial:
        raise DSLSyntaxError("need at least one variable besides the ck variable", 1, 1)
    names = (source.ck_var,) + source.spatial + source.unknowns + source.params
    dup = {v for v in names if names.count(v) > 1}
    if dup:
        raise DSLSyntaxError(f"name used twice: {', '.join(sorted(dup))}", 1, 1)
    return source


def _split_equation(value: str, line: int, col: int):
    depth = 0
    for k, ch in enumerate(value):
        depth += ch == "("
        depth -= ch == ")"
        if ch == "=" and depth == 0:
            return value[:k], value[k + 1:], col + k + 1
    raise DSLSyntaxError("equation needs '='", line, col)


def _leading(lhs: DiffPoly, F: DiffPoly, fields) -> JetVar:
    """Leading pure ck-derivative of the equation ``F = 0``."""
    if len(lhs.terms) == 1:
        (m, c), = lhs.terms.items()
        if len(m) == 2 and m[1] == 1 and c == 1:
            key = atom_key(m[0])
            if key[0] == JET:
                j = JetVar.from_alpha(key[1], key[2])
                if not j.xs and j.t_order >= 1:
                    return j
    jets = [j for j in F.jets() if j.field in fields]
    if not jets:
        raise NotCKForm("equation contains no unknowns")
    top = max(j.t_order for j in jets)
    heads = [j for j in jets if j.t_order == top]
    mixed = [j for j in heads if j.xs]
    if top == 0:
        raise NotCKForm("equation has no derivative with respect to the ck variable", heads)
    if mixed:
        raise NotCKForm("highest ck-derivative is mixed; a point transformation "
                        "(e.g. t -> t - x, x -> x + t) is needed to reach CK form", mixed)
    if len(heads) > 1:
        raise NotCKForm("several leading ck-derivatives", heads)
    return heads[0]


def parse_dsl(text: str) -> tuple[PDESystem, SourceSpec]:
    source = read_source(text)
    table = SymbolTable(source.ck_var, source.spatial, source.unknowns, source.params)
    if len(source.equations) != len(source.unknowns):
        raise NotCKForm(f"{len(source.unknowns)} unknowns but {len(source.equations)} equations")
    by_field = {}
    for line, col, value in source.equations:
        lhs_s, rhs_s, rcol = _split_equation(value, line, col)
        lhs = parse_expression(lhs_s, table, line, col)
        rhs = parse_expression(rhs_s, table, line, rcol)
        F = lhs - rhs
        lead = _leading(lhs, F, source.unknowns)
        coef = F.diff(lead)
        if not coef.is_constant() or coef.is_zero():
            raise NotCKForm(f"equation is not solvable for {lead}", [lead])
        g = (F - coef * DiffPoly.from_atom(lead.atom)) / coef.constant_value()
        if lead.field in by_field:
            raise NotCKForm(f"two equations lead with {lead.field}", [lead])
        by_field[lead.field] = (lead.t_order, g)
    fields = source.unknowns
    sys = PDESystem(fields, [by_field[f][1] for f in fields],
                    [by_field[f][0] for f in fields], len(source.spatial),
                    source.params, table.var_names, source.name)
    validate_ck(sys)
    return sys, source


def load(path) -> tuple[PDESystem, SourceSpec]:
    with open(path, encoding="utf-8") as fh:
        return parse_dsl(fh.read())


def validate_ck(sys: PDESystem) -> list[str]:
    """Check the t-order bounds of every right-hand side; returns notes."""
    for s, g in enumerate(sys.g):
        bad = [j for j in g.jets() if j.field in sys.fields
               and j.t_order >= sys.order_of(j.field)]
        if bad:
            mixed = [j for j in bad if j.xs]
            hint = ("; mixed derivatives need a point transformation first"
                    if mixed else "")
            raise NotCKForm(f"equation for {sys.fields[s]} contains {', '.join(map(str, bad))}"
                            f" at or above the leading ck-order{hint}", bad)
        bad = [a for a in g.atoms() if atom_key(a)[0] not in (JET, IND, PAR)]
        if bad:
            raise NotCKForm("right-hand side contains foreign symbols")
    notes = [f"form {sys.form}", f"spatial order m = {sys.m}"]
    return notes


# ---------------------------------------------------------------------------
# reduction to first order


@dataclass
class ConversionMap:
    """``u -> (u1, ..., uN)`` with ``uk = D_t^{k-1} u`` for each converted field."""

    source: PDESystem
    target: PDESystem
    names: dict  # source field -> tuple of target fields

    def _forward_atom(self, key):
        f, alpha = key[1], key[2]
        if f not in self.names:
            return None
        j = JetVar.from_alpha(f, alpha)
        new = self.names[f]
        k = min(j.t_order, len(new) - 1)
        return jet_atom(new[k], (0,) * (j.t_order - k) + j.xs)

    def to_system(self, e: DiffPoly) -> DiffPoly:
        mapping = {}
        for a in e.atoms():
            key = atom_key(a)
            if key[0] == JET:
                b = self._forward_atom(key)
                if b is not None and b != a:
                    mapping[a] = DiffPoly.from_atom(b)
        return e.subs(mapping)

    def to_scalar(self, e: DiffPoly) -> DiffPoly:
        back = {}
        for f, new in self.names.items():
            for k, name in enumerate(new):
                back[name] = (f, k)
        mapping = {}
        for a in e.atoms():
            key = atom_key(a)
            if key[0] == JET and key[1] in back:
                f, k = back[key[1]]
                mapping[a] = DiffPoly.from_atom(jet_atom(f, (0,) * k + key[2]))
        return e.subs(mapping)


def _fresh_names(base: str, N: int, taken: set) -> tuple:
    if N == 1:
        return (base,)
    suffix = ""
    while True:
        names = tuple(f"{base}{suffix}{k}" for k in range(1, N + 1))
        if not taken.intersection(names):
            return names
        suffix += "_"


def to_first_order(sys: PDESystem) -> tuple[PDESystem, ConversionMap]:
    """First-order CK system equivalent to ``sys`` (field-wise reduction)."""
    taken = set(sys.fields) | set(sys.params) | set(sys.var_names)
    names = {}
    for f, N in zip(sys.fields, sys.orders):
        names[f] = _fresh_names(f, N, taken - {f})
        taken |= set(names[f])
    fields, orders, gs = [], [], []
    draft = ConversionMap(sys, None, names)
    for f, N, g in zip(sys.fields, sys.orders, sys.g):
        new = names[f]
        for k in range(N - 1):
            fields.append(new[k])
            orders.append(1)
            gs.append(-DiffPoly.jet(new[k + 1]))
        fields.append(new[N - 1])
        orders.append(1)
        gs.append(draft.to_system(g))
    target = PDESystem(fields, gs, orders, sys.n, sys.params, sys.var_names,
                       sys.name + "_first_order")
    return target, ConversionMap(sys, target, names)


def scalar_to_system(sys: PDESystem) -> tuple[PDESystem, ConversionMap]:
    if not sys.is_scalar:
        raise ValueError("scalar_to_system expects a single equation")
    return to_first_order(sys)


def lift_multiplier(lam, cmap: ConversionMap) -> MultiplierSet:
    """Multiplier of the first-order system matching a scalar multiplier.

    The component of ``u_k`` is ``Omega_{N-k}`` of the scalar chain, so the
    scalar multiplier itself sits on the last component.
    """
    sys = cmap.source
    if isinstance(lam, MultiplierSet):
        lam = lam[0]
    N = sys.orders[0]
    chain = omega_chain(sys, lam)[:N]
    comps = [cmap.to_system(chain[N - 1 - k]) for k in range(N)]
    return MultiplierSet.for_system(cmap.target, comps)


def lower_multiplier(ms, cmap: ConversionMap) -> DiffPoly:
    ms = MultiplierSet.for_system(cmap.target, ms)
    lam = cmap.to_scalar(ms[len(ms) - 1])
    try:
        again = lift_multiplier(lam, cmap)
    except NotNormalForm as exc:
        raise NotChainConsistent(str(exc)) from None
    if list(again) != list(ms):
        raise NotChainConsistent("components do not follow the multiplier chain "
                                 "of the last component")
    return lam


__all__ = [
    "tokenize", "parse_expression", "parse_expression_list", "parse_dsl", "load",
    "read_source", "validate_ck", "SourceSpec", "SymbolTable", "ConversionMap",
    "to_first_order", "scalar_to_system", "lift_multiplier", "lower_multiplier",
]
