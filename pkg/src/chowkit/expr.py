"""Expression language over the model: rational literals, generators, the
two products, and the named transforms.

Grammar (products left-associative, `.` is the cup product, `*` the
Pontryagin product; mixing the two in one chain requires parentheses):

    expr  := term (('+'|'-') term)*
    term  := unary (('.'|'*') unary)*
    unary := '-' unary | atom
    atom  := literal | ident | func '(' args ')' | '(' expr ')'

Literals are integers or fractions like 3/4.  Scalars act by scaling in
both products.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from .errors import ChowkitError, EvalError, ParseError
from .model import (
    ExtClass,
    bracket_xi,
    exp_class,
    fourier,
    pontryagin,
    pullback_scalar,
    pushforward_scalar,
    wedge,
)

FUNCTIONS = {
    "exp": 1,
    "F": 2,
    "bracket": 3,
    "push": 2,
    "pull": 2,
    "L": 1,
    "N": 1,
    "order_cup": 1,
    "order_pon": 1,
}

_GEN_RE = re.compile(r"^([ab])([0-9]+)$")


# -- AST ---------------------------------------------------------------------


@dataclass(frozen=True)
class Lit:
    value: Fraction


@dataclass(frozen=True)
class Name:
    name: str


@dataclass(frozen=True)
class Neg:
    arg: object


@dataclass(frozen=True)
class Bin:
    op: str  # '+', '-', '.', '*'
    left: object
    right: object


@dataclass(frozen=True)
class Call:
    fn: str
    args: tuple


# -- lexer --------------------------------------------------------------------


@dataclass(frozen=True)
class Token:
    kind: str  # NUM IDENT OP LPAREN RPAREN COMMA END
    text: str
    line: int
    col: int


def tokenize(text: str):
    tokens = []
    line, col = 1, 1
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch.isspace():
            i += 1
            col += 1
            continue
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            if j < n and text[j] == "/" and j + 1 < n and text[j + 1].isdigit():
                j += 1
                while j < n and text[j].isdigit():
                    j += 1
            tokens.append(Token("NUM", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(Token("IDENT", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if ch in "+-.*":
            tokens.append(Token("OP", ch, line, col))
        elif ch == "(":
            tokens.append(Token("LPAREN", ch, line, col))
        elif ch == ")":
            tokens.append(Token("RPAREN", ch, line, col))
        elif ch == ",":
            tokens.append(Token("COMMA", ch, line, col))
        else:
            raise ParseError(f"unexpected character {ch!r}", line, col)
        i += 1
        col += 1
    tokens.append(Token("END", "", line, col))
    return tokens


# -- parser ------------------------------------------------------------------


class _Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.pos = 0

    @property
    def cur(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.cur
        self.pos += 1
        return tok

    def expect(self, kind: str) -> Token:
        if self.cur.kind != kind:
            raise ParseError(
                f"expected {kind}, found {self.cur.text or 'end of input'!r}",
                self.cur.line,
                self.cur.col,
            )
        return self.advance()

    def parse(self):
        node = self.expr()
        if self.cur.kind != "END":
            raise ParseError(
                f"trailing input {self.cur.text!r}", self.cur.line, self.cur.col
            )
        return node

    def expr(self):
        node = self.term()
        while self.cur.kind == "OP" and self.cur.text in "+-":
            op = self.advance().text
            node = Bin(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        chain_op = None
        while self.cur.kind == "OP" and self.cur.text in ".*":
            tok = self.advance()
            if chain_op is None:
                chain_op = tok.text
            elif tok.text != chain_op:
                raise ParseError(
                    "mixed '.' and '*' in one chain; add parentheses",
                    tok.line,
                    tok.col,
                )
            node = Bin(tok.text, node, self.unary())
        return node

    def unary(self):
        if self.cur.kind == "OP" and self.cur.text == "-":
            self.advance()
            return Neg(self.unary())
        return self.atom()

    def atom(self):
        tok = self.cur
        if tok.kind == "NUM":
            self.advance()
            return Lit(Fraction(tok.text))
        if tok.kind == "IDENT":
            self.advance()
            if self.cur.kind == "LPAREN":
                if tok.text not in FUNCTIONS:
                    raise ParseError(
                        f"unknown function {tok.text!r}", tok.line, tok.col
                    )
                self.advance()
                args = [self.expr()]
                while self.cur.kind == "COMMA":
                    self.advance()
                    args.append(self.expr())
                self.expect("RPAREN")
                want = FUNCTIONS[tok.text]
                if len(args) != want:
                    raise ParseError(
                        f"{tok.text} takes {want} argument(s), got {len(args)}",
                        tok.line,
                        tok.col,
                    )
                return Call(tok.text, tuple(args))
            return Name(tok.text)
        if tok.kind == "LPAREN":
            self.advance()
            node = self.expr()
            self.expect("RPAREN")
            return node
        raise ParseError(
            f"expected a value, found {tok.text or 'end of input'!r}",
            tok.line,
            tok.col,
        )


def parse(text: str):
    return _Parser(text).parse()


# -- printer ------------------------------------------------------------------


def to_text(node) -> str:
    def wrap(child, need_parens: bool) -> str:
        s = render(child)
        return f"({s})" if need_parens else s

    def render(nd) -> str:
        if isinstance(nd, Lit):
            return str(nd.value)
        if isinstance(nd, Name):
            return nd.name
        if isinstance(nd, Neg):
            return "-" + wrap(nd.arg, isinstance(nd.arg, Bin))
        if isinstance(nd, Call):
            return f"{nd.fn}({', '.join(render(a) for a in nd.args)})"
        if isinstance(nd, Bin):
            if nd.op in "+-":
                left = wrap(nd.left, False)
                right = wrap(nd.right, isinstance(nd.right, Bin) and nd.right.op in "+-")
                return f"{left} {nd.op} {right}"
            left = wrap(
                nd.left,
                isinstance(nd.left, Bin)
                and (nd.left.op in "+-" or nd.left.op != nd.op),
            )
            right = wrap(nd.right, isinstance(nd.right, Bin))
            return f"{left} {nd.op} {right}"
        raise TypeError(f"not an expression node: {nd!r}")

    return render(node)


# -- evaluator -----------------------------------------------------------------


class EvalEnv:
    """Name bindings for evaluation: a model context, named polarizations,
    and named endomorphisms validated against the primary polarization."""

    def __init__(self, ctx, polarizations, endomorphisms=None):
        self.ctx = ctx
        self.pols = dict(polarizations)
        self.endos = dict(endomorphisms or {})


def _as_class(env: EvalEnv, value):
    if isinstance(value, ExtClass):
        return value
    if isinstance(value, Fraction):
        return env.ctx.unit().scale(value)
    raise EvalError(f"expected a class, got {value!r}")


def _as_int(value, what: str) -> int:
    if isinstance(value, Fraction) and value.denominator == 1:
        return int(value)
    raise EvalError(f"{what} must be an integer, got {value!r}")


def eval_expr(node, env: EvalEnv):
    """Evaluate to an ExtClass, a Fraction, or an int (operator orders)."""
    try:
        return _eval(node, env)
    except EvalError:
        raise
    except ChowkitError as err:
        raise EvalError(str(err), where=to_text(node)) from err


def _name_value(nd: Name, env: EvalEnv):
    name = nd.name
    if name == "one":
        return env.ctx.unit()
    if name == "pt":
        return env.ctx.point()
    m = _GEN_RE.match(name)
    if m:
        idx = int(m.group(2))
        if not 1 <= idx <= env.ctx.g:
            raise EvalError(
                f"generator {name} out of range for g = {env.ctx.g}", where=name
            )
        return env.ctx.gen(name)
    if name in env.pols:
        return env.pols[name].d
    if name in env.endos:
        raise EvalError(
            f"{name} names an endomorphism; use L({name}) or N({name})",
            where=name,
        )
    raise EvalError(f"unknown name {name!r}", where=name)


def _eval(node, env: EvalEnv):
    if isinstance(node, Lit):
        return node.value
    if isinstance(node, Name):
        return _name_value(node, env)
    if isinstance(node, Neg):
        v = _eval(node.arg, env)
        if isinstance(v, int):
            v = Fraction(v)
        return -v
    if isinstance(node, Bin):
        left = _eval(node.left, env)
        right = _eval(node.right, env)
        if isinstance(left, int):
            left = Fraction(left)
        if isinstance(right, int):
            right = Fraction(right)
        if node.op in "+-":
            if isinstance(left, ExtClass) or isinstance(right, ExtClass):
                left = _as_class(env, left)
                right = _as_class(env, right)
            return left + right if node.op == "+" else left - right
        # products: scalars scale, classes multiply
        if isinstance(left, Fraction) and isinstance(right, Fraction):
            return left * right
        if isinstance(left, Fraction):
            return right.scale(left)
        if isinstance(right, Fraction):
            return left.scale(right)
        if node.op == ".":
            return wedge(left, right)
        return pontryagin(left, right)
    if isinstance(node, Call):
        return _eval_call(node, env)
    raise EvalError(f"cannot evaluate {node!r}")


def _require_pol(node: Call, env: EvalEnv, arg):
    if not isinstance(arg, Name) or arg.name not in env.pols:
        raise EvalError(
            f"first argument of {node.fn} must name a polarization",
            where=to_text(node),
        )
    return env.pols[arg.name]


def _eval_call(node: Call, env: EvalEnv):
    fn = node.fn
    try:
        if fn == "exp":
            return exp_class(_as_class(env, _eval(node.args[0], env)))
        if fn == "F":
            pol = _require_pol(node, env, node.args[0])
            return fourier(pol, _as_class(env, _eval(node.args[1], env)))
        if fn == "bracket":
            pol = _require_pol(node, env, node.args[0])
            return bracket_xi(
                pol,
                _as_class(env, _eval(node.args[1], env)),
                _as_class(env, _eval(node.args[2], env)),
            )
        if fn in ("push", "pull"):
            n = _as_int(_eval(node.args[0], env), f"first argument of {fn}")
            x = _as_class(env, _eval(node.args[1], env))
            return pushforward_scalar(n, x) if fn == "push" else pullback_scalar(n, x)
        if fn in ("L", "N"):
            arg = node.args[0]
            if not isinstance(arg, Name) or arg.name not in env.endos:
                raise EvalError(
                    f"argument of {fn} must name an endomorphism",
                    where=to_text(node),
                )
            from .nsjordan import L_of, N_of

            endo = env.endos[arg.name]
            return L_of(endo) if fn == "L" else N_of(endo)
        if fn in ("order_cup", "order_pon"):
            x = _as_class(env, _eval(node.args[0], env))
            from .operators import diff_order, op_mul_cup, op_mul_pontryagin

            if fn == "order_pon":
                return diff_order(op_mul_cup(x), "pontryagin", env.ctx)
            return diff_order(op_mul_pontryagin(x), "cup", env.ctx)
    except EvalError:
        raise
    except ChowkitError as err:
        raise EvalError(str(err), where=to_text(node)) from err
    raise EvalError(f"unknown function {fn!r}", where=to_text(node))
