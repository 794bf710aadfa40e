"""Formulas over the cipher operations, and their encrypted evaluation.

Grammar (whitespace insensitive)::

    expr   := term {"+" term}
    term   := factor {"*" factor}
    factor := NAME | INTEGER | NAME "(" expr "," expr ")" | "(" expr ")"

Call names: XOR, AND, G1, G2, G3, G4, GLIN, and STAR as an alias for G1.
GLIN stands for a linear two-variable map whose coefficients are supplied
at evaluation time (normally by the key).

A formula built from operations a key respects can be evaluated on
ciphertexts: encrypt the environment (and any literals), run the same
formula, decrypt once at the end.  `encrypted_eval_demo` performs the whole
round trip and reports whether the decrypted result matches the plain one,
after first refusing formulas that use an operation the key does not
respect.
"""

from __future__ import annotations

from dataclasses import dataclass

from .analysis import OpSymbol, ADD, MUL, XOR, AND, homomorphism_test, op_apply
from .ciphers import (
    AdditiveKey,
    AndKey,
    CipherKey,
    FheKey,
    G1,
    G2,
    G3,
    G4,
    LinearG,
    MultiplicativeKey,
    XorKey,
    decrypt,
    encrypt,
)
from .core import DomainError, FormatError, PadicContext, PadicError, PadicInt


class FormulaSyntaxError(FormatError):
    def __init__(self, message: str, position: int) -> None:
        super().__init__(f"{message} (at position {position})")
        self.position = position


class UnknownOperationError(FormatError):
    """Call to a name that is not one of the known operations."""


class ArityError(FormatError):
    """Operation call with the wrong number of arguments."""


class UnboundVariableError(DomainError):
    """Evaluation met a variable missing from the environment."""


class IncompatibleFormulaError(PadicError):
    """The formula uses an operation the key does not respect."""


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Lit:
    value: PadicInt


@dataclass(frozen=True)
class App:
    op: OpSymbol
    left: "Node"
    right: "Node"


Node = Var | Lit | App

_CALL_NAMES = {
    "XOR": XOR,
    "AND": AND,
    "STAR": OpSymbol("G", G1()),
    "G1": OpSymbol("G", G1()),
    "G2": OpSymbol("G", G2()),
    "G3": OpSymbol("G", G3()),
    "G4": OpSymbol("G", G4()),
    "GLIN": OpSymbol("G"),
}


# -- lexing / parsing ------------------------------------------------------------


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
        elif c.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            tokens.append(("INT", text[i:j], i))
            i = j
        elif c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(("NAME", text[i:j], i))
            i = j
        elif c in "+*(),":
            kind = {"+": "PLUS", "*": "TIMES", "(": "LPAREN", ")": "RPAREN", ",": "COMMA"}[c]
            tokens.append((kind, c, i))
            i += 1
        else:
            raise FormulaSyntaxError(f"unexpected character {c!r}", i)
    tokens.append(("END", "", n))
    return tokens


class _Parser:
    def __init__(self, text: str, ctx: PadicContext) -> None:
        self.tokens = _tokenize(text)
        self.pos = 0
        self.ctx = ctx

    def peek(self) -> tuple[str, str, int]:
        return self.tokens[self.pos]

    def take(self, kind: str) -> tuple[str, str, int]:
        tok = self.tokens[self.pos]
        if tok[0] != kind:
            raise FormulaSyntaxError(
                f"expected {kind}, found {tok[1] or 'end of input'!r}", tok[2]
            )
        self.pos += 1
        return tok

    def parse(self) -> Node:
        node = self.expr()
        tok = self.peek()
        if tok[0] != "END":
            raise FormulaSyntaxError(f"unexpected {tok[1]!r} after formula", tok[2])
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.peek()[0] == "PLUS":
            self.take("PLUS")
            node = App(ADD, node, self.term())
        return node

    def term(self) -> Node:
        node = self.factor()
        while self.peek()[0] == "TIMES":
            self.take("TIMES")
            node = App(MUL, node, self.factor())
        return node

    def factor(self) -> Node:
        kind, text, at = self.peek()
        if kind == "INT":
            self.take("INT")
            return Lit(PadicInt(self.ctx, int(text) % self.ctx.modulus))
        if kind == "LPAREN":
            self.take("LPAREN")
            node = self.expr()
            self.take("RPAREN")
            return node
        if kind == "NAME":
            self.take("NAME")
            if self.peek()[0] != "LPAREN":
                return Var(text)
            if text not in _CALL_NAMES:
                raise UnknownOperationError(
                    f"unknown operation {text!r}; expected one of "
                    f"{', '.join(sorted(_CALL_NAMES))}"
                )
            self.take("LPAREN")
            left = self.expr()
            if self.peek()[0] == "RPAREN":
                raise ArityError(f"{text} takes two arguments, got one")
            self.take("COMMA")
            right = self.expr()
            if self.peek()[0] == "COMMA":
                raise ArityError(f"{text} takes two arguments, got more")
            self.take("RPAREN")
            return App(_CALL_NAMES[text], left, right)
        raise FormulaSyntaxError(f"expected a value, found {text or 'end of input'!r}", at)


def parse(text: str, ctx: PadicContext) -> Node:
    return _Parser(text, ctx).parse()


def to_text(node: Node) -> str:
    """Render with the fewest parentheses that re-parse to the same tree."""

    def go(n: Node, floor: int) -> str:
        if isinstance(n, Var):
            return n.name
        if isinstance(n, Lit):
            return str(n.value.value)
        if n.op.kind == "ADD":
            s, prec = f"{go(n.left, 1)} + {go(n.right, 2)}", 1
        elif n.op.kind == "MUL":
            s, prec = f"{go(n.left, 2)} * {go(n.right, 3)}", 2
        else:
            return f"{n.op.name}({go(n.left, 1)}, {go(n.right, 1)})"
        return f"({s})" if prec < floor else s

    return go(node, 1)


# -- evaluation -------------------------------------------------------------------


def vars_used(node: Node) -> frozenset[str]:
    if isinstance(node, Var):
        return frozenset((node.name,))
    if isinstance(node, Lit):
        return frozenset()
    return vars_used(node.left) | vars_used(node.right)


def ops_used(node: Node) -> frozenset[OpSymbol]:
    if isinstance(node, App):
        return ops_used(node.left) | ops_used(node.right) | {node.op}
    return frozenset()


def evaluate(
    node: Node, env: dict[str, PadicInt], linear_g: LinearG | None = None
) -> PadicInt:
    if isinstance(node, Var):
        try:
            return env[node.name]
        except KeyError:
            raise UnboundVariableError(f"variable {node.name!r} is not bound") from None
    if isinstance(node, Lit):
        return node.value
    left = evaluate(node.left, env, linear_g)
    right = evaluate(node.right, env, linear_g)
    return op_apply(node.op, left, right, linear_g)


# -- key compatibility --------------------------------------------------------------


def _op_compatible(op: OpSymbol, key: CipherKey) -> bool:
    if isinstance(key, AdditiveKey):
        return op.kind == "ADD" or (op.kind == "G" and isinstance(op.g, LinearG))
    if isinstance(key, MultiplicativeKey):
        return op.kind == "MUL"
    if isinstance(key, XorKey):
        return op.kind == "XOR"
    if isinstance(key, AndKey):
        return op.kind == "AND"
    if isinstance(key, FheKey):
        if op.kind == "ADD":
            return True
        if op.kind != "G":
            return False
        if op.g is None:
            return isinstance(key.g, LinearG)
        return op.g == key.g or isinstance(op.g, LinearG)
    raise DomainError(f"unknown key type {type(key).__name__}")


def compatibility_check(node: Node, key: CipherKey) -> None:
    """Raise IncompatibleFormulaError naming the first unusable operation."""
    if isinstance(node, App):
        if not _op_compatible(node.op, key):
            raise IncompatibleFormulaError(
                f"a {key.family} key does not respect {node.op.name}"
            )
        compatibility_check(node.left, key)
        compatibility_check(node.right, key)


def _key_linear_g(key: CipherKey) -> LinearG | None:
    if isinstance(key, FheKey) and isinstance(key.g, LinearG):
        return key.g
    return None


def _encrypt_literals(node: Node, key: CipherKey) -> Node:
    if isinstance(node, Lit):
        return Lit(encrypt(key, node.value))
    if isinstance(node, App):
        return App(
            node.op, _encrypt_literals(node.left, key), _encrypt_literals(node.right, key)
        )
    return node


def encrypted_eval_demo(
    node: Node,
    env: dict[str, PadicInt],
    key: CipherKey,
    *,
    law_trials: int = 64,
    seed: int = 0,
) -> dict:
    """Evaluate in the clear and through the cipher; report both results.

    Refuses formulas using operations outside the key's laws, then spot
    checks each used law on random pairs before trusting the round trip.
    """
    compatibility_check(node, key)
    linear_g = _key_linear_g(key)
    law_checks = {}
    for op in sorted(ops_used(node), key=lambda o: o.name):
        bound = OpSymbol("G", linear_g) if (op.kind == "G" and op.g is None) else op
        report = homomorphism_test(key, bound, seed=seed, trials=law_trials)
        law_checks[op.name] = report.verdict
        if report.verdict != "pass":
            raise DomainError(
                f"law check failed for {op.name} on this key "
                f"(witness {report.witness}); refusing to continue"
            )
    plain = evaluate(node, env, linear_g)
    enc_env = {name: encrypt(key, value) for name, value in env.items()}
    cipher = evaluate(_encrypt_literals(node, key), enc_env, linear_g)
    decrypted = decrypt(key, cipher)
    return {
        "plain": plain,
        "cipher": cipher,
        "decrypted": decrypted,
        "match": decrypted == plain,
        "law_checks": law_checks,
    }


# A three-variable showcase built entirely from + and one nonlinear G;
# suitable for fhe keys declared with G1.
DEMO_FORMULA = (
    "STAR(z, STAR(x, y)) + STAR(STAR(z, x), y) + "
    "STAR(STAR(x, x), STAR(y, y)) + STAR(x, STAR(STAR(x, y), y))"
)
