"""Propositional guard formulas: parsing, evaluation, and canonical printing.

Guards label the edges of reward machines and are evaluated against the set
of atomic propositions that hold on a single transition.  The grammar is
whitespace-insensitive, `!` binds tighter than `&`, which binds tighter than
`|`, and binary operators are left-associative:

    formula := or
    or      := and ('|' and)*
    and     := unary ('&' unary)*
    unary   := '!' unary | '(' formula ')' | atom | 'true' | 'false'

The glyph `⊤` is accepted as an alias for `true`.  Atoms are lowercase
identifiers and must belong to the alphabet declared alongside the formula;
unknown atoms are an error, never implicitly created.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence, Union

from .errors import PluralismError

_NAME_RE = re.compile(r"[a-z][a-z0-9_]*")


class FormulaSyntaxError(PluralismError):
    """Guard text does not conform to the grammar."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class UnknownAtomError(PluralismError):
    """A guard mentions an atom outside the declared alphabet."""

    def __init__(self, name: str, position: int):
        super().__init__(f"unknown atom '{name}' at position {position}")
        self.name = name
        self.position = position


@dataclass(frozen=True)
class Atom:
    name: str


@dataclass(frozen=True)
class Not:
    operand: "PropFormula"


@dataclass(frozen=True)
class And:
    left: "PropFormula"
    right: "PropFormula"


@dataclass(frozen=True)
class Or:
    left: "PropFormula"
    right: "PropFormula"


@dataclass(frozen=True)
class ConstTrue:
    pass


@dataclass(frozen=True)
class ConstFalse:
    pass


PropFormula = Union[Atom, Not, And, Or, ConstTrue, ConstFalse]

TRUE = ConstTrue()
FALSE = ConstFalse()

# A valuation is the set of atom names that are true at one step.
Valuation = frozenset


def is_proposition_name(name: str) -> bool:
    return bool(_NAME_RE.fullmatch(name))


def check_alphabet(names: Iterable[str]) -> tuple[str, ...]:
    """Validate proposition names and reject duplicates; returns them as a tuple."""
    out: list[str] = []
    seen: set[str] = set()
    for name in names:
        if not is_proposition_name(name):
            raise ValueError(f"invalid proposition name '{name}'")
        if name in seen:
            raise ValueError(f"duplicate proposition '{name}' in alphabet")
        seen.add(name)
        out.append(name)
    return tuple(out)


class _Parser:
    def __init__(self, text: str, atoms: frozenset):
        self.text = text
        self.atoms = atoms
        self.pos = 0

    def _skip_ws(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def _peek(self) -> str:
        self._skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def parse_or(self) -> PropFormula:
        node = self.parse_and()
        while self._peek() == "|":
            self.pos += 1
            node = Or(node, self.parse_and())
        return node

    def parse_and(self) -> PropFormula:
        node = self.parse_unary()
        while self._peek() == "&":
            self.pos += 1
            node = And(node, self.parse_unary())
        return node

    def parse_unary(self) -> PropFormula:
        ch = self._peek()
        if ch == "!":
            self.pos += 1
            return Not(self.parse_unary())
        if ch == "(":
            self.pos += 1
            node = self.parse_or()
            if self._peek() != ")":
                raise FormulaSyntaxError("expected ')'", self.pos)
            self.pos += 1
            return node
        if ch == "⊤":
            self.pos += 1
            return TRUE
        m = _NAME_RE.match(self.text, self.pos)
        if m is None:
            raise FormulaSyntaxError("expected atom, 'true', 'false', '!' or '('", self.pos)
        self.pos = m.end()
        name = m.group()
        if name == "true":
            return TRUE
        if name == "false":
            return FALSE
        if name not in self.atoms:
            raise UnknownAtomError(name, m.start())
        return Atom(name)

    def expect_end(self) -> None:
        self._skip_ws()
        if self.pos < len(self.text):
            raise FormulaSyntaxError(f"unexpected '{self.text[self.pos]}'", self.pos)


def parse_formula(text: str, alphabet: Iterable[str]) -> PropFormula:
    """Parse guard text over the given alphabet.

    Raises FormulaSyntaxError for malformed input (with the offending
    position) and UnknownAtomError for atoms outside the alphabet.
    """
    parser = _Parser(text, frozenset(alphabet))
    node = parser.parse_or()
    parser.expect_end()
    return node


def eval_formula(formula: PropFormula, valuation) -> bool:
    """Standard propositional semantics against a set of true atom names."""
    if isinstance(formula, Atom):
        return formula.name in valuation
    if isinstance(formula, Not):
        return not eval_formula(formula.operand, valuation)
    if isinstance(formula, And):
        return eval_formula(formula.left, valuation) and eval_formula(formula.right, valuation)
    if isinstance(formula, Or):
        return eval_formula(formula.left, valuation) or eval_formula(formula.right, valuation)
    if isinstance(formula, ConstTrue):
        return True
    if isinstance(formula, ConstFalse):
        return False
    raise TypeError(f"not a formula: {formula!r}")


def print_formula(formula: PropFormula) -> str:
    """Canonical text form; parse_formula(print_formula(f), ...) is structurally f."""
    if isinstance(formula, Atom):
        return formula.name
    if isinstance(formula, ConstTrue):
        return "true"
    if isinstance(formula, ConstFalse):
        return "false"
    if isinstance(formula, Not):
        return "!" + print_formula(formula.operand)
    if isinstance(formula, And):
        return f"({print_formula(formula.left)} & {print_formula(formula.right)})"
    if isinstance(formula, Or):
        return f"({print_formula(formula.left)} | {print_formula(formula.right)})"
    raise TypeError(f"not a formula: {formula!r}")


def formula_atoms(formula: PropFormula) -> frozenset:
    """The set of atom names occurring in the formula."""
    if isinstance(formula, Atom):
        return frozenset((formula.name,))
    if isinstance(formula, Not):
        return formula_atoms(formula.operand)
    if isinstance(formula, (And, Or)):
        return formula_atoms(formula.left) | formula_atoms(formula.right)
    return frozenset()


def all_valuations(alphabet: Sequence[str]) -> Iterator[frozenset]:
    """All 2^n valuations over the alphabet, in binary-counting order."""
    atoms = list(alphabet)
    for bits in itertools.product((False, True), repeat=len(atoms)):
        yield frozenset(a for a, b in zip(atoms, bits) if b)


def format_valuation(valuation) -> str:
    return "{" + ",".join(sorted(valuation)) + "}"
