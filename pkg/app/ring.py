"""Усечённые степенные ряды k[[x_1..x_v]] / n^cap, парсер выражений, замены координат."""
import itertools
import math
import re
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Dict, List, Sequence, Tuple, Union

from .errors import ParseError, ValidationError
from .exact_arith import DEFAULT_P, PrimeField, inverse_mod

Monomial = Tuple[int, ...]
Order = Union[int, float]

ORDER_INF = math.inf
_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


@dataclass(frozen=True)
class RingSpec:
    names: Tuple[str, ...]
    p: int = DEFAULT_P
    cap: int = 12

    def __post_init__(self):
        if len(self.names) < 1:
            raise ValidationError("ring needs at least one variable")
        if len(set(self.names)) != len(self.names):
            raise ValidationError(f"variable names are not distinct: {self.names}")
        for name in self.names:
            if not _NAME.match(name):
                raise ValidationError(f"bad variable name {name!r}")
        if self.cap < 2:
            raise ValidationError(f"cap must be >= 2, got {self.cap}")
        PrimeField(self.p)

    @property
    def v(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise ValidationError(f"unknown variable {name!r}")

    def with_cap(self, cap: int) -> "RingSpec":
        return RingSpec(self.names, self.p, cap)

    def without(self, name: str) -> "RingSpec":
        return RingSpec(tuple(n for n in self.names if n != name), self.p, self.cap)


@lru_cache(maxsize=None)
def graded_monomials(v: int, d: int) -> Tuple[Monomial, ...]:
    # combinations_with_replacement даёт graded lex: для d=1 это x, y, z, t
    out = []
    for combo in itertools.combinations_with_replacement(range(v), d):
        exps = [0] * v
        for k in combo:
            exps[k] += 1
        out.append(tuple(exps))
    return tuple(out)


def graded_basis(d: int, spec: RingSpec) -> List[Monomial]:
    if d < 0 or d >= spec.cap:
        raise ValidationError(f"degree {d} outside [0, {spec.cap})")
    return list(graded_monomials(spec.v, d))


def _sort_key(item: Tuple[Monomial, int]):
    mono = item[0]
    return (sum(mono), tuple(-e for e in mono))


@dataclass(frozen=True)
class TruncPoly:
    spec: RingSpec
    terms: Tuple[Tuple[Monomial, int], ...] = ()

    @classmethod
    def from_dict(cls, spec: RingSpec, coeffs: Dict[Monomial, int]) -> "TruncPoly":
        items = []
        for mono, c in coeffs.items():
            if len(mono) != spec.v:
                raise ValidationError(f"monomial {mono} has wrong arity for {spec.names}")
            c %= spec.p
            if c and sum(mono) < spec.cap:
                items.append((tuple(mono), c))
        items.sort(key=_sort_key)
        return cls(spec, tuple(items))

    @classmethod
    def zero(cls, spec: RingSpec) -> "TruncPoly":
        return cls(spec, ())

    @classmethod
    def constant(cls, spec: RingSpec, c: int) -> "TruncPoly":
        return cls.from_dict(spec, {(0,) * spec.v: c})

    @classmethod
    def variable(cls, spec: RingSpec, name: str) -> "TruncPoly":
        exps = [0] * spec.v
        exps[spec.index(name)] = 1
        return cls.from_dict(spec, {tuple(exps): 1})

    @classmethod
    def linear_form(cls, spec: RingSpec, coeffs: Sequence[int]) -> "TruncPoly":
        if len(coeffs) != spec.v:
            raise ValidationError(f"{len(coeffs)} coefficients for {spec.v} variables")
        out = {}
        for k, c in enumerate(coeffs):
            exps = [0] * spec.v
            exps[k] = 1
            out[tuple(exps)] = int(c)
        return cls.from_dict(spec, out)

    @cached_property
    def as_dict(self) -> Dict[Monomial, int]:
        return dict(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    @property
    def order(self) -> Order:
        """v_Q элемента; для нуля бесконечность."""
        if not self.terms:
            return ORDER_INF
        return sum(self.terms[0][0])

    @property
    def degree(self) -> int:
        if not self.terms:
            return -1
        return max(sum(m) for m, _ in self.terms)

    def coefficient(self, mono: Monomial) -> int:
        return self.as_dict.get(tuple(mono), 0)

    def constant_term(self) -> int:
        return self.coefficient((0,) * self.spec.v)

    def linear_coefficients(self) -> List[int]:
        if self.is_zero() or any(sum(m) != 1 for m, _ in self.terms):
            raise ValidationError(f"{self} is not a nonzero linear form")
        coeffs = [0] * self.spec.v
        for mono, c in self.terms:
            coeffs[mono.index(1)] = c
        return coeffs

    def with_cap(self, cap: int) -> "TruncPoly":
        return TruncPoly.from_dict(self.spec.with_cap(cap), self.as_dict)

    def _check(self, other: "TruncPoly"):
        if other.spec != self.spec:
            raise ValidationError(f"ring mismatch: {self.spec} vs {other.spec}")

    def _lift(self, other) -> "TruncPoly":
        if isinstance(other, TruncPoly):
            self._check(other)
            return other
        if isinstance(other, int):
            return TruncPoly.constant(self.spec, other)
        return NotImplemented

    def __add__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        out = dict(self.as_dict)
        for mono, c in other.terms:
            out[mono] = out.get(mono, 0) + c
        return TruncPoly.from_dict(self.spec, out)

    __radd__ = __add__

    def __neg__(self):
        return TruncPoly(self.spec, tuple((m, (-c) % self.spec.p) for m, c in self.terms))

    def __sub__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c: int) -> "TruncPoly":
        c %= self.spec.p
        if c == 0:
            return TruncPoly.zero(self.spec)
        return TruncPoly(self.spec, tuple((m, (x * c) % self.spec.p) for m, x in self.terms))

    def __mul__(self, other):
        if isinstance(other, int):
            return self.scale(other)
        if not isinstance(other, TruncPoly):
            return NotImplemented
        return poly_mul_trunc(self, other)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "TruncPoly":
        if n < 0:
            raise ValidationError("negative exponent")
        result = TruncPoly.constant(self.spec, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
            if result.is_zero():
                break
        return result

    def inverse(self) -> "TruncPoly":
        """Обратный к единице ряд: c^-1 * sum w^k, w = 1 - c^-1 u."""
        c = self.constant_term()
        if c == 0:
            raise ValidationError(f"{self} is not a unit")
        c_inv = inverse_mod(c, self.spec.p)
        one = TruncPoly.constant(self.spec, 1)
        w = one - self.scale(c_inv)
        total, power = one, one
        for _ in range(self.spec.cap):
            power = power * w
            if power.is_zero():
                break
            total = total + power
        return total.scale(c_inv)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        half = self.spec.p // 2
        parts = []
        for mono, c in self.terms:
            s = c - self.spec.p if c > half else c
            factors = []
            for name, e in zip(self.spec.names, mono):
                if e == 1:
                    factors.append(name)
                elif e > 1:
                    factors.append(f"{name}^{e}")
            body = "*".join(factors)
            mag = abs(s)
            if not body:
                text = str(mag)
            elif mag == 1:
                text = body
            else:
                text = f"{mag}*{body}"
            parts.append(("-" if s < 0 else "+", text))
        sign, first = parts[0]
        out = ("-" if sign == "-" else "") + first
        for sign, text in parts[1:]:
            out += f" {sign} {text}"
        return out


def poly_mul_trunc(a: TruncPoly, b: TruncPoly) -> TruncPoly:
    if a.spec != b.spec:
        raise ValidationError(f"ring mismatch: {a.spec} vs {b.spec}")
    spec = a.spec
    if a.is_zero() or b.is_zero() or a.order + b.order >= spec.cap:
        return TruncPoly.zero(spec)
    out: Dict[Monomial, int] = {}
    p, cap = spec.p, spec.cap
    for ma, ca in a.terms:
        da = sum(ma)
        for mb, cb in b.terms:
            if da + sum(mb) >= cap:
                # термы отсортированы по степени
                break
            mono = tuple(x + y for x, y in zip(ma, mb))
            out[mono] = (out.get(mono, 0) + ca * cb) % p
    return TruncPoly.from_dict(spec, out)


# --- парсер выражений ------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z0-9_]*)|(\S))")


class _Parser:
    """Рекурсивный спуск:

    expr   := term (("+" | "-") term)*
    term   := unary ("*" unary)*
    unary  := ("-" | "+") unary | power
    power  := atom ("^" INT)?
    atom   := INT | NAME | "(" expr ")"
    """

    def __init__(self, text: str, spec: RingSpec):
        self.text = text
        self.spec = spec
        self.tokens: List[Tuple[str, str, int]] = []
        pos = 0
        while True:
            m = _TOKEN.match(text, pos)
            if m is None:
                break
            if m.group(1) is not None:
                self.tokens.append(("int", m.group(1), m.start(1)))
            elif m.group(2) is not None:
                self.tokens.append(("name", m.group(2), m.start(2)))
            else:
                self.tokens.append(("op", m.group(3), m.start(3)))
            pos = m.end()
        self.tokens.append(("end", "", len(text)))
        self.i = 0

    def peek(self) -> Tuple[str, str, int]:
        return self.tokens[self.i]

    def take(self) -> Tuple[str, str, int]:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, op: str):
        kind, value, pos = self.take()
        if kind != "op" or value != op:
            raise ParseError(f"expected {op!r}, found {value or 'end of input'!r}", pos)

    def parse(self) -> TruncPoly:
        result = self.expr()
        kind, value, pos = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected {value!r}", pos)
        return result

    def expr(self) -> TruncPoly:
        left = self.term()
        while True:
            kind, value, _ = self.peek()
            if kind == "op" and value in "+-":
                self.take()
                right = self.term()
                left = left + right if value == "+" else left - right
            else:
                return left

    def term(self) -> TruncPoly:
        left = self.unary()
        while self.peek()[0] == "op" and self.peek()[1] == "*":
            self.take()
            left = left * self.unary()
        return left

    def unary(self) -> TruncPoly:
        kind, value, _ = self.peek()
        if kind == "op" and value in "+-":
            self.take()
            inner = self.unary()
            return -inner if value == "-" else inner
        return self.power()

    def power(self) -> TruncPoly:
        base = self.atom()
        kind, value, _ = self.peek()
        if kind == "op" and value == "^":
            self.take()
            kind, value, pos = self.take()
            if kind != "int":
                raise ParseError("exponent must be a non-negative integer", pos)
            base = base ** int(value)
            nkind, nvalue, npos = self.peek()
            if nkind == "op" and nvalue == "^":
                raise ParseError("chained exponents are not allowed", npos)
        return base

    def atom(self) -> TruncPoly:
        kind, value, pos = self.take()
        if kind == "int":
            return TruncPoly.constant(self.spec, int(value))
        if kind == "name":
            if value not in self.spec.names:
                raise ParseError(f"unknown identifier {value!r}", pos)
            return TruncPoly.variable(self.spec, value)
        if kind == "op" and value == "(":
            inner = self.expr()
            self.expect(")")
            return inner
        raise ParseError(f"unexpected {value or 'end of input'!r}", pos)


def parse_poly(text: str, spec: RingSpec) -> TruncPoly:
    if not isinstance(text, str):
        raise ParseError(f"expression must be a string, got {type(text).__name__}")
    return _Parser(text, spec).parse()


# --- замены координат ------------------------------------------------------

@dataclass(frozen=True)
class Substitution:
    source: RingSpec
    target: RingSpec
    images: Tuple[TruncPoly, ...]
    eliminated: str

    def apply(self, poly: TruncPoly) -> TruncPoly:
        if poly.spec != self.source:
            raise ValidationError(f"substitution expects ring {self.source.names}")
        powers: Dict[Tuple[int, int], TruncPoly] = {}

        def power(k: int, e: int) -> TruncPoly:
            key = (k, e)
            if key not in powers:
                powers[key] = self.images[k] ** e
            return powers[key]

        total = TruncPoly.zero(self.target)
        for mono, c in poly.terms:
            term = TruncPoly.constant(self.target, c)
            for k, e in enumerate(mono):
                if e:
                    term = term * power(k, e)
                    if term.is_zero():
                        break
            total = total + term
        return total


def eliminate_linear_form(spec: RingSpec, form: TruncPoly) -> Tuple[RingSpec, Substitution]:
    """Q -> Q/(form): выражаем последнюю переменную с ненулевым коэффициентом."""
    if form.spec != spec:
        raise ValidationError("form does not belong to the ring")
    coeffs = form.linear_coefficients()
    if spec.v < 2:
        raise ValidationError("cannot eliminate the only variable")
    j = max(k for k, c in enumerate(coeffs) if c)
    eliminated = spec.names[j]
    target = spec.without(eliminated)
    c_inv = inverse_mod(coeffs[j], spec.p)
    images = []
    for k, name in enumerate(spec.names):
        if k != j:
            images.append(TruncPoly.variable(target, name))
            continue
        solved = {}
        for kk, other in enumerate(spec.names):
            if kk == j or not coeffs[kk]:
                continue
            exps = [0] * target.v
            exps[target.index(other)] = 1
            solved[tuple(exps)] = -coeffs[kk] * c_inv
        images.append(TruncPoly.from_dict(target, solved))
    return target, Substitution(spec, target, tuple(images), eliminated)


def embed_poly(poly: TruncPoly, spec: RingSpec) -> TruncPoly:
    """Перенос по именам переменных в кольцо с большим набором переменных."""
    src = poly.spec
    if src.p != spec.p:
        raise ValidationError("rings over different primes")
    slots = [spec.index(name) for name in src.names]
    out = {}
    for mono, c in poly.terms:
        exps = [0] * spec.v
        for k, e in zip(slots, mono):
            exps[k] = e
        out[tuple(exps)] = c
    return TruncPoly.from_dict(spec, out)


def determinant(matrix: Sequence[Sequence[TruncPoly]]) -> TruncPoly:
    """Определитель по формуле Лейбница (t <= 4-5 в наших примерах)."""
    t = len(matrix)
    if t == 0 or any(len(row) != t for row in matrix):
        raise ValidationError("determinant of a non-square matrix")
    spec = matrix[0][0].spec
    total = TruncPoly.zero(spec)
    for perm in itertools.permutations(range(t)):
        inversions = sum(1 for a in range(t) for b in range(a + 1, t) if perm[a] > perm[b])
        term = TruncPoly.constant(spec, -1 if inversions % 2 else 1)
        for row, col in enumerate(perm):
            term = term * matrix[row][col]
            if term.is_zero():
                break
        total = total + term
    return total
