"""Конечномерная модель M/m^cap M для M = coker(phi) и исчисление подмодулей.

Координаты: V = Q^t / n^cap Q^t, столбцы по возрастанию степени, затем по
образующей, внутри степени graded lex. Соотношения приводятся к RREF; неопорные
столбцы (стандартные мономы) дают базис U = M/m^cap M, и m^n M в U является
координатным хвостом: стандартные мономы степени >= n. Все подмодули ниже живут
в координатах U, так что F_cap = 0.
"""
import bisect
import itertools
import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, TypeVar

import numpy as np

from .config import Config
from .errors import CapEscalationError, CapTooSmallError, IdentityError, ValidationError
from .exact_arith import SpanBuilder, Subspace, _matmul_mod, _row_reduce, joint_preimage
from .ring import (
    ORDER_INF,
    Monomial,
    RingSpec,
    TruncPoly,
    determinant,
    eliminate_linear_form,
    graded_monomials,
    parse_poly,
)

logger = logging.getLogger(__name__)

T = TypeVar("T")


@dataclass(frozen=True)
class Presentation:
    spec: RingSpec
    phi: Tuple[Tuple[TruncPoly, ...], ...]
    f: TruncPoly
    label: str = field(default="", compare=False)

    def __post_init__(self):
        if not self.phi or not self.phi[0]:
            raise ValidationError("empty presentation matrix")
        width = len(self.phi[0])
        for row in self.phi:
            if len(row) != width:
                raise ValidationError("presentation rows have different lengths")
            for entry in row:
                if entry.spec != self.spec:
                    raise ValidationError("presentation entry over a different ring")
                if entry.order == 0:
                    raise ValidationError(f"unit entry {entry} makes the presentation non-minimal")
        if self.f.spec != self.spec:
            raise ValidationError("f lives over a different ring")
        if self.f.order < 2:
            raise ValidationError(f"f={self.f} must lie in n^2")

    @classmethod
    def from_strings(
        cls, spec: RingSpec, phi: Sequence[Sequence[str]], f: str, label: str = ""
    ) -> "Presentation":
        rows = tuple(tuple(parse_poly(e, spec) for e in row) for row in phi)
        return cls(spec, rows, parse_poly(f, spec), label)

    @property
    def t(self) -> int:
        """Число образующих (строк)."""
        return len(self.phi)

    @property
    def n_cols(self) -> int:
        return len(self.phi[0])

    @property
    def is_square(self) -> bool:
        return self.t == self.n_cols

    def column(self, j: int) -> Tuple[TruncPoly, ...]:
        return tuple(row[j] for row in self.phi)

    def entries(self) -> List[TruncPoly]:
        return [e for row in self.phi for e in row]

    def map_entries(self, fn: Callable[[TruncPoly], TruncPoly], spec: RingSpec, label: str = "") -> "Presentation":
        phi = tuple(tuple(fn(e) for e in row) for row in self.phi)
        return Presentation(spec, phi, fn(self.f), label or self.label)

    def to_strings(self) -> List[List[str]]:
        return [[str(e) for e in row] for row in self.phi]


@dataclass(frozen=True)
class _Layout:
    v: int
    t: int
    cap: int
    monos: Tuple[Tuple[Monomial, ...], ...]
    index: Tuple[Dict[Monomial, int], ...]
    base: Tuple[int, ...]
    ambient_dim: int
    col_degree: np.ndarray
    col_info: Tuple[Tuple[int, int, Monomial], ...]

    def col(self, mono: Monomial, gen: int) -> int:
        d = sum(mono)
        return self.base[d] + gen * len(self.monos[d]) + self.index[d][mono]


@lru_cache(maxsize=None)
def _layout(v: int, t: int, cap: int) -> _Layout:
    monos = tuple(graded_monomials(v, d) for d in range(cap))
    index = tuple({m: i for i, m in enumerate(ms)} for ms in monos)
    base = [0]
    for d in range(cap):
        base.append(base[-1] + t * len(monos[d]))
    info = []
    degrees = []
    for d in range(cap):
        for gen in range(t):
            for mono in monos[d]:
                info.append((d, gen, mono))
                degrees.append(d)
    return _Layout(
        v, t, cap, monos, index, tuple(base), base[-1],
        np.array(degrees, dtype=np.int64), tuple(info),
    )


@dataclass(frozen=True, eq=False)
class TruncModule:
    pres: Presentation
    cap: int
    ambient_dim: int
    relations: Subspace
    standard: np.ndarray
    offsets: Tuple[int, ...]
    mult: Tuple[np.ndarray, ...]
    layout: _Layout = field(repr=False)
    _nf: np.ndarray = field(repr=False)
    _std_pos: np.ndarray = field(repr=False)
    _pivrow: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        """dim U = ℓ(M/m^cap M)."""
        return len(self.standard)

    @property
    def p(self) -> int:
        return self.pres.spec.p

    @property
    def spec(self) -> RingSpec:
        return self.pres.spec

    def length(self, n: int) -> int:
        """ℓ(M/m^n M) для 0 <= n <= cap."""
        return self.offsets[n]

    def graded_length(self, n: int) -> int:
        """ℓ(m^n M/m^{n+1} M)."""
        return self.offsets[n + 1] - self.offsets[n]

    def form_matrix(self, form: TruncPoly) -> np.ndarray:
        if form.spec.names != self.spec.names or form.spec.p != self.p:
            raise ValidationError(f"form {form} is not over the ring of {self.pres.label or 'M'}")
        coeffs = form.linear_coefficients()
        out = np.zeros((self.dim, self.dim), dtype=np.int64)
        for c, x in zip(coeffs, self.mult):
            if c:
                out = (out + c * x) % self.p
        return out

    def element_vector(self, column: Sequence[TruncPoly]) -> np.ndarray:
        """Нормальная форма элемента Q^t в координатах U."""
        if len(column) != self.pres.t:
            raise ValidationError(f"element needs {self.pres.t} components")
        vec = np.zeros(self.ambient_dim, dtype=np.int64)
        for gen, entry in enumerate(column):
            for mono, c in entry.terms:
                if sum(mono) < self.cap:
                    vec[self.layout.col(mono, gen)] += c
        vec = self.relations.reduce(vec)[0]
        return vec[self.standard] % self.p


def build_module(pres: Presentation, cap: int) -> TruncModule:
    if cap > pres.spec.cap:
        raise ValidationError(f"cap {cap} exceeds the ring truncation {pres.spec.cap}")
    if cap < 2:
        raise ValidationError("cap must be >= 2")
    return _build_module(pres, cap)


@lru_cache(maxsize=96)
def _build_module(pres: Presentation, cap: int) -> TruncModule:
    spec = pres.spec
    p = spec.p
    lay = _layout(spec.v, pres.t, cap)
    D = lay.ambient_dim

    rows_i: List[int] = []
    cols_i: List[int] = []
    vals: List[int] = []
    n_rows = 0
    for j in range(pres.n_cols):
        column = pres.column(j)
        order = min(e.order for e in column)
        if order == ORDER_INF:
            continue
        for d in range(0, cap - int(order)):
            for alpha in lay.monos[d]:
                for gen, entry in enumerate(column):
                    for beta, c in entry.terms:
                        if d + sum(beta) >= cap:
                            break
                        mono = tuple(a + b for a, b in zip(alpha, beta))
                        rows_i.append(n_rows)
                        cols_i.append(lay.col(mono, gen))
                        vals.append(c)
                n_rows += 1
    mat = np.zeros((n_rows, D), dtype=np.int64)
    if n_rows:
        np.add.at(mat, (np.array(rows_i), np.array(cols_i)), np.array(vals, dtype=np.int64))
        mat %= p
    rref, pivots = _row_reduce(mat, p) if n_rows else (np.zeros((0, D), dtype=np.int64), ())
    relations = Subspace(rref, pivots, D, p)
    logger.debug("%s at cap %d: ambient %d, relations rank %d", pres.label, cap, D, len(pivots))

    standard = np.setdiff1d(np.arange(D), np.array(pivots, dtype=np.int64))
    N = len(standard)
    std_pos = np.full(D, -1, dtype=np.int64)
    std_pos[standard] = np.arange(N)
    pivrow = np.full(D, -1, dtype=np.int64)
    pivrow[list(pivots)] = np.arange(len(pivots))
    nf = (-rref[:, standard]) % p if len(pivots) else np.zeros((0, N), dtype=np.int64)

    degs = lay.col_degree[standard]
    offsets = tuple(int(np.searchsorted(degs, n, side="left")) for n in range(cap + 1))

    mult = []
    for k in range(spec.v):
        target = np.full(N, -1, dtype=np.int64)
        for i, c in enumerate(standard):
            d, gen, mono = lay.col_info[c]
            if d + 1 < cap:
                shifted = list(mono)
                shifted[k] += 1
                target[i] = lay.col(tuple(shifted), gen)
        x = np.zeros((N, N), dtype=np.int64)
        live = target >= 0
        tgt_std = live.copy()
        tgt_std[live] = std_pos[target[live]] >= 0
        src = np.flatnonzero(tgt_std)
        x[src, std_pos[target[src]]] = 1
        tgt_piv = live & ~tgt_std
        src = np.flatnonzero(tgt_piv)
        if src.size:
            x[src] = nf[pivrow[target[src]]]
        mult.append(x)

    module = TruncModule(
        pres=pres, cap=cap, ambient_dim=D, relations=relations, standard=standard,
        offsets=offsets, mult=tuple(mult), layout=lay, _nf=nf, _std_pos=std_pos, _pivrow=pivrow,
    )
    _check_annihilated(module)
    return module


def _check_annihilated(m: TruncModule):
    """f·e_i должно лежать в образе phi: M является A-модулем."""
    pres = m.pres
    zero = TruncPoly.zero(pres.spec)
    for gen in range(pres.t):
        column = [pres.f if i == gen else zero for i in range(pres.t)]
        if np.any(m.element_vector(column)):
            raise ValidationError(f"f does not annihilate M (generator {gen})")


def power_submodule(m: TruncModule, n: int) -> Subspace:
    if not 0 <= n <= m.cap:
        raise ValidationError(f"power index {n} outside [0, {m.cap}]")
    return Subspace.tail(m.dim, m.offsets[n], m.p)


def _monomial_blocks(m: TruncModule, degree: int, s: int) -> List[np.ndarray]:
    """Блоки [:s, :s] умножений на все мономы степени degree."""
    blocks = [x[:s, :s] for x in m.mult]
    cache: Dict[Tuple[int, ...], np.ndarray] = {}

    def product(combo: Tuple[int, ...]) -> np.ndarray:
        if len(combo) == 1:
            return blocks[combo[0]]
        if combo not in cache:
            cache[combo] = _matmul_mod(product(combo[:-1]), blocks[combo[-1]], m.p)
        return cache[combo]

    return [product(c) for c in itertools.combinations_with_replacement(range(m.spec.v), degree)]


def _colon(m: TruncModule, target: Subspace, degree: int, blocks_for: Callable[[int], List[np.ndarray]]) -> Subspace:
    if target.ambient_dim != m.dim:
        raise ValidationError("target is not a subspace of this module")
    if degree == 0:
        return target
    if degree >= m.cap:
        raise CapTooSmallError(f"colon by a power {degree} >= cap {m.cap}")
    # target = T' ⊕ хвост(s); хвост содержит F_k
    s = target.tail_start()
    k = bisect.bisect_left(m.offsets, s)
    lo = m.offsets[max(k - degree, 0)]
    head = target.head(s)
    maps = [b[:lo] for b in blocks_for(s)]
    kernel = joint_preimage(maps, head, lo)
    return Subspace.with_tail(kernel, m.dim)


def colon_element(m: TruncModule, target: Subspace, x: TruncPoly) -> Subspace:
    """{v : x·v ∈ target}."""
    mat = m.form_matrix(x)
    return _colon(m, target, 1, lambda s: [mat[:s, :s]])


def colon_ideal_power(m: TruncModule, target: Subspace, i: int) -> Subspace:
    """{v : x^α·v ∈ target для всех |α| = i}."""
    if i < 0:
        raise ValidationError("negative power")
    return _colon(m, target, i, lambda s: _monomial_blocks(m, i, s))


def colon_ideal(m: TruncModule, target: Subspace, forms: Sequence[TruncPoly]) -> Subspace:
    """Двоеточие по идеалу, порождённому линейными формами."""
    mats = [m.form_matrix(x) for x in forms]
    return _colon(m, target, 1, lambda s: [mat[:s, :s] for mat in mats])


@dataclass(frozen=True)
class ImageFiltration:
    """dim J·F_n и опорные столбцы J·F_n для n = 0..cap."""

    dims: Tuple[int, ...]
    pivots: Tuple[Tuple[int, ...], ...]

    def count_from(self, n: int, start: int) -> int:
        piv = self.pivots[n]
        return len(piv) - bisect.bisect_left(piv, start)


def image_filtration(m: TruncModule, forms: Sequence[TruncPoly]) -> ImageFiltration:
    mats = [m.form_matrix(x) for x in forms]
    builder = SpanBuilder(m.dim, m.p)
    dims = [0] * (m.cap + 1)
    pivots: List[Tuple[int, ...]] = [()] * (m.cap + 1)
    for n in range(m.cap - 1, -1, -1):
        lo, hi = m.offsets[n], m.offsets[n + 1]
        if hi > lo and mats:
            builder.add(np.vstack([mat[lo:hi] for mat in mats]))
        dims[n] = builder.dim
        pivots[n] = builder.pivots
    return ImageFiltration(tuple(dims), tuple(pivots))


def multiplication_rows(m: TruncModule, form: TruncPoly, n: int) -> np.ndarray:
    """Строки умножения на form, начинающиеся в m^n M."""
    return m.form_matrix(form)[m.offsets[n]:]


def image_dims(m: TruncModule, forms: Sequence[TruncPoly]) -> List[int]:
    """dim J·m^n M, n = 0..cap."""
    return list(image_filtration(m, forms).dims)


def quotient_by_form(pres: Presentation, form: TruncPoly) -> Presentation:
    spec, sub = eliminate_linear_form(pres.spec, form)
    label = f"{pres.label}/({form})" if pres.label else ""
    return pres.map_entries(sub.apply, spec, label)


@dataclass(frozen=True)
class PresInvariants:
    mu: int
    iM: int
    det_order: Optional[int]
    eA_bound: int


def determinant_order(pres: Presentation) -> int:
    if not pres.is_square:
        raise ValidationError("determinant of a non-square presentation")
    # степень det не больше суммы максимальных степеней по столбцам
    cap = sum(max(e.degree for e in pres.column(j)) for j in range(pres.n_cols)) + 1
    cap = max(cap, 2)
    matrix = [[e.with_cap(cap) for e in row] for row in pres.phi]
    det = determinant(matrix)
    if det.is_zero():
        raise ValidationError("det(phi) vanishes: not a presentation of an MCM module")
    return int(det.order)


def presentation_invariants(pres: Presentation) -> PresInvariants:
    orders = [e.order for e in pres.entries() if not e.is_zero()]
    if not orders:
        raise ValidationError("zero presentation matrix")
    iM = int(min(orders))
    det_order = determinant_order(pres) if pres.is_square else None
    return PresInvariants(mu=pres.t, iM=iM, det_order=det_order, eA_bound=pres.t * iM)


def guarded(compute: Callable[[int], T], key: Callable[[T], Any], cfg: Config) -> Tuple[T, int]:
    """Считаем при cap и cap+1; расхождение или CapTooSmall поднимают cap."""
    results: Dict[int, T] = {}

    def run(cap: int) -> T:
        if cap not in results:
            results[cap] = compute(cap)
        return results[cap]

    last_error: Optional[Exception] = None
    cap = cfg.cap
    while cap + 1 <= cfg.max_cap:
        try:
            low = run(cap)
            high = run(cap + 1)
        except (CapTooSmallError, IdentityError) as exc:
            logger.debug("cap %d: %s", cap, exc)
            last_error = exc
            cap += 1
            continue
        if key(low) == key(high):
            if cap > cfg.cap:
                logger.warning("truncation escalated from cap %d to %d", cfg.cap, cap)
            return low, cap
        logger.debug("cap %d and %d disagree", cap, cap + 1)
        last_error = None
        cap += 1
    if isinstance(last_error, IdentityError):
        raise last_error
    raise CapEscalationError(
        f"no stable result for caps {cfg.cap}..{cfg.max_cap}"
        + (f": {last_error}" if last_error else "")
    )
