"""Артинова редукция, нормальная форма Смита над k[y]/(y^cap) и таблица случаев
для μ(M) = 4, e(A) = 3."""
import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .config import Config
from .errors import IdentityError, ValidationError
from .exact_arith import Subspace, echelonize
from .invariants import HilbertData, poly_trim
from .module_model import Presentation
from .rr_depth import DepthReport, depth_assoc_graded
from .ring import ORDER_INF, Monomial, TruncPoly, graded_basis

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CaseRow:
    case_id: str
    e: int
    h: Tuple[int, ...]
    depth_drop: int


# e(M), h_M, depth G(M) = d - depth_drop; для 4(c) берётся h = 4 + z + 3z^2 - z^3
CASE_TABLE: Tuple[CaseRow, ...] = (
    CaseRow("1", 4, (4,), 0),
    CaseRow("2a", 5, (4, 1), 0),
    CaseRow("2b", 5, (4, 0, 1), 1),
    CaseRow("3a", 6, (4, 2), 0),
    CaseRow("3b", 6, (4, 1, 1), 1),
    CaseRow("3b", 6, (4, 0, 2), 1),
    CaseRow("3c", 6, (4, 0, 3, -1), 2),
    CaseRow("4a", 7, (4, 3), 0),
    CaseRow("4b", 7, (4, 2, 1), 1),
    CaseRow("4c", 7, (4, 1, 3, -1), 2),
    CaseRow("4d", 7, (4, 0, 6, -4, 1), 3),
    CaseRow("5", 8, (4, 4), 0),
)

# −z^4 в формулировке случая 4(c) не согласуется с равенством Сингха
ERRATUM_4C = (4, 1, 3, 0, -1)


@dataclass(frozen=True)
class ClassificationRecord:
    a_tuple: Tuple[int, ...]
    eM: int
    h: Tuple[int, ...]
    depth: int
    d: int
    case_id: str
    theorem_ok: bool
    free_rank: int = 0
    depth_bound: Optional[int] = None
    cap: int = 0


# --- ряды над k[y]/(y^cap) -------------------------------------------------

def _shift_down(a: TruncPoly, k: int) -> TruncPoly:
    """a / y^k для a порядка >= k."""
    return TruncPoly.from_dict(a.spec, {(mono[0] - k,): c for mono, c in a.terms})


def smith_orders(matrix: Sequence[Sequence[TruncPoly]]) -> List[int]:
    """Порядки диагонали нормальной формы Смита над k[[y]]/(y^cap)."""
    rows = [list(r) for r in matrix]
    if not rows or not rows[0]:
        return []
    spec = rows[0][0].spec
    if spec.v != 1:
        raise ValidationError(f"Smith form needs a one-variable ring, got {spec.names}")
    t, s = len(rows), len(rows[0])
    orders: List[int] = []
    for k in range(min(t, s)):
        # опорный элемент наименьшего порядка
        best = min(
            ((rows[i][j].order, i, j) for i in range(k, t) for j in range(k, s)),
            key=lambda item: item[0],
        )
        o, bi, bj = best
        if o == ORDER_INF:
            orders.extend([ORDER_INF] * (min(t, s) - k))
            break
        rows[k], rows[bi] = rows[bi], rows[k]
        for r in rows:
            r[k], r[bj] = r[bj], r[k]
        o = int(o)
        unit_inv = _shift_down(rows[k][k], o).inverse()
        for i in range(k + 1, t):
            if rows[i][k].is_zero():
                continue
            q = _shift_down(rows[i][k], o) * unit_inv
            rows[i] = [a - q * b for a, b in zip(rows[i], rows[k])]
        for j in range(k + 1, s):
            if rows[k][j].is_zero():
                continue
            q = _shift_down(rows[k][j], o) * unit_inv
            for r in rows:
                r[j] = r[j] - q * r[k]
        orders.append(o)
    return orders


def artinian_decompose(reduced: Presentation, hd: Optional[HilbertData] = None) -> Tuple[int, ...]:
    """M_d ≅ ⊕ Q'/(y^{a_i}); a_i = порядки диагонали формы Смита."""
    orders = smith_orders(reduced.phi)
    if any(o == ORDER_INF for o in orders) or len(orders) != reduced.t:
        raise ValidationError(f"artinian reduction is degenerate: diagonal orders {orders}")
    a = tuple(sorted(int(o) for o in orders))
    if hd is not None:
        if hd.r != 0:
            raise ValidationError(f"artinian reduction has dimension {hd.r}")
        if sum(a) != sum(hd.h_coeffs):
            raise IdentityError(f"sum a_i = {sum(a)} but l(M_d) = {sum(hd.h_coeffs)}", {"a": list(a)})
        expected = poly_trim([sum(1 for ai in a if ai > k) for k in range(max(a))])
        if expected != list(hd.h_coeffs):
            raise IdentityError("h of M_d disagrees with the cyclic decomposition", {"a": list(a), "h": list(hd.h_coeffs)})
    return a


class _PrincipalIdeal:
    """Идеал (f) в Q/n^cap как подпространство; строится при первом запросе."""

    def __init__(self, f: TruncPoly):
        self.f = f
        self._index: Optional[Dict[Monomial, int]] = None
        self._span: Optional[Subspace] = None

    def _build(self):
        spec, f = self.f.spec, self.f
        monos = [m for d in range(spec.cap) for m in graded_basis(d, spec)]
        self._index = {m: k for k, m in enumerate(monos)}
        multipliers = [m for m in monos if sum(m) < spec.cap - f.order]
        rows = np.zeros((len(multipliers), len(monos)), dtype=np.int64)
        for r, m in enumerate(multipliers):
            for mono, c in (TruncPoly.from_dict(spec, {m: 1}) * f).terms:
                rows[r, self._index[mono]] = c % spec.p
        self._span = echelonize(rows, len(monos), spec.p)

    def has_unit_multiple(self, e: TruncPoly) -> bool:
        # Q - область: e = u·f с обратимым u  <=>  e ∈ (f) и ord e = ord f
        if e.is_zero() or e.order != self.f.order:
            return False
        if self._span is None:
            self._build()
        vec = np.zeros(len(self._index), dtype=np.int64)
        for mono, c in e.terms:
            vec[self._index[mono]] = c % e.spec.p
        return self._span.contains(vec)


def split_free_summand(pres: Presentation) -> Tuple[int, Optional[Presentation]]:
    """Ищем блоки (u·f), u обратим, отделённые нулями в своей строке и столбце: M ≅ N ⊕ A^s."""
    f = pres.f
    ideal = _PrincipalIdeal(f)
    rows, cols = [], []
    for i, row in enumerate(pres.phi):
        for j, e in enumerate(row):
            if not ideal.has_unit_multiple(e):
                continue
            if all(x.is_zero() for jj, x in enumerate(row) if jj != j) and all(
                pres.phi[ii][j].is_zero() for ii in range(pres.t) if ii != i
            ):
                rows.append(i)
                cols.append(j)
    s = len(rows)
    if s == 0:
        return 0, None
    keep_r = [i for i in range(pres.t) if i not in rows]
    keep_c = [j for j in range(pres.n_cols) if j not in cols]
    if not keep_r or not keep_c:
        return s, None
    phi = tuple(tuple(pres.phi[i][j] for j in keep_c) for i in keep_r)
    label = f"{pres.label}/free" if pres.label else ""
    return s, Presentation(pres.spec, phi, f, label)


def match_case(eM: int, h: Sequence[int], depth: int, d: int) -> CaseRow:
    h = tuple(h)
    rows = [row for row in CASE_TABLE if row.e == eM and row.h == h and depth == d - row.depth_drop]
    if len(rows) != 1:
        if h == ERRATUM_4C:
            logger.warning("h = 4 + z + 3z^2 - z^4 found: the stated form of case 4(c)")
        raise IdentityError(
            "no unique case-table row", {"e": eM, "h": list(h), "depth": depth, "d": d, "matches": len(rows)}
        )
    return rows[0]


def corollary_record(s: int, complement: Optional[Presentation], report: DepthReport) -> ClassificationRecord:
    """M ≅ N ⊕ A^s: depth >= d-2 при N != 0, depth = d для свободного M."""
    chain = report.chain
    d = len(report.witnesses)
    hd0 = chain.hilbert[0]
    a = artinian_decompose(chain.stages[-1], chain.hilbert[-1])
    bound = d if complement is None else d - 2
    case_id = "free" if complement is None else "free-summand"
    return ClassificationRecord(
        a_tuple=a, eM=hd0.e0, h=hd0.h_coeffs, depth=report.depth, d=d, case_id=case_id,
        theorem_ok=report.depth >= bound, free_rank=s, depth_bound=bound, cap=report.cap,
    )


def classify_from_depth(pres: Presentation, report: DepthReport) -> ClassificationRecord:
    _check_shape(pres)
    s, complement = split_free_summand(pres)
    if s:
        logger.info("%s: free summand of rank %d", pres.label, s)
        return corollary_record(s, complement, report)
    chain = report.chain
    d = len(report.witnesses)
    hd0 = chain.hilbert[0]
    a = artinian_decompose(chain.stages[-1], chain.hilbert[-1])
    if sum(a) != hd0.e0:
        raise IdentityError(f"sum a_i = {sum(a)} but e(M) = {hd0.e0}", {"a": list(a)})
    if any(ai > 2 for ai in a):
        raise ValidationError(f"a-tuple {a} has an entry > 2: free summand or invalid input")
    row = match_case(hd0.e0, hd0.h_coeffs, report.depth, d)
    return ClassificationRecord(
        a_tuple=a, eM=hd0.e0, h=hd0.h_coeffs, depth=report.depth, d=d, case_id=row.case_id,
        theorem_ok=report.depth >= d - 3, depth_bound=d - 3, cap=report.cap,
    )


def applies(pres: Presentation) -> bool:
    return pres.f.order == 3 and pres.t == 4 and pres.is_square


def _check_shape(pres: Presentation):
    if pres.f.order != 3:
        raise ValidationError(f"classification needs e(A) = 3, order(f) = {pres.f.order}")
    if pres.t != 4 or not pres.is_square:
        raise ValidationError(f"classification needs a 4x4 presentation, got {pres.t}x{pres.n_cols}")


def classify_mu4_e3(pres: Presentation, cfg: Config) -> ClassificationRecord:
    _check_shape(pres)
    return classify_from_depth(pres, depth_assoc_graded(pres, cfg))
