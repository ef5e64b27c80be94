"""Функция Гильберта, h-многочлен, размерность и коэффициенты e_i."""
import logging
from dataclasses import dataclass
from math import comb
from typing import List, Optional, Sequence, Tuple

from .errors import CapTooSmallError, IdentityError
from .module_model import PresInvariants, TruncModule

logger = logging.getLogger(__name__)


# --- целочисленные многочлены (списки коэффициентов по возрастанию) ---------

def poly_trim(a: Sequence[int]) -> List[int]:
    out = list(a)
    while out and out[-1] == 0:
        out.pop()
    return out


def poly_add(a: Sequence[int], b: Sequence[int]) -> List[int]:
    n = max(len(a), len(b))
    return poly_trim([(a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n)])


def poly_sub(a: Sequence[int], b: Sequence[int]) -> List[int]:
    return poly_add(a, [-c for c in b])


def poly_mul(a: Sequence[int], b: Sequence[int], length: Optional[int] = None) -> List[int]:
    if not a or not b:
        return []
    n = len(a) + len(b) - 1 if length is None else length
    out = [0] * n
    for i, x in enumerate(a):
        if not x or i >= n:
            continue
        for j, y in enumerate(b):
            if i + j >= n:
                break
            out[i + j] += x * y
    return out if length is not None else poly_trim(out)


def one_minus_z_pow(k: int) -> List[int]:
    """(1-z)^k."""
    return [(-1) ** j * comb(k, j) for j in range(k + 1)]


def poly_eval(a: Sequence[int], z: int) -> int:
    return sum(c * z ** i for i, c in enumerate(a))


# --- данные Гильберта -------------------------------------------------------

@dataclass(frozen=True)
class HilbertData:
    H: Tuple[int, ...]
    L: Tuple[int, ...]
    r: int
    h_coeffs: Tuple[int, ...]
    e: Tuple[int, ...]
    mu: int

    @property
    def e0(self) -> int:
        return self.e[0]

    @property
    def degree(self) -> int:
        return len(self.h_coeffs) - 1


def hilbert_function(m: TruncModule, window: Optional[int] = None) -> List[int]:
    """H[n] = ℓ(M/m^{n+1}M), n = 0..window."""
    if window is None:
        window = m.cap - 2
    if window < 0 or window > m.cap - 1:
        raise CapTooSmallError(f"window {window} does not fit below cap {m.cap}")
    return [m.offsets[n + 1] for n in range(window + 1)]


def detect_dimension(H: Sequence[int], max_dim: int) -> int:
    """Наименьшее k, при котором k-е разности H постоянны на трёх последних точках."""
    diffs = list(H)
    for k in range(max_dim + 1):
        if len(diffs) < 3:
            break
        if diffs[-1] == diffs[-2] == diffs[-3]:
            return k
        diffs = [b - a for a, b in zip(diffs, diffs[1:])]
    raise CapTooSmallError("Hilbert function is not polynomial inside the window")


def h_polynomial(m: TruncModule, window: Optional[int] = None) -> Tuple[int, List[int]]:
    H = hilbert_function(m, window)
    r = detect_dimension(H, m.spec.v)
    L = [m.graded_length(n) for n in range(m.cap)]
    h = poly_mul(L, one_minus_z_pow(r), length=m.cap)
    if h[-1] or h[-2]:
        raise CapTooSmallError(f"h-polynomial not settled at cap {m.cap}: tail {h[-2:]}")
    h = poly_trim(h)
    if poly_eval(h, 1) < 1:
        raise IdentityError(f"h(1) = {poly_eval(h, 1)} is not positive", {"h": h})
    return r, h


def hilbert_coefficient(h: Sequence[int], i: int) -> int:
    """e_i = h^{(i)}(1)/i!, для любого i >= 0."""
    return sum(comb(k, i) * c for k, c in enumerate(h))


def hilbert_coefficients(hd: HilbertData) -> List[int]:
    return [hilbert_coefficient(hd.h_coeffs, i) for i in range(hd.r + 1)]


def hilbert_data(m: TruncModule, window: Optional[int] = None) -> HilbertData:
    H = hilbert_function(m, window)
    r, h = h_polynomial(m, window)
    L = tuple(m.graded_length(n) for n in range(len(H)))
    e = tuple(hilbert_coefficient(h, i) for i in range(r + 1))
    logger.debug("%s: r=%d h=%s", m.pres.label, r, h)
    return HilbertData(H=tuple(H), L=L, r=r, h_coeffs=tuple(h), e=e, mu=m.offsets[1])


def minimal_multiplicity_check(hd: HilbertData, inv: PresInvariants) -> bool:
    """e(M) >= μ(M)·i(M); при равенстве h = μ(1 + ... + z^{i-1}).

    Возвращает True, если достигнута минимальная кратность.
    """
    bound = inv.mu * inv.iM
    if hd.e0 < bound:
        raise IdentityError(
            f"e(M)={hd.e0} < mu*i(M)={bound}", {"h": list(hd.h_coeffs), "mu": inv.mu, "iM": inv.iM}
        )
    if hd.r == 0:
        return hd.e0 == bound
    head = [inv.mu] * inv.iM
    if hd.r == 1:
        # в размерности один h начинается с μ(1 + ... + z^{i-1}), дальше h_i >= 0
        padded = list(hd.h_coeffs) + [0] * inv.iM
        if padded[: inv.iM] != head or any(c < 0 for c in hd.h_coeffs):
            raise IdentityError("dimension-one h-polynomial has the wrong shape", {"h": list(hd.h_coeffs)})
    if hd.e0 == bound:
        if list(hd.h_coeffs) != head:
            raise IdentityError(
                "minimal multiplicity without h = mu(1 + ... + z^(i-1))", {"h": list(hd.h_coeffs)}
            )
        return True
    return False
