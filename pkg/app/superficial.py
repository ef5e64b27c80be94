"""Поиск phi-суперфициальных линейных форм, b- и ρ-векторы, равенство Сингха."""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import CapTooSmallError, IdentityError, SearchExhaustedError, ValidationError
from .exact_arith import rank_mod
from .invariants import (
    HilbertData,
    hilbert_coefficient,
    hilbert_data,
    one_minus_z_pow,
    poly_mul,
    poly_sub,
    poly_trim,
)
from .module_model import (
    Presentation,
    TruncModule,
    build_module,
    determinant_order,
    image_filtration,
    quotient_by_form,
)
from .ring import TruncPoly

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class WitnessChecks:
    colon_stabilizes: bool
    entry_orders_preserved: bool
    det_order_preserved: bool

    def as_dict(self) -> Dict[str, bool]:
        return {
            "colon_stabilizes": self.colon_stabilizes,
            "entry_orders_preserved": self.entry_orders_preserved,
            "det_order_preserved": self.det_order_preserved,
        }


@dataclass(frozen=True)
class SuperficialWitness:
    form: TruncPoly
    b_vector: Tuple[int, ...]
    checks: WitnessChecks
    trials_used: int
    source: Presentation = field(repr=False)
    reduced: Presentation = field(repr=False)

    @property
    def b_is_zero(self) -> bool:
        return not any(self.b_vector)


@dataclass(frozen=True)
class RhoVector:
    rho: Tuple[int, ...]


@dataclass(frozen=True)
class SinghReport:
    h_M: Tuple[int, ...]
    h_N: Tuple[int, ...]
    b: Tuple[int, ...]
    rhs: Tuple[int, ...]


def ring_presentation(pres: Presentation) -> Presentation:
    """A = Q/(f) как модуль с матрицей 1×1 (f)."""
    label = f"A[{pres.label}]" if pres.label else "A"
    return Presentation(pres.spec, ((pres.f,),), pres.f, label)


def b_vector(m: TruncModule, x: TruncPoly, window: Optional[int] = None, strict: bool = True) -> List[int]:
    """b_n = ℓ((m^{n+1}M : x)/m^n M) = dim ker(x: M/m^n M -> M/m^{n+1} M)."""
    top = m.cap - 1 if window is None else window
    if top > m.cap - 1:
        raise CapTooSmallError(f"b-vector window {top} exceeds cap {m.cap}")
    mat = m.form_matrix(x)
    out = []
    for n in range(top + 1):
        lo, hi = m.offsets[n], m.offsets[n + 1]
        out.append(lo - rank_mod(mat[:lo, :hi], m.p) if lo else 0)
    if strict and len(out) >= 2 and (out[-1] or out[-2]):
        raise CapTooSmallError(f"b-vector support reaches the window edge: {out}")
    return out


def _tail_range(hd: HilbertData, cap: int) -> range:
    lo = hd.degree + 1
    hi = min(hd.degree + 3, cap - 1)
    if lo > hi:
        raise CapTooSmallError(f"no room to check colon stabilization above degree {hd.degree} at cap {cap}")
    return range(lo, hi + 1)


def _colon_tail_zero(pres: Presentation, form: TruncPoly, cap: int) -> Tuple[bool, List[int]]:
    m = build_module(pres, cap)
    hd = hilbert_data(m)
    b = b_vector(m, form, strict=False)
    return all(b[n] == 0 for n in _tail_range(hd, cap)), b


def _orders_preserved(before: Presentation, after: Presentation) -> bool:
    pairs = list(zip(before.entries(), after.entries())) + [(before.f, after.f)]
    return all(a.order == b.order for a, b in pairs)


def _try_form(pres: Presentation, form: TruncPoly, cap: int, trial: int) -> Optional[SuperficialWitness]:
    try:
        reduced = quotient_by_form(pres, form)
    except ValidationError as exc:
        logger.debug("trial %d: %s", trial, exc)
        return None
    orders_ok = _orders_preserved(pres, reduced)
    if not orders_ok:
        return None
    det_ok = True
    if pres.is_square:
        try:
            det_ok = determinant_order(pres) == determinant_order(reduced)
        except ValidationError:
            det_ok = False
    if not det_ok:
        return None
    ok_m, b = _colon_tail_zero(pres, form, cap)
    ok_a, _ = _colon_tail_zero(ring_presentation(pres), form, cap)
    if not (ok_m and ok_a):
        logger.debug("trial %d: colon does not stabilize (b=%s)", trial, b)
        return None
    checks = WitnessChecks(True, orders_ok, det_ok)
    return SuperficialWitness(form, tuple(b), checks, trial, pres, reduced)


def find_phi_superficial(
    pres: Presentation,
    count: int,
    seed: int = 42,
    max_trials: int = 50,
    cap: int = 7,
) -> List[SuperficialWitness]:
    """Последовательность x_1..x_count, каждая форма берётся над M/(x_1..x_{c})M."""
    dim_a = pres.spec.v - 1
    if count > dim_a:
        raise ValidationError(f"sequence length {count} exceeds dim A = {dim_a}")
    rng = np.random.default_rng(seed)
    current = pres
    witnesses: List[SuperficialWitness] = []
    for stage in range(count):
        found = None
        for trial in range(1, max_trials + 1):
            coeffs = rng.integers(0, current.spec.p, size=current.spec.v)
            if not coeffs.any():
                continue
            form = TruncPoly.linear_form(current.spec, [int(c) for c in coeffs])
            found = _try_form(current, form, cap, trial)
            if found is not None:
                break
        if found is None:
            raise SearchExhaustedError(
                f"no superficial form for stage {stage + 1} of {pres.label or 'M'} in {max_trials} trials"
            )
        logger.debug("stage %d: x=%s after %d trials", stage + 1, found.form, found.trials_used)
        witnesses.append(found)
        current = found.reduced
    return witnesses


def rho_vector(m: TruncModule, x: TruncPoly, hd: Optional[HilbertData] = None) -> RhoVector:
    """ρ_n = ℓ(m^{n+1}M / x m^n M) для модуля размерности один."""
    hd = hd or hilbert_data(m)
    if hd.r != 1:
        raise ValidationError(f"rho-vector needs a dimension-one module, got dim {hd.r}")
    img = image_filtration(m, [x])
    rho = [(m.dim - m.offsets[n + 1]) - img.dims[n] for n in range(m.cap - 1)]
    if rho[-1]:
        raise CapTooSmallError(f"rho-vector not settled at cap {m.cap}: {rho}")
    s = hd.degree
    if any(rho[n] for n in range(s, len(rho))):
        raise IdentityError("rho_n does not vanish beyond deg h", {"rho": rho, "h": list(hd.h_coeffs)})
    rebuilt = [hd.mu] + [rho[i - 1] - rho[i] for i in range(1, s + 1)]
    if poly_trim(rebuilt) != list(hd.h_coeffs):
        raise IdentityError(
            "rho reconstruction disagrees with h", {"rho": rho, "rebuilt": rebuilt, "h": list(hd.h_coeffs)}
        )
    return RhoVector(tuple(poly_trim(rho)))


def verify_singh(
    m: TruncModule,
    witness: SuperficialWitness,
    hd_m: Optional[HilbertData] = None,
    hd_n: Optional[HilbertData] = None,
) -> SinghReport:
    """h_M = h_N - (1-z)^r b_{x,M}, точно."""
    hd_m = hd_m or hilbert_data(m)
    hd_n = hd_n or hilbert_data(build_module(witness.reduced, m.cap))
    b = list(witness.b_vector)
    if len(b) >= 2 and (b[-1] or b[-2]):
        raise CapTooSmallError(f"b-vector support reaches the window edge: {b}")
    b = poly_trim(b)
    rhs = poly_sub(hd_n.h_coeffs, poly_mul(one_minus_z_pow(hd_m.r), b))
    if rhs != list(hd_m.h_coeffs):
        raise IdentityError(
            "Singh's equality fails",
            {"h_M": list(hd_m.h_coeffs), "h_N": list(hd_n.h_coeffs), "b": b, "rhs": rhs},
        )
    return SinghReport(hd_m.h_coeffs, hd_n.h_coeffs, tuple(b), tuple(rhs))


def verify_property_list(hd_m: HilbertData, hd_n: HilbertData, b: Sequence[int]) -> Dict[str, bool]:
    """Следствия для суперфициального регулярного x: размерность, μ, e_i, критерий b ≡ 0."""
    r = hd_m.r
    total = sum(b)
    b_zero = not any(b)
    e_r_m = hilbert_coefficient(hd_m.h_coeffs, r)
    e_r_n = hilbert_coefficient(hd_n.h_coeffs, r)
    results = {
        "dim_drops": hd_n.r == r - 1,
        "mu_preserved": hd_n.mu == hd_m.mu,
        "e_i_equal": all(
            hilbert_coefficient(hd_m.h_coeffs, i) == hilbert_coefficient(hd_n.h_coeffs, i) for i in range(r)
        ),
        "e_r_relation": e_r_m == e_r_n - (-1) ** r * total,
        "b_zero_iff_h_equal": b_zero == (hd_m.h_coeffs == hd_n.h_coeffs),
        "e_r_equal_iff_b_zero": (e_r_m == e_r_n) == b_zero,
    }
    failed = [k for k, ok in results.items() if not ok]
    if failed:
        raise IdentityError(
            f"superficial-element properties fail: {', '.join(failed)}",
            {"h_M": list(hd_m.h_coeffs), "h_N": list(hd_n.h_coeffs), "b": list(b)},
        )
    return results
