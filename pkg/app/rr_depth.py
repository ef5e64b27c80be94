"""Фильтрация Ратлиффа–Раша, глубина G(M) спуском Салли, δ Валабреги–Валлы,
проверки длин в точных последовательностях."""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .config import Config
from .errors import CapTooSmallError, IdentityError, ValidationError
from .exact_arith import Subspace, _matmul_mod, subspace_combine
from .invariants import (
    HilbertData,
    hilbert_data,
    one_minus_z_pow,
    poly_add,
    poly_mul,
    poly_trim,
)
from .module_model import (
    Presentation,
    TruncModule,
    build_module,
    colon_element,
    colon_ideal,
    colon_ideal_power,
    guarded,
    image_dims,
    image_filtration,
    power_submodule,
)
from .ring import TruncPoly, embed_poly
from .superficial import (
    SuperficialWitness,
    b_vector,
    find_phi_superficial,
    verify_property_list,
    verify_singh,
)

logger = logging.getLogger(__name__)

# сколько раз перезапускаем поиск с новым зерном при аномальной цепочке
CHAIN_RETRIES = 3


# --- Ратлифф–Раш ------------------------------------------------------------

@dataclass(frozen=True)
class RRReport:
    rr_subspaces: Tuple[Subspace, ...] = field(repr=False)
    r_coeffs: Tuple[int, ...]
    h_tilde: Tuple[int, ...]
    stabilized_at: Tuple[int, ...]

    @property
    def window(self) -> int:
        return len(self.rr_subspaces)

    def excess(self, n: int) -> int:
        """ℓ(m̃^n M / m^n M); ноль за пределами окна."""
        if n <= 0 or n > len(self.r_coeffs):
            return 0
        return self.r_coeffs[n - 1]


def _rr_member(m: TruncModule, n: int) -> Tuple[Subspace, int]:
    """Объединение по всем i с n+i+2 < cap; возвращает и первое i, с которого оно постоянно."""
    top = m.cap - n - 3
    if top < 1:
        raise CapTooSmallError(f"no room for Ratliff-Rush colons at n={n}, cap {m.cap}")
    cur = power_submodule(m, n)
    settled = 0
    for i in range(1, top + 1):
        nxt = subspace_combine(cur, colon_ideal_power(m, power_submodule(m, n + i), i), "sum")
        if nxt != cur:
            settled = i
        cur = nxt
    if settled == top:
        raise CapTooSmallError(f"Ratliff-Rush union for n={n} still grows at i={top}, cap {m.cap}")
    return cur, settled


def rr_filtration(
    m: TruncModule,
    window: Optional[int] = None,
    form: Optional[TruncPoly] = None,
    hd: Optional[HilbertData] = None,
) -> RRReport:
    """m̃^n M = ∪_i (m^{n+i}M : m^i), n = 1..window, и многочлены r_M, h̃_M."""
    hd = hd or hilbert_data(m)
    if hd.r == 0:
        raise ValidationError("Ratliff-Rush filtration needs a module of positive depth")
    W = m.cap - 4 if window is None else window
    if W < 1 or W > m.cap - 4:
        raise CapTooSmallError(f"Ratliff-Rush window {W} does not fit cap {m.cap}")

    members: List[Subspace] = []
    stabilized: List[int] = []
    for n in range(1, W + 1):
        sub, i = _rr_member(m, n)
        members.append(sub)
        stabilized.append(i)

    dims = [m.dim] + [s.dim for s in members]
    r_coeffs = [dims[n + 1] - (m.dim - m.offsets[n + 1]) for n in range(W)]
    if r_coeffs[-1]:
        raise CapTooSmallError(f"Ratliff-Rush filtration differs from m-adic at the window edge: {r_coeffs}")

    L_tilde = [dims[n] - dims[n + 1] for n in range(W)]
    L_tilde += [m.graded_length(n) for n in range(W, m.cap)]
    h_tilde = poly_mul(L_tilde, one_minus_z_pow(hd.r), length=m.cap)
    if h_tilde[-1] or h_tilde[-2]:
        raise CapTooSmallError(f"h-tilde not settled at cap {m.cap}")
    h_tilde = poly_trim(h_tilde)
    r_poly = poly_trim(r_coeffs)

    rebuilt = poly_add(h_tilde, poly_mul(one_minus_z_pow(hd.r + 1), r_poly))
    if rebuilt != list(hd.h_coeffs):
        raise IdentityError(
            "h != h~ + (1-z)^(r+1) r_M",
            {"h": list(hd.h_coeffs), "h_tilde": h_tilde, "r": r_poly},
        )

    # m·m̃^n M ⊆ m̃^{n+1} M
    for n in range(1, W):
        src, dst = members[n - 1], members[n]
        for x in m.mult:
            if not dst.contains(_matmul_mod(src.basis, x, m.p)):
                raise IdentityError(f"Ratliff-Rush family is not a filtration at n={n}")

    if form is not None:
        for n in range(1, W):
            back = colon_element(m, members[n], form)
            if back != members[n - 1]:
                raise IdentityError(
                    f"(RR_{n + 1} : x) != RR_{n}", {"n": n, "dim_colon": back.dim, "dim_rr": members[n - 1].dim}
                )

    return RRReport(tuple(members), tuple(r_coeffs), tuple(h_tilde), tuple(stabilized))


# --- цепочка Салли ----------------------------------------------------------

@dataclass(frozen=True)
class SallyChain:
    """M_0 = M, M_{c+1} = M_c / x_{c+1} M_c на одном cap."""

    cap: int
    seed: int
    witnesses: Tuple[SuperficialWitness, ...]
    stages: Tuple[Presentation, ...] = field(repr=False)
    hilbert: Tuple[HilbertData, ...]

    def module(self, c: int) -> TruncModule:
        return build_module(self.stages[c], self.cap)

    def lifted_forms(self, c: int) -> List[TruncPoly]:
        """x_{c+1}, ..., x_d, поднятые в кольцо стадии c."""
        spec = self.stages[c].spec
        return [embed_poly(w.form, spec) for w in self.witnesses[c:]]


def superficial_chain(pres: Presentation, cap: int, seed: int, max_trials: int) -> SallyChain:
    d = pres.spec.v - 1
    dim_m = hilbert_data(build_module(pres, cap)).r
    if dim_m != d:
        raise ValidationError(f"dim M = {dim_m} but dim A = {d}: not maximal Cohen-Macaulay")
    for attempt in range(CHAIN_RETRIES):
        s = seed + attempt
        witnesses = find_phi_superficial(pres, d, seed=s, max_trials=max_trials, cap=cap)
        stages = tuple(w.source for w in witnesses) + (witnesses[-1].reduced,) if witnesses else (pres,)
        hds = tuple(hilbert_data(build_module(st, cap)) for st in stages)
        if len({hd.e0 for hd in hds}) == 1 and all(hd.r == d - c for c, hd in enumerate(hds)):
            return SallyChain(cap, s, tuple(witnesses), stages, hds)
        logger.warning("seed %d gave an anomalous h-chain %s, retrying", s, [hd.h_coeffs for hd in hds])
    raise IdentityError("superficial chain keeps changing e(M)", {"seed": seed, "retries": CHAIN_RETRIES})


@dataclass(frozen=True)
class DepthReport:
    depth: int
    h_chain: Tuple[Tuple[int, ...], ...]
    witnesses: Tuple[SuperficialWitness, ...]
    b_first: Tuple[int, ...]
    method_agreement: bool
    reduction_number: int
    seed: int
    cap: int
    chain: SallyChain = field(repr=False, compare=False)


def depth_at_cap(pres: Presentation, cap: int, seed: int = 42, max_trials: int = 50) -> DepthReport:
    chain = superficial_chain(pres, cap, seed, max_trials)
    d = len(chain.witnesses)
    h_chain = tuple(hd.h_coeffs for hd in chain.hilbert)
    depth = next((c for c in range(d) if h_chain[c] != h_chain[c + 1]), d)

    b_first = tuple(poly_trim(chain.witnesses[0].b_vector)) if d else ()
    agreement = (depth >= 1) == (not any(b_first))
    if d and not agreement:
        raise IdentityError(
            "h-chain and b-vector disagree on depth >= 1", {"depth": depth, "b": list(b_first), "h_chain": h_chain}
        )
    for c, w in enumerate(chain.witnesses):
        singh = verify_singh(chain.module(c), w, chain.hilbert[c], chain.hilbert[c + 1])
        verify_property_list(chain.hilbert[c], chain.hilbert[c + 1], singh.b)

    red = reduction_number(chain.module(0), chain.lifted_forms(0)) if d else 0
    logger.debug("%s at cap %d: depth %d, h-chain %s", pres.label, cap, depth, h_chain)
    return DepthReport(depth, h_chain, chain.witnesses, b_first, agreement, red, chain.seed, cap, chain)


def depth_assoc_graded(pres: Presentation, cfg: Config, seed: Optional[int] = None) -> DepthReport:
    """depth G(M) с подтверждением на cap и cap+1."""
    s = cfg.seed if seed is None else seed
    report, _ = guarded(
        lambda cap: depth_at_cap(pres, cap, s, cfg.max_trials),
        lambda r: (r.depth, r.h_chain),
        cfg,
    )
    return report


# --- δ, редукция, градуированное частное ------------------------------------

@dataclass(frozen=True)
class DeltaReport:
    delta: int
    per_n: Tuple[int, ...]


def delta_vv(m: TruncModule, forms: Sequence[TruncPoly], depth: Optional[int] = None) -> DeltaReport:
    """δ = Σ ℓ(m^{n+1}M ∩ JM / J m^n M)."""
    img = image_filtration(m, forms)
    per_n = [img.count_from(0, m.offsets[n + 1]) - img.dims[n] for n in range(m.cap - 1)]
    if any(v < 0 for v in per_n):
        raise IdentityError("negative Valabrega-Valla summand", {"per_n": per_n})
    if per_n[-1]:
        raise CapTooSmallError(f"Valabrega-Valla summands not settled at cap {m.cap}: {per_n}")
    per_n = poly_trim(per_n)
    delta = sum(per_n)
    d = len(forms)
    if depth is not None and delta <= 2 and depth < d - delta:
        raise IdentityError(f"delta={delta} but depth={depth} < d - delta", {"per_n": per_n, "d": d})
    return DeltaReport(delta, tuple(per_n))


def reduction_number(m: TruncModule, forms: Sequence[TruncPoly]) -> int:
    """Наименьшее l с m^{l+1}M = J m^l M."""
    img = image_filtration(m, forms)
    for l in range(m.cap - 1):
        if m.dim - m.offsets[l + 1] == img.dims[l]:
            return l
    raise CapTooSmallError(f"reduction number exceeds cap {m.cap}")


def ulrich_check(m: TruncModule, forms: Sequence[TruncPoly], hd: Optional[HilbertData] = None) -> bool:
    """M ульрихов ⟺ e(M) = μ(M) ⟺ mM = JM."""
    hd = hd or hilbert_data(m)
    by_multiplicity = hd.e0 == hd.mu
    by_reduction = m.dim - m.offsets[1] == image_dims(m, forms)[0]
    if by_multiplicity != by_reduction:
        raise IdentityError("Ulrich criteria disagree", {"e0": hd.e0, "mu": hd.mu})
    return by_multiplicity


def graded_quotient_series(m: TruncModule, forms: Sequence[TruncPoly]) -> Tuple[int, int, int]:
    """(μ, α, β): длины M/mM, mM/(m²M+JM), m²M/(m³M+JmM)."""
    if m.cap < 4:
        raise CapTooSmallError("graded quotient needs cap >= 4")
    img = image_filtration(m, forms)
    o1, o2, o3 = m.offsets[1], m.offsets[2], m.offsets[3]
    mu = o1
    alpha = (o2 - o1) - (img.count_from(0, o1) - img.count_from(0, o2))
    beta = (o3 - o2) - (img.count_from(1, o2) - img.count_from(1, o3))
    if not beta <= alpha <= mu:
        raise IdentityError(f"graded quotient violates beta <= alpha <= mu: {(mu, alpha, beta)}")
    return mu, alpha, beta


# --- точные последовательности ---------------------------------------------

@dataclass(frozen=True)
class SequenceCheck:
    name: str
    stage: int
    n: int
    terms: Tuple[int, ...]
    ok: bool


@dataclass(frozen=True)
class SequenceReport:
    checks: Tuple[SequenceCheck, ...]

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def count(self) -> Dict[str, int]:
        out: Dict[str, int] = {}
        for c in self.checks:
            out[c.name] = out.get(c.name, 0) + 1
        return out


def _five_term(chain: SallyChain, c: int) -> List[SequenceCheck]:
    m = chain.module(c)
    bar = chain.module(c + 1)
    x, y = chain.lifted_forms(c)[:2]
    y_bar = chain.witnesses[c + 1].form
    b = b_vector(m, x, strict=False)
    img = image_filtration(m, [x, y])
    img_bar = image_filtration(bar, [y_bar])
    out = []
    for n in range(1, m.cap - 2):
        l1 = colon_ideal(m, power_submodule(m, n), [x, y]).dim - (m.dim - m.offsets[n - 1])
        l2, l3 = b[n - 1], b[n]
        l4 = (m.dim - m.offsets[n + 1]) - img.dims[n]
        l5 = (bar.dim - bar.offsets[n + 1]) - img_bar.dims[n]
        terms = (l1, l2, l3, l4, l5)
        out.append(SequenceCheck("five_term", c, n, terms, l1 - l2 + l3 - l4 + l5 == 0))
    return out


def _reduction_additivity(chain: SallyChain, c: int) -> SequenceCheck:
    m = chain.module(c)
    bar = chain.module(c + 1)
    J = chain.lifted_forms(c)
    J_bar = chain.lifted_forms(c + 1)
    lhs = (m.dim - m.offsets[2]) - image_filtration(m, J).dims[1]
    b1 = chain.witnesses[c].b_vector[1]
    rhs_bar = bar.dim - bar.offsets[2]
    if J_bar:
        rhs_bar -= image_filtration(bar, J_bar).dims[1]
    return SequenceCheck("reduction_additivity", c, 1, (lhs, b1, rhs_bar), lhs == b1 + rhs_bar)


def _dim_one_colon(chain: SallyChain, c: int) -> SequenceCheck:
    m = chain.module(c)
    bar = chain.module(c + 1)
    x = chain.witnesses[c].form
    f2 = power_submodule(m, 2)
    colon = colon_element(m, f2, x).dim - f2.dim
    n_sq = bar.dim - bar.offsets[2]
    quot = f2.dim - image_filtration(m, [x]).dims[2]
    return SequenceCheck("dim_one_colon", c, 2, (colon, n_sq, quot), colon + n_sq == quot)


def _rr_inequalities(
    chain: SallyChain, c: int, rr: Dict[int, RRReport]
) -> List[SequenceCheck]:
    hd = chain.hilbert[c]
    b = chain.witnesses[c].b_vector
    mine = rr[c]
    other = rr.get(c + 1) if hd.r >= 2 else None
    out = []
    for n in range(1, mine.window):
        R_n, R_next = mine.excess(n), mine.excess(n + 1)
        ok = b[n] <= R_n and R_n - b[n] <= R_next
        terms = [b[n], R_n, R_next]
        if other is not None:
            R_bar = other.excess(n + 1)
            terms.append(R_bar)
            ok = ok and R_next - (R_n - b[n]) <= R_bar
        out.append(SequenceCheck("rr_left_exact", c, n, tuple(terms), ok))
    if other is not None:
        out.append(rr_mod_superficial(mine, other, c))
    return out


def rr_mod_superficial(rr_m: RRReport, rr_n: RRReport, stage: int = 0) -> SequenceCheck:
    """ℓ(m̃M/mM) <= ℓ(m̃N/mN) для N = M/xM."""
    a, b = rr_m.excess(1), rr_n.excess(1)
    return SequenceCheck("rr_mod_superficial", stage, 1, (a, b), a <= b)


def verify_exact_sequences(chain: SallyChain, rr: Optional[Dict[int, RRReport]] = None) -> SequenceReport:
    """Длины членов точных последовательностей по всем стадиям цепочки."""
    d = len(chain.witnesses)
    if rr is None:
        rr = {}
        for c in range(d):
            if chain.hilbert[c].r >= 1:
                rr[c] = rr_filtration(chain.module(c), form=chain.witnesses[c].form, hd=chain.hilbert[c])
    checks: List[SequenceCheck] = []
    for c in range(d):
        r = chain.hilbert[c].r
        checks.append(_reduction_additivity(chain, c))
        if r == 2 and c + 1 < d:
            checks.extend(_five_term(chain, c))
        if r == 1:
            checks.append(_dim_one_colon(chain, c))
        if c in rr:
            checks.extend(_rr_inequalities(chain, c, rr))
    report = SequenceReport(tuple(checks))
    failed = [ch for ch in checks if not ch.ok]
    if failed:
        raise IdentityError(
            f"{len(failed)} exact-sequence length checks fail",
            {"failed": [(ch.name, ch.stage, ch.n, list(ch.terms)) for ch in failed[:10]]},
        )
    logger.debug("exact sequences: %s", report.count())
    return report
