"""Команды вычисления инвариантов одного экземпляра."""
import asyncio
import logging
import time
from contextlib import contextmanager
from dataclasses import asdict
from typing import Dict, Iterator, List, Optional

from app.classifier import classify_mu4_e3
from app.config import Config
from app.core import command
from app.errors import ValidationError
from app.instances import InstanceFile
from app.invariants import hilbert_data, hilbert_function, minimal_multiplicity_check, poly_trim
from app.module_model import Presentation, build_module, guarded, presentation_invariants
from app.report import Report
from app.rr_depth import (
    delta_vv,
    depth_assoc_graded,
    depth_at_cap,
    graded_quotient_series,
    rr_filtration,
    superficial_chain,
    ulrich_check,
)
from app.superficial import rho_vector, verify_property_list, verify_singh

logger = logging.getLogger(__name__)


@contextmanager
def timed(timings: Dict[str, float], name: str) -> Iterator[None]:
    start = time.perf_counter()
    try:
        yield
    finally:
        timings[name] = round(time.perf_counter() - start, 4)


def presentation_for(inst: InstanceFile, cfg: Config) -> Presentation:
    # кольцо с запасом над max_cap: guarded может дойти до max_cap
    return inst.presentation(cfg.max_cap + 2, p=cfg.p)


def _require(inst: Optional[InstanceFile], name: str) -> InstanceFile:
    if inst is None:
        raise ValidationError(f"command {name!r} needs an instance file")
    return inst


def _hilbert(inst: InstanceFile, cfg: Config) -> Report:
    pres = presentation_for(inst, cfg)
    window = cfg.window if cfg.window is not None else cfg.cap - 2
    timings: Dict[str, float] = {}

    def compute(cap: int):
        m = build_module(pres, cap)
        return hilbert_function(m, window), [m.graded_length(n) for n in range(window + 1)]

    with timed(timings, "hilbert"):
        (H, L), cap = guarded(compute, lambda r: r, cfg)
    return Report(inst.label, "hilbert", cap, cfg.seed, invariants={"H": H, "L": L, "window": window}, timings=timings)


def _hpoly(inst: InstanceFile, cfg: Config) -> Report:
    pres = presentation_for(inst, cfg)
    timings: Dict[str, float] = {}
    with timed(timings, "hpoly"):
        hd, cap = guarded(
            lambda c: hilbert_data(build_module(pres, c), cfg.window), lambda hd: (hd.r, hd.h_coeffs), cfg
        )
    inv = {"dim": hd.r, "h": list(hd.h_coeffs), "e": list(hd.e), "mu": hd.mu}
    return Report(inst.label, "hpoly", cap, cfg.seed, invariants=inv, timings=timings)


def _invariants(inst: InstanceFile, cfg: Config) -> Report:
    pres = presentation_for(inst, cfg)
    timings: Dict[str, float] = {}
    with timed(timings, "presentation"):
        pinv = presentation_invariants(pres)
    with timed(timings, "hilbert"):
        hd, cap = guarded(lambda c: hilbert_data(build_module(pres, c)), lambda hd: (hd.r, hd.h_coeffs), cfg)
    minimal = minimal_multiplicity_check(hd, pinv)
    inv = {
        "mu": pinv.mu,
        "i": pinv.iM,
        "det_order": pinv.det_order,
        "e_lower_bound": pinv.eA_bound,
        "dim": hd.r,
        "h": list(hd.h_coeffs),
        "e": list(hd.e),
        "minimal_multiplicity": minimal,
    }
    return Report(inst.label, "invariants", cap, cfg.seed, invariants=inv, timings=timings)


def _superficial(inst: InstanceFile, cfg: Config) -> Report:
    pres = presentation_for(inst, cfg)
    timings: Dict[str, float] = {}

    def compute(cap: int):
        chain = superficial_chain(pres, cap, cfg.seed, cfg.max_trials)
        entries: List[dict] = []
        for c, w in enumerate(chain.witnesses):
            hd_m, hd_n = chain.hilbert[c], chain.hilbert[c + 1]
            singh = verify_singh(chain.module(c), w, hd_m, hd_n)
            entry = {
                "stage": c,
                "form": str(w.form),
                "b": list(singh.b),
                "trials_used": w.trials_used,
                "checks": w.checks.as_dict(),
                "h_M": list(hd_m.h_coeffs),
                "h_N": list(hd_n.h_coeffs),
                "properties": verify_property_list(hd_m, hd_n, singh.b),
            }
            if hd_m.r == 1:
                entry["rho"] = list(rho_vector(chain.module(c), w.form, hd_m).rho)
            entries.append(entry)
        return chain, entries

    with timed(timings, "superficial"):
        (chain, entries), cap = guarded(
            compute, lambda r: tuple(hd.h_coeffs for hd in r[0].hilbert), cfg
        )
    return Report(inst.label, "superficial", cap, chain.seed, superficial=entries, timings=timings)


def _rr(inst: InstanceFile, cfg: Config) -> Report:
    pres = presentation_for(inst, cfg)
    timings: Dict[str, float] = {}
    with timed(timings, "rr"):
        rr, cap = guarded(
            lambda c: rr_filtration(build_module(pres, c), cfg.window),
            lambda r: (poly_trim(r.r_coeffs), r.h_tilde),
            cfg,
        )
    section = {
        "r_coeffs": poly_trim(rr.r_coeffs),
        "h_tilde": list(rr.h_tilde),
        "stabilized_at": list(rr.stabilized_at),
        "window": rr.window,
        "depth_positive": not any(rr.r_coeffs),
    }
    return Report(inst.label, "rr", cap, cfg.seed, rr=section, timings=timings)


def depth_section(rep) -> dict:
    return {
        "depth": rep.depth,
        "d": len(rep.witnesses),
        "h_chain": [list(h) for h in rep.h_chain],
        "b_first": list(rep.b_first),
        "method_agreement": rep.method_agreement,
        "reduction_number": rep.reduction_number,
        "forms": [str(w.form) for w in rep.witnesses],
    }


def _depth(inst: InstanceFile, cfg: Config) -> Report:
    pres = presentation_for(inst, cfg)
    timings: Dict[str, float] = {}
    with timed(timings, "depth"):
        rep = depth_assoc_graded(pres, cfg)
    return Report(inst.label, "depth", rep.cap, rep.seed, depth=depth_section(rep), timings=timings)


def _delta(inst: InstanceFile, cfg: Config) -> Report:
    pres = presentation_for(inst, cfg)
    timings: Dict[str, float] = {}

    def compute(cap: int):
        rep = depth_at_cap(pres, cap, cfg.seed, cfg.max_trials)
        m0 = rep.chain.module(0)
        forms = rep.chain.lifted_forms(0)
        dr = delta_vv(m0, forms, rep.depth)
        return rep, dr, graded_quotient_series(m0, forms), ulrich_check(m0, forms, rep.chain.hilbert[0])

    with timed(timings, "delta"):
        (rep, dr, gq, ulrich), cap = guarded(compute, lambda r: (r[0].depth, r[1], r[2]), cfg)
    section = {
        "delta": dr.delta,
        "per_n": list(dr.per_n),
        "depth": rep.depth,
        "graded_quotient": list(gq),
        "ulrich": ulrich,
        "reduction_number": rep.reduction_number,
    }
    return Report(inst.label, "delta", cap, rep.seed, delta=section, timings=timings)


def classification_section(rec) -> dict:
    out = asdict(rec)
    out["a_tuple"] = list(rec.a_tuple)
    out["h"] = list(rec.h)
    out.pop("cap", None)
    return out


def _classify(inst: InstanceFile, cfg: Config) -> Report:
    pres = presentation_for(inst, cfg)
    timings: Dict[str, float] = {}
    with timed(timings, "classify"):
        rec = classify_mu4_e3(pres, cfg)
    return Report(
        inst.label, "classify", rec.cap, cfg.seed, classification=classification_section(rec), timings=timings
    )


@command("hilbert")
async def cmd_hilbert(inst: Optional[InstanceFile], cfg: Config) -> Report:
    return await asyncio.to_thread(_hilbert, _require(inst, "hilbert"), cfg)


@command("hpoly")
async def cmd_hpoly(inst: Optional[InstanceFile], cfg: Config) -> Report:
    return await asyncio.to_thread(_hpoly, _require(inst, "hpoly"), cfg)


@command("invariants")
async def cmd_invariants(inst: Optional[InstanceFile], cfg: Config) -> Report:
    return await asyncio.to_thread(_invariants, _require(inst, "invariants"), cfg)


@command("superficial")
async def cmd_superficial(inst: Optional[InstanceFile], cfg: Config) -> Report:
    return await asyncio.to_thread(_superficial, _require(inst, "superficial"), cfg)


@command("rr")
async def cmd_rr(inst: Optional[InstanceFile], cfg: Config) -> Report:
    return await asyncio.to_thread(_rr, _require(inst, "rr"), cfg)


@command("depth")
async def cmd_depth(inst: Optional[InstanceFile], cfg: Config) -> Report:
    return await asyncio.to_thread(_depth, _require(inst, "depth"), cfg)


@command("delta")
async def cmd_delta(inst: Optional[InstanceFile], cfg: Config) -> Report:
    return await asyncio.to_thread(_delta, _require(inst, "delta"), cfg)


@command("classify")
async def cmd_classify(inst: Optional[InstanceFile], cfg: Config) -> Report:
    return await asyncio.to_thread(_classify, _require(inst, "classify"), cfg)
