"""Check registry: every verification the engine can run over a scenario.

Each check walks the scenario's sample plan and produces one record per
point (and per sub-facet).  Domain failures never abort a suite; they come
back as records carrying the error message.  Record order is fixed: checks
sorted by id, then points in plan order.
"""

from __future__ import annotations

import time
from typing import Callable

import numpy as np

from .curvature import (
    bianchi_contracted_residual,
    bianchi_cyclic_residual,
    curvature_fd_commutator,
    curvature_induced,
    pair_symmetry_residual,
)
from .errors import ConfigError, FinsymError
from .fedosov import (
    FedosovScenario,
    berwald_uniqueness_probe,
    hatted_preservation_residual,
    induce_connection,
    minkowski_preservation_check,
    symplectic_connection_residual,
    transform_connection,
)
from .finsler import chern_structural_residuals, metric_validity
from .records import CheckRecord
from .scenario import BuiltScenario, build_scenario
from .symplectic import (
    chern_preservation_residual,
    closedness_residual,
    nondegeneracy_check,
    randers_preservation_condition,
    standard_form,
)

CHECK_IDS = (
    "metric-validity",
    "structural",
    "preservation",
    "induce",
    "darboux",
    "transform",
    "minkowski",
    "berwald-uniqueness",
    "curvature",
    "bianchi",
    "pair-symmetry",
)

CHECK_DESCRIPTIONS = {
    "metric-validity": "homogeneity, Euler identity, Cartan trace, "
                       "positive-definiteness, Randers covector bound",
    "structural": "torsion-freeness and almost-metric-compatibility residuals "
                  "of the connection coefficients",
    "preservation": "two-form validity (closedness, nondegeneracy) and the "
                    "lift-preservation residual; Randers d(beta) equivalence",
    "induce": "symmetry of the induced connection and exact agreement of its "
              "two-form residual with the lift residual along W",
    "darboux": "standard-form coefficient relations at points where the "
               "connection preserves the standard two-form",
    "transform": "round trip of the coefficient transformation law through "
                 "the configured chart and back",
    "minkowski": "preservation conditions of an x-independent metric in "
                 "natural and hatted charts, and their consistency with the "
                 "transformation law",
    "berwald-uniqueness": "spread of the induced connection across distinct "
                          "probe vector fields",
    "curvature": "chain-rule curvature against a finite-difference commutator "
                 "of the induced-connection field; exact last-pair antisymmetry",
    "bianchi": "cyclic curvature sum (first Bianchi identity) and the "
               "contracted two-path comparison",
    "pair-symmetry": "first-pair symmetry of the lowered curvature at "
                     "preserving points; printed-formula two-path comparison",
}

_REQUIREMENTS = {
    "metric-validity": (),
    "structural": (),
    "preservation": ("two_form",),
    "induce": ("vector_field",),
    "darboux": ("vector_field",),
    "transform": ("vector_field", "chart"),
    "minkowski": ("two_form", "chart"),
    "berwald-uniqueness": ("vector_field",),
    "curvature": ("vector_field",),
    "bianchi": ("vector_field",),
    "pair-symmetry": ("vector_field", "two_form"),
}


def _timed(records: list, check: str, point, tolerance: float,
           fn: Callable[[], float]) -> None:
    t0 = time.perf_counter()
    try:
        residual = fn()
    except FinsymError as exc:
        records.append(CheckRecord.failed(
            check, point, f"{type(exc).__name__}: {exc}", tolerance,
            elapsed=time.perf_counter() - t0))
        return
    records.append(CheckRecord.evaluated(
        check, point, residual, tolerance, elapsed=time.perf_counter() - t0))


def _check_metric_validity(s: BuiltScenario) -> list[CheckRecord]:
    t0 = time.perf_counter()
    records = metric_validity(
        s.metric, list(s.plan.pairs()),
        homogeneity_tol=s.tolerances["homogeneity"],
        tol_pd=s.tolerances["tol_pd"])
    elapsed = (time.perf_counter() - t0) / max(1, len(records))
    for r in records:
        r.elapsed = elapsed
    return records


def _check_structural(s: BuiltScenario) -> list[CheckRecord]:
    records: list[CheckRecord] = []
    for x, y in s.plan.pairs():
        pt = tuple(np.concatenate([x, y]))
        t0 = time.perf_counter()
        try:
            res = chern_structural_residuals(s.metric, x, y)
        except FinsymError as exc:
            elapsed = time.perf_counter() - t0
            msg = f"{type(exc).__name__}: {exc}"
            records.append(CheckRecord.failed("structural:torsion", pt, msg,
                                              0.0, elapsed))
            records.append(CheckRecord.failed("structural:compat", pt, msg,
                                              s.tolerances["structural-compat"],
                                              elapsed))
            continue
        elapsed = time.perf_counter() - t0
        records.append(CheckRecord.evaluated(
            "structural:torsion", pt, res.torsion, 0.0, elapsed))
        records.append(CheckRecord.evaluated(
            "structural:compat", pt, res.compat,
            s.tolerances["structural-compat"] * res.scale, elapsed))
    return records


def _check_preservation(s: BuiltScenario) -> list[CheckRecord]:
    records: list[CheckRecord] = []
    omega = s.two_form
    for i in range(s.plan.count):
        x = s.plan.xs[i]
        _timed(records, "preservation:closedness", tuple(x),
               s.tolerances["closedness"],
               lambda x=x: closedness_residual(omega, x))
        _timed(records, "preservation:nondegeneracy", tuple(x), 0.0,
               lambda x=x: max(0.0, s.tolerances["tol_nd"]
                               - nondegeneracy_check(omega, x)))
    for x, y in s.plan.pairs():
        pt = tuple(np.concatenate([x, y]))
        _timed(records, "preservation:lift", pt, s.tolerances["preservation"],
               lambda x=x, y=y: chern_preservation_residual(
                   s.metric, omega, x, y).max_abs)
        if s.metric.family == "randers" and s.two_form_kind == "randers-dbeta":
            def equivalence(x=x, y=y) -> float:
                pres = chern_preservation_residual(s.metric, omega, x, y)
                cond = randers_preservation_condition(s.metric, x, y)
                scale = max(1.0, float(np.max(np.abs(pres.entries))))
                return float(np.max(np.abs(cond.entries + pres.entries))) / scale
            _timed(records, "preservation:randers-equivalence", pt,
                   s.tolerances["randers-equivalence"], equivalence)
    return records


def _scenario(s: BuiltScenario) -> FedosovScenario:
    return FedosovScenario(s.metric, s.vector_field, s.two_form)


def _check_induce(s: BuiltScenario) -> list[CheckRecord]:
    records: list[CheckRecord] = []
    sc = _scenario(s)
    for i in range(s.plan.count):
        x = s.plan.xs[i]
        pt = tuple(x)

        def symmetry(x=x) -> float:
            gam = induce_connection(sc, x)
            return float(np.max(np.abs(gam.array - gam.array.transpose(0, 2, 1))))
        _timed(records, "induce:symmetry", pt, 0.0, symmetry)

        if s.two_form is not None:
            def exactness(x=x) -> float:
                gam = induce_connection(sc, x)
                w = s.vector_field.values(x)
                pres = chern_preservation_residual(s.metric, s.two_form, x, w)
                direct = symplectic_connection_residual(gam, s.two_form, x)
                return abs(direct - pres.max_abs)
            _timed(records, "induce:exactness", pt,
                   s.tolerances["exactness"], exactness)
    return records


def _check_darboux(s: BuiltScenario) -> list[CheckRecord]:
    if s.dimension % 2 != 0:
        raise ConfigError(
            f"darboux relations need an even dimension, got {s.dimension}",
            "/dimension")
    from .fedosov import darboux_relations_residual

    records: list[CheckRecord] = []
    sc = _scenario(s)
    std = standard_form(s.dimension // 2)
    gate = s.tolerances["preservation-gate"]
    for i in range(s.plan.count):
        x = s.plan.xs[i]
        pt = tuple(x)
        t0 = time.perf_counter()
        try:
            w = s.vector_field.values(x)
            pres = chern_preservation_residual(s.metric, std, x, w)
            if pres.max_abs > gate:
                continue  # relations are only asserted where the form is kept
            gam = induce_connection(sc, x)
            residual = darboux_relations_residual(gam, s.dimension // 2)
        except FinsymError as exc:
            records.append(CheckRecord.failed(
                "darboux:relations", pt, f"{type(exc).__name__}: {exc}",
                s.tolerances["darboux"], time.perf_counter() - t0))
            continue
        records.append(CheckRecord.evaluated(
            "darboux:relations", pt, residual, s.tolerances["darboux"],
            time.perf_counter() - t0))
    return records


def _check_transform(s: BuiltScenario) -> list[CheckRecord]:
    records: list[CheckRecord] = []
    sc = _scenario(s)
    for i in range(s.plan.count):
        x = s.plan.xs[i]

        def roundtrip(x=x) -> float:
            gam = induce_connection(sc, x)
            ghat = transform_connection(gam, s.chart, x)
            xhat = s.chart.forward_point(x)
            back = transform_connection(ghat, s.chart.swapped(), xhat)
            return float(np.max(np.abs(back.array - gam.array)))
        _timed(records, "transform:roundtrip", tuple(x),
               s.tolerances["transform"], roundtrip)
    return records


def _check_minkowski(s: BuiltScenario) -> list[CheckRecord]:
    from .fedosov import ConnectionCoefficients

    records: list[CheckRecord] = []
    tol = s.tolerances["minkowski"]
    for i in range(s.plan.count):
        x = s.plan.xs[i]
        pt = tuple(x)
        t0 = time.perf_counter()
        try:
            mk = minkowski_preservation_check(s.metric, s.two_form, s.chart, x)
            ghat = transform_connection(
                ConnectionCoefficients.zero(s.dimension), s.chart, x)
            hatted_pres = hatted_preservation_residual(
                s.two_form, s.chart, x, ghat)
            equivalence = abs(mk.hatted - hatted_pres.max_abs)
        except FinsymError as exc:
            elapsed = time.perf_counter() - t0
            msg = f"{type(exc).__name__}: {exc}"
            for facet in ("natural", "hatted", "equivalence"):
                records.append(CheckRecord.failed(
                    f"minkowski:{facet}", pt, msg, tol, elapsed))
            continue
        elapsed = time.perf_counter() - t0
        records.append(CheckRecord.evaluated(
            "minkowski:natural", pt, mk.natural, tol, elapsed))
        records.append(CheckRecord.evaluated(
            "minkowski:hatted", pt, mk.hatted, tol, elapsed))
        records.append(CheckRecord.evaluated(
            "minkowski:equivalence", pt, equivalence, tol, elapsed))
    return records


def _check_berwald_uniqueness(s: BuiltScenario) -> list[CheckRecord]:
    records: list[CheckRecord] = []
    sc = _scenario(s)
    for i in range(s.plan.count):
        x = s.plan.xs[i]
        _timed(records, "berwald-uniqueness:spread", tuple(x),
               s.tolerances["berwald-uniqueness"],
               lambda x=x: berwald_uniqueness_probe(sc, x, s.berwald_vectors))
    return records


def _check_curvature(s: BuiltScenario) -> list[CheckRecord]:
    records: list[CheckRecord] = []
    sc = _scenario(s)
    for i in range(s.plan.count):
        x = s.plan.xs[i]
        pt = tuple(x)
        t0 = time.perf_counter()
        try:
            c = curvature_induced(sc, x)
            fd = curvature_fd_commutator(sc, x)
            scale = max(1.0, float(np.max(np.abs(c.up))),
                        float(np.max(np.abs(fd))))
            consistency = float(np.max(np.abs(c.up - fd)))
            antisym = float(np.max(np.abs(c.up + c.up.swapaxes(2, 3))))
        except FinsymError as exc:
            elapsed = time.perf_counter() - t0
            msg = f"{type(exc).__name__}: {exc}"
            records.append(CheckRecord.failed(
                "curvature:fd-consistency", pt, msg,
                s.tolerances["curvature-fd"], elapsed))
            records.append(CheckRecord.failed(
                "curvature:antisymmetry", pt, msg, 0.0, elapsed))
            continue
        elapsed = time.perf_counter() - t0
        records.append(CheckRecord.evaluated(
            "curvature:fd-consistency", pt, consistency,
            s.tolerances["curvature-fd"] * scale, elapsed))
        records.append(CheckRecord.evaluated(
            "curvature:antisymmetry", pt, antisym, 0.0, elapsed))
    return records


def _check_bianchi(s: BuiltScenario) -> list[CheckRecord]:
    records: list[CheckRecord] = []
    sc = _scenario(s)
    for i in range(s.plan.count):
        x = s.plan.xs[i]
        pt = tuple(x)
        t0 = time.perf_counter()
        try:
            cyc, scale = bianchi_cyclic_residual(sc, x)
        except FinsymError as exc:
            records.append(CheckRecord.failed(
                "bianchi:cyclic", pt, f"{type(exc).__name__}: {exc}",
                s.tolerances["bianchi"], time.perf_counter() - t0))
            continue
        records.append(CheckRecord.evaluated(
            "bianchi:cyclic", pt, cyc, s.tolerances["bianchi"] * scale,
            time.perf_counter() - t0))
        if s.two_form is not None:
            _timed(records, "bianchi:two-path", pt, s.tolerances["two-path"],
                   lambda x=x: bianchi_contracted_residual(sc, x).paths_delta)
    return records


def _check_pair_symmetry(s: BuiltScenario) -> list[CheckRecord]:
    records: list[CheckRecord] = []
    sc = _scenario(s)
    gate = s.tolerances["preservation-gate"]
    for i in range(s.plan.count):
        x = s.plan.xs[i]
        pt = tuple(x)
        _timed(records, "pair-symmetry:two-path", pt, s.tolerances["two-path"],
               lambda x=x: pair_symmetry_residual(sc, x).paths_delta)
        t0 = time.perf_counter()
        try:
            w = s.vector_field.values(x)
            pres = chern_preservation_residual(s.metric, s.two_form, x, w)
            if pres.max_abs > gate:
                continue  # symmetry is only asserted at preserving points
            tp = pair_symmetry_residual(sc, x)
        except FinsymError as exc:
            records.append(CheckRecord.failed(
                "pair-symmetry:lowered", pt, f"{type(exc).__name__}: {exc}",
                s.tolerances["pair-symmetry"], time.perf_counter() - t0))
            continue
        records.append(CheckRecord.evaluated(
            "pair-symmetry:lowered", pt, tp.assembled,
            s.tolerances["pair-symmetry"] * tp.scale,
            time.perf_counter() - t0))
    return records


_CHECK_FNS = {
    "metric-validity": _check_metric_validity,
    "structural": _check_structural,
    "preservation": _check_preservation,
    "induce": _check_induce,
    "darboux": _check_darboux,
    "transform": _check_transform,
    "minkowski": _check_minkowski,
    "berwald-uniqueness": _check_berwald_uniqueness,
    "curvature": _check_curvature,
    "bianchi": _check_bianchi,
    "pair-symmetry": _check_pair_symmetry,
}


def available_checks(s: BuiltScenario) -> list[str]:
    """Check ids whose required config blocks are present."""
    out = []
    for cid in CHECK_IDS:
        ok = True
        for need in _REQUIREMENTS[cid]:
            if getattr(s, need) is None:
                ok = False
        if ok:
            out.append(cid)
    return out


def run_scenario(config: dict, suite=None, seed_override: int | None = None,
                 tolerance_overrides: dict | None = None) -> list[CheckRecord]:
    """Run the requested checks over one scenario config.

    ``suite`` is an iterable of check ids; None runs every check whose
    required blocks exist.  Records come back sorted by check id, then by
    sample-point order.  Sampling is deterministic for a given config and
    seed, so two runs produce identical records.
    """
    built = build_scenario(config, seed_override=seed_override,
                           tolerance_overrides=tolerance_overrides)
    if suite is None:
        suite = available_checks(built)
    else:
        suite = list(suite)
        for cid in suite:
            if cid not in _CHECK_FNS:
                raise ConfigError(f"unknown check id {cid!r}", "/suite")
            for need in _REQUIREMENTS[cid]:
                if getattr(built, need) is None:
                    raise ConfigError(
                        f"check {cid!r} requires the {need} block",
                        f"/{need}")
    records: list[CheckRecord] = []
    for cid in sorted(set(suite)):
        records.extend(_CHECK_FNS[cid](built))
    records.sort(key=lambda r: r.check)
    return records
