"""Command-line driver: runs the experiment suite from a config file and writes
a JSON report plus one CSV per scaling curve.

Exit codes: 0 all experiments pass, 1 some experiment failed, 2 config error,
3 internal error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import BACKEND, __version__
from .config import ConfigParseError, RunConfig, parse_config, split_list, validate
from .estimates import (LemmaConfig, ScalingReport, domination_report, fefferman_stein_ratio,
                        input_family, lemma_scaling, schedule, spike, bump, weak_type_ratio)
from .grid import Field, Grid, Space, forward_transform, inverse_transform
from .maximal import CubeFamily, constant_weight, power_weight
from .quantize import (apply_dual_fio, apply_dual_pdo, apply_fio, apply_pdo, half_wave_phase,
                       reduce_to_pdo)
from .sharpness import (SharpnessConfig, bessel_kernel, blowup_experiment,
                        convolution_identity_check, near_origin_slope, sharpness_contrast)
from .symbols import catalog, conjugate

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG, EXIT_INTERNAL = 0, 1, 2, 3
SCHEMA = 1


# --------------------------------------------------------------------------
# records


@dataclass
class Curve:
    abscissa: list[float]
    measurement: list[float]
    predicted: list[float]
    fitted: list[float]
    slope: float
    predicted_slope: float | None
    r_squared: float

    @classmethod
    def from_report(cls, rep: ScalingReport) -> "Curve":
        ts = np.asarray(rep.abscissae, dtype=float)
        if rep.notes.get("log_abscissa"):
            ts = np.log2(ts)
        pred = []
        if rep.predicted_slope is not None:
            # predicted-slope line through the centroid of the log data
            ly = np.log2(rep.measurements)
            c = float(np.mean(ly) - rep.predicted_slope * np.mean(ts))
            pred = [float(2.0 ** (c + rep.predicted_slope * t)) for t in ts]
        return cls(list(rep.abscissae), list(rep.measurements), pred, rep.fitted(),
                   rep.fitted_slope, rep.predicted_slope, rep.r_squared)


@dataclass
class ExperimentRecord:
    name: str
    checks: list[dict] = field(default_factory=list)
    data: dict = field(default_factory=dict)
    curves: dict[str, Curve] = field(default_factory=dict)
    error: str | None = None
    wall_seconds: float = 0.0

    def check(self, name: str, value, threshold, ok: bool) -> None:
        self.checks.append({"name": name, "value": value, "threshold": threshold, "pass": bool(ok)})

    @property
    def passed(self) -> bool:
        return self.error is None and all(c["pass"] for c in self.checks)

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "status": "pass" if self.passed else "fail",
            "checks": self.checks,
            "data": self.data,
            "curves": {k: vars(c) for k, c in self.curves.items()},
            "error": self.error,
            "wall_seconds": self.wall_seconds,
        }


def _plain(obj):
    """JSON-safe copy: numpy scalars and arrays to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    return obj


def _rel_err(a: np.ndarray, b: np.ndarray) -> float:
    scale = float(np.max(np.abs(b)))
    return float(np.max(np.abs(a - b)) / scale) if scale else float(np.max(np.abs(a)))


# --------------------------------------------------------------------------
# experiments


def _grid(cfg: RunConfig, N: int | None = None) -> Grid:
    g = cfg["grid"]
    return Grid(g["dim"], g["L"], N or g["N"])


def exp_identity(cfg: RunConfig, rec: ExperimentRecord) -> None:
    tol = cfg["tolerances"]
    g = _grid(cfg)
    rng = np.random.default_rng(cfg.seed)
    u = Field.spatial(g, rng.normal(size=g.shape) + 1j * rng.normal(size=g.shape))
    err = _rel_err(apply_pdo(catalog("identity"), u).values, u.values)
    rec.check("identity_symbol", err, tol["identity"], err <= tol["identity"])

    m = catalog("bessel_multiplier", m=-float(g.dim))
    direct = inverse_transform(Field(g, m(np.zeros(g.dim), g.frequencies()) * forward_transform(u).values,
                                     Space.FREQUENCY)).values
    err = _rel_err(apply_pdo(m, u).values, direct)
    rec.check("multiplier", err, 1e-12, err <= 1e-12)

    a = catalog("oscillating_exotic", m=-float(g.dim), delta=0.5)
    ac = conjugate(a)
    worst = 0.0
    for _ in range(cfg["identity"]["pairs"]):
        u = rng.normal(size=g.shape) + 1j * rng.normal(size=g.shape)
        v = rng.normal(size=g.shape) + 1j * rng.normal(size=g.shape)
        lhs = np.vdot(v, apply_pdo(a, Field.spatial(g, u)).values)
        rhs = np.vdot(apply_dual_pdo(ac, Field.spatial(g, v)).values, u)
        worst = max(worst, abs(lhs - rhs) / max(abs(lhs), 1e-300))
    rec.check("adjoint", worst, tol["adjoint"], worst <= tol["adjoint"])


def _domination_symbol(name: str, dim: int, delta: float):
    if name == "oscillating_exotic":
        return catalog(name, m=-float(dim), delta=delta), "pdo"
    if name == "rough_sample":
        return catalog(name, m=-float(dim)), "dual"
    return catalog(name, m=-float(dim)), "pdo"


def exp_domination(cfg: RunConfig, rec: ExperimentRecord) -> None:
    sec, tol = cfg["domination"], cfg["tolerances"]
    coarse, fine = _grid(cfg, cfg["grid"]["N"] // 2), _grid(cfg)
    for name in split_list(sec["symbols"]):
        a, kind = _domination_symbol(name, coarse.dim, sec["delta"])
        sups = {}
        for g in (coarse, fine):
            F = CubeFamily(g)
            fam = input_family(g, sec["inputs"], seed=cfg.seed)
            sups[g.N] = [domination_report(kind, a, u, F, nm).sup_ratio for nm, u in fam]
        s0, s1 = np.asarray(sups[coarse.N]), np.asarray(sups[fine.N])
        spread = float(s1.max() / s1.min())
        change = float(max(s1.max() / s0.max(), s0.max() / s1.max()))
        rec.data[name] = {"kind": kind, "sup_ratios": {str(k): v for k, v in sups.items()},
                          "spread": spread, "sup_change": change}
        rec.check(f"{name}.finite", float(s1.max()), "finite", bool(np.all(np.isfinite(s1))))
        rec.check(f"{name}.spread", spread, tol["domination_spread"], spread <= tol["domination_spread"])
        rec.check(f"{name}.stability", change, tol["domination_stability"],
                  change <= tol["domination_stability"])


def exp_lemma(cfg: RunConfig, rec: ExperimentRecord) -> None:
    sec, tol = cfg["lemma_scaling"], cfg["tolerances"]
    g = Grid(cfg["grid"]["dim"], sec["L"], sec["N"])
    a = catalog(sec["symbol"], m=sec["m"], delta=sec["delta"])
    u = spike(g, np.zeros(g.dim))
    js = list(range(sec["j_min"], sec["j_max"] + 1))
    lemma = sec["lemma"]
    rep = lemma_scaling(lemma, a, LemmaConfig(u=u, l=sec["l"], js=js, delta=sec["delta"]))
    rec.curves[lemma] = Curve.from_report(rep)
    rec.data["notes"] = rep.notes
    if lemma == "L2":
        err = rep.slope_error()
        rec.check("slope", rep.fitted_slope, f"{rep.predicted_slope:g} +/- {tol['slope']:g}",
                  err <= tol["slope"])
    else:
        # the remaining lemmas are upper bounds: decay may be faster than the exponent
        bound = rep.predicted_slope + tol["slope"]
        rec.check("slope_upper_bound", rep.fitted_slope, bound, rep.fitted_slope <= bound)
    rec.check("r_squared", rep.r_squared, tol["r_squared"], rep.r_squared >= tol["r_squared"])


def exp_schedule(cfg: RunConfig, rec: ExperimentRecord) -> None:
    sec = cfg["schedule"]
    rows = []
    for n in split_list(sec["dims"], int):
        for d in split_list(sec["deltas"], float):
            try:
                s = schedule(n, d)
            except ValueError as exc:
                rec.check(f"n={n},delta={d:g}", str(exc), "invariants", False)
                continue
            rows.append({k: getattr(s, k) for k in ("n", "delta", "N_delta", "theta0", "T_delta",
                                                    "gamma", "theta1", "epsilon", "N_parts")})
            rec.check(f"n={n},delta={d:g}", s.T_delta, "T_delta > 0", s.T_delta > 0)
    rec.data["table"] = rows


def _fs_inputs(g: Grid, count: int, seed: int) -> list[Field]:
    rng = np.random.default_rng(seed)
    coarse = -g.L / 2 + g.L / 16 * np.arange(16)
    return [bump(g, rng.choice(coarse, size=g.dim), g.L / 32 * rng.uniform(1.0, 3.0))
            for _ in range(count)]


def _fs_weight(g: Grid, name: str):
    if name == "one":
        return constant_weight(g)
    if name.startswith("power:"):
        return power_weight(g, float(name.split(":", 1)[1]))
    raise ValueError(f"unknown weight {name!r}")


def exp_fefferman_stein(cfg: RunConfig, rec: ExperimentRecord) -> None:
    sec, tol = cfg["fefferman_stein"], cfg["tolerances"]
    grids = (_grid(cfg), _grid(cfg, 2 * cfg["grid"]["N"]))
    for wname in split_list(sec["weights"]):
        vals = []
        for g in grids:
            F = CubeFamily(g)
            w = _fs_weight(g, wname)
            vals.append([fefferman_stein_ratio(u, w, 1.0, True, F)
                         for u in _fs_inputs(g, sec["bumps"], cfg.seed)])
        r0, r1 = np.asarray(vals[0]), np.asarray(vals[1])
        change = float(np.max(np.maximum(r1 / r0, r0 / r1)))
        rec.data[wname] = {"ratios": vals, "max_change": change}
        rec.check(f"{wname}.finite", float(r1.max()), "finite", bool(np.all(np.isfinite(r1))))
        rec.check(f"{wname}.stability", change, tol["fs_stability"], change <= tol["fs_stability"])


def exp_weak_type(cfg: RunConfig, rec: ExperimentRecord) -> None:
    sec, tol = cfg["weak_type"], cfg["tolerances"]
    grids = (_grid(cfg), _grid(cfg, 2 * cfg["grid"]["N"]))
    a = catalog(sec["symbol"], m=-float(grids[0].dim))
    rng = np.random.default_rng(cfg.seed)
    coarse = -grids[0].L / 2 + grids[0].L / 16 * np.arange(16)
    points = [rng.choice(coarse, size=grids[0].dim) for _ in range(sec["inputs"])]
    vals = [[weak_type_ratio("pdo", a, spike(g, p)) for p in points] for g in grids]
    r0, r1 = np.asarray(vals[0]), np.asarray(vals[1])
    change = float(np.max(np.maximum(r1 / r0, r0 / r1)))
    u = spike(grids[0], points[0])
    scaled = weak_type_ratio("pdo", a, u * 3.5)
    rec.data.update(ratios=vals, max_change=change)
    rec.check("finite", float(r1.max()), "finite", bool(np.all(np.isfinite(r1))))
    rec.check("scale_invariance", abs(scaled - r0[0]) / r0[0], 1e-12, abs(scaled - r0[0]) <= 1e-12 * r0[0])
    rec.check("stability", change, tol["weak_type_stability"], change <= tol["weak_type_stability"])


def exp_counterexample(cfg: RunConfig, rec: ExperimentRecord) -> None:
    sec, tol = cfg["counterexample"], cfg["tolerances"]
    dim = cfg["grid"]["dim"]
    sc = SharpnessConfig(n=dim, m=sec["m"], a_exp=sec["a"], b_exp=sec["b"], eta=sec["eta"],
                         eps_ladder=tuple(split_list(sec["eps_ladder"], float)),
                         singular=sec["singular"])
    g = Grid(dim, sec["L"], sec["N"])
    err = convolution_identity_check(sc, g)
    rec.check("convolution_identity", err, tol["convolution"], err <= tol["convolution"])

    kr = near_origin_slope(bessel_kernel(sc.m, g))
    rec.curves["bessel_near_origin"] = Curve.from_report(kr)
    rec.check("bessel_slope", kr.fitted_slope, f"{kr.predicted_slope:g} +/- {tol['bessel_slope']:g}",
              kr.slope_error() <= tol["bessel_slope"])

    br = blowup_experiment(sc, g)
    rec.curves["blowup"] = Curve.from_report(br)
    rec.check("blowup_slope", br.fitted_slope, f"{br.predicted_slope:g} +/- {tol['slope']:g}",
              br.slope_error() <= tol["slope"])
    meas = br.measurements
    worst_dip = max([0.0] + [1 - meas[i + 1] / meas[i] for i in range(len(meas) - 1)])
    rec.check("blowup_monotone", worst_dip, tol["monotone_dip"], worst_dip <= tol["monotone_dip"])

    Ns = split_list(sec["contrast_N"], int)
    con = sharpness_contrast(sc, [Grid(dim, sec["L"], N) for N in Ns])
    rec.data["contrast"] = {"N": Ns, **con}
    crit, sup = np.asarray(con["critical"]), np.asarray(con["supercritical"])
    drift = float(crit.max() / crit.min())
    growth = float(np.min(sup[1:] / sup[:-1])) if len(sup) > 1 else float("nan")
    rec.check("contrast_critical_stable", drift, tol["contrast_stable"], drift <= tol["contrast_stable"])
    rec.check("contrast_supercritical_growth", growth, tol["contrast_growth"],
              growth >= tol["contrast_growth"])


def exp_fio_check(cfg: RunConfig, rec: ExperimentRecord) -> None:
    sec, tol = cfg["fio_check"], cfg["tolerances"]
    g = _grid(cfg)
    phi = half_wave_phase(sec["speed"])
    a = catalog("oscillating_exotic", m=-float(g.dim), delta=0.5)
    b, bd = reduce_to_pdo(a, phi), reduce_to_pdo(a, phi, dual=True)
    rng = np.random.default_rng(cfg.seed)
    worst = worst_dual = 0.0
    for _ in range(sec["inputs"]):
        u = Field.spatial(g, rng.normal(size=g.shape) + 1j * rng.normal(size=g.shape))
        worst = max(worst, _rel_err(apply_fio(a, phi, u).values, apply_pdo(b, u).values))
        worst_dual = max(worst_dual, _rel_err(apply_dual_fio(a, phi, u).values,
                                              apply_dual_pdo(bd, u).values))
    rec.check("fio_reduction", worst, tol["fio"], worst <= tol["fio"])
    rec.check("dual_fio_reduction", worst_dual, tol["fio"], worst_dual <= tol["fio"])


RUNNERS = {
    "identity": exp_identity,
    "domination": exp_domination,
    "lemma_scaling": exp_lemma,
    "schedule": exp_schedule,
    "fefferman_stein": exp_fefferman_stein,
    "weak_type": exp_weak_type,
    "counterexample": exp_counterexample,
    "fio_check": exp_fio_check,
}


# --------------------------------------------------------------------------
# orchestration


def run(cfg: RunConfig) -> tuple[dict, int]:
    """Run every enabled experiment in declaration order; return the report and exit code."""
    records = []
    for name in cfg.enabled():
        rec = ExperimentRecord(name)
        t0 = time.perf_counter()
        try:
            RUNNERS[name](cfg, rec)
        except Exception as exc:  # recorded, the suite goes on
            rec.error = f"{type(exc).__name__}: {exc}"
        rec.wall_seconds = time.perf_counter() - t0
        records.append(rec)
    ok = all(r.passed for r in records)
    report = {
        "schema": SCHEMA,
        "status": "pass" if ok else "fail",
        "environment": {"version": __version__, "backend": BACKEND, "grid": dict(cfg["grid"]),
                        "seed": cfg.seed},
        "config": cfg.echo(),
        "experiments": [_plain(r.as_dict()) for r in records],
    }
    return report, EXIT_PASS if ok else EXIT_FAIL


def write_outputs(report: dict, cfg: RunConfig, out: Path) -> list[Path]:
    out.mkdir(parents=True, exist_ok=True)
    fmts = split_list(cfg["output"]["formats"])
    written = []
    if "json" in fmts:
        p = out / "report.json"
        p.write_text(json.dumps(report, indent=2, sort_keys=False) + "\n", encoding="utf-8")
        written.append(p)
    if "csv" in fmts:
        for exp in report["experiments"]:
            for cname, c in exp["curves"].items():
                p = out / f"{exp['name']}_{cname}.csv"
                with p.open("w", newline="", encoding="utf-8") as fh:
                    w = csv.writer(fh)
                    w.writerow(["abscissa", "measurement", "predicted", "fitted"])
                    n = len(c["abscissa"])
                    pred = c["predicted"] or [""] * n
                    for row in zip(c["abscissa"], c["measurement"], pred, c["fitted"]):
                        w.writerow([repr(v) if isinstance(v, float) else v for v in row])
                written.append(p)
    return written


def _summary(report: dict, stream) -> None:
    for exp in report["experiments"]:
        print(f"{exp['status'].upper():4s}  {exp['name']:16s} {exp['wall_seconds']:7.2f}s", file=stream)
        if exp["error"]:
            print(f"      error: {exp['error']}", file=stream)
        for c in exp["checks"]:
            if not c["pass"]:
                print(f"      {c['name']}: {c['value']} (threshold {c['threshold']})", file=stream)
    print(f"overall: {report['status']}", file=stream)


def _schedule_table(dims: list[int], deltas: list[float], stream) -> None:
    cols = ("n", "delta", "N_delta", "theta0", "T_delta", "gamma", "theta1", "epsilon")
    print("  ".join(f"{c:>10s}" for c in cols), file=stream)
    for n in dims:
        for d in deltas:
            s = schedule(n, d)
            row = [s.n, s.delta, s.N_delta, s.theta0, s.T_delta, s.gamma, s.theta1, s.epsilon]
            print("  ".join(f"{v:>10d}" if isinstance(v, int) else f"{v:>10.6g}" for v in row),
                  file=stream)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="config file (section.key = value lines)")
    common.add_argument("--out", type=Path, help="output directory (overrides output.directory)")
    common.add_argument("--seed", type=int, help="overrides run.seed")
    common.add_argument("--grid-n", type=int, help="overrides grid.N")
    common.add_argument("--dim", type=int, choices=(1, 2), help="overrides grid.dim")

    p = argparse.ArgumentParser(prog="psido-lab", description="Run the experiment suite and write a JSON report plus per-curve CSV files.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("run", parents=[common], help="run every enabled experiment")
    sp = sub.add_parser("schedule", parents=[common], help="print the exponent schedule table")
    sp.add_argument("--deltas", help="comma-separated delta values")
    sp.add_argument("--dims", help="comma-separated dimensions")
    sub.add_parser("counterexample", parents=[common], help="sharpness counterexample")
    sub.add_parser("domination", parents=[common], help="sharp-function domination sweep")
    lp = sub.add_parser("lemma", parents=[common], help="one dyadic-block scaling law")
    lp.add_argument("--lemma", choices=("L1", "L2", "L3", "L4", "L5"))
    sub.add_parser("fio-check", parents=[common], help="FIO-to-PDO reduction check")
    return p


SINGLE = {"counterexample": "counterexample", "domination": "domination",
          "lemma": "lemma_scaling", "fio-check": "fio_check"}


def _load(args) -> RunConfig:
    text = args.config.read_text(encoding="utf-8") if args.config else ""
    cfg = parse_config(text)
    for flag, (sec, key) in (("seed", ("run", "seed")), ("grid_n", ("grid", "N")), ("dim", ("grid", "dim"))):
        val = getattr(args, flag)
        if val is not None:
            cfg.set(sec, key, val)
    if args.out is not None:
        cfg.set("output", "directory", str(args.out))
    if getattr(args, "lemma", None):
        cfg.set("lemma_scaling", "lemma", args.lemma)
    if args.command in SINGLE:
        for e in RUNNERS:
            cfg.set(e, "enabled", e == SINGLE[args.command])
    validate(cfg)
    return cfg


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        try:
            cfg = _load(args)
        except (ConfigParseError, OSError) as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        if args.command == "schedule":
            try:
                dims = split_list(args.dims or cfg["schedule"]["dims"], int)
                deltas = split_list(args.deltas or cfg["schedule"]["deltas"], float)
                _schedule_table(dims, deltas, sys.stdout)
            except ValueError as exc:
                print(f"config error: {exc}", file=sys.stderr)
                return EXIT_CONFIG
            return EXIT_PASS
        report, code = run(cfg)
        write_outputs(report, cfg, Path(cfg["output"]["directory"]))
        _summary(report, sys.stdout)
        return code
    except Exception as exc:
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
