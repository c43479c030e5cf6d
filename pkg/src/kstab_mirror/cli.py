"""Command line front end: ``kstab <command> [options]``.

Commands: describe, critical, pairing, df, slope, futaki, scan.  A job is
read from an optional JSON config and then overridden by flags.  Exit codes:
0 success, 1 tolerance check failed, 2 bad config, 3 invalid fan,
4 wall detected, 5 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import mpmath

from . import catalog, precision
from .critical_solver import (critical_points, scan_walls, tropical_critical_points,
                              validate_chamber)
from .errors import ConfigError, KStabError, ToleranceFailure
from .exp_laurent import to_mpc
from .lg_mirror import potential
from .stability_engine import (FutakiFixedDivisor, TestConfigQuadratic, asymptotic_contribution,
                               df_mirror, futaki_divisor_contribution, futaki_integrand,
                               futaki_mirror_ratio, futaki_mirror_sum, pairing_matrix,
                               quotient_slope_mirror)
from .surface_geometry import (anticanonical_class, build_toric_surface, frac,
                               intersection_number, is_kahler, is_nef, slope_mu)

COMMANDS = ("describe", "critical", "pairing", "df", "slope", "futaki", "scan")
FORMATS = ("table", "jsonl", "csv")
NAMED_PARAMS = ("t", "q", "a", "b", "r", "delta", "a1", "a2", "a3", "a4")
DEFAULT_K = (3, 5, 8)
DEFAULT_TOL = 1e-6
DIGITS = 15


# -- job assembly -------------------------------------------------------------

def _rational(v, what: str) -> Fraction:
    try:
        return frac(v)
    except (ValueError, TypeError, ZeroDivisionError):
        raise ConfigError(f"{what}: cannot read {v!r} as a rational") from None


def load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        data = json.loads(Path(path).read_text())
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e.strerror}") from None
    except json.JSONDecodeError as e:
        raise ConfigError(f"config {path} is not valid JSON: {e}") from None
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    return data


def merge(cfg: dict, args: argparse.Namespace) -> dict:
    """Flags override the config file."""
    job = dict(cfg)
    job["kahler"] = dict(cfg.get("kahler", {}))
    for name in NAMED_PARAMS:
        v = getattr(args, name, None)
        if v is not None:
            job["kahler"][name] = v
    for item in args.param or []:
        if "=" not in item:
            raise ConfigError(f"--param expects NAME=VALUE, got {item!r}")
        key, val = item.split("=", 1)
        job["kahler"][key.strip()] = val.strip()
    for key in ("surface", "z", "s", "format", "precision", "tolerance"):
        v = getattr(args, key, None)
        if v is not None:
            job[key] = v
    if args.k:
        job["k"] = args.k
    if getattr(args, "allow_walls", False):
        job["allow_walls"] = True
    if "surface" not in job:
        raise ConfigError("no surface given (use --surface or a config file)")
    return job


def k_list(job: dict) -> list[Fraction]:
    ks = job.get("k", list(DEFAULT_K))
    if not isinstance(ks, (list, tuple)):
        ks = [ks]
    ks = [_rational(k, "k") for k in ks]
    if not ks or any(k <= 0 for k in ks):
        raise ConfigError("k values must be positive")
    if any(b <= a for a, b in zip(ks, ks[1:])):
        raise ConfigError("k values must be strictly increasing")
    return ks


def build(job: dict, **override):
    """(surface, omega, chart) for a built-in name or an inline fan."""
    spec = job["surface"]
    params = {k: _rational(v, k) for k, v in job.get("kahler", {}).items()}
    params.update(override)
    if isinstance(spec, str):
        return catalog.make(spec, **params)
    if not isinstance(spec, dict) or "rays" not in spec:
        raise ConfigError("surface must be a built-in name or an object with 'rays'")
    S = build_toric_surface(spec["rays"], spec.get("names"), name=spec.get("name", "toric"),
                            named=spec.get("named"))
    if "omega" not in spec:
        raise ConfigError("an inline surface needs an 'omega' class")
    omega = S.cls(spec["omega"])
    return S, omega, potential(S, omega, allow_limit=bool(spec.get("allow_limit", False)))


# -- formatting ---------------------------------------------------------------

def fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "yes" if v else "no"
    if isinstance(v, (Fraction, int, str)):
        return str(v)
    if isinstance(v, (tuple, list)):
        return "(" + ", ".join(fmt(x) for x in v) + ")"
    z = to_mpc(v)
    if abs(z.imag) <= mpmath.mpf(10) ** (-DIGITS - 5) * max(1, abs(z)):
        return mpmath.nstr(z.real, DIGITS)
    return mpmath.nstr(z, DIGITS)


def _emit_table(rows: Sequence[dict], form: str, out, name: str) -> None:
    cols: list[str] = []
    for r in rows:
        for c in r:
            if c not in cols:
                cols.append(c)
    if form == "jsonl":
        for r in rows:
            out.write(json.dumps({"table": name, **r}, sort_keys=True) + "\n")
    elif form == "csv":
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
        out.write(buf.getvalue())
    else:
        width = {c: max([len(c)] + [len(r.get(c, "")) for r in rows]) for c in cols}
        out.write("  ".join(c.ljust(width[c]) for c in cols).rstrip() + "\n")
        for r in rows:
            out.write("  ".join(r.get(c, "").ljust(width[c]) for c in cols).rstrip() + "\n")


def emit(tables: dict[str, Sequence[dict]], form: str, out) -> None:
    """Write each named group of records; groups are separated by a blank line."""
    first = True
    for name, records in tables.items():
        if not records:
            continue
        if not first and form != "jsonl":
            out.write("\n")
        first = False
        _emit_table([{k: fmt(v) for k, v in r.items()} for r in records], form, out, name)


# -- commands -----------------------------------------------------------------

def cmd_describe(job: dict) -> tuple[list[dict], list[str]]:
    S, omega, chart = build(job)
    recs = []
    rays = dict(zip(S.basis, S.rays)) if chart.toric else {}
    for name, D in S.boundary():
        row = {"divisor": name, "ray": rays.get(name, "")}
        for other, C in S.boundary():
            row[other] = intersection_number(S, D, C)
        row["omega.D"] = intersection_number(S, omega, D)
        recs.append(row)
    recs = {"intersections": recs}
    lines = [f"surface: {S.name}",
             f"omega: {omega}",
             f"-K: {anticanonical_class(S)}",
             f"omega^2: {intersection_number(S, omega, omega)}",
             f"kahler: {'yes' if is_kahler(S, omega) else ('nef limit' if is_nef(S, omega) else 'no')}",
             f"mu: {slope_mu(S, omega)}"]
    return recs, lines


def _family_records(chart, fams):
    report = validate_chamber(chart, fams)
    margins = {f["beta"]: f["margins"] for f in report.families}
    recs = []
    for i, a in enumerate(fams):
        ms = margins.get(a.beta, ())
        recs.append({"index": i, "family": a.family, "beta": a.beta, "alpha": a.alpha,
                     "multiplicity": a.multiplicity, "wall": a.on_wall,
                     "min_margin": min(ms) if ms else None})
    return recs


def cmd_critical(job: dict):
    _, _, chart = build(job)
    fams = tropical_critical_points(chart, allow_walls=bool(job.get("allow_walls")))
    pts = []
    for k in k_list(job):
        for p in critical_points(chart, k, allow_walls=True, families=fams):
            pts.append({"k": k, "family": p.family, "x": p.coords[0], "y": p.coords[1],
                         "residual": mpmath.nstr(p.grad_residual, 3),
                         "hessian": p.hessian_det, "nondegenerate": p.nondegenerate})
    recs = {"families": _family_records(chart, fams), "points": pts}
    return recs, [f"chart: {chart.label} ({chart.note})", f"points: {len(fams)}"]


def _tolerance(job: dict) -> float:
    return float(job.get("tolerance", DEFAULT_TOL))


def cmd_pairing(job: dict):
    _, _, chart = build(job)
    ks = k_list(job)
    k = ks[0] if "k" in job else Fraction(4)
    names, mirror, exact = pairing_matrix(chart, k)
    recs, worst = [], mpmath.mpf(0)
    for i, a in enumerate(names):
        for j, b in enumerate(names):
            dev = abs(mirror[i][j] - to_mpc(exact[i][j]))
            worst = max(worst, dev)
            recs.append({"i": a, "j": b, "mirror": mirror[i][j], "exact": exact[i][j],
                         "deviation": mpmath.nstr(dev, 3)})
    lines = [f"k: {k}", f"max deviation: {mpmath.nstr(worst, 3)}"]
    failed = worst > _tolerance(job)
    return {"pairing": recs}, lines, failed


def _testconfig(S, omega, job: dict) -> TestConfigQuadratic:
    """Quadratic from [coef, A, B] triples; ``"omega"`` names the Kahler class."""
    terms = job.get("testconfig")
    if not isinstance(terms, list):
        raise ConfigError("df needs a 'testconfig' list of [coef, A, B] triples")
    out = []
    for t in terms:
        if not isinstance(t, list) or len(t) != 3:
            raise ConfigError(f"testconfig term {t!r} is not [coef, A, B]")
        coef, A, B = t
        out.append((_rational(coef, "testconfig"), omega if A == "omega" else A,
                    omega if B == "omega" else B))
    return TestConfigQuadratic.from_products(S, out)


def _report_records(rep) -> dict[str, list[dict]]:
    return {"mirror": [{"k": k, "mirror": v} for k, v in rep.mirror],
            "families": [{"family": f["family"], "beta": f["beta"], "alpha": f["alpha"],
                          "c": f["c"], "gamma": f["gamma"]} for f in rep.families]}


def _report_lines(rep) -> list[str]:
    lines = [f"intersection: {fmt(rep.intersection)}",
             f"mirror limit: {fmt(rep.limit)}",
             f"concentrated: {fmt(rep.concentrated)}",
             f"concentrated limit: {fmt(rep.concentrated_limit)}"]
    if rep.verdict:
        lines.append(f"verdict: {rep.verdict}")
    lines += [f"note: {n}" for n in rep.notes]
    return lines


def _compare(rep, tol: float, relative: bool = False) -> bool:
    if rep.intersection is None:
        return False
    exact = to_mpc(rep.intersection)
    err = abs(to_mpc(rep.limit) - exact)
    if relative and exact != 0:
        err /= abs(exact)
    return err > tol


def cmd_df(job: dict):
    S, omega, chart = build(job)
    rep = df_mirror(chart, _testconfig(S, omega, job), k_list(job))
    return _report_records(rep), _report_lines(rep), _compare(rep, _tolerance(job)), rep


def cmd_slope(job: dict):
    _, _, chart = build(job)
    if "z" not in job or "s" not in job:
        raise ConfigError("slope needs a divisor (--z) and a parameter (--s)")
    omega = job.get("omega_theta")
    if omega is not None:
        omega = {n: _rational(v, "omega_theta") for n, v in omega.items()}
    rep = quotient_slope_mirror(chart, job["z"], _rational(job["s"], "s"), k_list(job), omega=omega)
    return (_report_records(rep), _report_lines(rep),
            _compare(rep, _tolerance(job), relative=True), rep)


def _fixed_divisor(S, spec, what: str) -> FutakiFixedDivisor:
    if not isinstance(spec, dict) or "class" not in spec or "moment" not in spec:
        raise ConfigError(f"futaki {what} needs 'class' and 'moment'")
    return FutakiFixedDivisor(S.cls(spec["class"]), _rational(spec["moment"], "moment"),
                              _rational(spec.get("weight", 1), "weight"), spec.get("name", spec["class"]))


def cmd_futaki(job: dict):
    S, omega, chart = build(job)
    spec = job.get("futaki")
    if not isinstance(spec, dict):
        raise ConfigError("futaki needs a 'futaki' section with a 'divisor'")
    D = _fixed_divisor(S, spec.get("divisor"), "divisor")
    tol = _tolerance(job)
    recs, fam_recs, failed = [], [], False
    for k in k_list(job):
        exact = futaki_divisor_contribution(S, omega, D, k)
        mirror = futaki_mirror_sum(chart, D, k)
        dev = abs(mirror - exact)
        failed |= dev > tol * max(1, abs(exact))
        recs.append({"k": k, "intersection": exact, "mirror": mirror, "deviation": mpmath.nstr(dev, 3)})
    fams = tropical_critical_points(chart, allow_walls=True)
    f = futaki_integrand(chart, D)
    for i, a in enumerate(fams):
        ld = asymptotic_contribution(f, chart, a)
        fam_recs.append({"index": i, "beta": a.beta, "alpha": a.alpha, "c": ld.amp, "gamma": ld.rate})
    lines = [f"divisor: {D.name}  mu_hat = {mpmath.nstr(D.mu_hat, DIGITS)}"]
    if "reference" in spec:
        D2 = _fixed_divisor(S, spec["reference"], "reference")
        try:
            pts = [fams[int(i)] for i in spec["points"]]
            ref = fams[int(spec["reference_point"])]
        except (KeyError, IndexError, ValueError, TypeError):
            raise ConfigError("futaki ratio needs 'points' (family indices) and 'reference_point'") from None
        ratio = futaki_mirror_ratio(chart, D, D2, pts, ref)
        lines.append(f"ratio: {fmt(ratio)}")
    return {"totals": recs, "families": fam_recs}, lines, failed


def cmd_scan(job: dict):
    spec = job.get("scan")
    if not isinstance(spec, dict):
        raise ConfigError("scan needs a 'scan' section {param, lo, hi, step}")
    try:
        param = spec["param"]
        lo, hi = _rational(spec["lo"], "lo"), _rational(spec["hi"], "hi")
        step = _rational(spec.get("step", "1/40"), "step")
    except KeyError as e:
        raise ConfigError(f"scan section lacks {e.args[0]!r}") from None
    if not lo < hi or step <= 0:
        raise ConfigError("scan needs lo < hi and a positive step")
    walls = scan_walls(lambda t: build(job, **{param: t})[2], lo, hi, step)
    recs = [{"param": param, "wall": w, "approx": mpmath.nstr(mpmath.mpf(w.numerator) / w.denominator, 10)}
            for w in walls]
    return {"walls": recs}, [f"walls in ({lo}, {hi}): {len(walls)}"]


# -- entry point ----------------------------------------------------------------

def parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="kstab", description="Mirror-side K-stability computations.")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        c = sub.add_parser(name)
        c.add_argument("--config", help="JSON job file")
        c.add_argument("--surface", help="built-in surface name")
        c.add_argument("--k", nargs="+", help="values of k (increasing)")
        c.add_argument("--s", help="slope parameter s = c/k")
        c.add_argument("--z", help="divisor class for the slope test")
        for n in NAMED_PARAMS:
            c.add_argument(f"--{n}", help=f"Kahler parameter {n}")
        c.add_argument("--param", action="append", metavar="NAME=VALUE", help="Kahler parameter")
        c.add_argument("--format", choices=FORMATS)
        c.add_argument("--precision", type=int, help="working precision in bits")
        c.add_argument("--tolerance", type=float, help="tolerance for the built-in checks")
        c.add_argument("--allow-walls", action="store_true", help="accept families on a wall")
    return p


def run(argv: Sequence[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    args = parser().parse_args(argv)
    try:
        job = merge(load_config(args.config), args)
        bits = int(job.get("precision") or precision.default_bits())
        if bits < precision.MIN_BITS:
            raise ConfigError(f"precision {bits} is below {precision.MIN_BITS} bits")
        form = job.get("format", "table")
        if form not in FORMATS:
            raise ConfigError(f"unknown format {form!r}")
        with precision.working_precision(bits):
            result = globals()[f"cmd_{args.command}"](job)
        recs, lines = result[0], result[1]
        failed = len(result) > 2 and result[2]
        if form == "table":
            for line in lines:
                out.write(line + "\n")
        emit(recs, form, out)
        if failed:
            raise ToleranceFailure("tolerance check failed")
    except KStabError as e:
        sys.stderr.write(f"kstab: {type(e).__name__}: {e}\n")
        return e.exit_code
    except ValueError as e:
        sys.stderr.write(f"kstab: {e}\n")
        return ConfigError.exit_code
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
