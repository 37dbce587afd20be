"""Command-line front end.

Exit codes: 0 verified, 2 computed but the inequality did not verify, 1 error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from . import __version__
from . import gauss_cex, sphere_cex, spectral
from .warped_geometry import bakry_emery_frame, ricci_frame, round_sphere_metric, cylinder_metric

SCHEMA = "spectral-obstruction/1"
EXIT_OK, EXIT_ERROR, EXIT_NOT_VERIFIED = 0, 1, 2

GEOMETRIES = ("round-sphere", "ou", "torus", "clifford-torus", "sphere-eps", "torpedo", "gaussian")
RICCI_GEOMETRIES = ("sphere-eps", "round-sphere", "cylinder", "torpedo")


@dataclass
class RunConfig:
    command: str = ""
    d: int = 4
    eps: float | None = None
    k: int | None = None
    grid_n: int = 10_000
    spectrum_n: int = 2000
    lambda_max: float | None = None
    lmax: int | None = None
    mmax: int | None = None
    rmax: float | None = None
    rho: float | None = None
    r1: float | None = None
    r2: float | None = None
    count: int = 20
    geometry: str | None = None
    reference: str = "torpedo"
    mode: str = "certificate"
    L: float = 1.0
    horizon: int | None = None
    output_format: str = "human"
    output_path: str | None = None
    seed: int = 0
    workers: int = 1
    timing: bool = False


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _coerce(name: str, raw: str):
    kind = _FIELD_TYPES[name]
    if raw.lower() in ("none", ""):
        return None
    if "bool" in kind:
        return raw.lower() in ("1", "true", "yes", "on")
    if "int" in kind:
        return int(raw)
    if "float" in kind:
        return float(raw)
    return raw


def read_config_file(path: str) -> dict:
    """Flat ``key = value`` lines; ``#`` starts a comment; keys use RunConfig field names."""
    out = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key=value")
        key, value = (x.strip() for x in line.split("=", 1))
        key = key.replace("-", "_")
        if key == "format":
            key = "output_format"
        if key not in _FIELD_TYPES or key == "command":
            raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
        out[key] = _coerce(key, value)
    return out


# -- serialization -----------------------------------------------------------

def _fmt_float(x: float) -> str:
    if not math.isfinite(x):
        return "null"
    return "%.17g" % x


def to_json(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON with every float at 17 significant digits; non-finite floats become null."""
    pad, inner = " " * (indent * _level), " " * (indent * (_level + 1))
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {to_json(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [f"{inner}{to_json(v, indent, _level + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if obj is None:
        return "null"
    return json.dumps(str(obj))


def _label(label) -> str:
    return ";".join(str(x) for x in label)


def spectrum_to_dict(spec: spectral.Spectrum, count: int | None = None) -> dict:
    """Entries (with full multiplicities) covering the first ``count`` indices."""
    count = len(spec) if count is None else count
    rows, index = [], 1
    for e in spec.entries:
        if index > count:
            break
        rows.append({"index": index, "lambda": e.value, "multiplicity": e.multiplicity,
                     "sector": _label(e.label), "error": e.error})
        index += e.multiplicity
    return {"source": spec.source, "truncation_lambda": spec.truncation_lambda,
            "count": min(count, len(spec)), "entries": rows}


def spectrum_to_csv(spec: spectral.Spectrum, count: int | None = None) -> str:
    """One row per index up to ``count``; ``multiplicity`` is that of the whole eigenvalue."""
    count = len(spec) if count is None else count
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["index", "lambda", "multiplicity", "sector"])
    index = 1
    for e in spec.entries:
        for _ in range(e.multiplicity):
            if index > count:
                return buf.getvalue()
            w.writerow([index, _fmt_float(e.value), e.multiplicity, _label(e.label)])
            index += 1
    return buf.getvalue()


def load_spectrum(path: str) -> spectral.Spectrum:
    """Read a spectrum written by ``spectrum`` (JSON envelope or CSV)."""
    text = Path(path).read_text()
    if text.lstrip().startswith("{"):
        data = json.loads(text)
        body = data.get("result", data)
        entries = [spectral.Entry(float(r["lambda"]), int(r["multiplicity"]), (r.get("sector", ""),))
                   for r in body["entries"]]
        trunc = body.get("truncation_lambda")
        return spectral.Spectrum(entries, math.inf if trunc is None else float(trunc), path)
    rows = list(csv.DictReader(io.StringIO(text)))
    if not rows or "lambda" not in rows[0]:
        raise ValueError(f"{path}: not a spectrum CSV")
    entries = [spectral.Entry(float(r["lambda"]), 1, (int(r["index"]),)) for r in rows]
    return spectral.Spectrum(entries, math.inf, path)


def _checks(checks) -> list[dict]:
    return [c.as_dict() for c in checks]


# -- commands ----------------------------------------------------------------

class CommandError(Exception):
    pass


def cmd_sphere(cfg: RunConfig):
    params = sphere_cex.SphereParams(cfg.d, cfg.k, cfg.eps)
    rep = sphere_cex.verify_sphere(params, cfg.mode, grid_n=cfg.grid_n, spectrum_n=cfg.spectrum_n,
                                   seed=cfg.seed, workers=cfg.workers)
    p = rep.params
    result = {
        "d": p.d, "k": p.k, "eps": p.eps, "eps0": rep.eps0, "eta": rep.eta,
        "rho_eps": rep.rho_eps, "K": rep.K, "lambda_K_can": rep.lambda_K_can,
        "rayleigh_fk": rep.rayleigh_fk, "phi_bound": rep.phi_bound,
        "ricci_min": rep.ricci_min, "ricci_argmin": rep.ricci_argmin,
        "orthogonality_max": rep.orthogonality_max,
        "spectrum_lambda_K": rep.spectrum_lambda_K, "spectrum_error": rep.spectrum_error,
        "completeness_lambda": rep.spectrum_certificate,
        "notes": rep.notes + ["Ricci bound checked on the open chart; endpoints follow by continuity"],
    }
    verdict = "counterexample verified" if rep.passed else (
        "equality case, no counterexample" if p.eps == 0 else f"not verified: {rep.failing_stage}")
    return (EXIT_OK if rep.passed else EXIT_NOT_VERIFIED), result, _checks(rep.checks), verdict


def cmd_gauss(cfg: RunConfig):
    if cfg.reference == "euclidean":
        rmax = cfg.rmax or 12.0
        lam, spec = gauss_cex.euclidean_reference(cfg.d, n=cfg.spectrum_n, rmax=rmax)
        k = cfg.d + 2
        result = {"d": cfg.d, "reference": "euclidean", "rmax": rmax, "lambda_d_plus_2": lam,
                  "spectrum_error": spec.error_bound(k), "completeness_lambda": spec.truncation_lambda}
        return EXIT_NOT_VERIFIED, result, [], "model space, no counterexample"
    if cfg.reference != "torpedo":
        raise CommandError(f"unknown reference {cfg.reference!r}")
    eps = 0.05 if cfg.eps is None else cfg.eps
    B = math.pi * math.sqrt(cfg.d - 2) / 2 if cfg.d >= 2 else 0.0
    offset = 10.0 if cfg.rmax is None else cfg.rmax - B
    p = gauss_cex.TorpedoParams(cfg.d, eps, offset)
    rep = gauss_cex.verify_gaussian(p, cfg.mode, grid_n=cfg.grid_n, spectrum_n=cfg.spectrum_n)
    result = {
        "d": p.d, "eps": p.eps, "delta": p.delta, "B": p.B, "rmax": p.Rmax,
        "cd_min": rep.cd_min, "cap_radial_min": rep.cap_radial_min,
        "rayleigh_U": rep.rayleigh_U, "rayleigh_B": rep.rayleigh_B,
        "lambda_d_plus_2_bound": rep.lambda_d_plus_2_bound,
        "c_eps": rep.c_eps, "Z_eps": rep.Z_eps, "delta_U": rep.delta_U, "delta_b": rep.delta_b,
        "orthogonality_max": rep.orthogonality_max, "density_error_ratio": rep.density_error_ratio,
        "truncation_tail": rep.truncation_tail,
        "spectrum_lambda_d_plus_2": rep.spectrum_lambda_d_plus_2,
        "spectrum_error": rep.spectrum_error, "completeness_lambda": rep.spectrum_certificate,
    }
    verdict = "counterexample verified" if rep.passed else f"not verified: {rep.failing_stage}"
    return (EXIT_OK if rep.passed else EXIT_NOT_VERIFIED), result, _checks(rep.checks), verdict


def build_spectrum(cfg: RunConfig) -> spectral.Spectrum:
    g, K, d = cfg.geometry, cfg.count, cfg.d
    if K < 1:
        raise CommandError("--count must be >= 1")
    if g == "round-sphere":
        rho = cfg.rho
        if rho is None:
            rho = sphere_cex.rho_eps(d, cfg.eps) if cfg.eps is not None else d - 1
        return spectral.round_sphere_spectrum(d, float(rho), K)
    if g == "ou":
        return spectral.ornstein_uhlenbeck_spectrum(d, K)
    if g in ("torus", "clifford-torus"):
        r1 = cfg.r1 if cfg.r1 is not None else 1 / math.sqrt(2)
        r2 = cfg.r2 if cfg.r2 is not None else r1
        return spectral.product_torus_spectrum(r1, r2, K)
    if g == "sphere-eps":
        eps = 0.0 if cfg.eps is None else cfg.eps
        geom = spectral.SphereGeometry(d, eps, f"sphere_eps(d={d}, eps={eps:.17g})",
                                       cfg.mmax, cfg.lmax)
    elif g == "torpedo":
        p = gauss_cex.TorpedoParams(d, 0.05 if cfg.eps is None else cfg.eps,
                                    10.0 if cfg.rmax is None else cfg.rmax - math.pi * math.sqrt(d - 2) / 2)
        geom = spectral.cylinder_geometry(gauss_cex.torpedo_manifold(p), p.Rmax, p.delta,
                                          f"torpedo(d={d}, eps={p.eps:.17g})", cfg.lmax)
    elif g == "gaussian":
        rmax = 12.0 if cfg.rmax is None else cfg.rmax
        geom = spectral.cylinder_geometry(gauss_cex.euclidean_gaussian(d, rmax), rmax, rmax,
                                          f"gaussian(d={d})", cfg.lmax)
    else:
        raise CommandError(f"unknown geometry {g!r}; choose from {', '.join(GEOMETRIES)}")
    return spectral.compute_spectrum(geom, K, n=cfg.spectrum_n, lambda_max=cfg.lambda_max,
                                     workers=cfg.workers)


def cmd_spectrum(cfg: RunConfig):
    spec = build_spectrum(cfg)
    return EXIT_OK, spectrum_to_dict(spec, cfg.count), [], f"{cfg.count} eigenvalues", spec


def cmd_compare(cfg: RunConfig, source: str, target: str):
    try:
        s, t = load_spectrum(source), load_spectrum(target)
    except (OSError, ValueError, KeyError) as exc:
        raise CommandError(f"cannot read spectrum: {exc}") from exc
    res = spectral.compare_spectra(s, t, cfg.L, cfg.horizon)
    result = {"source": source, "target": target, "L": cfg.L, "verdict": res.verdict,
              "horizon": res.horizon, "first_violation_index": res.first_violation_index,
              "gap_at_violation": res.gap_at_violation, "source_value": res.source_value,
              "target_value": res.target_value}
    if res.verdict == "dominates":
        return EXIT_OK, result, [], f"dominates on k <= {res.horizon}"
    return (EXIT_NOT_VERIFIED, result, [],
            f"violated at k={res.first_violation_index}: {res.source_value:.17g} vs {res.target_value:.17g}")


def ricci_rows(cfg: RunConfig):
    g = cfg.geometry or "sphere-eps"
    n, d = cfg.grid_n, cfg.d
    if g in ("sphere-eps", "round-sphere"):
        metric = sphere_cex.perturbed_metric(d, cfg.eps or 0.0) if g == "sphere-eps" else round_sphere_metric(d)
        t = sphere_cex.default_grid(n)
        fr = ricci_frame(metric, t)
        return ["t", "R_base", "R_circle", "R_sphere"], np.column_stack([t, fr.base, *fr.fibers])
    if g == "cylinder":
        metric = cylinder_metric(d, math.sqrt(d - 2), cfg.rmax or 10.0)
        t = np.linspace(1e-4, (cfg.rmax or 10.0) - 1e-4, n)
        fr = ricci_frame(metric, t)
        return ["r", "R_base", "R_fiber"], np.column_stack([t, fr.base, *fr.fibers])
    if g == "torpedo":
        p = gauss_cex.TorpedoParams(d, 0.05 if cfg.eps is None else cfg.eps)
        r = gauss_cex.default_grid(p, n)
        fr = bakry_emery_frame(gauss_cex.torpedo_manifold(p), r)
        return ["r", "radial", "tangential"], np.column_stack([r, fr.radial, fr.tangential])
    raise CommandError(f"unknown geometry {g!r}; choose from {', '.join(RICCI_GEOMETRIES)}")


# -- argument handling -------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _common(p: argparse.ArgumentParser):
    S = argparse.SUPPRESS
    p.add_argument("--config", default=S, help="flat key=value file; flags override it")
    p.add_argument("--d", type=int, default=S)
    p.add_argument("--format", dest="output_format", choices=("human", "json", "csv"), default=S)
    p.add_argument("--output", dest="output_path", default=S)
    p.add_argument("--seed", type=int, default=S)
    p.add_argument("--workers", type=int, default=S)
    p.add_argument("--timing", action="store_true", default=S,
                   help="include wall-clock timing (output is then not reproducible)")
    p.add_argument("--grid-n", dest="grid_n", type=int, default=S)
    p.add_argument("--spectrum-n", dest="spectrum_n", type=int, default=S)


def build_parser() -> argparse.ArgumentParser:
    S = argparse.SUPPRESS
    parser = _Parser(prog="spectral-obstruction", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sp = sub.add_parser("sphere", help="perturbed-sphere counterexample")
    _common(sp)
    sp.add_argument("--k", type=int, default=S)
    sp.add_argument("--eps", type=float, default=S)
    sp.add_argument("--mode", choices=("certificate", "full-spectrum"), default=S)

    gp = sub.add_parser("gauss", help="weighted torpedo counterexample")
    _common(gp)
    gp.add_argument("--eps", type=float, default=S)
    gp.add_argument("--rmax", type=float, default=S)
    gp.add_argument("--mode", choices=("certificate", "full-spectrum"), default=S)
    gp.add_argument("--reference", choices=("torpedo", "euclidean"), default=S)

    pp = sub.add_parser("spectrum", help="assembled or closed-form spectrum")
    _common(pp)
    pp.add_argument("--geometry", choices=GEOMETRIES, default=S)
    pp.add_argument("--count", type=int, default=S)
    pp.add_argument("--eps", type=float, default=S)
    pp.add_argument("--rho", type=float, default=S)
    pp.add_argument("--r1", type=float, default=S)
    pp.add_argument("--r2", type=float, default=S)
    pp.add_argument("--rmax", type=float, default=S)
    pp.add_argument("--lambda-max", dest="lambda_max", type=float, default=S)
    pp.add_argument("--lmax", type=int, default=S, help="largest harmonic degree solved")
    pp.add_argument("--mmax", type=int, default=S, help="largest circle frequency solved")

    cp = sub.add_parser("compare", help="check target_k >= source_k / L^2")
    _common(cp)
    cp.add_argument("source")
    cp.add_argument("target")
    cp.add_argument("--L", type=float, default=S)
    cp.add_argument("--horizon", type=int, default=S)

    rp = sub.add_parser("ricci", help="frame curvature on a grid (CSV)")
    _common(rp)
    rp.add_argument("--geometry", choices=RICCI_GEOMETRIES, default=S)
    rp.add_argument("--eps", type=float, default=S)
    rp.add_argument("--rmax", type=float, default=S)
    return parser


def resolve_config(ns: argparse.Namespace) -> RunConfig:
    values = {}
    if getattr(ns, "config", None):
        values.update(read_config_file(ns.config))
    values.update({k: v for k, v in vars(ns).items() if k in _FIELD_TYPES})
    return RunConfig(**values)


def _emit(text: str, cfg: RunConfig):
    if cfg.output_path:
        Path(cfg.output_path).write_text(text)
    else:
        sys.stdout.write(text)


def _human(command: str, verdict: str, result: dict, checks: list[dict]) -> str:
    lines = [f"{command}: {verdict}"]
    for k, v in result.items():
        if isinstance(v, (list, dict)):
            continue
        lines.append(f"  {k} = {_fmt_float(v) if isinstance(v, float) else v}")
    for row in result.get("entries", []):
        lines.append(f"  lambda_{row['index']} = {_fmt_float(row['lambda'])}"
                     f"  (multiplicity {row['multiplicity']}, sector {row['sector']})")
    for c in checks:
        mark = "PASS" if c["passed"] else "FAIL"
        lines.append(f"  [{mark}] {c['name']}: value {_fmt_float(c['value'])}, "
                     f"bound {_fmt_float(c['bound'])}, margin {_fmt_float(c['margin'])}")
    return "\n".join(lines) + "\n"


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = resolve_config(ns)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    start = time.perf_counter()
    spec = None
    try:
        if cfg.command == "sphere":
            code, result, checks, verdict = cmd_sphere(cfg)
        elif cfg.command == "gauss":
            code, result, checks, verdict = cmd_gauss(cfg)
        elif cfg.command == "spectrum":
            code, result, checks, verdict, spec = cmd_spectrum(cfg)
        elif cfg.command == "compare":
            code, result, checks, verdict = cmd_compare(cfg, ns.source, ns.target)
        elif cfg.command == "ricci":
            header, rows = ricci_rows(cfg)
            buf = io.StringIO()
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([_fmt_float(x) for x in row])
            _emit(buf.getvalue(), cfg)
            return EXIT_OK
        else:  # pragma: no cover - argparse restricts choices
            raise CommandError(f"unknown command {cfg.command!r}")
    except (CommandError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR

    if cfg.output_format == "csv":
        if spec is None:
            print("error: csv output is only available for spectrum and ricci", file=sys.stderr)
            return EXIT_ERROR
        _emit(spectrum_to_csv(spec, cfg.count), cfg)
        return code
    if cfg.output_format == "json":
        env = {"schema": SCHEMA, "tool_version": __version__, "command": cfg.command,
               "config": asdict(cfg), "verdict": verdict, "exit_code": code,
               "result": result, "checks": checks}
        if cfg.timing:
            env["timing_seconds"] = time.perf_counter() - start
        _emit(to_json(env) + "\n", cfg)
    else:
        text = _human(cfg.command, verdict, result, checks)
        if cfg.timing:
            text += f"  elapsed = {time.perf_counter() - start:.3f} s\n"
        _emit(text, cfg)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
