"""Command-line pipeline: solve, certify, profile, reproduce.

Exit codes: 0 success, 2 config error, 3 solver failure, 4 certification failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import sys
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import coseq, galerkin, nkcore, problems

log = logging.getLogger("nkproof")

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_CERT = 0, 2, 3, 4

FAMILIES = {
    "scalar": problems.ScalarQuadraticProblem,
    "skt": problems.SKTProblem,
    "dae": problems.RationalDiffusionProblem,
}


class ConfigError(ValueError):
    def __init__(self, msg, line=None):
        super().__init__(f"line {line}: {msg}" if line else msg)
        self.line = line


# --------------------------------------------------------------------------
# config


@dataclass
class RunConfig:
    problem: object
    N: int
    nu: Fraction
    pad_factor: float = 2.0
    newton: galerkin.NewtonConfig = field(default_factory=galerkin.NewtonConfig)
    recipe: galerkin.GuessRecipe = field(default_factory=galerkin.GuessRecipe)
    solution: str | None = None
    validate: bool = True
    out: str | None = None


def parse_sections(text: str) -> dict:
    """``[section]`` headers and ``key = value`` lines; '#' starts a comment.

    Returns {section: {key: (value, line number)}}.
    """
    out: dict = {}
    sec = None
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]") or len(line) < 3:
                raise ConfigError(f"malformed section header {raw.strip()!r}", no)
            sec = line[1:-1].strip().lower()
            if sec in out:
                raise ConfigError(f"duplicate section [{sec}]", no)
            out[sec] = {}
            continue
        if sec is None:
            raise ConfigError("key outside of any section", no)
        key, eq, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if not eq or not key:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", no)
        if key in out[sec]:
            raise ConfigError(f"duplicate key {key!r} in [{sec}]", no)
        out[sec][key] = (val, no)
    return out


def _num(val, no, key):
    try:
        return problems.frac(val)
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"{key}: not a number or p/q rational: {val!r}", no) from exc


def _get(sec, key, name, default=None, required=False):
    if key in sec:
        return sec[key]
    if required:
        raise ConfigError(f"missing required key {key!r} in [{name}]")
    return default


def parse_config(text: str) -> RunConfig:
    s = parse_sections(text)
    if "problem" not in s:
        raise ConfigError("missing [problem] section")
    prob = dict(s["problem"])
    fam, fno = _get(prob, "family", "problem", required=True)
    prob.pop("family")
    if fam not in FAMILIES:
        raise ConfigError(f"unknown family {fam!r} (expected one of {', '.join(FAMILIES)})", fno)
    cls = FAMILIES[fam]
    kwargs = {}
    for f in fields(cls):
        val, no = _get(prob, f.name, "problem", required=True)
        if f.name == "g":
            kwargs["g"] = tuple(_num(x, no, "g") for x in val.replace(",", " ").split())
        else:
            kwargs[f.name] = _num(val, no, f.name)
        prob.pop(f.name)
    for k, (_, no) in prob.items():
        raise ConfigError(f"unknown key {k!r} for family {fam}", no)
    try:
        p = cls(**kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    disc = s.get("discretization", {})
    nval, nno = _get(disc, "N", "discretization", required=True)
    try:
        N = int(nval)
    except ValueError as exc:
        raise ConfigError(f"N must be an integer, got {nval!r}", nno) from exc
    if N < 2:
        raise ConfigError("N must be >= 2", nno)
    nuv, nuno = _get(disc, "nu", "discretization", required=True)
    nu = _num(nuv, nuno, "nu")
    if nu < 1:
        raise ConfigError("nu must be >= 1", nuno)
    if nu == 1:
        warnings.warn("nu = 1 gives no smoothness beyond continuity", UserWarning, stacklevel=2)
    pad = float(_num(*_get(disc, "pad_factor", "discretization", ("2", None)), "pad_factor"))
    if pad < 1:
        raise ConfigError("pad_factor must be >= 1", disc["pad_factor"][1])

    sol = s.get("solver", {})
    ncfg = {}
    for key, conv in (("max_iters", int), ("residual_tol", float), ("damping", float)):
        if key in sol:
            val, no = sol[key]
            try:
                ncfg[key] = conv(val)
            except ValueError as exc:
                raise ConfigError(f"{key}: bad value {val!r}", no) from exc
    try:
        newton = galerkin.NewtonConfig(**ncfg)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    recipe = _parse_recipe(sol, N)
    solution = sol.get("solution", (None, None))[0]

    val = s.get("validation", {})
    enabled = val.get("enabled", ("true", None))
    if enabled[0].lower() not in ("true", "false"):
        raise ConfigError("enabled must be true or false", enabled[1])
    out = s.get("output", {}).get("dir", (None, None))[0]
    return RunConfig(p, N, nu, pad, newton, recipe, solution, enabled[0].lower() == "true", out)


def _parse_recipe(sol, N) -> galerkin.GuessRecipe:
    base = sol.get("base", ("coexistence", None))[0]
    if base not in ("coexistence", "extinction1", "extinction2"):
        raise ConfigError(f"unknown base state {base!r}", sol["base"][1])
    modes = []
    if "modes" in sol:
        val, no = sol["modes"]
        for item in val.replace(",", " ").split():
            k, sep, a = item.partition(":")
            if not sep:
                raise ConfigError(f"mode entries look like k:amplitude, got {item!r}", no)
            try:
                k = int(k)
            except ValueError as exc:
                raise ConfigError(f"bad mode index {k!r}", no) from exc
            if not 0 <= k < N:
                raise ConfigError(f"mode index {k} must be < N = {N}", no)
            modes.append((k, float(_num(a, no, "modes"))))
    value = None
    if "value" in sol:
        val, no = sol["value"]
        value = tuple(str(_num(x, no, "value")) for x in val.replace(",", " ").split())
    cont = None
    if "continuation" in sol:
        val, no = sol["continuation"]
        parts = val.split()
        if len(parts) != 4:
            raise ConfigError("continuation = <parameter> <start> <end> <steps>", no)
        cont = (parts[0], _num(parts[1], no, "continuation"), _num(parts[2], no, "continuation"), int(parts[3]))
    coarse = None
    if "coarse" in sol:
        coarse = int(sol["coarse"][0])
    return galerkin.GuessRecipe(base, tuple(modes), value, cont, coarse)


def load_config(path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    return parse_config(text)


# --------------------------------------------------------------------------
# commands


def cmd_solve(cfg: RunConfig, out: Path) -> Path:
    try:
        cfg.recipe.build(cfg.problem, cfg.N)
    except problems.DegenerateCompetition as exc:
        raise ConfigError(f"cannot build the initial guess: {exc}") from exc
    out.mkdir(parents=True, exist_ok=True)
    res = galerkin.solve_recipe(cfg.problem, cfg.N, cfg.recipe, cfg.newton)
    path = out / "solution.cosseq"
    coseq.save(path, res.u)
    with open(out / "solve.log", "w") as fh:
        fh.write(f"iterations {res.iterations}\n")
        for i, (r, s) in enumerate(zip(res.residuals, [float("nan")] + res.steps)):
            fh.write(f"{i} residual {r!r} step {s!r}\n")
    return path


def read_solution(path, cfg: RunConfig) -> np.ndarray:
    try:
        u = coseq.load(path)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read solution {path}: {exc}") from exc
    u = np.atleast_2d(u)
    if u.shape != (cfg.problem.dim, cfg.N):
        raise ConfigError(
            f"solution has shape {u.shape[0]}x{u.shape[1]}, config expects {cfg.problem.dim}x{cfg.N}")
    return u


def cmd_certify(cfg: RunConfig, u: np.ndarray, out: Path) -> nkcore.Certificate:
    out.mkdir(parents=True, exist_ok=True)
    cert = nkcore.certify_solution(cfg.problem, u, cfg.nu, cfg.pad_factor, raise_on_failure=False)
    (out / "certificate.nkcert").write_text(cert.dumps())
    (out / "report.txt").write_text(report(cert) + "\n")
    return cert


def report(cert: nkcore.Certificate, reference: dict | None = None) -> str:
    lines = [cert.summary()]
    if cert.diagnostics:
        lines.append("  diagnostics (not part of the proof):")
        for k, v in sorted(cert.diagnostics.items()):
            lines.append(f"    {k} = {v.hi if hasattr(v, 'hi') else v:.4g}")
    if cert.conditions_ok:
        lines.append("  the l1_nu radius bounds the sup-norm error since xi_n >= 2 for n >= 1")
    if reference:
        lines.append("  reference (paper ū differs): " + ", ".join(f"{k} {v:g}" for k, v in reference.items()))
    return "\n".join(lines)


def cmd_profile(u, grid: int) -> str:
    if grid < 2:
        raise ConfigError("grid must be >= 2")
    u = np.atleast_2d(np.asarray(u, float))
    x = np.linspace(0.0, 1.0, grid)
    cols = [coseq.eval_at(r, x) for r in u]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(["x"] + [f"u{i + 1}" for i in range(len(cols))])
    for k in range(grid):
        w.writerow([repr(float(x[k]))] + [repr(float(c[k])) for c in cols])
    return buf.getvalue()


# --------------------------------------------------------------------------
# reproduction cases


def _skt_config(row, N, nu, seed_modes, coarse=None):
    params = "\n".join(f"{k} = {v}" for k, v in problems.SKT_TABLE[row].items())
    extra = f"coarse = {coarse}\n" if coarse else ""
    return f"""[problem]
family = skt
{params}
[discretization]
N = {N}
nu = {nu}
[solver]
base = coexistence
modes = {seed_modes}
{extra}"""


CASES = {
    "pm": ("""[problem]
family = scalar
alpha = 1
beta = 1
g = 0.5 1.5 1 -0.5 3
[discretization]
N = 20
nu = 1.1
[solver]
modes = 1:0.1
""", {"Y": 1.3e-10, "Z1": 2e-4, "Z2": 2.2, "r": 2e-10}),
    "skt1": (_skt_config(1, 50, "1.01", "4:0.5"), {"Y": 2.7e-7, "Z1": 0.25, "Z2": 14000, "C0": 4e-7}),
    "skt2": (_skt_config(2, 50, "1.01", "2:0.5"), {"C0": 8e-12}),
    "skt3": (_skt_config(3, 500, "1.005", "2:1", coarse=100), {"C0": 9e-11}),
    "skt4": (_skt_config(4, 100, "1.01", "3:0.5"), {"C0": 1e-9}),
    "np-gamma3": ("""[problem]
family = dae
gamma = 3
alpha = 1
beta = 1
g = 0.5 1.5 1 -0.5 3
[discretization]
N = 50
nu = 1.1
[solver]
modes = 1:0.1
""", {"C0": 1e-13}),
    "np-gamma01": ("""[problem]
family = dae
gamma = 1/10
alpha = 1
beta = 1
g = 0.5 1.5 1 -0.5 3
[discretization]
N = 50
nu = 1.1
[solver]
modes = 1:0.1
continuation = gamma 3 1/10 30
""", {"C0": 8e-6}),
}


@dataclass
class CaseResult:
    case: str
    status: str
    cert: nkcore.Certificate | None = None
    seconds: float = 0.0
    error: str = ""


def run_case(case: str, out: Path | None = None, pad: float | None = None) -> CaseResult:
    t0 = time.perf_counter()
    cfg = parse_config(CASES[case][0])
    if pad is not None:
        cfg.pad_factor = pad
    try:
        res = galerkin.solve_recipe(cfg.problem, cfg.N, cfg.recipe, cfg.newton)
    except (galerkin.NonConvergence, galerkin.SingularJacobian) as exc:
        return CaseResult(case, "solver-failed", None, time.perf_counter() - t0, str(exc))
    cert = nkcore.certify_solution(cfg.problem, res.u, cfg.nu, cfg.pad_factor, raise_on_failure=False)
    if out is not None:
        d = out / case
        d.mkdir(parents=True, exist_ok=True)
        coseq.save(d / "solution.cosseq", res.u)
        (d / "certificate.nkcert").write_text(cert.dumps())
        (d / "report.txt").write_text(report(cert, CASES[case][1]) + "\n")
    status = "validated" if cert.conditions_ok else "not-validated"
    return CaseResult(case, status, cert, time.perf_counter() - t0)


def summary_table(results) -> str:
    hdr = f"{'case':<11} {'status':<14} {'N':>4} {'Y':>9} {'Z1':>9} {'Z2':>9} {'C0 bound':>9}  reference (paper ū differs)"
    rows = [hdr, "-" * len(hdr)]
    for r in results:
        ref = ", ".join(f"{k} {v:g}" for k, v in CASES[r.case][1].items())
        c = r.cert
        if c is None:
            rows.append(f"{r.case:<11} {r.status:<14} {'':>4} {'':>9} {'':>9} {'':>9} {'':>9}  {ref}")
            continue
        c0 = f"{c.c0_bound:9.2e}" if c.c0_bound is not None else f"{'-':>9}"
        rows.append(f"{r.case:<11} {r.status:<14} {c.N:>4} {c.Y.hi:9.2e} {c.Z1.hi:9.2e} "
                    f"{c.Z2.hi:9.2e} {c0}  {ref}")
    return "\n".join(rows)


# --------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nkproof", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="verb", required=True)

    s = sub.add_parser("solve", help="compute an approximate steady state")
    s.add_argument("--config", required=True)
    s.add_argument("--out", default=None)
    s.add_argument("--seed", type=int, default=0)

    c = sub.add_parser("certify", help="validate a solution file")
    c.add_argument("--config", required=True)
    c.add_argument("--solution", default=None)
    c.add_argument("--out", default=None)
    c.add_argument("--pad", type=float, default=None)

    p = sub.add_parser("profile", help="sample a solution file on a grid as CSV")
    p.add_argument("--solution", required=True)
    p.add_argument("--grid", type=int, default=201)
    p.add_argument("--out", default=None)

    r = sub.add_parser("reproduce", help="run built-in cases")
    r.add_argument("cases", nargs="+", metavar="CASE", help=f"one of {', '.join(CASES)} or 'all'")
    r.add_argument("--out", default=None)
    r.add_argument("--jobs", type=int, default=1)
    r.add_argument("--pad", type=float, default=None)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return _dispatch(ap, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def _dispatch(ap, args) -> int:
    if args.verb == "solve":
        cfg = load_config(args.config)
        out = Path(args.out or cfg.out or ".")
        log.info("seed %d (the pipeline itself is deterministic)", args.seed)
        try:
            path = cmd_solve(cfg, out)
        except (galerkin.NonConvergence, galerkin.SingularJacobian) as exc:
            print(f"solver failed: {exc}", file=sys.stderr)
            return EXIT_SOLVER
        print(path)
        return EXIT_OK

    if args.verb == "certify":
        cfg = load_config(args.config)
        if args.pad is not None:
            cfg.pad_factor = args.pad
        src = args.solution or cfg.solution
        if src is None:
            raise ConfigError("no solution file given (--solution or [solver] solution)")
        u = read_solution(src, cfg)
        out = Path(args.out or cfg.out or ".")
        cert = cmd_certify(cfg, u, out)
        print(report(cert))
        return EXIT_OK if cert.conditions_ok else EXIT_CERT

    if args.verb == "profile":
        try:
            u = coseq.load(args.solution)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot read solution {args.solution}: {exc}") from exc
        text = cmd_profile(u, args.grid)
        if args.out:
            Path(args.out).write_text(text)
        else:
            sys.stdout.write(text)
        return EXIT_OK

    cases = list(CASES) if args.cases == ["all"] else args.cases
    unknown = [c for c in cases if c not in CASES]
    if unknown:
        ap.error(f"unknown case {', '.join(unknown)}; choose from {', '.join(CASES)} or all")
    out = Path(args.out) if args.out else None
    if args.jobs > 1 and len(cases) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as ex:
            results = list(ex.map(run_case, cases, [out] * len(cases), [args.pad] * len(cases)))
    else:
        results = [run_case(c, out, args.pad) for c in cases]
    print(summary_table(results))
    if any(r.status == "solver-failed" for r in results):
        return EXIT_SOLVER
    return EXIT_OK if all(r.status == "validated" for r in results) else EXIT_CERT


if __name__ == "__main__":
    sys.exit(main())
