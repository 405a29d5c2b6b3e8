"""Command-line driver: runs the verification pipelines and prints a report.

Exit status is 0 exactly when every check in the report passes, 1 when a
check fails or a module raises, and 2 for configuration errors.
"""

from __future__ import annotations

import argparse
import ast
import json
import operator
import random
import sys
from dataclasses import asdict, dataclass, field, fields
from fractions import Fraction
from pathlib import Path
from typing import Callable

from . import cosets, hecke, prinseries, radon, specialize
from .padic import LevelFunction
from .rootdata import RootDatum, RootDataError

SCHEMA_VERSION = 1
SUBCOMMANDS = ("theta", "plancherel", "radon-check", "cosets", "specialize-check", "all")
CHARTS = ("pgl2-boundary", "toy-line", "toy-plane", "toy-transverse", "cover")
COSET_OPS = ("cartan", "iwahori", "psi")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    p: int = 3
    level: int = 3  # precision N of test functions
    window: int = 1  # window M of test functions
    datum: str = "SL2"
    q_mode: str = "formal"
    lam: int = -1
    nu_range: tuple[int, int] = (-2, 2)
    trials: int = 5
    seed: int = 0
    m: int = 1
    chart: str = "pgl2-boundary"
    op: str = "cartan"
    matrix: str = "p,0;0,1/p"
    group: str = "SL2"
    json: bool = False

    def validate(self) -> "RunConfig":
        if self.p < 2 or any(self.p % d == 0 for d in range(2, int(self.p ** 0.5) + 1)):
            raise ConfigError(f"p = {self.p} is not prime")
        if not 0 <= self.level <= 6 or not 0 <= self.window <= 4:
            raise ConfigError("level must be in 0..6 and window in 0..4")
        try:
            RootDatum.preset(self.datum)
        except RootDataError as exc:
            raise ConfigError(str(exc)) from None
        self.datum = RootDatum.preset(self.datum).name
        if self.q_mode not in ("formal", "numeric"):
            raise ConfigError("q_mode is formal or numeric")
        lo, hi = self.nu_range
        if lo > hi or hi - lo > 20:
            raise ConfigError(f"bad range {lo}..{hi}")
        if not 1 <= self.trials <= 200:
            raise ConfigError("trials must be in 1..200")
        if not 1 <= self.m <= 3:
            raise ConfigError("depth m must be in 1..3")
        if self.chart not in CHARTS:
            raise ConfigError(f"unknown chart {self.chart!r}; choose from {', '.join(CHARTS)}")
        if self.op not in COSET_OPS:
            raise ConfigError(f"unknown cosets op {self.op!r}")
        if self.group.upper() not in ("SL2", "PGL2"):
            raise ConfigError(f"unknown group {self.group!r}")
        self.group = self.group.upper()
        return self

    def to_json(self) -> dict:
        d = asdict(self)
        d["nu_range"] = list(self.nu_range)
        d.pop("json")
        return d


def parse_range(text: str) -> tuple[int, int]:
    try:
        lo, hi = text.split("..")
        return int(lo), int(hi)
    except ValueError:
        raise ConfigError(f"ranges look like -2..2, got {text!r}") from None


_CONVERTERS: dict[str, Callable[[str], object]] = {
    "p": int,
    "level": int,
    "window": int,
    "datum": str,
    "q_mode": str,
    "lam": int,
    "nu_range": parse_range,
    "trials": int,
    "seed": int,
    "m": int,
    "chart": str,
    "op": str,
    "matrix": str,
    "group": str,
}


def read_config_file(path: str) -> dict:
    """key=value lines; '#' starts a comment."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _CONVERTERS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            out[key] = _CONVERTERS[key](value)
        except ValueError:
            raise ConfigError(f"{path}:{lineno}: bad value for {key}: {value!r}") from None
    return out


# matrix parsing for the cosets subcommand

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul, ast.Div: operator.truediv, ast.Pow: operator.pow}


def _eval_entry(node, p: int) -> Fraction:
    if isinstance(node, ast.Expression):
        return _eval_entry(node.body, p)
    if isinstance(node, ast.Constant) and isinstance(node.value, int):
        return Fraction(node.value)
    if isinstance(node, ast.Name) and node.id == "p":
        return Fraction(p)
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        val = _eval_entry(node.operand, p)
        return -val if isinstance(node.op, ast.USub) else val
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        left, right = _eval_entry(node.left, p), _eval_entry(node.right, p)
        if isinstance(node.op, ast.Pow):
            if right.denominator != 1:
                raise ConfigError("exponents must be integers")
            return left ** int(right)
        return _BINOPS[type(node.op)](left, right)
    raise ConfigError("matrix entries use integers, p, + - * / and ^")


def parse_matrix(text: str, p: int) -> tuple[Fraction, ...]:
    """'p,0;0,1/p' -> row-major entries."""
    rows = [r.split(",") for r in text.split(";")]
    if len(rows) != 2 or any(len(r) != 2 for r in rows):
        raise ConfigError("matrix must be 2x2, rows separated by ';'")
    try:
        return tuple(_eval_entry(ast.parse(e.strip().replace("^", "**"), mode="eval"), p) for r in rows for e in r)
    except (SyntaxError, ZeroDivisionError) as exc:
        raise ConfigError(f"bad matrix entry: {exc}") from None


# reports

@dataclass
class Check:
    name: str
    passed: bool
    details: dict = field(default_factory=dict)


@dataclass
class Report:
    command: str
    config: dict
    checks: list[Check] = field(default_factory=list)
    output: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name: str, passed: bool, **details) -> None:
        self.checks.append(Check(name, bool(passed), details))

    def to_json(self) -> dict:
        return {
            "schema": SCHEMA_VERSION,
            "command": self.command,
            "config": self.config,
            "output": self.output,
            "checks": [{"name": c.name, "pass": c.passed, "details": c.details} for c in self.checks],
            "ok": self.ok,
        }

    def to_text(self) -> str:
        lines = [f"== {self.command} =="]
        for key, val in self.output.items():
            if isinstance(val, list):
                lines.append(f"{key}:")
                lines.extend(f"  {row}" for row in val)
            else:
                lines.append(f"{key}: {val}")
        width = max((len(c.name) for c in self.checks), default=4)
        for c in self.checks:
            extra = ", ".join(f"{k}={v}" for k, v in c.details.items())
            lines.append(f"{'PASS' if c.passed else 'FAIL'}  {c.name:<{width}}  {extra}".rstrip())
        lines.append(f"overall: {'PASS' if self.ok else 'FAIL'}")
        return "\n".join(lines)


# pipelines

def run_theta(cfg: RunConfig) -> Report:
    rep = Report("theta", cfg.to_json())
    datum = RootDatum.preset(cfg.datum)
    lam = (cfg.lam,) * datum.dim if datum.dim == 1 else tuple([cfg.lam] + [0] * (datum.dim - 1))
    th = hecke.theta(datum, lam)
    rep.output["theta"] = str(th)
    rep.output["terms"] = [f"T[{w.label()}]: {c.to_q_string()}" for w, c in th.sorted_terms()]
    rep.output["value_at_identity"] = hecke.value_at_identity(th).to_q_string()
    form = hecke.bernstein_normal_form(th, "left")
    rep.add("normal form is theta_lambda", _single_theta(form, lam), terms=len(form))
    lo, hi = cfg.nu_range
    bad = []
    for a in range(lo, hi + 1):
        for b in range(lo, hi + 1):
            la, lb = (a,) + (0,) * (datum.dim - 1), (b,) + (0,) * (datum.dim - 1)
            lab = tuple(x + y for x, y in zip(la, lb))
            if hecke.mul(hecke.theta(datum, la), hecke.theta(datum, lb)) != hecke.theta(datum, lab):
                bad.append((a, b))
    rep.add("theta multiplicative", not bad, range=f"{lo}..{hi}", failures=len(bad))
    return rep


def _single_theta(form: dict, lam) -> bool:
    if len(form) != 1:
        return False
    (key, coeff), = form.items()
    return key[0] == lam and coeff.to_q_string() == "1"


def run_plancherel(cfg: RunConfig) -> Report:
    rep = Report("plancherel", cfg.to_json())
    if cfg.datum != "SL2":
        raise ConfigError("the Plancherel check is implemented for SL2")
    datum = RootDatum.preset("SL2")
    rep.output["kappa"] = prinseries.kappa().to_q_string()
    rows = []
    lo, hi = cfg.nu_range
    for nu in range(lo, hi + 1):
        lhs, rhs, ok = prinseries.plancherel_check(hecke.theta(datum, (nu,)))
        numeric = {}
        for q in (2, 3):
            numeric[q] = lhs.at_q(q) == rhs.at_q(q)
        passed = ok and all(numeric.values())
        shown = lhs.to_q_string() if cfg.q_mode == "formal" else ", ".join(f"q={q}: {lhs.at_q(q)}" for q in (2, 3))
        rows.append(f"nu={nu:+d}  h(1)={shown}  {'pass' if passed else 'FAIL'}")
        rep.add(f"nu={nu}", passed, lhs=lhs.to_q_string(), rhs=rhs.to_q_string())
    rep.output["rows"] = rows
    return rep


def run_radon(cfg: RunConfig) -> Report:
    rep = Report("radon-check", cfg.to_json())
    rng = random.Random(cfg.seed)
    p = cfg.p
    M = min(cfg.window, cfg.level)
    N = cfg.level - M
    sigma = radon.pi_minus_inverse_q(p)
    kill_fail, support_fail, fourier_err = 0, 0, 0.0
    radii = []
    for _ in range(cfg.trials):
        f = LevelFunction.random(rng, p, 2, M, N)
        sf = radon.sigma_apply(sigma, f)
        dirs = radon.projective_directions(p, max(sf.M + sf.N, 1))
        if any(radon.line_integral(sf, y) != 0 for y in dirs):
            kill_fail += 1
        try:
            radii.append(str(radon.compact_support_radius(sf).radius))
        except radon.Unbounded:
            support_fail += 1
        back = radon.fourier(radon.fourier(f))
        diff = back - f.as_complex()
        fourier_err = max([fourier_err] + [abs(v) for v in diff.values.values()])
    rep.add("L(([p] - 1/q) f) = 0", kill_fail == 0, trials=cfg.trials, failures=kill_fail)
    rep.add("compact support of R(sigma f)", support_fail == 0, failures=support_fail, radii=sorted(set(radii), key=Fraction))
    control = LevelFunction.indicator_ball(p, 2, 0)
    try:
        radon.compact_support_radius(control)
        rep.add("control f reported unbounded", False)
    except radon.Unbounded:
        rep.add("control f reported unbounded", True)
    rep.add("Phi^2 = Id", fourier_err < 1e-9, max_error=f"{fourier_err:.2e}")
    inv_fail = 0
    for _ in range(cfg.trials):
        f = LevelFunction.random(rng, p, 1, 0, 2)
        c = Fraction(rng.choice([1, 2, -1, p]), rng.choice([1, p]))
        g = radon.geom_inverse(p, c, f, depth=3)
        if radon.restrict_annulus(radon.apply_factor(p, c, g), 3) != radon.restrict_annulus(f, 3):
            inv_fail += 1
    rep.add("([p] - c) geom_inverse = Id on the window", inv_fail == 0, trials=cfg.trials, failures=inv_fail)
    table, spread = _gamma_table(rng, p)
    rep.output["gamma_table"] = table
    rep.add("gamma ratio independent of f (>= 3 functions per component)", spread < 1e-9 and all(row["functions"] >= 3 for row in table), max_spread=f"{spread:.2e}")
    return rep


GAMMA_POINTS = (0.5, complex(0.2, -0.6), -0.8)


def _gamma_table(rng: random.Random, p: int, wanted: int = 3) -> tuple[list[dict], float]:
    """Phi/R ratio per Mellin component, from the first `wanted` functions with a nonzero R-component."""
    pool = [LevelFunction.random(rng, p, 2, 1, 1, density=0.5) for _ in range(3 * wanted)]
    rows, spread = [], 0.0
    for index in (0, 1):
        for z in GAMMA_POINTS:
            ratios = []
            for f in pool:
                try:
                    ratios.append(radon.mellin_gamma_check(f, f, index, z)[0])
                except radon.ZeroComponent:
                    continue
                if len(ratios) == wanted:
                    break
            dev = max((abs(r - ratios[0]) / max(1.0, abs(ratios[0])) for r in ratios), default=0.0)
            spread = max(spread, dev)
            gamma = ratios[0] if ratios else None
            rows.append({"index": index, "z": _complex_text(z), "gamma": _complex_text(gamma) if gamma is not None else None, "functions": len(ratios), "spread": f"{dev:.2e}"})
    return rows, spread


def _complex_text(z: complex) -> str:
    z = complex(z)
    re, im = round(z.real, 12) + 0.0, round(z.imag, 12) + 0.0  # drop float noise and -0
    return f"{re:.12g}{im:+.12g}j"


def run_cosets(cfg: RunConfig) -> Report:
    rep = Report("cosets", cfg.to_json())
    p = cfg.p
    entries = parse_matrix(cfg.matrix, p)
    try:
        g = cosets.GroupElement.of(entries, cfg.group, p)
    except cosets.CosetError as exc:
        raise ConfigError(str(exc)) from None
    if cfg.op == "cartan":
        label, k1, k2 = cosets.smith_cartan(g)
        a = label.coweight[0]
        diag = cosets.mat(Fraction(p) ** a, 0, 0, Fraction(p) ** -a) if cfg.group == "SL2" else cosets.mat(Fraction(p) ** a, 0, 0, 1)
        rebuilt = k1 * cosets.GroupElement.of(diag, cfg.group, p) * k2
        rep.output["label"] = label.to_json()
        rep.add("g = k1 diag k2", rebuilt == g)
        rep.add("k1, k2 in K0", cosets.in_K0(k1.m, p, cfg.group) and cosets.in_K0(k2.m, p, cfg.group))
    elif cfg.op == "iwahori":
        w = cosets.iwahori_coset(g)
        rep.output["w"] = w.label()
        rep.add("iwahori coset computed", True)
    else:
        label = cosets.psi_P(g, cfg.m)
        rep.output["label"] = label.to_json()
        rng = random.Random(cfg.seed)
        moved_ok = True
        for _ in range(cfg.trials):
            k1, k2 = cosets.random_Km(rng, p, cfg.m, cfg.group), cosets.random_Km(rng, p, cfg.m, cfg.group)
            h = cosets.GroupElement.of(k1, cfg.group, p) * g * cosets.GroupElement.of(k2, cfg.group, p)
            moved_ok &= cosets.psi_P(h, cfg.m) == label
        rep.add("psi_P is K_m-biinvariant", moved_ok, trials=cfg.trials)
        rep.output["N(m)"] = cosets.depth_threshold(cfg.m, p, cfg.group)
    return rep


def _chart_and_maps(cfg: RunConfig):
    p = cfg.p
    S = specialize
    if cfg.chart == "pgl2-boundary":
        chart = S.NCChart.pgl2_boundary(p)
        pert = S.AdmissibleMapData.perturbed(chart, {0: {(2, 0, 0): 1}, 1: {(2, 1, 0): 1}, 2: {(2, 0, 0): p}}, "perturbed")
    elif cfg.chart == "toy-plane":
        chart = S.NCChart.toy_plane(p)
        pert = S.AdmissibleMapData.perturbed(chart, {0: {(2, 0): 1}, 1: {(1, 1): 1, (0, 2): 1}}, "perturbed")
    elif cfg.chart == "toy-transverse":
        chart = S.NCChart.toy_transverse(p)
        pert = S.AdmissibleMapData.perturbed(chart, {0: {(2, 0): 1}, 1: {(2, 0): 1}}, "perturbed")
    elif cfg.chart == "cover":
        chart = S.NCChart.cover(p)
        pert = S.AdmissibleMapData.perturbed(chart, {0: {(2,): 1}}, "perturbed")
    else:
        chart = S.NCChart.toy_line(p)
        pert = S.AdmissibleMapData.perturbed(chart, {0: {(2,): 1}}, "perturbed")
    return chart, S.AdmissibleMapData.identity(chart), pert


def run_specialize(cfg: RunConfig) -> Report:
    rep = Report("specialize-check", cfg.to_json())
    S = specialize
    p = cfg.p
    rng = random.Random(cfg.seed)
    chart, ident, pert = _chart_and_maps(cfg)
    rep.output["chart"] = chart.to_json()
    rep.add("perturbed map admissible", pert.is_admissible(), certificate=pert.certificate())
    if cfg.chart == "pgl2-boundary":
        funcs = [S.iwahori_biinvariant_x(p)]
    else:
        # step-d scaling adds d per unit of lambda to the level; keep lambda_0 + 2 under the level cap
        top = 2 if chart.dim > 1 or any(d > 1 for d in chart.degrees) else 3
        funcs = [LevelFunction.random(rng, p, chart.dim, 0, max(1, min(cfg.level, top))) for _ in range(min(cfg.trials, 5))]
    thresholds = []
    ok = True
    for f in funcs:
        try:
            thresholds.append(S.stabilization_threshold(f, ident, pert).to_json())
        except S.NoStabilization:
            ok = False
    rep.output["lambda_0"] = thresholds
    rep.add("stabilization with margin 2", ok, functions=len(funcs))
    if cfg.chart == "pgl2-boundary":
        n_m = cosets.depth_threshold(cfg.m, p, "PGL2")
        rep.output["N(m)"] = n_m
        pairs = [(cosets.random_K0(rng, p, "PGL2"), cosets.random_K0(rng, p, "PGL2")) for _ in range(3)]
        deep = {a: S.deep_cell_crosscheck(a, cfg.m, p, translates=pairs) for a in range(n_m + 1, n_m + 4)}
        rep.add("deep-cell cross-check", all(deep.values()), a=sorted(deep))
        eq = S.check_equivariance(p, cfg.m, rng, samples=cfg.trials, points_per_depth=3, max_depth=cfg.level + 2)
        rep.output["equivariance_radius"] = str(eq.radius)
        rep.add("equivariance on the discovered neighborhood", eq.ok, depth=eq.depth, checked=eq.checked)
    if cfg.chart == "cover":
        neg = S.cover_negative_test(p)
        rep.add("step-2 certificate passes", neg["step_d"])
        rep.add("step-1 certificate rejected", not neg["step_1"])
    return rep


def run_all(cfg: RunConfig) -> list[Report]:
    reports = [run_theta(cfg)]
    if cfg.datum == "SL2":
        reports.append(run_plancherel(cfg))
    light = RunConfig(**{**asdict(cfg), "level": min(cfg.level, 3), "trials": min(cfg.trials, 5)})
    reports.append(run_radon(light))
    reports.append(run_cosets(cfg))
    for chart in ("pgl2-boundary", "cover"):
        reports.append(run_specialize(RunConfig(**{**asdict(light), "chart": chart})))
    return reports


RUNNERS = {
    "theta": run_theta,
    "plancherel": run_plancherel,
    "radon-check": run_radon,
    "cosets": run_cosets,
    "specialize-check": run_specialize,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="artifact", description="Verification pipelines for the affine Hecke and p-adic toolkit.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", default=None, help="emit the JSON report")
    common.add_argument("--seed", type=int, help="random seed (default 0)")
    common.add_argument("--config", help="key=value config file; flags override it")
    common.add_argument("--p", type=int)
    common.add_argument("--level", type=int, help="precision N of test functions")
    common.add_argument("--window", type=int, help="window M of test functions")
    common.add_argument("--datum", help="SL2 or PGL2")
    common.add_argument("--q-mode", dest="q_mode", choices=("formal", "numeric"))
    common.add_argument("--lam", type=int)
    common.add_argument("--nu-range", dest="nu_range", type=_range_arg)
    common.add_argument("--trials", type=int)
    common.add_argument("--m", type=int, help="congruence depth")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        sp = sub.add_parser(name, parents=[common])
        if name in ("specialize-check", "all"):
            sp.add_argument("--chart", choices=CHARTS)
        if name in ("cosets", "all"):
            sp.add_argument("--op", choices=COSET_OPS)
            sp.add_argument("--matrix")
            sp.add_argument("--group")
    return parser


def _range_arg(text: str) -> tuple[int, int]:
    try:
        return parse_range(text)
    except ConfigError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def make_config(args: argparse.Namespace) -> RunConfig:
    values = read_config_file(args.config) if getattr(args, "config", None) else {}
    for f in fields(RunConfig):
        val = getattr(args, f.name, None)
        if val is not None:
            values[f.name] = val
    return RunConfig(**values).validate()


def run(command: str, cfg: RunConfig) -> list[Report]:
    if command == "all":
        return run_all(cfg)
    if command not in RUNNERS:
        raise ConfigError(f"unknown subcommand {command!r}")
    return [RUNNERS[command](cfg)]


def render(reports: list[Report], as_json: bool) -> str:
    if as_json:
        payload = reports[0].to_json() if len(reports) == 1 else {"schema": SCHEMA_VERSION, "command": "all", "reports": [r.to_json() for r in reports], "ok": all(r.ok for r in reports)}
        return json.dumps(payload, indent=2, sort_keys=True, default=str)
    return "\n\n".join(r.to_text() for r in reports)


def _join_range_values(argv: list[str]) -> list[str]:
    """Let '--nu-range -2..2' through argparse, which reads '-2..2' as a flag."""
    out, i = [], 0
    while i < len(argv):
        if argv[i] == "--nu-range" and i + 1 < len(argv):
            out.append(f"--nu-range={argv[i + 1]}")
            i += 2
        else:
            out.append(argv[i])
            i += 1
    return out


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(_join_range_values(list(sys.argv[1:] if argv is None else argv)))
    try:
        cfg = make_config(args)
        reports = run(args.command, cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (ArithmeticError, ValueError) as exc:
        # module-level precondition failures (NotDeep, WindowOverflow, ...) end the run with context
        print(f"{args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    print(render(reports, cfg.json))
    return 0 if all(r.ok for r in reports) else 1


if __name__ == "__main__":
    sys.exit(main())
