"""Command-line front end.

Every subcommand writes one JSON document (or a CSV table with a commented
JSON provenance header) that embeds the run configuration, so identical
configurations produce byte-identical files. Exit status: 0 success, 1
operational or usage error, 2 when a mathematical check is not established.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import metadata

from . import plancherel
from ._errors import DomainError, ResourceError, SolverError
from ._parallel import THREADS_ENV
from .continuum import bridges, gas, hermite, painleve, parking
from .discrete_gas import (Charlier, EnsembleSpec, GeometricPower, Hahn, Krawtchouk, Meixner,
                           Power, build_proof_functions, hks_verify, marginal_pmf)
from .lpp import LppSpec, empirical_logconcavity, exact_g2_pmf_small, sample_passage
from .pmf import Pmf, check_logconcave, poisson_pmf, total_variation
from .schur import Specialization, schur_marginal_pmf

EXIT_OK, EXIT_ERROR, EXIT_FALSIFIED = 0, 1, 2
FAMILIES = ("meixner", "geometric", "charlier", "krawtchouk", "hahn", "mixture", "plancherel",
            "gamma", "rho", "schur", "lpp", "parking", "poisson")
# settings that never change the numbers in an output
_NOT_ECHOED = ("threads", "out", "config", "func")


def _version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0+unknown"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def number(text: str):
    """Exact rational when the text parses as one ("1/2", "0.25", "3"), else float."""
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        return float(text)


def number_list(text: str) -> list:
    return [number(t) for t in text.replace(";", ",").split(",") if t.strip()]


def int_range(text: str) -> list[int]:
    """``"7"`` or ``"3-9"`` (inclusive)."""
    if "-" in text.strip("-"):
        lo, hi = text.split("-", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(text)]


@dataclass
class RunConfig:
    subcommand: str
    params: dict = field(default_factory=dict)
    format: str = "json"
    seed: int = 0
    eps: float = 1e-12
    precision: int = 256
    threads: int | None = None

    @classmethod
    def from_namespace(cls, ns: argparse.Namespace) -> "RunConfig":
        skip = set(_NOT_ECHOED) | {"subcommand", "format", "seed", "eps", "precision"}
        params = {k: v for k, v in sorted(vars(ns).items()) if k not in skip}
        return cls(ns.subcommand, params, ns.format, ns.seed, ns.eps, ns.precision, ns.threads)

    def to_dict(self) -> dict:
        """Serialized form echoed into outputs; the thread count is left out
        because it never changes results."""
        return {"subcommand": self.subcommand, "params": _jsonable(self.params),
                "format": self.format, "seed": self.seed, "eps": repr(float(self.eps)),
                "precision": self.precision}


def _jsonable(v):
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


# --- pmf construction ----------------------------------------------------------------

def _need(ns, *names):
    missing = [n for n in names if getattr(ns, n, None) is None]
    if missing:
        raise DomainError(f"family {ns.family!r} needs --{' --'.join(missing)}")


def build_pmf(ns) -> Pmf:
    fam, eps = ns.family, ns.eps
    if fam in ("meixner", "geometric", "charlier", "krawtchouk", "hahn"):
        return marginal_pmf(ensemble_spec(ns), ns.i, eps=eps)
    if fam == "mixture":
        _need(ns, "alpha", "beta")
        spec = plancherel.MixtureSpec(ns.alpha, ns.beta, eps)
        return plancherel.mixture_lambda_pmf(spec, ns.i, strict=not ns.lenient)
    if fam == "plancherel":
        _need(ns, "n")
        return plancherel.plancherel_lambda_pmf(ns.n, ns.beta or 2, ns.i)
    if fam == "gamma":
        _need(ns, "n", "q")
        return plancherel.gamma_lambda1_pmf(ns.n, ns.q, ns.beta or 2, eps)
    if fam == "rho":
        _need(ns, "n", "k")
        return plancherel.rho_pmf(ns.n, ns.k, ns.beta or 2)
    if fam == "schur":
        _need(ns, "a")
        spec = Specialization(ns.a, ns.b if ns.b is not None else ns.a, ns.scale)
        return schur_marginal_pmf(spec, ns.i, eps=eps)
    if fam == "lpp":
        _need(ns, "n", "q")
        return exact_g2_pmf_small(ns.n, ns.q, eps)
    if fam == "parking":
        _need(ns, "n")
        return parking.parking_displacement_pmf(ns.n)
    if fam == "poisson":
        _need(ns, "alpha")
        return poisson_pmf(ns.alpha, eps)
    raise DomainError(f"unknown family {fam!r}")


def ensemble_spec(ns) -> EnsembleSpec:
    fam = ns.family
    _need(ns, "n")
    n = ns.n
    if fam == "meixner":
        _need(ns, "q")
        w = Meixner(ns.m if ns.m is not None else n, ns.q)
    elif fam == "geometric":
        _need(ns, "q")
        w = GeometricPower(ns.q)
    elif fam == "charlier":
        _need(ns, "alpha")
        w = Charlier(ns.alpha)
    elif fam == "krawtchouk":
        _need(ns, "K", "p")
        w = Krawtchouk(ns.K, ns.p)
    elif fam == "hahn":
        _need(ns, "a_int")
        w = Hahn(ns.a_int, ns.K if ns.K is not None else ns.a_int + n - 1)
    else:
        raise DomainError(f"family {fam!r} is not a discrete ensemble")
    beta = ns.beta if ns.beta is not None else 2
    expo = int(beta) if Fraction(beta).denominator == 1 else float(beta)
    return EnsembleSpec(n, w, Power(expo))


def _add_family_args(p):
    p.add_argument("--family", choices=FAMILIES, help="distribution to build")
    p.add_argument("--n", type=int, help="number of particles, grid size or partition size")
    p.add_argument("--i", type=int, default=1, help="particle or row index (1-based)")
    p.add_argument("--k", type=int, help="level or excess (rho family, hks)")
    p.add_argument("--m", type=int, help="Meixner shape parameter (default n)")
    p.add_argument("--q", type=number, help="geometric parameter")
    p.add_argument("--p", type=number, help="Krawtchouk parameter")
    p.add_argument("--K", type=int, help="Krawtchouk / Hahn upper end")
    p.add_argument("--a-int", dest="a_int", type=int, help="Hahn parameter a")
    p.add_argument("--alpha", type=number, help="Charlier / mixture / Poisson parameter")
    p.add_argument("--beta", type=number, help="interaction exponent (default 2)")
    p.add_argument("--a", type=number_list, help="Schur specialization a (comma separated)")
    p.add_argument("--b", type=number_list, help="Schur specialization b (default a)")
    p.add_argument("--scale", type=number, default=Fraction(1), help="Schur common scale")
    p.add_argument("--lenient", action="store_true",
                   help="mixture: report the achieved residual instead of failing on budget")


# --- subcommands ------------------------------------------------------------------

def cmd_pmf(ns, cfg):
    if ns.family is None:
        raise DomainError("pmf needs --family")
    p = build_pmf(ns)
    lc = check_logconcave(p)
    rows = [(str(k), m) for k, m in zip(p.support, p.to_dict()["masses"])]
    return {"pmf": p.to_dict(), "logconcavity": lc.to_dict()}, EXIT_OK, (["k", "mass"], rows)


def _read_masses(path):
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError:
        return Pmf.from_masses([number(t) for t in text.replace(",", " ").split()])
    if isinstance(data, list):
        return Pmf.from_masses([number(str(t)) for t in data])
    if "pmf" in data:
        data = data["pmf"]
    return Pmf.from_dict(data)


def cmd_check(ns, cfg):
    if ns.masses is not None:
        p = Pmf.from_masses(ns.masses)
    elif ns.input is not None:
        p = _read_masses(ns.input)
    elif ns.family is not None:
        p = build_pmf(ns)
    else:
        raise DomainError("check needs --masses, --input or --family")
    rep = check_logconcave(p, ns.mode)
    status = EXIT_OK if rep.passed else EXIT_FALSIFIED
    out = {"report": rep.to_dict(), "residual": p.to_dict()["residual"], "exact": p.exact}
    return out, status, None


def cmd_chen(ns, cfg):
    results, ok = [], True
    if ns.words is not None:
        for m in int_range(ns.words):
            for n in int_range(ns.n):
                rep = plancherel.word_chen_check(m, n)
                results.append({"m": m, "n": n, **rep.to_dict()})
                ok &= rep.passed
    elif ns.rho is not None:
        for n in int_range(ns.n):
            rep = plancherel.rho_check(n, ns.rho, ns.beta)
            results.append({"n": n, "k": ns.rho, **rep.to_dict()})
            ok &= rep.passed
    else:
        for n in int_range(ns.n):
            rep = plancherel.chen_check(n, ns.window)
            results.append({"n": n, **rep.to_dict()})
            ok &= rep.passed
    rows = [(str(r.get("m", "")), str(r["n"]), r["verdict"]) for r in results]
    return ({"results": results, "all_pass": ok}, EXIT_OK if ok else EXIT_FALSIFIED,
            (["m", "n", "verdict"], rows))


def cmd_hks(ns, cfg):
    if ns.k is None or ns.box is None:
        raise DomainError("hks needs --k and --box lo,hi")
    spec = ensemble_spec(ns)
    lo, hi = (int(v) for v in ns.box.split(","))
    f, g, h = build_proof_functions(spec, ns.i, ns.k, (lo, hi))
    pointwise, sums, witness = hks_verify(f, g, h, h)
    ok = pointwise and sums
    out = {"pointwise_ok": pointwise, "sum_ok": sums,
           "witness": None if witness is None else [list(witness[0]), list(witness[1])]}
    return out, EXIT_OK if ok else EXIT_FALSIFIED, None


def cmd_tw2(ns, cfg):
    grid = painleve.hastings_mcleod_solve(ns.xmin, ns.xmax, ns.tol, float(ns.step))
    rep = painleve.tw2_logconcavity_report(grid)
    status = EXIT_OK if rep.passed else EXIT_FALSIFIED
    report = {k: (repr(v) if isinstance(v, float) else v) for k, v in rep.to_dict().items()}
    out = {"report": report, "grid_points": len(grid), "meta": _jsonable(grid.meta)}
    lines = grid.to_csv(ns.every).splitlines()
    rows = [tuple(l.split(",")) for l in lines[1:]]
    return out, status, (lines[0].split(","), rows)


def _potential(ns):
    if ns.potential == "quadratic":
        return gas.Quadratic()
    if ns.potential == "laguerre":
        return gas.Laguerre(float(ns.a_param))
    if ns.potential == "doublewell":
        return gas.Custom(lambda x: x ** 4 / 4 - x ** 2, lambda x: 3 * x ** 2 - 2)
    return gas.Custom(lambda x: -x ** 2, lambda x: -2.0 + 0 * x)


def cmd_gas(ns, cfg):
    beta = float(ns.beta)
    if ns.check == "bridges":
        times = [float(t) for t in number_list(ns.times)]
        rep = bridges.km_bridge_logconcavity_check(ns.N, times, ns.trials, ns.seed)
        return {"report": _jsonable(rep.to_dict())}, EXIT_OK if rep.ok else EXIT_FALSIFIED, None
    pot = _potential(ns)
    if ns.check == "supermodular":
        rep = gas.gas_supermodular_batch(ns.n, beta, pot, ns.trials, ns.seed)
        return {"report": _jsonable(rep.to_dict())}, EXIT_OK if rep.all_hold else EXIT_FALSIFIED, None
    start = [float(k + 1) for k in range(ns.n)]
    cfg0 = gas.GasConfig(start, beta, pot)
    rep = gas.gas_convexity_check(cfg0, ns.trials, ns.seed)
    # only a convex potential makes positive semidefiniteness a theorem
    bad = rep.potential_convex and not rep.all_psd
    return {"report": _jsonable(rep.to_dict())}, EXIT_FALSIFIED if bad else EXIT_OK, None


def cmd_mc(ns, cfg):
    if ns.sampler == "hermite":
        batch = hermite.hermite_beta_edge_sample(ns.n, float(ns.beta), ns.count, ns.seed)
        out = {"summary": _jsonable(batch.summary()), "meta": batch.meta}
    else:
        spec = LppSpec(ns.n, ns.variant, None if ns.q is None else float(ns.q), seed=ns.seed)
        batch = sample_passage(spec, ns.count)
        out = {"summary": _jsonable(batch.summary()),
               "empirical_logconcavity": _jsonable(empirical_logconcavity(batch).to_dict())}
    rows = [(repr(v) if isinstance(v, float) else str(v),) for v in batch.values.tolist()]
    return out, EXIT_OK, (["value"], rows)


def cmd_converge(ns, cfg):
    alpha, beta = ns.alpha, ns.beta
    mix = plancherel.mixture_lambda_pmf(plancherel.MixtureSpec(alpha, beta, ns.eps), 1)
    rows = []
    for n in (int(v) for v in number_list(ns.ns)):
        q = alpha / Fraction(n) ** int(beta) if Fraction(beta).denominator == 1 \
            else float(alpha) / n ** float(beta)
        gam = plancherel.gamma_lambda1_pmf(n, q, beta, ns.eps)
        rows.append((str(n), "tv", repr(float(total_variation(gam, mix)))))
        if ns.k is not None and n > ns.k + 1:
            rc = plancherel.limiting_ratio_check(n, alpha, beta, ns.k)
            rows.append((str(n), "ratio_gap", rc.to_dict(17)["gap"]))
    out = {"table": [{"n": r[0], "statistic": r[1], "value": r[2]} for r in rows],
           "mixture_residual": mix.to_dict()["residual"]}
    return out, EXIT_OK, (["n", "statistic", "value"], rows)


# --- parser and driver -------------------------------------------------------------

def _common(p):
    p.add_argument("--out", help="output file (default stdout)")
    p.add_argument("--format", choices=("json", "csv"), help="output format (default from --out suffix, else json)")
    p.add_argument("--seed", type=int, default=0, help="random seed")
    p.add_argument("--eps", type=float, default=1e-12, help="truncation target")
    p.add_argument("--precision", type=int, default=256, help="bits for non-integer exponents")
    p.add_argument("--threads", type=int, help=f"worker threads (default ${THREADS_ENV} or 1)")
    p.add_argument("--config", help="key=value file merged under the flags")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="logconcave", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=_version())
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("pmf", help="compute a pmf")
    _add_family_args(p)
    p.set_defaults(func=cmd_pmf)

    p = sub.add_parser("check", help="log-concavity report")
    _add_family_args(p)
    p.add_argument("--masses", type=number_list, help="comma separated masses")
    p.add_argument("--input", help="file with masses (JSON pmf, JSON list or plain numbers)")
    p.add_argument("--mode", choices=("plain", "ultra"), default="plain")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("chen", help="Chen-type conjecture checks")
    p.add_argument("--n", required=True, help="n or an inclusive range a-b")
    p.add_argument("--window", type=int, help="edge window j (checks k >= n-j)")
    p.add_argument("--rho", type=int, metavar="K", help="check rho_{n,K} instead")
    p.add_argument("--words", metavar="M", help="check random words over [M] (M or a-b)")
    p.add_argument("--beta", type=number, default=Fraction(2))
    p.set_defaults(func=cmd_chen)

    p = sub.add_parser("hks", help="verify the proof functions of the discrete theorem")
    _add_family_args(p)
    p.add_argument("--box", help="lo,hi coordinate range")
    p.set_defaults(func=cmd_hks)

    p = sub.add_parser("tw2", help="solve Painleve II and certify TW2 log-concavity")
    p.add_argument("--xmin", type=float, default=-10.0)
    p.add_argument("--xmax", type=float, default=8.0)
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--step", type=number, default=Fraction(1, 128), help="grid spacing")
    p.add_argument("--every", type=int, default=1, help="CSV: keep every k-th grid row")
    p.set_defaults(func=cmd_tw2)

    p = sub.add_parser("gas", help="beta-gas and bridge batch checks")
    p.add_argument("--check", choices=("convexity", "supermodular", "bridges"), default="convexity")
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--beta", type=number, default=Fraction(2))
    p.add_argument("--potential", choices=("quadratic", "laguerre", "doublewell", "negquadratic"),
                   default="quadratic")
    p.add_argument("--a-param", dest="a_param", type=number, default=Fraction(1),
                   help="Laguerre parameter a")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--N", type=int, default=2, help="bridges: number of paths")
    p.add_argument("--times", default="0.5", help="bridges: comma separated times")
    p.set_defaults(func=cmd_gas)

    p = sub.add_parser("mc", help="Monte Carlo samplers")
    p.add_argument("--sampler", choices=("lpp", "hermite"), default="lpp")
    p.add_argument("--variant", default="g2_iid")
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--q", type=number)
    p.add_argument("--beta", type=number, default=Fraction(2))
    p.add_argument("--count", type=int, default=10000)
    p.set_defaults(func=cmd_mc)

    p = sub.add_parser("converge", help="Meixner-limit and ratio tables")
    p.add_argument("--alpha", type=number, default=Fraction(1))
    p.add_argument("--beta", type=number, default=Fraction(2))
    p.add_argument("--ns", default="2,3,4,5", help="comma separated n values")
    p.add_argument("--k", type=int, help="also tabulate the limiting-ratio gap at this k")
    p.set_defaults(func=cmd_converge)

    for action in sub.choices.values():
        _common(action)
    return parser


def _read_config(path) -> dict:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise DomainError(f"config line without '=': {line!r}")
            key, value = (s.strip() for s in line.split("=", 1))
            out[key.lstrip("-").replace("-", "_")] = value
    return out


def parse(argv) -> argparse.Namespace:
    parser = build_parser()
    ns = parser.parse_args(argv)
    if ns.config:
        cfg = _read_config(ns.config)
        subparser = parser._subparsers._group_actions[0].choices[ns.subcommand]
        known = {a.dest for a in subparser._actions}
        unknown = sorted(set(cfg) - known)
        if unknown:
            parser.error(f"unknown config keys: {', '.join(unknown)}")
        # string defaults are converted by argparse, so flags still win
        subparser.set_defaults(**cfg)
        ns = parser.parse_args(argv)
    if ns.format is None:
        ns.format = "csv" if ns.out and ns.out.endswith(".csv") else "json"
    return ns


def render(payload: dict, table, cfg: RunConfig) -> str:
    prov = {"tool": "logconcave", "version": _version(), "config": cfg.to_dict()}
    if cfg.format == "csv" and table is not None:
        header, rows = table
        head = "# " + json.dumps({"provenance": prov, **payload}, sort_keys=True) + "\n"
        return head + ",".join(header) + "\n" + "".join(",".join(r) + "\n" for r in rows)
    return json.dumps({"provenance": prov, **payload}, indent=2, sort_keys=True) + "\n"


def main(argv=None) -> int:
    ns = parse(sys.argv[1:] if argv is None else argv)
    if ns.threads is not None:
        os.environ[THREADS_ENV] = str(ns.threads)
    try:
        if ns.precision != plancherel.PRECISION_BITS:
            plancherel.set_precision(ns.precision)
        cfg = RunConfig.from_namespace(ns)
        payload, status, table = ns.func(ns, cfg)
        text = render(payload, table, cfg)
    except (DomainError, ResourceError, SolverError, ValueError, OSError) as exc:
        print(f"logconcave {ns.subcommand}: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    if ns.out:
        with open(ns.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
