"""
Command-line interface.

    fit       <data> --prior pd|gg
    estimate  <data> --prior pd|gg (--fit | --sigma S --theta T | --sigma S --tau T) --l 0..L
    ci        <data> ... --level 0.95 --draws 5000 --seed S
    approx    <data> ... --order 1|2
    validate  <data>
    simulate  --dist zeta --s 1.1 --n 1000 --replicates 500 --groups 5 --seed S

Reports go to stdout (or --output) as JSON, or CSV for estimate tables; logs go
to stderr. Exit codes: 0 ok, 2 flags or configuration, 3 data validation,
4 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

from gibbs_discovery.core.errors import ConfigError, DataValidationError, GibbsDiscoveryError
from gibbs_discovery.core.settings import AppSettings, load_settings
from gibbs_discovery.data_sim.io import build_report, dumps_report, estimates_csv
from gibbs_discovery.estimators import DiscoveryEstimate, SampleSummary
from gibbs_discovery.gibbs_weights import PriorKind
from gibbs_discovery.services.discovery_service import DiscoveryService
from gibbs_discovery.services.simulation_service import SimulationService

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_VALIDATION = 3
EXIT_NUMERIC = 4

DATA_COMMANDS = ("fit", "estimate", "ci", "approx", "validate")
TABLE_COMMANDS = ("estimate", "ci", "approx")


# ----------------------------- logging -----------------------------

def setup_logging(level: str = "INFO") -> None:
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s - %(message)s",
        stream=sys.stderr,
        force=True,
    )


log = logging.getLogger("cli")


# ----------------------------- flags -----------------------------

def parse_l_values(tokens: Sequence[str]) -> List[int]:
    """Accepts `0..10`, `0,1,5,10` and space-separated values, in any mix."""
    values: List[int] = []
    for token in tokens:
        for part in token.split(","):
            part = part.strip()
            if not part:
                continue
            try:
                if ".." in part:
                    lo, hi = (int(x) for x in part.split("..", 1))
                    if hi < lo:
                        raise ConfigError(f"Empty l range {part!r}.")
                    values.extend(range(lo, hi + 1))
                else:
                    values.append(int(part))
            except ValueError as exc:
                raise ConfigError(f"Bad --l value {part!r}.") from exc
    if any(v < 0 for v in values):
        raise ConfigError("--l values must be nonnegative.")
    return sorted(set(values))


def parse_sizes(raw: Optional[str]) -> Tuple[int, ...]:
    if not raw:
        return ()
    try:
        return tuple(int(float(x)) for x in raw.split(",") if x.strip())
    except ValueError as exc:
        raise ConfigError(f"Bad --ratio-sizes value {raw!r}.") from exc


def _add_prior_flags(p: argparse.ArgumentParser, *, with_values: bool = True) -> None:
    p.add_argument("--prior", choices=[PriorKind.PD.value, PriorKind.GG.value], default=PriorKind.PD.value)
    if not with_values:
        return
    p.add_argument("--fit", action="store_true", help="Fit the prior by maximum likelihood first")
    p.add_argument("--sigma", type=float, default=None)
    p.add_argument("--theta", type=float, default=None)
    p.add_argument("--tau", type=float, default=None)
    p.add_argument("--l", nargs="+", default=None, help="Frequencies: 0..10, 0,1,5,10 or 0 1 5 10")


def _add_output_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--output", type=Path, default=None)
    p.add_argument("--force", action="store_true", help="Continue on data that fails validation")
    p.add_argument("--log-level", default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gibbs-discovery", description="Discovery probabilities under Gibbs-type priors.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="Empirical Bayes fit of a PD or GG prior")
    p.add_argument("data", type=Path)
    _add_prior_flags(p, with_values=False)
    _add_output_flags(p)

    for name, help_text in (
        ("estimate", "Exact Bayesian and Good-Turing discovery estimates"),
        ("ci", "Exact estimates with posterior credible intervals"),
        ("approx", "First or second order large-sample approximations"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("data", type=Path)
        _add_prior_flags(p)
        _add_output_flags(p)
        if name == "ci":
            p.add_argument("--level", type=float, default=None)
            p.add_argument("--draws", type=int, default=None)
            p.add_argument("--seed", type=int, default=None)
        if name == "approx":
            p.add_argument("--order", type=int, choices=[1, 2], default=1)

    p = sub.add_parser("validate", help="Check frequency counts against n and k")
    p.add_argument("data", type=Path)
    _add_output_flags(p)

    p = sub.add_parser("simulate", help="Zeta simulation study")
    p.add_argument("--dist", default=None)
    p.add_argument("--s", type=float, default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--replicates", type=int, default=None)
    p.add_argument("--groups", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--ratio-sizes", default=None, help="Comma-separated sample sizes for the r12 study")
    p.add_argument("--ratio-replicates", type=int, default=None)
    _add_output_flags(p)
    return parser


# ----------------------------- config -----------------------------

@dataclass(frozen=True)
class RunConfig:
    command: str
    data: Optional[Path]
    prior: Optional[PriorKind]
    do_fit: bool
    sigma: Optional[float]
    theta: Optional[float]
    tau: Optional[float]
    ls: Optional[List[int]]
    order: int
    force: bool
    fmt: str
    output: Optional[Path]
    settings: AppSettings

    @classmethod
    def from_args(cls, args: argparse.Namespace, env) -> "RunConfig":
        get = lambda name: getattr(args, name, None)  # noqa: E731
        fixed = [v for v in (get("sigma"), get("theta"), get("tau")) if v is not None]
        if get("fit") and fixed:
            raise ConfigError("--fit excludes fixed --sigma/--theta/--tau.")
        prior = PriorKind(get("prior")) if get("prior") else None
        if prior is PriorKind.PD and get("tau") is not None:
            raise ConfigError("--tau belongs to the GG prior.")
        if prior is PriorKind.GG and get("theta") is not None:
            raise ConfigError("--theta belongs to the PD prior.")
        if args.format == "csv" and args.command not in TABLE_COMMANDS:
            raise ConfigError(f"--format csv is available for {', '.join(TABLE_COMMANDS)} only.")

        settings = load_settings(
            env,
            sampling={"level": get("level"), "draws": get("draws"), "seed": get("seed")},
            simulation={
                "dist": get("dist"),
                "s": get("s"),
                "n": get("n"),
                "replicates": get("replicates"),
                "groups": get("groups"),
                "seed": get("seed"),
                "ratio_sizes": parse_sizes(get("ratio_sizes")) or None,
                "ratio_replicates": get("ratio_replicates"),
            },
            log_level=get("log_level"),
        )
        return cls(
            command=args.command,
            data=get("data"),
            prior=prior,
            do_fit=bool(get("fit")),
            sigma=get("sigma"),
            theta=get("theta"),
            tau=get("tau"),
            ls=parse_l_values(get("l")) if get("l") else None,
            order=get("order") or 1,
            force=bool(get("force")),
            fmt=args.format,
            output=get("output"),
            settings=settings,
        )


# ----------------------------- commands -----------------------------

def _default_ls(s: SampleSummary) -> List[int]:
    return [0] + list(s.m)


def _emit(text: str, output: Optional[Path]) -> None:
    if output is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    output.parent.mkdir(parents=True, exist_ok=True)
    output.write_text(text, encoding="utf-8")
    log.info("Wrote %s", output)


def _table(cfg: RunConfig, dataset: str, prior: Dict[str, Any], rows: List[DiscoveryEstimate], metrics: dict) -> str:
    dicts = [r.to_dict() for r in rows]
    if cfg.fmt == "csv":
        return estimates_csv(dicts)
    return dumps_report(build_report(dataset, prior, dicts, metrics))


def _run_table_command(cfg: RunConfig, service: DiscoveryService) -> str:
    s = service.checked(cfg.data)
    prior, fitted = service.resolve_prior(
        s, cfg.prior, do_fit=cfg.do_fit, sigma=cfg.sigma, theta=cfg.theta, tau=cfg.tau
    )
    ls = cfg.ls if cfg.ls is not None else _default_ls(s)
    metrics: Dict[str, Any] = {"n": s.n, "k": s.k}
    if fitted is not None:
        metrics["fit"] = fitted.to_dict()

    if cfg.command == "estimate":
        rows = service.estimate(s, prior, ls)
    elif cfg.command == "ci":
        rows = service.intervals(s, prior, ls, seed=cfg.settings.sampling.seed)
        metrics["level"] = cfg.settings.sampling.level
        metrics["draws"] = cfg.settings.sampling.draws
    else:
        rows = service.approximate(s, prior, ls, cfg.order)
        metrics["order"] = cfg.order
    return _table(cfg, cfg.data.name, prior.to_dict(), rows, metrics)


def run(cfg: RunConfig) -> int:
    service = DiscoveryService(cfg.settings, force=cfg.force)

    if cfg.command == "validate":
        s, report = service.load(cfg.data)
        _emit(dumps_report({"dataset": cfg.data.name, "validation": report.to_dict()}), cfg.output)
        if not report.passed:
            log.error("Validation failed: k residual %d, n residual %d", report.k_residual, report.n_residual)
            return EXIT_VALIDATION
        return EXIT_OK

    if cfg.command == "fit":
        s = service.checked(cfg.data)
        payload = {"dataset": cfg.data.name, "n": s.n, "k": s.k}
        payload.update(service.fit(s, cfg.prior))
        _emit(dumps_report(payload), cfg.output)
        return EXIT_OK

    if cfg.command == "simulate":
        sim = SimulationService(
            cfg.settings.simulation,
            cfg.settings.fit,
            threads=cfg.settings.runtime.threads,
            sampling=cfg.settings.sampling,
        )
        _emit(dumps_report(sim.run().to_dict()), cfg.output)
        return EXIT_OK

    _emit(_run_table_command(cfg, service), cfg.output)
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None, env=None) -> int:
    env = os.environ if env is None else env
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    try:
        cfg = RunConfig.from_args(args, env)
    except ConfigError as exc:
        setup_logging("INFO")
        log.error("%s", exc)
        return EXIT_CONFIG

    setup_logging(cfg.settings.runtime.log_level)
    log.info("Starting %s", cfg.command)
    try:
        code = run(cfg)
    except ConfigError as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    except OSError as exc:
        log.error("Cannot read or write data: %s", exc)
        return EXIT_CONFIG
    except DataValidationError as exc:
        log.error("%s", exc)
        if exc.report is not None:
            sys.stdout.write(dumps_report({"dataset": cfg.data.name, "validation": exc.report.to_dict()}))
        return EXIT_VALIDATION
    except GibbsDiscoveryError as exc:
        log.error("%s failed: %s", cfg.command, exc)
        return EXIT_NUMERIC
    log.info("Finished %s", cfg.command)
    return code
