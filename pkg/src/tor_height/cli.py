from __future__ import annotations

import logging
import sys
import time
from pathlib import Path
from typing import Any, Dict, List, Optional

import click
import mpmath
import typer
from pydantic import BaseModel, ConfigDict

from tor_height import __version__
from tor_height.arith import is_prime
from tor_height.bounds import conductor_height_report, main_height_bound
from tor_height.classpoly import hilbert_class_polynomial, real_root_count
from tor_height.config import (
    DEFAULT_CONFIG_PATH,
    RuntimeConfig,
    load_runtime_config,
    write_default_config,
)
from tor_height.curve import (
    b_e_threshold,
    compute_invariants,
    has_good_reduction,
    is_supersingular,
    parse_model,
    surjectivity_threshold,
)
from tor_height.exceptions import InvalidArgumentError, TorHeightError
from tor_height.models import CurveInvariants, RunReport, WeierstrassModel, format_real
from tor_height.report_io import validate_report, write_report
from tor_height.reporting import (
    configure_logging,
    err_console,
    print_error,
    print_json,
    print_suite_table,
)
from tor_height.ssearch import (
    SearchConfig,
    direct_scan,
    search_supersingular_prime,
    validate_certificate,
)
from tor_height.verify import SUITES, run_suite

logger = logging.getLogger(__name__)

EXIT_USAGE = 64

app = typer.Typer(no_args_is_help=True, help="Explicit height lower bounds on Q(E_tor)")


class CliState(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    config: RuntimeConfig
    save: Optional[Path] = None


def _state(ctx: typer.Context) -> CliState:
    if not isinstance(ctx.obj, CliState):
        ctx.obj = CliState(config=load_runtime_config())
    return ctx.obj


def _emit(
    ctx: typer.Context,
    command: str,
    inputs: Dict[str, Any],
    outputs: Dict[str, Any],
    *,
    certificate: Optional[Dict[str, Any]] = None,
    timings: Optional[Dict[str, float]] = None,
    seed: Optional[int] = None,
) -> None:
    report = RunReport(
        command=command,
        inputs=inputs,
        outputs=outputs,
        certificate=certificate,
        timings=timings or {},
        tool_version=__version__,
        seed=seed,
    )
    payload = validate_report(report.model_dump())
    save = _state(ctx).save
    if save:
        write_report(save, payload)
    print_json(payload)


def _load_curve(curve: str, conductor: int, cm: bool = False) -> tuple[WeierstrassModel, CurveInvariants]:
    model = parse_model(curve)
    return model, compute_invariants(model, conductor, cm=cm)


def _parse_primes(text: Optional[str]) -> List[int]:
    if not text:
        return []
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise InvalidArgumentError(f"invalid prime list {text!r}") from exc


@app.callback()
def main_callback(
    ctx: typer.Context,
    config: Optional[Path] = typer.Option(None, "--config", help="Path to a config file"),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Debug logging on stderr"),
    threads: Optional[int] = typer.Option(None, "--threads", help="Workers for verification"),
    precision: Optional[int] = typer.Option(None, "--precision", help="Working precision in bits"),
    save: Optional[Path] = typer.Option(None, "--save", help="Also write the report to a file"),
) -> None:
    runtime = load_runtime_config(
        config or DEFAULT_CONFIG_PATH, precision_bits=precision, threads=threads
    )
    configure_logging("DEBUG" if verbose else runtime.log_level)
    mpmath.mp.prec = runtime.precision_bits
    ctx.obj = CliState(config=runtime, save=save)


# =============================================================================
# Meta commands
# =============================================================================


@app.command()
def version() -> None:
    print_json({"tool": "torheight", "tool_version": __version__})


@app.command()
def init(path: Optional[Path] = typer.Option(None, "--path", help="Path for config file")) -> None:
    config_path = path or DEFAULT_CONFIG_PATH
    if config_path.exists():
        err_console.print(f"Config already exists at {config_path}")
        raise typer.Exit(code=0)

    write_default_config(config_path)
    err_console.print(f"Created config at {config_path}")


# =============================================================================
# Curve commands
# =============================================================================


@app.command()
def invariants(
    ctx: typer.Context,
    curve: str = typer.Option(..., "--curve", help="a1,a2,a3,a4,a6 as exact rationals"),
    conductor: int = typer.Option(..., "--conductor", help="Conductor N of the curve"),
    cm: bool = typer.Option(False, "--cm", help="Flag the curve as having CM"),
) -> None:
    start = time.perf_counter()
    model, inv = _load_curve(curve, conductor, cm)
    outputs = inv.model_dump()
    outputs["B_E"] = format_real(b_e_threshold(inv.j))
    outputs["surjectivity_threshold"] = str(surjectivity_threshold(inv.h_j))
    _emit(
        ctx,
        "invariants",
        {"curve": model.label(), "conductor": conductor, "cm": cm},
        outputs,
        timings={"total": round(time.perf_counter() - start, 6)},
    )


@app.command()
def supersingular(
    ctx: typer.Context,
    curve: str = typer.Option(..., "--curve", help="a1,a2,a3,a4,a6 as exact rationals"),
    conductor: int = typer.Option(..., "--conductor", help="Conductor N of the curve"),
    search: str = typer.Option("elkies", "--search", help="Search route: elkies or direct"),
    min_prime: int = typer.Option(0, "--min-prime", help="Lower bound M for the prime"),
    effort: Optional[int] = typer.Option(None, "--effort", help="Scan effort cap"),
    cm: bool = typer.Option(False, "--cm", help="Flag the curve as having CM"),
) -> None:
    if search not in ("elkies", "direct"):
        raise click.BadParameter("must be 'elkies' or 'direct'", param_hint="--search")
    state = _state(ctx)
    model, inv = _load_curve(curve, conductor, cm)
    config = SearchConfig.from_runtime(state.config)
    if effort is not None:
        config = config.model_copy(update={"scan_effort": effort})

    cert = search_supersingular_prime(model, inv, min_prime, config, mode=search)
    problems = validate_certificate(cert, model, inv)
    if problems:
        logger.error(f"certificate failed re-validation: {problems}")
    _emit(
        ctx,
        "supersingular",
        {"curve": model.label(), "conductor": conductor, "search": search, "M": min_prime},
        {"p": cert.p, "validated": not problems, "problems": problems},
        certificate=cert.to_json(),
        timings=cert.timings,
    )


@app.command()
def classpoly(
    ctx: typer.Context,
    d: int = typer.Option(..., "--d", help="D with -D a discriminant"),
) -> None:
    state = _state(ctx)
    start = time.perf_counter()
    P = hilbert_class_polynomial(d, state.config.max_precision_bits)
    outputs = P.to_json()
    outputs["real_roots"] = real_root_count(P)
    _emit(
        ctx,
        "classpoly",
        {"D": d},
        outputs,
        timings={"total": round(time.perf_counter() - start, 6)},
    )


# =============================================================================
# Height bounds
# =============================================================================


def _check_prime_for_bound(
    model: WeierstrassModel,
    inv: CurveInvariants,
    p: int,
    *,
    assume_surjective: bool,
    exceptions: List[int],
    curve_class: str,
    max_point_count_prime: int,
) -> None:
    if p < 5 or not is_prime(p):
        raise InvalidArgumentError(f"{p} is not a prime >= 5")
    if p in exceptions:
        raise InvalidArgumentError(f"{p} is listed as a non-surjective prime")
    if not has_good_reduction(model, p):
        raise InvalidArgumentError(f"{p} is a prime of bad reduction")
    if p > max_point_count_prime:
        raise InvalidArgumentError(f"{p} exceeds the point-count cap {max_point_count_prime}")
    if not is_supersingular(model, p):
        raise InvalidArgumentError(f"{p} is not supersingular for {model.label()}")
    surjective = (
        assume_surjective
        or (curve_class == "semistable" and p >= 11)
        or p >= surjectivity_threshold(inv.h_j)
    )
    if not surjective:
        raise InvalidArgumentError(
            f"surjectivity at {p} is not established; pass --assume-surjective"
        )


def _auto_prime(
    model: WeierstrassModel,
    inv: CurveInvariants,
    *,
    assume_surjective: bool,
    exceptions: List[int],
    config: RuntimeConfig,
) -> int:
    start = 5 if assume_surjective else surjectivity_threshold(inv.h_j)
    while True:
        p, _ = direct_scan(
            model,
            start,
            effort=config.scan_effort,
            max_point_count_prime=config.max_point_count_prime,
        )
        if p not in exceptions:
            return p
        start = p + 1


@app.command()
def bound(
    ctx: typer.Context,
    curve: Optional[str] = typer.Option(None, "--curve", help="a1,a2,a3,a4,a6 as exact rationals"),
    conductor: Optional[int] = typer.Option(None, "--conductor", help="Conductor N"),
    prime: Optional[int] = typer.Option(None, "--prime", help="Supersingular surjective prime"),
    auto: bool = typer.Option(False, "--auto", help="Find the prime by direct scan"),
    mode: Optional[str] = typer.Option(
        None, "--mode", help="Conductor bound: explicit, semistable, effective or cm"
    ),
    curve_class: Optional[str] = typer.Option(
        None, "--curve-class", help="non-CM, CM, small-degree or semistable"
    ),
    constant_exponent: Optional[int] = typer.Option(
        None, "--constant-exponent", help="Power of ten in the main bound: 21 or 31"
    ),
    assume_surjective: bool = typer.Option(
        False, "--assume-surjective", help="Treat the prime as surjective"
    ),
    surjective_exceptions: Optional[str] = typer.Option(
        None, "--surjective-exceptions", help="Comma-separated non-surjective primes"
    ),
    n: Optional[int] = typer.Option(None, "--n", help="Override n in the explicit mode"),
    c: Optional[float] = typer.Option(None, "--c", help="Constant c for the effective mode"),
    cm: bool = typer.Option(False, "--cm", help="Flag the curve as having CM"),
) -> None:
    state = _state(ctx)
    exponent = constant_exponent or state.config.constant_exponent
    if exponent not in (21, 31):
        raise click.BadParameter("must be 21 or 31", param_hint="--constant-exponent")
    start = time.perf_counter()
    inputs: Dict[str, Any] = {
        "curve": curve,
        "conductor": conductor,
        "prime": prime,
        "auto": auto,
        "mode": mode,
        "constant_exponent": exponent,
        "assume_surjective": assume_surjective,
    }

    if mode is not None:
        if mode not in ("explicit", "semistable", "effective", "cm"):
            raise click.BadParameter(
                "must be explicit, semistable, effective or cm", param_hint="--mode"
            )
        if mode == "cm":
            report = conductor_height_report(conductor or 11, "cm")
        else:
            if conductor is None:
                raise click.BadParameter("required for conductor bounds", param_hint="--conductor")
            j = h_j = None
            if curve is not None:
                _, inv = _load_curve(curve, conductor, cm)
                j, h_j = inv.j, inv.h_j
            report = conductor_height_report(
                conductor,
                mode,
                j=j,
                h_j=h_j,
                c=c,
                n=n,
                constant_exponent=exponent,
                lnum_constant=state.config.lnum_constant,
                theta_caps={
                    "theta_cap": state.config.theta_cap,
                    "sum_cap": state.config.theta_sum_cap,
                },
            )
        outputs = report.to_json()
    else:
        if curve is None or conductor is None:
            raise click.BadParameter("--curve and --conductor are required", param_hint="--prime")
        if (prime is None) == (not auto):
            raise click.BadParameter("give exactly one of --prime or --auto", param_hint="--prime")
        model, inv = _load_curve(curve, conductor, cm)
        chosen_class = curve_class or ("CM" if inv.has_cm else "non-CM")
        exceptions = _parse_primes(surjective_exceptions)
        if auto:
            prime = _auto_prime(
                model,
                inv,
                assume_surjective=assume_surjective,
                exceptions=exceptions,
                config=state.config,
            )
        if chosen_class != "CM":
            _check_prime_for_bound(
                model,
                inv,
                prime,
                assume_surjective=assume_surjective,
                exceptions=exceptions,
                curve_class=chosen_class,
                max_point_count_prime=state.config.max_point_count_prime,
            )
        value = main_height_bound(prime, chosen_class, exponent)
        outputs = {"mode": "prime", "p": prime, "curve_class": chosen_class, "bound": value.to_json()}

    _emit(ctx, "bound", inputs, outputs, timings={"total": round(time.perf_counter() - start, 6)})


# =============================================================================
# Verification
# =============================================================================


@app.command()
def verify(
    ctx: typer.Context,
    suite: str = typer.Option(..., "--suite", help=f"One of: {', '.join(SUITES)}"),
    lmax: Optional[int] = typer.Option(None, "--lmax", help="Largest ell for class suites"),
    dmax: Optional[int] = typer.Option(None, "--dmax", help="Largest D for classnum degrees"),
    count: Optional[int] = typer.Option(None, "--count", help="Samples for mignotte-sum"),
    seed: int = typer.Option(0, "--seed", help="Seed for random samples"),
    xmax: Optional[int] = typer.Option(None, "--xmax", help="Largest x for the theta suite"),
    pmax: Optional[int] = typer.Option(None, "--pmax", help="Largest p for the hasse suite"),
    points: Optional[int] = typer.Option(None, "--points", help="Grid size for the aux suite"),
    table: bool = typer.Option(False, "--table", help="Print a summary table on stderr"),
) -> None:
    if suite not in SUITES:
        raise click.BadParameter(f"must be one of {', '.join(SUITES)}", param_hint="--suite")
    state = _state(ctx)
    options: Dict[str, Any] = {}
    if suite in ("lemma1", "fouvry-murty", "classnum") and lmax is not None:
        options["lmax"] = lmax
    if suite == "classnum" and dmax is not None:
        options["dmax"] = dmax
    if suite == "lemma1":
        options["precision"] = state.config.precision_bits
    if suite in ("lemma1", "mignotte-sum"):
        options["threads"] = state.config.threads
    if suite == "mignotte-sum":
        options["seed"] = seed
        if count is not None:
            options["count"] = count
    if suite == "theta" and xmax is not None:
        options["xmax"] = xmax
    if suite == "hasse" and pmax is not None:
        options["pmax"] = pmax
    if suite == "aux" and points is not None:
        options["points"] = points

    start = time.perf_counter()
    result = run_suite(suite, **options)
    if table:
        print_suite_table(result)
    _emit(
        ctx,
        "verify",
        {"suite": suite, **{k: v for k, v in options.items() if k != "threads"}},
        result,
        timings={"total": round(time.perf_counter() - start, 6)},
        seed=seed if suite == "mignotte-sum" else None,
    )
    if result["failures"]:
        raise typer.Exit(code=1)
    if result["undecided"]:
        raise typer.Exit(code=2)


# =============================================================================
# Entry points
# =============================================================================


def run(argv: Optional[List[str]] = None) -> int:
    """Dispatch ``argv`` and return the process exit code."""
    command = typer.main.get_command(app)
    try:
        result = command.main(args=argv, prog_name="torheight", standalone_mode=False)
    except click.exceptions.UsageError as exc:
        exc.show(file=sys.stderr)
        return EXIT_USAGE
    except click.exceptions.Abort:
        return 1
    except TorHeightError as exc:
        payload = exc.to_dict()
        logger.error(f"{payload['error']}: {payload['message']}")
        print_error(payload)
        print_json(payload)
        return exc.exit_code
    return result if isinstance(result, int) else 0


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
