"""Command-line surface: ``bgpp simulate | verify | tau-table | eh``.

Exit codes: 0 success, 1 failed verification, 2 usage or input-domain error,
3 failure while running.
"""

from pathlib import Path
from typing import Callable, Optional, Tuple

import click
import numpy as np

from ..core.config import ABS_TOL, DEFAULT_SAMPLES, DEFAULT_SEED, OUTPUT_FORMATS, REL_TOL, SAMPLE_STRIDE
from ..core.exceptions import BGPPError, DomainError
from ..core.logger import get_logger
from ..models.schemas import EHLevels, EHState, FlowKind, IntegratorConfig, LevelSet, MetricParams, RunConfig
from ..services import eguchi_hanson as eh
from ..services.integrator import integrate, validate_initial
from ..services.metric_core import validate_params
from ..services.table_writer import eh_tau_frame, save_report, save_table, tau_frame, trajectory_frame
from ..services.verification import CHECK_NAMES, run_verification
from ..utils.path_utils import prepare_output

logger = get_logger(__name__)

EXIT_VERIFY_FAILED = 1
EXIT_USAGE = 2
EXIT_RUNTIME = 3


class FloatList(click.ParamType):
    """Comma-separated finite floats, optionally of a fixed length."""

    name = "floats"

    def __init__(self, length: Optional[int] = None):
        self.length = length

    def convert(self, value, param, ctx):
        if isinstance(value, tuple):
            return value
        try:
            parts = tuple(float(v) for v in str(value).split(","))
        except ValueError:
            self.fail(f"'{value}' is not a comma-separated list of numbers", param, ctx)
        if not all(np.isfinite(parts)):
            self.fail(f"'{value}' contains non-finite values", param, ctx)
        if self.length is not None and len(parts) != self.length:
            self.fail(f"expected {self.length} values, got {len(parts)}", param, ctx)
        return parts


class GridSpec(click.ParamType):
    """lo,hi,n with n >= 1."""

    name = "grid"

    def convert(self, value, param, ctx):
        if isinstance(value, tuple):
            return value
        parts = str(value).split(",")
        try:
            lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
        except (ValueError, IndexError):
            self.fail(f"'{value}' is not of the form lo,hi,n", param, ctx)
        if len(parts) != 3 or n < 1 or not (np.isfinite(lo) and np.isfinite(hi)):
            self.fail(f"'{value}' is not a valid grid (need finite lo, hi and n >= 1)", param, ctx)
        return lo, hi, n


def _positive(ctx, param, value):
    if value is not None and not value > 0.0:
        raise click.BadParameter(f"must be positive, got {value}")
    return value


def _exit(code: int, message: Optional[str] = None):
    if message:
        click.echo(f"Error: {message}", err=True)
    click.get_current_context().exit(code)


def _parse_stage(build: Callable):
    """Run configuration parsing; domain errors become usage errors."""
    try:
        return build()
    except (DomainError, ValueError) as e:
        logger.error(f"Invalid input: {e}")
        _exit(EXIT_USAGE, str(e))


def _run_stage(run: Callable):
    """Run the computation; every library error is a runtime failure."""
    try:
        return run()
    except BGPPError as e:
        logger.exception("Run failed")
        _exit(EXIT_RUNTIME, str(e))


def _params(values: Optional[Tuple[float, float, float]]) -> Optional[MetricParams]:
    return validate_params(*values) if values is not None else None


def _suffix(fmt: str) -> str:
    return ".csv" if fmt == "csv" else ".jsonl"


def _metadata(run: RunConfig, **extra) -> dict:
    meta = {"command": run.command}
    if run.params is not None:
        meta["params"] = ",".join(repr(v) for v in run.params)
    if run.gamma2 is not None:
        meta["gamma2"] = repr(run.gamma2)
    if run.state is not None:
        meta["state"] = ",".join(repr(v) for v in run.state)
    if run.levels is not None:
        meta["levels"] = ",".join(repr(v) for v in run.levels)
    meta.update({"span": f"{run.span[0]!r},{run.span[1]!r}", "rel_tol": repr(run.rel_tol), "abs_tol": repr(run.abs_tol), "seed": run.seed})
    meta.update(extra)
    return meta


params_option = click.option("--params", type=FloatList(3), default=None, help="Metric parameters t1,t2,t3.")
gamma2_option = click.option("--gamma2", type=float, default=None, callback=_positive, help="Eguchi-Hanson gamma^2.")
span_option = click.option("--span", type=FloatList(2), default="0,1", show_default=True, help="lambda0,lambda1.")
rel_tol_option = click.option("--rel-tol", type=float, default=REL_TOL, callback=_positive, show_default=True)
abs_tol_option = click.option("--abs-tol", type=float, default=ABS_TOL, callback=_positive, show_default=True)
format_option = click.option("--format", "fmt", type=click.Choice(OUTPUT_FORMATS), default="csv", show_default=True)
out_option = click.option("--out", type=click.Path(dir_okay=False, path_type=Path), default=None, help="Output file.")
seed_option = click.option("--seed", type=int, default=DEFAULT_SEED, show_default=True)


@click.group()
def bgpp():
    """Geodesic flow of the BGPP metric and its Eguchi-Hanson limit."""


@bgpp.command()
@click.option("--flow", type=click.Choice([f.value for f in FlowKind]), default=FlowKind.REDUCED.value, show_default=True)
@params_option
@gamma2_option
@click.option("--state", type=FloatList(), required=True, help="Initial state, comma-separated, in the flow's variable order.")
@span_option
@rel_tol_option
@abs_tol_option
@click.option("--stride", type=float, default=SAMPLE_STRIDE, callback=_positive, show_default=True, help="Sampling stride in lambda.")
@click.option("--track-tau", is_flag=True, help="Integrate tau alongside the flow.")
@format_option
@out_option
@seed_option
def simulate(flow, params, gamma2, state, span, rel_tol, abs_tol, stride, track_tau, fmt, out, seed):
    """Integrate the full, reduced or Eguchi-Hanson flow and write the samples."""
    kind = FlowKind(flow)

    def build():
        run = RunConfig(command="simulate", params=params, gamma2=gamma2, state=state, span=span, rel_tol=rel_tol, abs_tol=abs_tol, out=out, fmt=fmt, seed=seed)
        metric = _params(params)
        validate_initial(kind, state, metric, gamma2)
        cfg = IntegratorConfig(rel_tol=rel_tol, abs_tol=abs_tol, sample_stride=stride)
        return run, metric, cfg

    run, metric, cfg = _parse_stage(build)
    traj = _run_stage(lambda: integrate(kind, state, params=metric, gamma2=gamma2, span=span, cfg=cfg, track_tau=track_tau))
    path = prepare_output(out, f"trajectory_{kind.value}{_suffix(fmt)}")
    save_table(trajectory_frame(traj), path, fmt, _metadata(run, flow=kind.value, n_steps=traj.n_steps, n_rejected=traj.n_rejected))
    click.echo(f"Wrote {len(traj.samples)} samples to {path}")


def _check_list(ctx, param, value):
    if value is None:
        return None
    names = [v.strip() for v in value.split(",") if v.strip()]
    unknown = [n for n in names if n not in CHECK_NAMES]
    if unknown or not names:
        raise click.BadParameter(f"unknown checks {unknown}; choose from {', '.join(CHECK_NAMES)}")
    return names


@bgpp.command()
@click.option("--params", type=FloatList(3), default="0,1,2", show_default=True, help="Metric parameters t1,t2,t3.")
@click.option("--checks", default=None, callback=_check_list, help=f"Comma-separated subset of {', '.join(CHECK_NAMES)}.")
@click.option("--samples", type=click.IntRange(min=1), default=DEFAULT_SAMPLES, show_default=True, help="Random states in the bracket suite.")
@rel_tol_option
@abs_tol_option
@out_option
@seed_option
def verify(params, checks, samples, rel_tol, abs_tol, out, seed):
    """Run the cross-verification suite and write a JSON report; exit 1 if any check fails."""

    def build():
        return _params(params), IntegratorConfig(rel_tol=rel_tol, abs_tol=abs_tol)

    metric, cfg = _parse_stage(build)
    report = _run_stage(lambda: run_verification(metric, seed=seed, n_samples=samples, checks=checks, cfg=cfg))
    path = save_report(report, prepare_output(out, "verification_report.json"))
    for section in report.sections:
        click.echo(f"{section.name}: {'pass' if section.passed else 'FAIL'}")
    click.echo(f"Report written to {path}")
    if not report.passed:
        _exit(EXIT_VERIFY_FAILED)


@bgpp.command(name="tau-table")
@params_option
@gamma2_option
@click.option("--levels", type=FloatList(3), required=True, help="e,m2,n2 (generic) or e,m3,mu2 (with --gamma2).")
@click.option("--grid", type=GridSpec(), required=True, help="lo,hi,n; tau is measured from lo.")
@format_option
@out_option
@seed_option
def tau_table(params, gamma2, levels, grid, fmt, out, seed):
    """Tabulate tau(t), or tau(rho) against its closed form when --gamma2 is given."""
    lo, hi, n = grid
    points = np.linspace(lo, hi, n)

    def build():
        run = RunConfig(command="tau-table", params=params, gamma2=gamma2, levels=levels, grid=grid, fmt=fmt, out=out, seed=seed)
        if gamma2 is not None:
            e, m3, mu2 = levels
            eh_levels = eh.make_eh_levels(e, m3, mu2, gamma2)
            for rho in points:
                eh.eh_metric_components(gamma2, float(rho))
            return run, eh_levels, None
        if params is None:
            raise DomainError("tau-table needs --params (generic) or --gamma2 (Eguchi-Hanson)")
        metric = _params(params)
        level_set = LevelSet(e=levels[0], m2=levels[1], n2=levels[2])
        if lo <= metric.t_max or hi <= metric.t_max:
            raise DomainError(f"grid [{lo}, {hi}] must lie above t_max={metric.t_max}")
        return run, level_set, metric

    run, level_set, metric = _parse_stage(build)
    if isinstance(level_set, EHLevels):
        frame = _run_stage(lambda: eh_tau_frame(level_set, points))
        extra = {"mode": "eguchi-hanson", "max_abs_diff": repr(float(frame["abs_diff"].max()))}
        name = "tau_table_eh"
    else:
        frame = _run_stage(lambda: tau_frame(level_set, metric, points))
        extra = {"mode": "generic"}
        name = "tau_table"
    path = prepare_output(out, f"{name}{_suffix(fmt)}")
    save_table(frame, path, fmt, _metadata(run, **extra))
    click.echo(f"Wrote {len(frame)} rows to {path}")


@bgpp.command(name="eh")
@params_option
@gamma2_option
@click.option("--state", type=FloatList(5), required=True, help="rho,P_rho,M1,M2,M3.")
@span_option
@rel_tol_option
@abs_tol_option
@click.option("--stride", type=float, default=SAMPLE_STRIDE, callback=_positive, show_default=True)
@format_option
@out_option
@seed_option
def eh_command(params, gamma2, state, span, rel_tol, abs_tol, stride, fmt, out, seed):
    """Integrate the Eguchi-Hanson flow with tau tracked and the closed-form (M1, M2) alongside."""

    def build():
        run = RunConfig(command="eh", params=params, gamma2=gamma2, state=state, span=span, rel_tol=rel_tol, abs_tol=abs_tol, out=out, fmt=fmt, seed=seed)
        g2 = eh.eh_gamma2(gamma2, _params(params))
        validate_initial(FlowKind.EH, state, gamma2=g2)
        cfg = IntegratorConfig(rel_tol=rel_tol, abs_tol=abs_tol, sample_stride=stride)
        return run, g2, cfg

    run, g2, cfg = _parse_stage(build)

    def compute():
        initial = EHState.from_array(state)
        levels = eh.eh_levels_from_state(initial, g2)
        traj = integrate(FlowKind.EH, initial, gamma2=g2, span=span, cfg=cfg, track_tau=True)
        return levels, traj

    levels, traj = _run_stage(compute)
    frame = trajectory_frame(traj)
    phi0 = eh.eh_phase_from_state(state[2], state[3])
    frame["M1_closed"], frame["M2_closed"] = eh.eh_m12_solution(levels, frame["tau"].to_numpy(), phi0)

    extra = {"gamma2_used": repr(g2), "discriminant": repr(eh.eh_discriminant(levels))}
    if levels.roots is not None:
        extra["roots"] = ",".join(repr(r) for r in levels.roots)
    path = prepare_output(out, f"eh_trajectory{_suffix(fmt)}")
    save_table(frame, path, fmt, _metadata(run, **extra))
    click.echo(f"Wrote {len(traj.samples)} samples to {path}")
