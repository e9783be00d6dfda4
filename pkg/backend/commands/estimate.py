"""
Estimate commands: trajectories, block counts, growth curves and slope fits.
"""
import logging

import numpy as np

from shared.artifacts import artifact_writer, build_provenance
from shared.config import config
from shared.constants import EXIT_OK
from shared.exceptions import UsageError
from backend.commands.refine import verified_trap
from backend.middleware import StageMiddleware
from backend.services.estimate_service import EstimateService
from backend.utils import active_cones, load_spec, output_format, read_counts

logger = logging.getLogger('glassbound.cli')


def block_lengths(run_config):
    if run_config.block_range:
        lo, hi = run_config.block_range
        return list(range(lo, hi + 1))
    if run_config.block_len:
        return [run_config.block_len]
    raise UsageError(f"{run_config.command} needs --block-len or --block-range")


def require_steps(run_config):
    if not run_config.steps or run_config.steps < 1:
        raise UsageError(f"{run_config.command} needs --steps")
    return run_config.steps


def fit_summary(result):
    return {
        "slope": result.slope,
        "intercept": result.intercept,
        "residual": result.residual,
        "n_range": list(result.n_range),
    }


@StageMiddleware.log_stage("simulate")
def simulate_command(run_config):
    spec = load_spec(run_config)
    steps = require_steps(run_config)
    trap = verified_trap(spec, run_config)
    trajectory = EstimateService.sample_trajectory(spec, active_cones(trap), steps, run_config.seed,
                                                   exact=run_config.exact)
    if trajectory.terminal:
        logger.warning(f"Trajectory stopped in a terminal box after {len(trajectory)} transitions")
    fmt = output_format(run_config, "csv", ("csv", "bin", "json"))
    provenance = build_provenance("simulate", spec, run_config.seed, steps=steps,
                                  discard=config.TRANSIENT_DISCARD, exact=run_config.exact)
    with artifact_writer(run_config.out, fmt, provenance) as out:
        if fmt == "bin":
            out.write_bytes(trajectory.symbols.astype("<u2").tobytes())
        elif fmt == "csv":
            out.write_lines(str(b) for b in trajectory.labels())
        else:
            out.write_json({
                "symbols": [str(b) for b in trajectory.labels()],
                "terminal": trajectory.terminal,
                "elapsed": trajectory.elapsed,
            })
    return EXIT_OK


@StageMiddleware.log_stage("blocks")
def blocks_command(run_config):
    spec = load_spec(run_config)
    steps = require_steps(run_config)
    ns = block_lengths(run_config)
    trap = verified_trap(spec, run_config)
    cones = active_cones(trap)
    fmt = output_format(run_config, "csv", ("csv", "json"))

    if run_config.checkpoints:
        if len(ns) != 1:
            raise UsageError("growth curves take a single --block-len")
        checkpoints = [c for c in run_config.checkpoints if c <= steps]
        curve = EstimateService.growth_curve(spec, cones, ns[0], checkpoints, run_config.seed)
        provenance = build_provenance("blocks", spec, run_config.seed, steps=steps, block_len=ns[0])
        with artifact_writer(run_config.out, fmt, provenance) as out:
            if fmt == "csv":
                out.write_rows(["steps", "count"], curve)
            else:
                out.write_json({"n": ns[0], "curve": [list(p) for p in curve]})
        return EXIT_OK

    counts = EstimateService.multi_trajectory_counts(spec, cones, steps, [run_config.seed], ns,
                                                     threads=run_config.threads)
    provenance = build_provenance("blocks", spec, run_config.seed, steps=steps,
                                  discard=config.TRANSIENT_DISCARD)
    with artifact_writer(run_config.out, fmt, provenance) as out:
        if fmt == "csv":
            out.write_rows(["n", "count"], sorted(counts.items()))
        else:
            out.write_json({"counts": {str(n): c for n, c in sorted(counts.items())}})
    return EXIT_OK


@StageMiddleware.log_stage("fit")
def fit_command(run_config):
    spec = None
    if run_config.counts_path:
        counts = read_counts(run_config.counts_path)
        if run_config.spec_path:
            spec = load_spec(run_config)
    else:
        spec = load_spec(run_config)
        steps = require_steps(run_config)
        trap = verified_trap(spec, run_config)
        counts = sorted(EstimateService.multi_trajectory_counts(
            spec, active_cones(trap), steps, [run_config.seed], block_lengths(run_config),
            threads=run_config.threads).items())

    n_max = max(n for n, _ in counts)
    full = EstimateService.fit_entropy(counts, (2, n_max))
    tail = EstimateService.fit_entropy(counts)
    chosen = tail
    if run_config.block_range and run_config.counts_path:
        chosen = EstimateService.fit_entropy(counts, run_config.block_range)

    output_format(run_config, "json", ("json",))
    document = fit_summary(chosen)
    document.update({
        "steps": run_config.steps,
        "seed": run_config.seed,
        "full": fit_summary(full),
        "tail": fit_summary(tail),
        "log2_counts": {str(n): float(np.log2(c)) for n, c in counts if c > 0},
    })
    with artifact_writer(run_config.out, "json", build_provenance("fit", spec, run_config.seed)) as out:
        out.write_json(document)
    return EXIT_OK
