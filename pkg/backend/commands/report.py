"""
Report command: the full bound pipeline in one JSON artifact.

Stages run in order validate, tg, cycles, cones, trap, refine. A failing
stage stops the pipeline; everything computed before it is still written,
with the failed stage and its diagnostic recorded.
"""
import logging
from dataclasses import asdict

from shared.artifacts import artifact_writer, build_provenance
from shared.config import config
from shared.constants import EXIT_OK
from shared.exceptions import GlassBoundError, SpecError
from shared.models import format_edge
from backend.commands.cones import cone_entry, trap_summary
from backend.commands.network import condition_rows, tg_summary
from backend.middleware import StageMiddleware
from backend.services.cone_service import ConeService
from backend.services.graph_service import GraphService
from backend.services.network_service import NetworkService
from backend.services.refine_service import RefineService
from backend.utils import load_spec, output_format, require_trap, resolve_cycles

logger = logging.getLogger('glassbound.cli')


@StageMiddleware.log_stage("report.validate")
def _validate(spec, results):
    report = NetworkService.validate(spec)
    results["validate"] = {"ok": report.ok, "conditions": condition_rows(report)}
    if not report.ok:
        first = report.failures()[0]
        raise SpecError(f"network fails {first.condition} at {first.offender}")
    if not spec.uniform_decay:
        raise SpecError("cone stages require equal decay rates")


@StageMiddleware.log_stage("report.tg")
def _tg(spec, results):
    tg = GraphService.build_tg(spec)
    results["tg"] = tg_summary(tg)


@StageMiddleware.log_stage("report.cycles")
def _cycles(spec, run_config, results):
    edge, cycles = resolve_cycles(spec, run_config.starting_edge, run_config.max_cycle_len)
    results["cycles"] = {
        "starting_edge": format_edge(edge),
        "labels": {c.label: [str(b) for b in c.boxes] for c in cycles},
    }
    return edge, cycles


@StageMiddleware.log_stage("report.cones")
def _cones(spec, cycles, results):
    results["cones"] = {c.label: cone_entry(c.label, ConeService.returning_region(spec, c)) for c in cycles}


@StageMiddleware.log_stage("report.trap")
def _trap(spec, edge, cycles, results):
    report = ConeService.verify_trapping(spec, edge, cycles)
    results["trap"] = trap_summary(report)
    return require_trap(report)


@StageMiddleware.log_stage("report.refine")
def _refine(spec, trap, k, threads, results):
    levels = RefineService.entropy_sequence(spec, trap, k, include_tg=True, threads=threads)
    results["levels"] = [asdict(lv) for lv in levels]
    results["entropies"] = {lv.label: lv.entropy for lv in levels}


def report_command(run_config):
    output_format(run_config, "json", ("json",))
    spec = load_spec(run_config)
    k = run_config.k or config.DEFAULT_REFINE_LEVEL
    results = {"completed": [], "failed_stage": None}
    exit_code = EXIT_OK
    stage = "validate"
    try:
        _validate(spec, results)
        results["completed"].append(stage)
        stage = "tg"
        _tg(spec, results)
        results["completed"].append(stage)
        stage = "cycles"
        edge, cycles = _cycles(spec, run_config, results)
        results["completed"].append(stage)
        stage = "cones"
        _cones(spec, cycles, results)
        results["completed"].append(stage)
        stage = "trap"
        trap = _trap(spec, edge, cycles, results)
        results["completed"].append(stage)
        stage = "refine"
        _refine(spec, trap, k, run_config.threads, results)
        results["completed"].append(stage)
    except GlassBoundError as e:
        results["failed_stage"] = stage
        results["error"] = {"message": e.message, "type": type(e).__name__, "exit_code": e.exit_code}
        exit_code = e.exit_code
        logger.error(f"Report stopped at stage {stage}: {e.message}")

    provenance = build_provenance("report", spec, k=k)
    with artifact_writer(run_config.out, "json", provenance) as out:
        out.write_json(results)
    return exit_code
