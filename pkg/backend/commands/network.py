"""
Network commands: condition validation and the transition graph.
"""
import logging

from shared.artifacts import artifact_writer, build_provenance
from shared.constants import EXIT_OK, EXIT_SPEC_INVALID
from backend.middleware import StageMiddleware
from backend.services.graph_service import GraphService
from backend.services.network_service import NetworkService
from backend.utils import load_spec, output_format

logger = logging.getLogger('glassbound.cli')


def condition_rows(report):
    return [
        {"condition": e.condition, "passed": e.passed, "offender": e.offender, "detail": e.detail}
        for e in report.entries
    ]


def tg_summary(tg):
    return {
        "entropy": GraphService.graph_entropy(tg),
        "perron": GraphService.perron_value(tg),
        "vertices": tg.graph.number_of_nodes(),
        "edges": tg.graph.number_of_edges(),
        "components": [len(c) for c in GraphService.scc_decompose(tg)],
    }


@StageMiddleware.log_stage("validate")
def validate_command(run_config):
    spec = load_spec(run_config)
    report = NetworkService.validate(spec)
    fmt = output_format(run_config, "json", ("json", "csv"))
    with artifact_writer(run_config.out, fmt, build_provenance("validate", spec)) as out:
        if fmt == "csv":
            out.write_rows(["condition", "passed", "offender", "detail"],
                           [(r["condition"], r["passed"], r["offender"] or "", r["detail"] or "")
                            for r in condition_rows(report)])
        else:
            out.write_json({"ok": report.ok, "conditions": condition_rows(report)})
    return EXIT_OK if report.ok else EXIT_SPEC_INVALID


@StageMiddleware.log_stage("tg")
def tg_command(run_config):
    spec = load_spec(run_config)
    report = NetworkService.validate(spec)
    if not report.ok:
        logger.warning(f"Building TG for a network failing {report.failures()[0].condition}")
    tg = GraphService.build_tg(spec)
    summary = tg_summary(tg)
    fmt = output_format(run_config, "dot", ("dot", "json", "csv"))
    with artifact_writer(run_config.out, fmt, build_provenance("tg", spec)) as out:
        if fmt == "dot":
            out.write_dot(GraphService.to_dot(tg, "TG", {"entropy": f"{summary['entropy']:.6f}"}))
        elif fmt == "csv":
            out.write_rows(["from", "to"], [(str(a), str(b)) for a, b in sorted(tg.graph.edges)])
        else:
            summary["graph"] = GraphService.to_json(tg)
            out.write_json(summary)
    return EXIT_OK
