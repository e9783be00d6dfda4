"""
Cycle and cone commands: first-return cycles, returning cones, trapping checks.
"""
import logging

from shared.artifacts import artifact_writer, build_provenance
from shared.config import config
from shared.constants import EXIT_OK, EXIT_TRAP_UNVERIFIED
from shared.exceptions import SpecError
from shared.models import CycleWord, format_edge
from shared.schemas import ConeSchema, CycleWordSchema, TrappingReportSchema
from shared import rational
from backend.middleware import StageMiddleware
from backend.services.cone_service import ConeService
from backend.services.network_service import NetworkService
from backend.utils import load_spec, output_format, resolve_cycles

logger = logging.getLogger('glassbound.cli')


def cone_entry(word, cone):
    return {
        "word": word,
        "empty": ConeService.is_empty(cone),
        "rows": [list(r) for r in cone.rows],
        "cross_section": [list(p) for p in ConeService.cross_section(cone)],
        "cone": ConeSchema().dump(cone),
    }


def trap_summary(report):
    data = TrappingReportSchema().dump(report)
    data["active"] = [c.label for c in report.active]
    data["stable_loop"] = ConeService.stable_loop(report)
    return data


def named_words(cycles, words):
    """CycleWords for label strings over the given cycles."""
    by_label = {c.label: c for c in cycles}
    out = []
    for text in words:
        missing = [ch for ch in text if ch not in by_label]
        if missing:
            raise SpecError(f"word {text!r} uses unknown cycle label(s) {missing}")
        out.append(CycleWord.concat([by_label[ch] for ch in text]))
    return out


@StageMiddleware.log_stage("cycles")
def cycles_command(run_config):
    spec = load_spec(run_config)
    NetworkService.require_valid(spec)
    bound = run_config.max_cycle_len or config.DEFAULT_MAX_CYCLE_LEN
    edge, cycles = resolve_cycles(spec, run_config.starting_edge, bound)
    fmt = output_format(run_config, "json", ("json", "csv"))
    provenance = build_provenance("cycles", spec, starting_edge=format_edge(edge), max_cycle_len=bound)
    with artifact_writer(run_config.out, fmt, provenance) as out:
        if fmt == "csv":
            out.write_rows(["label", "length", "boxes"],
                           [(c.label, c.length, " ".join(str(b) for b in c.boxes)) for c in cycles])
        else:
            out.write_json({
                "starting_edge": format_edge(edge),
                "max_cycle_len": bound,
                "cycles": CycleWordSchema(many=True).dump(cycles),
            })
    return EXIT_OK


@StageMiddleware.log_stage("cones")
def cones_command(run_config):
    spec = load_spec(run_config)
    NetworkService.require_valid(spec, uniform_decay=True)
    edge, cycles = resolve_cycles(spec, run_config.starting_edge, run_config.max_cycle_len)
    words = named_words(cycles, run_config.words) if run_config.words else cycles
    entries = [cone_entry(w.label, ConeService.returning_region(spec, w)) for w in words]
    fmt = output_format(run_config, "json", ("json", "csv"))
    provenance = build_provenance("cones", spec, starting_edge=format_edge(edge))
    with artifact_writer(run_config.out, fmt, provenance) as out:
        if fmt == "csv":
            out.write_rows(
                ["word", "empty", "rows", "rays"],
                [(e["word"], e["empty"],
                  ";".join(" ".join(rational.format_rational(x) for x in r) for r in e["rows"]),
                  ";".join(" ".join(x for x in r) for r in e["cone"]["rays"]))
                 for e in entries])
        else:
            out.write_json({"starting_edge": format_edge(edge), "cones": entries})
    return EXIT_OK


@StageMiddleware.log_stage("trap")
def trap_command(run_config):
    spec = load_spec(run_config)
    NetworkService.require_valid(spec, uniform_decay=True)
    edge, cycles = resolve_cycles(spec, run_config.starting_edge, run_config.max_cycle_len)
    report = ConeService.verify_trapping(spec, edge, cycles)
    output_format(run_config, "json", ("json",))
    with artifact_writer(run_config.out, "json", build_provenance("trap", spec)) as out:
        out.write_json(trap_summary(report))
    if not report.verified:
        logger.error(f"Trapping region not verified; escaping cycles {list(report.escapes)}")
        return EXIT_TRAP_UNVERIFIED
    return EXIT_OK
