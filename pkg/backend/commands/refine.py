"""
Refine command: entropy bounds from TG down to TG_r(k), with optional forbidden words.
"""
from dataclasses import asdict

from shared.artifacts import artifact_writer, build_provenance
from shared.config import config
from shared.constants import EXIT_OK
from backend.middleware import StageMiddleware
from backend.services.cone_service import ConeService
from backend.services.graph_service import GraphService
from backend.services.network_service import NetworkService
from backend.services.refine_service import RefineService
from backend.utils import load_spec, output_format, require_trap, resolve_cycles

LEVEL_COLUMNS = ["label", "k", "entropy", "perron", "n_forbidden", "n_transient", "n_vertices", "n_edges"]


def verified_trap(spec, run_config):
    NetworkService.require_valid(spec, uniform_decay=True)
    edge, cycles = resolve_cycles(spec, run_config.starting_edge, run_config.max_cycle_len)
    return require_trap(ConeService.verify_trapping(spec, edge, cycles))


@StageMiddleware.log_stage("refine")
def refine_command(run_config):
    spec = load_spec(run_config)
    trap = verified_trap(spec, run_config)
    k = run_config.k or config.DEFAULT_REFINE_LEVEL
    threads = run_config.threads

    levels = RefineService.entropy_sequence(spec, trap, k, include_tg=True, threads=threads)
    finest = RefineService.build_tgr_k(spec, trap, k, threads=threads)
    if run_config.forbid:
        finest = RefineService.forbid_words(finest, run_config.forbid, threads=threads)
        levels.append(RefineService.summarize(
            finest, f"TG_r({finest.level}) forbidding {','.join(run_config.forbid)}"))

    fmt = output_format(run_config, "json", ("json", "csv", "dot"))
    provenance = build_provenance("refine", spec, k=k, forbid=",".join(run_config.forbid) or None)
    with artifact_writer(run_config.out, fmt, provenance) as out:
        if fmt == "csv":
            out.write_rows(LEVEL_COLUMNS, [[getattr(lv, c) for c in LEVEL_COLUMNS] for lv in levels])
        elif fmt == "dot":
            out.write_dot(GraphService.to_dot(finest, f"TG_r_{finest.level}"))
        else:
            out.write_json({
                "levels": [asdict(lv) for lv in levels],
                "entropies": {lv.label: lv.entropy for lv in levels},
                "words": finest.words,
                "forbidden": list(finest.forbidden),
                "transient": list(finest.transient),
            })
    return EXIT_OK
