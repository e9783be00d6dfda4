"""
Utility functions for the backend.
"""
import csv
import json
import sys

from shared.config import config
from shared.constants import ERRORS
from shared.exceptions import EstimateError, SpecError, TrappingError, UsageError
from shared.models import CycleWord, format_edge, parse_edge
from backend.services.dynamics_service import DynamicsService
from backend.services.graph_service import GraphService
from backend.services.network_service import NetworkService


def standardize_error_report(error, stage=None, stream=None):
    """
    Write a standardized JSON diagnostic to the error stream.

    Args:
        error: Exception raised by a command
        stage: Pipeline stage that failed, if known
        stream: Output stream, stderr by default

    Returns:
        Exit code the error maps to
    """
    stream = stream or sys.stderr
    exit_code = getattr(error, "exit_code", 1)
    report = {
        'error': getattr(error, "message", str(error)),
        'type': type(error).__name__,
        'exit_code': exit_code,
    }
    if stage:
        report['stage'] = stage

    details = getattr(error, "details", None)
    if details:
        report['details'] = details

    stream.write(json.dumps(report, sort_keys=True, default=str) + "\n")
    return exit_code


def parse_block_range(text):
    """Parse "A:B" into an inclusive (A, B) pair."""
    try:
        lo, hi = (int(part) for part in text.split(":"))
    except (AttributeError, ValueError):
        raise EstimateError(f"block range must look like 20:80, got {text!r}")
    if lo < 1 or hi < lo:
        raise EstimateError(f"empty or invalid block range {text!r}")
    return lo, hi


def parse_list(text, cast=str):
    """Comma-separated flag value as a tuple, empty items dropped."""
    if not text:
        return ()
    try:
        return tuple(cast(item.strip()) for item in text.split(",") if item.strip())
    except ValueError:
        raise UsageError(f"cannot read list value {text!r}")


def read_counts(path):
    """
    Read an (n, count) table written by the blocks command.

    Lines starting with '#' (provenance) and the header row are skipped.
    """
    try:
        with open(path, "r", newline="") as f:
            rows = [line for line in f if not line.startswith("#")]
    except OSError as e:
        raise EstimateError(f"cannot read block counts {path}: {e}")
    counts = []
    for row in csv.reader(rows):
        if not row or not row[0].strip().lstrip("-").isdigit():
            continue
        counts.append((int(row[0]), int(row[1])))
    if not counts:
        raise EstimateError(f"no (n, count) rows in {path}")
    return counts


def resolve_edge(spec, edge_text=None):
    """Starting edge from the flag, falling back to the network's trap block."""
    if edge_text:
        return parse_edge(edge_text, spec.n)
    if spec.trap is not None:
        return spec.trap.edge
    raise SpecError("a starting edge is required (--edge, or a trap block in the network document)")


def resolve_cycles(spec, edge_text=None, max_len=None):
    """
    Cycle set for the cone and trapping stages.

    The network's named cycles are used when the requested edge matches its
    trap block and no cycle-length bound was given; otherwise every
    first-return cycle through the edge up to the bound is enumerated.

    Returns:
        (starting edge, list of CycleWords)
    """
    edge = resolve_edge(spec, edge_text)
    tg = GraphService.build_tg(spec)
    if not tg.graph.has_edge(*edge):
        raise SpecError(f"starting edge {format_edge(edge)} is not an edge of the transition graph")
    if spec.trap is not None and spec.trap.edge == edge and max_len is None:
        cycles = []
        for label, boxes in spec.trap.cycles:
            if boxes[0] != edge[1] or boxes[-1] != edge[0]:
                raise SpecError(f"cycle {label} does not close through {format_edge(edge)}")
            DynamicsService.path_axes(spec, boxes, closed=True)
            cycles.append(CycleWord(boxes, edge, label))
        return edge, cycles
    bound = config.DEFAULT_MAX_CYCLE_LEN if max_len is None else max_len
    return edge, GraphService.enumerate_first_return_cycles(tg, edge, bound)


def active_cones(report):
    """Cones of a trapping report's active cycles, in cycle order."""
    return [report.cones[c.label] for c in report.active]


def require_trap(report):
    """Raise TrappingError for an unverified report."""
    if not report.verified:
        raise TrappingError(ERRORS["UNVERIFIED_TRAP"], {"escapes": list(report.escapes)})
    return report



def load_spec(run_config):
    """Network named by --spec."""
    if not run_config.spec_path:
        raise UsageError(f"{run_config.command} needs --spec")
    return NetworkService.load_network(run_config.spec_path)


def output_format(run_config, default, allowed):
    """Requested --format, checked against what the command can write."""
    fmt = run_config.format or default
    if fmt not in allowed:
        raise UsageError(f"{run_config.command} writes {', '.join(allowed)}, not {fmt}")
    return fmt
