"""
Refine service for the cycle-union graph and its word-context refinements.

Level 0 is the union of the active cycles' paths. Level k subscripts every
box of a word's first cycle with the whole length-k word, drops words whose
returning cones are empty or transient, and links words whose contexts
overlap by k-1 cycles.
"""
import logging
from concurrent.futures import ProcessPoolExecutor
from typing import Dict, List, Optional, Sequence

import networkx as nx

from shared.constants import ERRORS, NO_CONTEXT
from shared.exceptions import SpecError, TrappingError
from shared.models import CycleWord, EntropyLevel, NetworkSpec, RefinedGraph, TrappingReport
from backend.services.cone_service import ConeService
from backend.services.dynamics_service import DynamicsService
from backend.services.graph_service import GraphService

logger = logging.getLogger('glassbound.refine')


class RefineService:
    """Service for refined transition graphs and entropy bounds."""

    @staticmethod
    def build_tgr(trap: TrappingReport) -> RefinedGraph:
        """
        Union of the active cycles' path subgraphs.

        Args:
            trap: Verified trapping report

        Returns:
            Level-0 RefinedGraph whose vertices carry the empty context word
        """
        _require_verified(trap)
        g = nx.DiGraph()
        for cycle in trap.active:
            for a, b in cycle.edges():
                g.add_edge((a, NO_CONTEXT), (b, NO_CONTEXT))
        return RefinedGraph(
            level=0, graph=g, word_index={NO_CONTEXT: sorted(g.nodes)},
            forbidden=tuple(c.label for c in trap.empty),
            transient=tuple(c.label for c in trap.transient),
            n_forbidden=len(trap.empty), trap=trap,
        )

    @staticmethod
    def build_tgr_k(spec: NetworkSpec, trap: TrappingReport, k: int, extra: Sequence[str] = (),
                    threads: int = 1, cache: Optional[Dict[str, object]] = None) -> RefinedGraph:
        """
        Refinement of the cycle-union graph by length-k cycle words.

        Args:
            spec: Network specification
            trap: Verified trapping report
            k: Word length, at least 1
            extra: Additional forbidden words (what-if bounds)
            threads: Worker processes for cone classification
            cache: Cones by word label, shared between calls

        Returns:
            RefinedGraph at level k
        """
        _require_verified(trap)
        if k < 1:
            raise ValueError("refinement level must be at least 1")
        extra = tuple(extra)
        alphabet = [c.label for c in trap.active]
        for word in extra:
            _check_word(trap, word)
        cache = {} if cache is None else cache
        cycles = {c.label: c for c in trap.active}
        for c in trap.active:
            cache.setdefault(c.label, trap.cones[c.label])

        level = [cycles[a] for a in alphabet if not _contains_any(a, extra)]
        minimal_forbidden = [a for a in alphabet if _contains_any(a, extra)]
        for j in range(2, k + 1):
            candidates = []
            for u in level:
                for a in alphabet:
                    label = u.label + a
                    if _contains_any(label, extra):
                        minimal_forbidden.append(label)
                        continue
                    candidates.append(CycleWord.concat([u, cycles[a]]))
            RefineService.classify(spec, candidates, cache, threads)
            level = []
            for w in candidates:
                if ConeService.is_empty(cache[w.label]):
                    minimal_forbidden.append(w.label)
                else:
                    level.append(w)

        maps = {a: DynamicsService.cycle_map(spec, cycles[a]) for a in alphabet}
        transient = ConeService.transient_words(spec, k, level, {w.label: cache[w.label] for w in level}, maps)
        words = [w for w in level if w not in transient]

        g = nx.DiGraph()
        word_index = {}
        e1 = tuple(trap.starting_edge)
        for w in words:
            first = cycles[w.parts[0]]
            nodes = sorted({(b, w.label) for b in first.boxes})
            g.add_nodes_from(nodes)
            word_index[w.label] = nodes
            for a, b in first.edges():
                if (a, b) != e1:
                    g.add_edge((a, w.label), (b, w.label))
        for w in words:
            for v in words:
                if v.parts[:-1] == w.parts[1:]:
                    g.add_edge((e1[0], w.label), (e1[1], v.label))

        n_forbidden = len(alphabet) ** k - len(level)
        logger.info(f"TG_r({k}): {len(words)} words, {n_forbidden} forbidden, {len(transient)} transient, "
                    f"{g.number_of_nodes()} vertices")
        return RefinedGraph(
            level=k, graph=g, word_index=word_index,
            forbidden=tuple(minimal_forbidden), transient=tuple(w.label for w in transient),
            extra=extra, n_forbidden=n_forbidden, spec=spec, trap=trap,
        )

    @staticmethod
    def classify(spec: NetworkSpec, words: Sequence[CycleWord], cache: Dict[str, object], threads: int = 1):
        """
        Fill cache with the returning cones of words, in worker processes when threads > 1.
        """
        todo = [w for w in words if w.label not in cache]
        if not todo:
            return cache
        if threads > 1 and len(todo) > 1:
            with ProcessPoolExecutor(max_workers=threads) as pool:
                for label, cone in pool.map(_region_task, [(spec, w) for w in todo]):
                    cache[label] = cone
        else:
            for w in todo:
                cache[w.label] = ConeService.returning_region(spec, w)
        return cache

    @staticmethod
    def entropy_sequence(spec: NetworkSpec, trap: TrappingReport, k_max: int,
                         include_tg: bool = False, threads: int = 1) -> List[EntropyLevel]:
        """
        Entropy bounds from the cycle-union graph through level k_max.

        Args:
            spec: Network specification
            trap: Verified trapping report
            k_max: Highest refinement level, at least 1
            include_tg: Prepend the unrefined transition graph

        Returns:
            EntropyLevels ordered from coarsest to finest
        """
        if k_max < 1:
            raise ValueError("k_max must be at least 1")
        levels = []
        if include_tg:
            tg = GraphService.build_tg(spec)
            levels.append(_level("TG", None, tg.graph, 0, 0))
        base = RefineService.build_tgr(trap)
        levels.append(_level("TG_r", 0, base.graph, base.n_forbidden, len(base.transient)))
        cache = {}
        for k in range(1, k_max + 1):
            g = RefineService.build_tgr_k(spec, trap, k, threads=threads, cache=cache)
            levels.append(_level(f"TG_r({k})", k, g.graph, g.n_forbidden, len(g.transient)))
        return levels

    @staticmethod
    def forbid_words(g: RefinedGraph, extra: Sequence[str], threads: int = 1) -> RefinedGraph:
        """
        Rebuild a refinement with additional forbidden words.

        Args:
            g: Refined graph built from a spec and trapping report
            extra: Words over the trap's cycle labels

        Returns:
            RefinedGraph at level max(g.level, longest extra word)
        """
        if g.trap is None:
            raise TrappingError(ERRORS["UNVERIFIED_TRAP"])
        for word in extra:
            _check_word(g.trap, word)
        level = max([g.level] + [len(w) for w in extra])
        if level == 0:
            return RefineService.build_tgr(g.trap)
        spec = g.spec
        if spec is None:
            raise SpecError("refined graph carries no network specification")
        return RefineService.build_tgr_k(spec, g.trap, level, extra=tuple(g.extra) + tuple(extra), threads=threads)

    @staticmethod
    def summarize(g: RefinedGraph, label: Optional[str] = None) -> EntropyLevel:
        """EntropyLevel of a single refined graph."""
        if label is None:
            label = "TG_r" if g.level == 0 else f"TG_r({g.level})"
        return _level(label, g.level, g.graph, g.n_forbidden, len(g.transient))

    @staticmethod
    def cycle_projection(nodes) -> list:
        """Box path of a refined-graph walk with context subscripts erased."""
        return [node[0] for node in nodes]


def _level(label, k, graph, n_forbidden, n_transient):
    return EntropyLevel(
        label=label, k=k,
        entropy=GraphService.graph_entropy(graph),
        perron=GraphService.perron_value(graph),
        n_forbidden=n_forbidden, n_transient=n_transient,
        n_vertices=graph.number_of_nodes(), n_edges=graph.number_of_edges(),
    )


def _region_task(args):
    spec, word = args
    return word.label, ConeService.returning_region(spec, word)


def _require_verified(trap):
    if not trap.verified:
        raise TrappingError(ERRORS["UNVERIFIED_TRAP"], {"escapes": list(trap.escapes)})


def _check_word(trap, word):
    labels = {c.label for c in trap.cycles}
    if not word or any(ch not in labels for ch in word):
        raise SpecError(f"{ERRORS['UNKNOWN_LABEL']}: {word!r}")


def _contains_any(word, extra):
    return any(x in word for x in extra)
