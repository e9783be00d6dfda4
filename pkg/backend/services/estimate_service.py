"""
Estimate service for block counting, growth curves and entropy slope fits.

Blocks are contiguous windows of the box-symbol sequence a simulated
trajectory traverses. Counts over many block lengths come from rank
refinement: the rank of a length-(m+1) window is the rank of the pair
(rank of its length-m prefix, its last symbol).
"""
import hashlib
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from shared.config import config
from shared.constants import ERRORS
from shared.exceptions import EstimateError, SegmentationError
from shared.models import BoxLabel, FitResult, NetworkSpec, Trajectory, TrappingReport, WallPoint
from backend.services.dynamics_service import DynamicsService

logger = logging.getLogger('glassbound.estimate')

# windows hashed per numpy batch when feeding a counter
_BATCH = 100000
_DIGEST_SIZE = 16


class BlockCounter:
    """Distinct length-n windows of one or more symbol streams.

    Windows are kept verbatim until EXACT_WINDOW_LIMIT windows have been fed;
    later windows are stored as 128-bit blake2b digests. A new digest copies
    its window into a compact block, and a digest hit is confirmed against
    that copy. Only the trailing n-1 symbols of a chunk outlive feed().
    Consecutive feed() calls continue one stream; new_stream() starts another.
    """

    def __init__(self, n: int, exact_limit: Optional[int] = None):
        if n < 1:
            raise EstimateError("block length must be at least 1")
        self.n = n
        self.exact_limit = config.EXACT_WINDOW_LIMIT if exact_limit is None else exact_limit
        self.windows_seen = 0
        self._exact = set()
        self._digests: Dict[bytes, Tuple[int, int]] = {}
        self._collisions = set()
        self._blocks: List[np.ndarray] = []
        self._pending: List[np.ndarray] = []
        self._tail = np.zeros(0, dtype=np.int64)

    @property
    def distinct(self) -> int:
        return len(self._exact) + len(self._digests) + len(self._collisions)

    @property
    def hashed(self) -> bool:
        return bool(self._digests)

    @property
    def retained_symbols(self) -> int:
        """Symbols held for digest verification plus the carried tail."""
        held = sum(b.size for b in self._blocks) + sum(w.size for w in self._pending)
        return held + len(self._tail)

    def new_stream(self):
        """Forget the carried tail so windows never span two streams."""
        self._tail = np.zeros(0, dtype=np.int64)

    def feed(self, symbols) -> int:
        """Add the windows of the next chunk of the current stream; returns distinct."""
        chunk = np.concatenate([self._tail, _as_array(symbols)])
        n = self.n
        if len(chunk) >= n:
            windows = sliding_window_view(chunk, n)
            for lo in range(0, len(windows), _BATCH):
                batch = np.ascontiguousarray(windows[lo:lo + _BATCH])
                packed = batch.view(np.dtype((np.void, batch.dtype.itemsize * n))).ravel()
                _, first = np.unique(packed, return_index=True)
                for i in np.sort(first):
                    self._add(batch[i].tobytes(), batch[i])
                self.windows_seen += len(batch)
            self._flush()
        # a copy, so the chunk itself can be released
        self._tail = chunk[len(chunk) - min(len(chunk), n - 1):].copy()
        return self.distinct

    def merge(self, other: "BlockCounter") -> "BlockCounter":
        """Union of another counter's windows into this one."""
        if other.n != self.n:
            raise EstimateError(f"cannot merge block counters for n={self.n} and n={other.n}")
        for key in other.windows():
            self._add(key, np.frombuffer(key, dtype=np.int64))
        self._flush()
        self.windows_seen += other.windows_seen
        return self

    def windows(self) -> Iterable[bytes]:
        """Raw window contents (int64 bytes)."""
        yield from self._exact
        for ref in self._digests.values():
            yield self._held(ref)
        yield from self._collisions

    def _add(self, key: bytes, window: np.ndarray):
        if key in self._exact:
            return
        if self.windows_seen < self.exact_limit and not self._digests:
            self._exact.add(key)
            return
        digest = hashlib.blake2b(key, digest_size=_DIGEST_SIZE).digest()
        ref = self._digests.get(digest)
        if ref is None:
            self._digests[digest] = (len(self._blocks), len(self._pending))
            self._pending.append(np.array(window, dtype=np.int64))
            return
        if self._held(ref) != key:
            if key not in self._collisions:
                logger.warning(f"blake2b digest collision on a length-{self.n} window")
            self._collisions.add(key)

    def _held(self, ref: Tuple[int, int]) -> bytes:
        block, row = ref
        if block == len(self._blocks):
            return self._pending[row].tobytes()
        return self._blocks[block][row].tobytes()

    def _flush(self):
        if self._pending:
            self._blocks.append(np.stack(self._pending))
            self._pending = []


class EstimateService:
    """Service for numerical entropy estimates from simulated trajectories."""

    @staticmethod
    def count_blocks(seq, n: int) -> int:
        """
        Number of distinct contiguous length-n windows of a symbol sequence.

        Args:
            seq: Trajectory, integer array, or sequence of hashable symbols
            n: Block length, 1 <= n <= len(seq)

        Returns:
            Exact distinct-window count
        """
        return EstimateService.count_block_range([seq], [n])[n]

    @staticmethod
    def count_block_range(seqs: Sequence, ns: Iterable[int]) -> Dict[int, int]:
        """
        Distinct-window counts for several block lengths over several sequences.

        Windows never straddle two sequences.

        Args:
            seqs: Symbol sequences sharing one alphabet
            ns: Block lengths

        Returns:
            Dict mapping each n to its count
        """
        ns = sorted(set(int(n) for n in ns))
        if not ns:
            return {}
        if ns[0] < 1:
            raise EstimateError("block length must be at least 1")
        arrays = _encode(seqs)
        longest = max((len(a) for a in arrays), default=0)
        if ns[-1] > longest:
            raise EstimateError(f"{ERRORS['BLOCK_TOO_LONG']}: n={ns[-1]}, length {longest}")

        sentinel = int(max(int(a.max()) for a in arrays if len(a)) + 1)
        pieces = []
        for a in arrays:
            pieces.append(a)
            pieces.append(np.array([sentinel], dtype=np.int64))
        joined = np.concatenate(pieces)
        L = len(joined)
        breaks = np.concatenate([[0], np.cumsum(joined == sentinel)])

        wanted = set(ns)
        counts = {}
        rank = joined
        for m in range(1, ns[-1] + 1):
            if m > 1:
                keys = rank[:-1] * (sentinel + 1) + joined[m - 1:]
                _, rank = np.unique(keys, return_inverse=True)
                rank = rank.reshape(-1).astype(np.int64)
            if m in wanted:
                clean = breaks[m:m + len(rank)] - breaks[:len(rank)] == 0
                counts[m] = int(len(np.unique(rank[clean])))
        logger.debug(f"Counted blocks for n in [{ns[0]}, {ns[-1]}] over {L - len(arrays)} symbols")
        return counts

    @staticmethod
    def sample_trajectory(spec: NetworkSpec, start, steps: int, seed=None,
                          discard: Optional[int] = None, exact=False) -> Trajectory:
        """
        Simulate after dropping a transient prefix.

        Args:
            spec: Network specification
            start: WallPoint, or cones to sample a start from
            steps: Transitions kept
            seed: Seed for start sampling
            discard: Transitions dropped first (default TRANSIENT_DISCARD)

        Returns:
            Trajectory of the kept transitions
        """
        discard = config.TRANSIENT_DISCARD if discard is None else discard
        if not isinstance(start, WallPoint):
            start = DynamicsService.sample_start(spec, start, seed)
        if discard > 0:
            prefix = DynamicsService.simulate(spec, start, discard, exact=exact)
            if prefix.terminal:
                return prefix
            start = prefix.end
        return DynamicsService.simulate(spec, start, steps, exact=exact)

    @staticmethod
    def growth_curve(spec: NetworkSpec, start, n: int, checkpoints: Sequence[int], seed=None,
                     discard: Optional[int] = None) -> List[Tuple[int, int]]:
        """
        Distinct length-n blocks against the number of transitions.

        Args:
            spec: Network specification
            start: WallPoint, or cones to sample a start from
            n: Block length
            checkpoints: Increasing transition counts
            seed: Seed for start sampling
            discard: Transient prefix dropped before counting

        Returns:
            (steps, distinct count) per checkpoint
        """
        checkpoints = [int(c) for c in checkpoints]
        if any(c < 0 for c in checkpoints) or any(b <= a for a, b in zip(checkpoints, checkpoints[1:])):
            raise EstimateError("checkpoints must be nonnegative and increasing")
        counter = BlockCounter(n)
        curve = []
        if not checkpoints or checkpoints[-1] == 0:
            return [(c, 0) for c in checkpoints]

        discard = config.TRANSIENT_DISCARD if discard is None else discard
        if not isinstance(start, WallPoint):
            start = DynamicsService.sample_start(spec, start, seed)
        point, finished = start, False
        if discard > 0:
            prefix = DynamicsService.simulate(spec, point, discard)
            point, finished = prefix.end, prefix.terminal

        done = 0
        for c in checkpoints:
            if c > done and not finished:
                chunk = DynamicsService.simulate(spec, point, c - done)
                counter.feed(chunk.symbols)
                point, finished = chunk.end, chunk.terminal
                done = c
            curve.append((c, counter.distinct))
        logger.info(f"Growth curve for n={n}: {counter.distinct} blocks after {done} transitions")
        return curve

    @staticmethod
    def default_fit_range(n_max: int) -> Tuple[int, int]:
        """Tail range [ceil(FIT_TAIL_FRACTION * n_max), n_max]."""
        return max(1, math.ceil(config.FIT_TAIL_FRACTION * n_max)), n_max

    @staticmethod
    def fit_entropy(counts, n_range: Optional[Tuple[int, int]] = None) -> FitResult:
        """
        Least-squares slope of log2(count) against block length.

        Args:
            counts: (n, count) pairs or a dict n -> count
            n_range: Inclusive block-length range; defaults to the tail range

        Returns:
            FitResult whose slope is the entropy estimate in bits per symbol
        """
        points = sorted(dict(counts).items())
        if not points:
            raise EstimateError(ERRORS["DEGENERATE_FIT"])
        if n_range is None:
            n_range = EstimateService.default_fit_range(points[-1][0])
        lo, hi = n_range
        selected = [(n, c) for n, c in points if lo <= n <= hi]
        if len(selected) < 2:
            raise EstimateError(f"{ERRORS['DEGENERATE_FIT']}: [{lo}, {hi}]")
        if any(c < 1 for _, c in selected):
            raise EstimateError("block counts must be at least 1")
        x = np.array([n for n, _ in selected], dtype=float)
        y = np.log2(np.array([c for _, c in selected], dtype=float))
        slope, intercept = np.polyfit(x, y, 1)
        residual = float(np.sum((np.polyval([slope, intercept], x) - y) ** 2))
        return FitResult(float(slope), float(intercept), (int(lo), int(hi)), residual)

    @staticmethod
    def cycle_sequence(seq, trap: TrappingReport, starts_on_wall=False) -> List[str]:
        """
        Parse a box sequence into cycle labels.

        Segments begin where the sequence crosses the starting edge. The part
        before the first crossing and the unfinished part after the last are
        dropped.

        Args:
            seq: Box sequence (Trajectory, index array, BoxLabels or bitstrings)
            trap: Trapping report naming the cycle set
            starts_on_wall: Treat position 0 as a crossing when it holds t(e1)

        Returns:
            Cycle labels in order
        """
        u, v = trap.starting_edge
        s = _box_indices(seq, u.n)
        if len(s) == 0:
            return []
        anchors = list(np.flatnonzero((s[:-1] == u.index) & (s[1:] == v.index)) + 1)
        if starts_on_wall and s[0] == v.index:
            anchors.insert(0, 0)
        lookup = {tuple(b.index for b in c.boxes): c.label for c in trap.cycles}
        labels = []
        for a, b in zip(anchors, anchors[1:]):
            label = lookup.get(tuple(int(x) for x in s[a:b]))
            if label is None:
                raise SegmentationError(f"segment at position {a} is not a cycle of the trapping set",
                                        position=int(a))
            labels.append(label)
        return labels

    @staticmethod
    def observed_words(seq, trap: TrappingReport, k: int, starts_on_wall=False) -> set:
        """
        Length-k cycle words occurring in a simulated box sequence.

        Args:
            seq: Box sequence generated from the trapping region
            trap: Trapping report naming the cycle set
            k: Word length in cycles

        Returns:
            Set of words as label strings
        """
        if k < 1:
            raise EstimateError("word length must be at least 1")
        labels = EstimateService.cycle_sequence(seq, trap, starts_on_wall)
        return {"".join(labels[i:i + k]) for i in range(len(labels) - k + 1)}

    @staticmethod
    def multi_trajectory_counts(spec: NetworkSpec, cones, steps: int, seeds: Sequence[int],
                                ns: Iterable[int], threads: int = 1,
                                discard: Optional[int] = None) -> Dict[int, int]:
        """
        Block counts pooled over independent trajectories, one per seed.

        Args:
            spec: Network specification
            cones: Cones the start points are sampled from
            steps: Transitions kept per trajectory
            seeds: One seed per trajectory
            ns: Block lengths
            threads: Worker processes

        Returns:
            Dict n -> distinct windows over all trajectories
        """
        tasks = [(spec, list(cones), steps, seed, discard) for seed in seeds]
        if threads > 1 and len(tasks) > 1:
            with ProcessPoolExecutor(max_workers=threads) as pool:
                sequences = list(pool.map(_trajectory_task, tasks))
        else:
            sequences = [_trajectory_task(t) for t in tasks]
        return EstimateService.count_block_range(sequences, ns)


def _trajectory_task(args):
    spec, cones, steps, seed, discard = args
    return EstimateService.sample_trajectory(spec, cones, steps, seed, discard).symbols


def _as_array(symbols) -> np.ndarray:
    if isinstance(symbols, Trajectory):
        symbols = symbols.symbols
    return np.asarray(symbols, dtype=np.int64)


def _encode(seqs) -> List[np.ndarray]:
    """Integer arrays for sequences over a common alphabet."""
    codes = {}
    arrays = []
    for seq in seqs:
        if isinstance(seq, Trajectory):
            arrays.append(seq.symbols.astype(np.int64))
        elif isinstance(seq, np.ndarray) and np.issubdtype(seq.dtype, np.integer):
            arrays.append(seq.astype(np.int64))
        else:
            arrays.append(np.array([codes.setdefault(x, len(codes)) for x in seq], dtype=np.int64))
    return arrays


def _box_indices(seq, n) -> np.ndarray:
    if isinstance(seq, Trajectory):
        return seq.symbols.astype(np.int64)
    if isinstance(seq, np.ndarray):
        return seq.astype(np.int64)
    out = []
    for x in seq:
        if isinstance(x, BoxLabel):
            out.append(x.index)
        elif isinstance(x, str):
            out.append(BoxLabel.from_string(x, n).index)
        else:
            out.append(int(x))
    return np.array(out, dtype=np.int64)
