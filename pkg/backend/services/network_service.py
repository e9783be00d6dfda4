"""
Network service for parsing, serializing and validating Glass networks.
"""
import json
import logging

from marshmallow import ValidationError

from shared.constants import CONDITION_FOCAL, CONDITION_WALLS, CONDITION_UNIFORM_DECAY, ERRORS
from shared.exceptions import SpecError
from shared.models import BoxLabel, ConditionEntry, ConditionReport, FocalPoint, NetworkSpec
from shared.schemas import NetworkDocumentSchema, dump_network

logger = logging.getLogger('glassbound.netspec')


class NetworkService:
    """Service for network specification operations."""

    @staticmethod
    def parse_network(text) -> NetworkSpec:
        """
        Parse a network specification document.

        Args:
            text: JSON text, or an already-decoded dict

        Returns:
            NetworkSpec with the truth table fully populated

        Raises:
            SpecError: for malformed JSON or schema violations
        """
        if isinstance(text, (str, bytes)):
            try:
                data = json.loads(text)
            except json.JSONDecodeError as e:
                raise SpecError(f"network document is not valid JSON: {e}")
        else:
            data = text
        try:
            spec = NetworkDocumentSchema().load(data)
        except ValidationError as e:
            raise SpecError(_flatten_messages(e.messages), {"fields": e.messages})
        logger.debug(f"Parsed {spec.n}-variable network {spec.name or ''}".rstrip())
        return spec

    @staticmethod
    def load_network(path) -> NetworkSpec:
        """Read and parse a network document from disk."""
        try:
            with open(path, "r") as f:
                text = f.read()
        except OSError as e:
            raise SpecError(f"cannot read network document {path}: {e}")
        return NetworkService.parse_network(text)

    @staticmethod
    def serialize_network(spec: NetworkSpec) -> str:
        """Serialize a spec with its explicit truth table."""
        return json.dumps(dump_network(spec), sort_keys=True, indent=2)

    @staticmethod
    def box(spec: NetworkSpec, label) -> BoxLabel:
        """Coerce a bitstring or BoxLabel to a label valid for spec."""
        if isinstance(label, BoxLabel):
            if label.n != spec.n:
                raise SpecError(f"{ERRORS['DIMENSION_MISMATCH']}: box {label} in a {spec.n}-variable network")
            return label
        return BoxLabel.from_string(label, spec.n)

    @staticmethod
    def focal_point(spec: NetworkSpec, a) -> FocalPoint:
        """
        Focal point f(a) = Gamma(a) / lambda, componentwise and exact.

        Args:
            spec: Network specification
            a: Box label

        Returns:
            FocalPoint of the box
        """
        a = NetworkService.box(spec, a)
        return FocalPoint(tuple(g / d for g, d in zip(spec.production(a), spec.decay)))

    @staticmethod
    def out_directions(spec: NetworkSpec, a):
        """
        Exit directions of a box.

        Args:
            spec: Network specification
            a: Box label

        Returns:
            (upward axes, downward axes) as sorted tuples of 0-based indices
        """
        a = NetworkService.box(spec, a)
        f = NetworkService.focal_point(spec, a)
        plus = tuple(i for i in range(spec.n) if f[i] > 0 and a.bits[i] == 0)
        minus = tuple(i for i in range(spec.n) if f[i] < 0 and a.bits[i] == 1)
        return plus, minus

    @staticmethod
    def exits(spec: NetworkSpec, a):
        """All exit axes of a box, ascending."""
        plus, minus = NetworkService.out_directions(spec, a)
        return tuple(sorted(plus + minus))

    @staticmethod
    def is_terminal(spec: NetworkSpec, a) -> bool:
        return not NetworkService.exits(spec, a)

    @staticmethod
    def validate(spec: NetworkSpec) -> ConditionReport:
        """
        Check the focal-point and transparent-wall conditions.

        Failures are report entries, never exceptions. Uniform decay is
        reported as an informational entry since only the cone pipeline needs it.

        Args:
            spec: Parsed network specification

        Returns:
            ConditionReport with one entry per condition, or one per offender
        """
        entries = []

        zero_boxes = []
        for a in spec.boxes():
            coords = spec.production(a)
            zeros = [i + 1 for i, g in enumerate(coords) if g == 0]
            if zeros:
                zero_boxes.append((a, zeros))
        if zero_boxes:
            for a, zeros in zero_boxes:
                entries.append(ConditionEntry(CONDITION_FOCAL, False, str(a),
                                              f"focal coordinate(s) {zeros} on threshold"))
        else:
            entries.append(ConditionEntry(CONDITION_FOCAL, True))

        bad_walls = []
        for a in spec.boxes():
            for i in range(spec.n):
                if a.bits[i] == 1:
                    continue
                b = a.flip(i)
                verdict = _wall_flow(spec, a, b, i)
                if verdict is not None:
                    bad_walls.append((a, b, i, verdict))
        if bad_walls:
            for a, b, i, verdict in bad_walls:
                entries.append(ConditionEntry(CONDITION_WALLS, False, f"{a}|{b}",
                                              f"{verdict} wall at y{i + 1}=0"))
        else:
            entries.append(ConditionEntry(CONDITION_WALLS, True))

        entries.append(ConditionEntry(CONDITION_UNIFORM_DECAY, spec.uniform_decay, None,
                                      None if spec.uniform_decay else ERRORS["UNEQUAL_DECAY"]))

        report = ConditionReport(tuple(entries))
        for e in report.failures():
            logger.info(f"Condition {e.condition} fails at {e.offender}: {e.detail}")
        return report

    @staticmethod
    def require_valid(spec: NetworkSpec, uniform_decay=False):
        """Raise SpecError unless the spec passes validation."""
        report = NetworkService.validate(spec)
        if not report.ok:
            first = report.failures()[0]
            raise SpecError(f"network fails {first.condition} at {first.offender}: {first.detail}",
                            {"failures": [e.offender for e in report.failures()]})
        if uniform_decay and not spec.uniform_decay:
            raise SpecError(ERRORS["UNEQUAL_DECAY"])
        return report


def _wall_flow(spec, low, high, i):
    """Classify the wall between low (bit i = 0) and high (bit i = 1).

    The flow of y_i at the wall points along sign(f_i) on each side; the wall
    is transparent when both sides agree.

    Returns:
        None for a transparent wall, otherwise "black" or "white"
    """
    up_low = spec.production(low)[i] > 0
    up_high = spec.production(high)[i] > 0
    if up_low == up_high:
        return None
    return "black" if up_low else "white"


def _flatten_messages(messages, prefix=""):
    """Turn nested marshmallow error messages into one diagnostic line."""
    parts = []
    if isinstance(messages, dict):
        for key, value in messages.items():
            label = key if key != "_schema" else ""
            parts.append(_flatten_messages(value, f"{prefix}{label}: " if label else prefix))
    elif isinstance(messages, list):
        parts.extend(_flatten_messages(m, prefix) for m in messages)
    else:
        parts.append(f"{prefix}{messages}")
    return "; ".join(p for p in parts if p)
