"""
Marshmallow schemas for glassbound documents.

The network schema loads the JSON network document (explicit truth table or
sum-of-products terms) into a NetworkSpec; the export schemas dump cones and
trapping reports with rationals written as "p/q" strings.
"""
import re
from fractions import Fraction

from marshmallow import Schema, fields, validate, validates_schema, post_load, ValidationError

from shared.constants import COMPLEMENT_SUFFIX, ERRORS
from shared.models import BoxLabel, NetworkSpec, TrapDefinition, format_edge, parse_edge
from shared.exceptions import SpecError
from shared import rational

_LITERAL_RE = re.compile(r"^Y(\d+)(" + re.escape(COMPLEMENT_SUFFIX) + r"?)$")


class RationalField(fields.Field):
    """Exact rational written as "p/q" or integer text."""

    def _serialize(self, value, attr, obj, **kwargs):
        if value is None:
            return None
        return rational.format_rational(value)

    def _deserialize(self, value, attr, data, **kwargs):
        try:
            return rational.parse_rational(value)
        except ValueError as e:
            raise ValidationError(str(e))


class ProductSchema(Schema):
    coeff = RationalField(required=True)
    literals = fields.List(fields.String(), required=True)


class VariableTermsSchema(Schema):
    offset = RationalField(load_default=Fraction(0))
    products = fields.List(fields.Nested(ProductSchema), load_default=list)


class TrapSchema(Schema):
    edge = fields.String(required=True)
    cycles = fields.Dict(keys=fields.String(validate=validate.Length(equal=1)),
                         values=fields.List(fields.String(), validate=validate.Length(min=1)),
                         required=True)


class NetworkDocumentSchema(Schema):
    """Network specification document."""
    n = fields.Integer(required=True, validate=validate.Range(min=1))
    decay = fields.List(RationalField(), data_key="lambda", required=True)
    gamma = fields.Dict(keys=fields.String(), values=fields.List(RationalField()))
    terms = fields.List(fields.Nested(VariableTermsSchema))
    name = fields.String()
    trap = fields.Nested(TrapSchema)

    @validates_schema
    def validate_document(self, data, **kwargs):
        n = data.get("n")
        if ("gamma" in data) == ("terms" in data):
            raise ValidationError("exactly one of 'gamma' or 'terms' is required")
        if n is None:
            return
        if len(data.get("decay", [])) != n:
            raise ValidationError(f"{ERRORS['DIMENSION_MISMATCH']}: lambda has {len(data.get('decay', []))} entries, n={n}")
        if any(d <= 0 for d in data.get("decay", [])):
            raise ValidationError(ERRORS["NONPOSITIVE_DECAY"])
        if "terms" in data and len(data["terms"]) != n:
            raise ValidationError(f"{ERRORS['DIMENSION_MISMATCH']}: terms has {len(data['terms'])} entries, n={n}")

    @post_load
    def make_spec(self, data, **kwargs):
        n = data["n"]
        try:
            if "gamma" in data:
                gamma = _table_from_rows(n, data["gamma"])
            else:
                gamma = _table_from_terms(n, data["terms"])
            trap = _trap_from_block(n, data["trap"]) if "trap" in data else None
        except SpecError as e:
            raise ValidationError(e.message)
        return NetworkSpec(n=n, decay=tuple(data["decay"]), gamma=gamma,
                           name=data.get("name"), trap=trap)


def _table_from_rows(n, rows):
    table = [None] * (2 ** n)
    for key, values in rows.items():
        box = BoxLabel.from_string(key, n)
        if len(values) != n:
            raise SpecError(f"{ERRORS['DIMENSION_MISMATCH']}: row {key} has {len(values)} entries")
        table[box.index] = tuple(values)
    missing = [str(BoxLabel.from_index(i, n)) for i, row in enumerate(table) if row is None]
    if missing:
        raise SpecError(f"{ERRORS['INCOMPLETE_TABLE']}: missing {', '.join(missing)}")
    return tuple(table)


def _parse_literal(text, n):
    match = _LITERAL_RE.match(text.strip())
    if not match:
        raise SpecError(f"malformed literal: {text!r}")
    index = int(match.group(1))
    if not 1 <= index <= n:
        raise SpecError(f"{ERRORS['DIMENSION_MISMATCH']}: literal {text!r} in a {n}-variable network")
    return index - 1, bool(match.group(2))


def _table_from_terms(n, terms):
    """Expand signed sum-of-products production terms into a truth table."""
    parsed = []
    for var in terms:
        products = [(p["coeff"], [_parse_literal(lit, n) for lit in p["literals"]]) for p in var["products"]]
        parsed.append((var["offset"], products))
    table = []
    for index in range(2 ** n):
        box = BoxLabel.from_index(index, n)
        row = []
        for offset, products in parsed:
            value = offset
            for coeff, literals in products:
                if all(box.bits[i] != complemented for i, complemented in literals):
                    value += coeff
            row.append(value)
        table.append(tuple(row))
    return tuple(table)


def _trap_from_block(n, block):
    edge = parse_edge(block["edge"], n)
    cycles = tuple((label, tuple(BoxLabel.from_string(b, n) for b in boxes))
                   for label, boxes in sorted(block["cycles"].items()))
    return TrapDefinition(edge=edge, cycles=cycles)


def dump_network(spec: NetworkSpec) -> dict:
    """Plain-data form of a spec with an explicit truth table."""
    data = {
        "n": spec.n,
        "decay": list(spec.decay),
        "gamma": {str(a): list(spec.gamma[a.index]) for a in spec.boxes()},
    }
    if spec.name is not None:
        data["name"] = spec.name
    if spec.trap is not None:
        data["trap"] = {
            "edge": format_edge(spec.trap.edge),
            "cycles": {label: [str(b) for b in boxes] for label, boxes in spec.trap.cycles},
        }
    return NetworkDocumentSchema().dump(data)


class ConeSchema(Schema):
    wall = fields.Method("get_wall")
    wall_pattern = fields.Method("get_pattern")
    ineqs = fields.List(fields.List(RationalField()))
    rays = fields.List(fields.List(RationalField()))

    def get_wall(self, cone):
        return str(cone.wall)

    def get_pattern(self, cone):
        return cone.wall.label()


class CycleWordSchema(Schema):
    label = fields.String()
    length = fields.Integer()
    boxes = fields.Method("get_boxes")

    def get_boxes(self, word):
        return [str(b) for b in word.boxes]


class TrappingReportSchema(Schema):
    starting_edge = fields.Method("get_edge")
    verified = fields.Boolean()
    cycles = fields.List(fields.Nested(CycleWordSchema))
    empty = fields.Method("get_empty")
    transient = fields.Method("get_transient")
    escapes = fields.List(fields.String())
    cones = fields.Dict(keys=fields.String(), values=fields.Nested(ConeSchema))
    witnesses = fields.Dict(keys=fields.String(), values=fields.Nested(ConeSchema))

    def get_edge(self, report):
        return format_edge(report.starting_edge)

    def get_empty(self, report):
        return [c.label for c in report.empty]

    def get_transient(self, report):
        return [c.label for c in report.transient]
