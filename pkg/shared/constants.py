"""
Shared constants for glassbound.

This module defines constants used throughout the library and CLI.
"""

# CLI exit codes
EXIT_OK = 0
EXIT_SPEC_INVALID = 2
EXIT_TRAP_UNVERIFIED = 3
EXIT_CONE_ERROR = 4
EXIT_SIMULATION_ABORT = 5
EXIT_ESTIMATE_ERROR = 6
EXIT_USAGE = 2

# Commands understood by the CLI
COMMANDS = ["validate", "tg", "cycles", "cones", "trap", "refine", "simulate", "blocks", "fit", "report"]

# Output formats
FORMATS = ["json", "csv", "dot", "bin"]

# Condition names used in validation reports
CONDITION_FOCAL = "focal_off_threshold"
CONDITION_WALLS = "transparent_walls"
CONDITION_UNIFORM_DECAY = "uniform_decay"

# Box-symbol bit characters
BIT_CHARS = ("0", "1")

# Literal suffix for a complemented Boolean variable in production terms
COMPLEMENT_SUFFIX = "'"

# Separator for starting edges on the command line, e.g. "1111>1110"
EDGE_SEPARATOR = ">"

# Labels assigned to enumerated cycles when the network document names none
CYCLE_LABELS = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz"

# Vertex word for the unrefined cycle-union graph
NO_CONTEXT = ""

# Error messages
ERRORS = {
    "INCOMPLETE_TABLE": "incomplete truth table",
    "BAD_BITSTRING": "malformed bitstring",
    "BAD_RATIONAL": "malformed rational",
    "DIMENSION_MISMATCH": "dimension mismatch",
    "NONPOSITIVE_DECAY": "decay rates must be positive",
    "NOT_AN_EXIT": "axis is not an exit direction of the box",
    "NOT_AN_EDGE": "path traverses a non-edge of the transition graph",
    "PATH_NOT_CLOSED": "path is not closed",
    "UNKNOWN_EDGE": "starting edge is not an edge of the transition graph",
    "UNEQUAL_DECAY": "cone computations require equal decay rates",
    "WALL_MISMATCH": "cones lie on different walls",
    "DENOMINATOR_SIGN": "map denominator is not positive on the cone",
    "UNVERIFIED_TRAP": "trapping region is not verified",
    "UNKNOWN_LABEL": "word references an unknown cycle label",
    "DEGENERATE_FIT": "fit needs at least two distinct block lengths in range",
    "BLOCK_TOO_LONG": "block length exceeds sequence length",
}
