"""Well-ordered chains of uniform Borel subsets of R x Q, computed exactly."""

from .ordinal import (
    OMEGA, ONE, ZERO, ChainPosition, LengthAudit, Ordinal, add, compare, enumerate_below,
    format_ordinal, interleaved_length, left_subtract, normalize, ordinal, parse_ordinal,
)
from .qreal import (
    ALL_RATIONALS, EMPTY_SET, BinaryExpansion, SymbolicReal, canonical_wo_set, decode_sieve,
    encode_real, format_rat, index_of, initial_segment, parse_real, rat, rat_of_index,
)
from .borelcode import (
    BorelMultiCode, Family, Leaf, Ref, Union, deserialize, eval_code, eval_multicode, rank,
    serialize,
)
from .chains import (
    DIRECT, INTERLEAVED, Chain, UniformSet, below, below_via_middle, build_D, build_U,
    build_chain, derived_E, h_inv, h_map, restrict_to_D, section_value, shift_between,
)
from .verify import ProbePlan, decompose_layers, default_plan, verify_chain

__version__ = "0.1.0"
