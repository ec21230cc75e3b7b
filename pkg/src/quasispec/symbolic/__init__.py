"""Symbol sequences: substitutions, Sturmian words, factor statistics, partitions."""

from .contfrac import (
    GOLDEN,
    SILVER,
    ContinuedFraction,
    PeriodicQuotients,
    QuadraticNumber,
    continued_fraction,
    parse_alpha,
    quadratic_irrational,
)
from .factors import (
    FactorIndex,
    complexity,
    factor_set,
    find_palindromes,
    find_powers,
    frequency,
    occurrences,
)
from .partition import LONG, SHORT, PartitionView, Run, n_partition
from .sturmian import (
    check_block_identity,
    circle_map_word,
    kaminaga_condition,
    sturmian_block,
    sturmian_blocks,
    sturmian_prefix,
)
from .words import (
    BUILTIN_RULES,
    Alphabet,
    SubstitutionRule,
    apply_substitution,
    fixed_point_prefix,
)
