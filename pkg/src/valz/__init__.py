"""valz: decision procedures for the integers with a chain valuation."""

from .ambient import AmbientGroup, FiniteQuotient, Z, pi_index, quotient_mod
from .arith import FactoredInt, ext_gcd, factorize, padic_val, pi_split
from .chain import (
    NEG_INF,
    POS_INF,
    ValuationChain,
    Value,
    build_sigma_chain,
    cyclic,
    distality_report,
    div_pred,
    fin,
    ind_pred,
    padic,
    w_compare,
)
from .congruence import collapse, count_system, reduce_fixed_modulus, rescale, solve_single, witness
from .errors import (
    DepthExceeded,
    DomainError,
    OracleMismatch,
    ParseError,
    PreconditionError,
    ResourceLimit,
    SortError,
    UnsupportedFragment,
    UsageError,
    ValzError,
)
from .formula import decide, eliminate_group_quantifier, find_witness, multi_decide, normalize_exists, to_dnf
from .logic import evaluate_qf, parse, to_text
from .system import Congruence, CongruenceSystem, SolutionCount

__version__ = "0.1.0"
