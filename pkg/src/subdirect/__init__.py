"""Subgroups of direct products of free groups: fibre products, virtual
surjections, nilpotency witnesses, Sigma-based finiteness lengths and
homological finiteness propagation.

Factor indices in the Python API are 0-based; reports and the command line
number factors from 1.
"""

from .errors import (
    INFINITE,
    CapExceeded,
    InconsistencyError,
    ParseError,
    PreconditionError,
    SubdirectError,
    Unknown,
    UnsupportedError,
)
from .flags import FinitenessProfile, KnowledgeBase, Truth
from .homology import Presentation, coinvariants, h1, rs_presentation
from .intmat import smith_normal_form
from .product import (
    ProductSubgroup,
    abelian_kernel,
    decompose,
    exchange,
    fibre_product,
    kernel_vs_step,
    preimage_subgroup,
    split_section,
    virtually_surjects,
)
from .quotients import AbelianGroup, FiniteGroup, Nilpotent2Group, QuotientMap, lower_central_class
from .sigma import Character, KernelSpec, finiteness_length, s_gamma_p, sigma_member
from .stallings import SubgroupGraph, fold
from .witness import class_bound, commutator_witness, find_lift, partition_indices, stallings_bieri_form
from .words import FreeGroup, ProductGroup, Word, abelianize, commutator, iterated_commutator

__all__ = [
    "INFINITE",
    "AbelianGroup",
    "CapExceeded",
    "Character",
    "FiniteGroup",
    "FinitenessProfile",
    "FreeGroup",
    "InconsistencyError",
    "KernelSpec",
    "KnowledgeBase",
    "Nilpotent2Group",
    "ParseError",
    "Presentation",
    "PreconditionError",
    "ProductGroup",
    "ProductSubgroup",
    "QuotientMap",
    "SubdirectError",
    "SubgroupGraph",
    "Truth",
    "Unknown",
    "UnsupportedError",
    "Word",
    "abelian_kernel",
    "abelianize",
    "class_bound",
    "coinvariants",
    "commutator",
    "commutator_witness",
    "decompose",
    "exchange",
    "fibre_product",
    "find_lift",
    "finiteness_length",
    "fold",
    "h1",
    "iterated_commutator",
    "kernel_vs_step",
    "lower_central_class",
    "partition_indices",
    "preimage_subgroup",
    "rs_presentation",
    "s_gamma_p",
    "sigma_member",
    "smith_normal_form",
    "split_section",
    "stallings_bieri_form",
    "virtually_surjects",
]
