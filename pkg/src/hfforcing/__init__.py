"""Forcing over finite fragments of the hereditarily finite universe.

A small, executable model of forcing: HF sets, de Bruijn formulas and their
satisfaction, posets and generic filters, names and generic extensions, the
forcing relation with its syntactic transform, and a brute-force harness
that checks it against the semantic definition.
"""

from .hfset import (EMPTY, HfSet, HfSyntaxError, format_hf, format_hf_list, make_set, opair,
                    ordinal, pair, parse_hf, parse_hf_list, rank, vset)
from .formula import (Equal, ForcesEq, ForcesMem, Forall, Formula, FormulaSyntaxError, Member,
                      Nand, Satisfier, arity, depth, parse, rename, sats, to_sexpr, zf_axiom)
from .posets import (DensityBoundExceeded, FinitePoset, PosetError, chain_poset, cohen_poset,
                     rsl_filter, trivial_poset, v_poset)
from .names import ForcingContext, check, gdot, name_closure, val
from .forces import MUTANTS, forces_eq, forces_holds, forces_mem, forces_transform
from .harness import (Report, context_from_spec, make_battery, mt_forces, run_suites,
                      shipped_context)

__version__ = "0.1.0"
