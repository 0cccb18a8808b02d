"""Exact cell decomposition and quantifier elimination for weak p-adic structures."""

from .arith import INF, Ambient, Coset, RhoSum
from .cells import (
    Cell,
    CellSection,
    CosetCond,
    OrdLt,
    PolyConst,
    Precell,
    ShiftDiff,
    ShiftVar,
    cell_member,
    cell_section,
    classify_graph,
    poly_ord,
    precell_member,
    project_cell,
)
from .decompose import decompose_qf, intersect_cells
from .formula import (
    And,
    Const,
    D4,
    Exists,
    Forall,
    Not,
    Or,
    Rnm,
    Var,
    eval_qf,
    eval_quantified,
    free_vars,
    lower_shifts,
    nnf,
)
from .parser import parse, parse_box, print_formula
from .qe import SampleUniverse, Verdict, build_universe, eliminate_innermost, equiv_check, qe
from .subaffine import (
    BoxConst,
    BoxMinus,
    BoxPlus,
    BoxPlusGamma,
    BoxVar,
    Scale,
    check_function_form,
    decompose_s1,
    decompose_s2,
    distribute_scale,
    eval_box,
    normalize,
)

__version__ = "0.1.0"
