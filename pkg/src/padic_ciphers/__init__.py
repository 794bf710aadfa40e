"""Finite-precision p-adic arithmetic, 1-Lipschitz transducers, and
homomorphic digit ciphers over Z_p."""

from .core import (
    PadicContext,
    PadicInt,
    PadicError,
    construct,
    from_text,
    to_text,
    truncate,
    valuation,
    unit_decompose,
    invert_unit,
    pow_nat,
    pow_unit,
    teichmuller,
    exp_p,
    ln_p,
    xor_p,
    and_p,
)
from .lipschitz import (
    ValueTable,
    VdpSeries,
    CoordRep,
    vdp_eval,
    vdp_interpolate,
    check_one_lipschitz,
    check_measure_bruteforce,
    check_measure_vdp,
    check_measure_coord,
    random_one_lipschitz_table,
)
from .automaton import (
    MealyMachine,
    transduce,
    unroll_from_function,
    function_of_automaton,
    check_induced_bijections,
)
from .ciphers import (
    AdditiveKey,
    MultiplicativeKey,
    XorKey,
    AndKey,
    FheKey,
    LinearG,
    G1,
    G2,
    G3,
    G4,
    SeriesG,
    g_eval,
    exponent_gcd,
    admissible_multipliers,
    roots_of_unity,
    keygen,
    encrypt,
    decrypt,
    encryption_table,
    key_to_json,
    key_from_json,
)
from .analysis import (
    OpSymbol,
    ADD,
    MUL,
    XOR,
    AND,
    g_sym,
    SearchReport,
    homomorphism_test,
    counterexample_search,
    intersection_scan,
    vdp_coefficient_probe,
)
from .formula import (
    parse,
    to_text as formula_to_text,
    evaluate,
    compatibility_check,
    encrypted_eval_demo,
    DEMO_FORMULA,
)

__all__ = [
    "PadicContext",
    "PadicInt",
    "PadicError",
    "construct",
    "from_text",
    "to_text",
    "truncate",
    "valuation",
    "unit_decompose",
    "invert_unit",
    "pow_nat",
    "pow_unit",
    "teichmuller",
    "exp_p",
    "ln_p",
    "xor_p",
    "and_p",
    "ValueTable",
    "VdpSeries",
    "CoordRep",
    "vdp_eval",
    "vdp_interpolate",
    "check_one_lipschitz",
    "check_measure_bruteforce",
    "check_measure_vdp",
    "check_measure_coord",
    "random_one_lipschitz_table",
    "MealyMachine",
    "transduce",
    "unroll_from_function",
    "function_of_automaton",
    "check_induced_bijections",
    "AdditiveKey",
    "MultiplicativeKey",
    "XorKey",
    "AndKey",
    "FheKey",
    "LinearG",
    "G1",
    "G2",
    "G3",
    "G4",
    "SeriesG",
    "g_eval",
    "exponent_gcd",
    "admissible_multipliers",
    "roots_of_unity",
    "keygen",
    "encrypt",
    "decrypt",
    "encryption_table",
    "key_to_json",
    "key_from_json",
    "OpSymbol",
    "ADD",
    "MUL",
    "XOR",
    "AND",
    "g_sym",
    "SearchReport",
    "homomorphism_test",
    "counterexample_search",
    "intersection_scan",
    "vdp_coefficient_probe",
    "parse",
    "formula_to_text",
    "evaluate",
    "compatibility_check",
    "encrypted_eval_demo",
    "DEMO_FORMULA",
]
