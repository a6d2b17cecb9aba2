"""Decision procedures used by the cover engines."""
from .cc import EGraph, SatVerdict, cc_sat
from .entail import entails, equivalent, is_sat, normalize_literal, sat_cnf, simplify_formula
from .lra import LinAtom, fm_eliminate, fm_project, lra_entails, lra_model, lra_sat
from .nelson_oppen import nelson_oppen_sat

__all__ = [
    "EGraph", "SatVerdict", "cc_sat", "entails", "equivalent", "is_sat", "normalize_literal",
    "sat_cnf", "simplify_formula", "LinAtom", "fm_eliminate", "fm_project", "lra_entails",
    "lra_model", "lra_sat", "nelson_oppen_sat",
]
