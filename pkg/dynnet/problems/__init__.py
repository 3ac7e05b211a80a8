from .base            import ProblemSpec
from .fitzhugh_nagumo import fn_rhs, make_fitzhugh_nagumo
from .lorenz          import lorenz_rhs, make_lorenz
from .heat            import heat_exact, heat_mol_rhs, make_heat, midpoint_index
from .reference       import reference_at, reference_solution

PROBLEMS = {
    'fitzhugh_nagumo' : make_fitzhugh_nagumo,
    'lorenz'          : make_lorenz,
    'heat'            : make_heat,
}

ALIASES = {
    'fn'              : 'fitzhugh_nagumo',
    'fitzhugh-nagumo' : 'fitzhugh_nagumo',
    'lorenz63'        : 'lorenz',
    'lorenz-63'       : 'lorenz',
}


def get_problem(name, **kwargs):
    key = ALIASES.get(str(name).lower(), str(name).lower())
    if key not in PROBLEMS:
        raise ValueError(f"unknown problem '{name}', expected one of {sorted(PROBLEMS)}")
    return PROBLEMS[key](**kwargs)
