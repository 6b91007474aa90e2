"""Exact solvers for the valued authorization policy existence problem.

An instance asks for a complete assignment of users to resources minimizing
authorization cost plus weighted constraint penalties.  The package provides
a profile-space exact solver, a brute-force reference, workflow-style plan
solvers with reductions, a resilience encoder/checker, a seeded instance
generator and two MIP formulations with LP export.
"""

from .constraints import (
    Constraint,
    PenaltySpec,
    bod_e,
    bod_u,
    card_lb,
    card_ub,
    eval_profile,
    eval_relation,
    sod_e,
    sod_u,
    user_count,
    wbound_suggestion,
)
from .model import (
    AuthCost,
    AuthorizationRelation,
    GuardError,
    Instance,
    SolveResult,
    UserProfile,
    big_omega,
    canonical_json,
    dump_instance,
    instance_from_doc,
    instance_to_doc,
    load_instance,
    load_relation,
    omega,
    profile_of,
    relation_from_doc,
    relation_to_doc,
    subset_order,
    total_weight,
    validate_relation,
)
from .matching import assignment_cost, min_cost_assignment
from ._kernels import available_backends, default_backend_name, get_backend
from .solver_profile import (
    best_relation_for_profile,
    count_profiles,
    default_ell,
    enumerate_profiles,
    solve,
)
from .solver_brute import solve_exhaustive
from .wsp import (
    Plan,
    WspConstraint,
    WspInstance,
    disjoint,
    dump_wsp,
    lift_plan,
    load_wsp,
    must_differ,
    must_equal,
    reduce_bode_sodu,
    reduce_sodu_bodu,
    solve_wsp,
    wsp_from_doc,
    wsp_to_doc,
)
from .resiliency import check_tau_resilient, encode_resilient, wsp_from_encoded
from .generator import GeneratorConfig, SplitMix64, generate
from .mipgen import Formulation, build_naive, build_up, eval_at, export_lp, parse_lp

__version__ = "0.1.0"
