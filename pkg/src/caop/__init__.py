"""Correlated arc orienteering toolkit: instances, correlation models, a
greedy constructive solver, a brute-force oracle, and MIQP export."""

from .correlation import (
    WeightModel,
    fov_weights,
    inverse_distance_weights,
    load_problem,
    neighbor_sets,
    weights_from_entries,
    weights_to_entries,
)
from .depots import kmedoids_depots, with_depots
from .distances import DistanceTable
from .exact import OracleLimits, min_route_cost_exact, solve_bruteforce
from .generators import gen_grid, gen_random_planar, gen_spiral
from .greedy import GreedyConfig, correlated_reward, evaluate_reward, solve_greedy, utilities
from .instance import (
    Edge,
    Instance,
    Robot,
    Vertex,
    add_direct_deadhead_edges,
    add_point_feature,
    instance_to_doc,
    load_instance,
    save_instance,
    validate_instance,
)
from .miqp import MIQPModel, build_miqp, export_miqp, parse_lp, write_lp
from .render import RenderSpec, render_svg
from .routing import (
    Route,
    ServiceArc,
    Solution,
    audit_solution,
    initial_route,
    insert_edge,
    route_cost,
    solution_from_doc,
    solution_to_doc,
)

__version__ = "0.1.0"
