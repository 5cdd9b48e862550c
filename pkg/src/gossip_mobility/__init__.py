"""Version age of information in gossip networks whose nodes swap positions.

Three independent engines: an exact set-age solver, closed forms and upper
bounds for the symmetric families, and an event-driven simulator. The
:mod:`gossip_mobility.harness` subpackage sweeps them side by side.
"""
from ._backend import backend_name
from .bounds import (
    BoundCurve,
    ToyAges,
    bound_curve,
    disconnected_bound_recursion,
    disconnected_constant_bound,
    disconnected_scaling_bound,
    fc_single_bound_recursion,
    fc_single_log_bound,
    no_mobility_reference,
    toy_ages,
)
from .errors import *  # noqa: F401,F403
from .exact import AgeTable, mean_node_age, solve_all, solve_level
from .network import (
    NetworkSpec,
    ValidatedNetwork,
    gossip_rate_into,
    mobility_exits,
    neighbors_of,
    set_mask,
    source_rate_into,
    validate,
)
from .scenarios import (
    build,
    disconnected_pairs,
    fc_plus_single,
    fully_connected,
    toy_network,
    toy_variant_12,
    toy_variant_13,
)
from .simulate import SimConfig, SimEstimate, apply_event, event_sampler, simulate

__version__ = "0.1.0"
