"""Abelian sandpile and rotor-router models on finite directed multigraphs."""

from .graph import (
    Digraph,
    GraphError,
    bidirected,
    build_digraph,
    complete,
    directed_cycle,
    directed_torus,
    disk_wired,
    generate,
    grid_wired,
    laplacian,
    parse_graph,
    reduced_laplacian,
    serialize_graph,
)
from .intalg import GroupStructure, determinant, effective_resistance, smith_normal_form
from .sandpile import (
    Nonterminating,
    NotRecurrentError,
    chip_add,
    group_order,
    group_structure,
    identity,
    inverse,
    is_recurrent,
    is_superstable,
    recurrent_configs,
    stabilize,
    superstabilize,
)
from .rotor import SingleChipState, action, is_unicycle, route_chip, rotor_step, tree_action_solve
from .stacks import StackConfig, pop_to_acyclic, stack_chip_add, stack_chip_add_inverse
from .aggregate import aggregate

__version__ = "0.1.0"
