"""
Services module for glassbound.
This module contains the services that implement the entropy-bound pipeline,
one class per stage, and exports their operations under plain names.
"""
from backend.services.network_service import NetworkService
from backend.services.dynamics_service import DynamicsService
from backend.services.graph_service import GraphService
from backend.services.cone_service import ConeService
from backend.services.refine_service import RefineService
from backend.services.estimate_service import BlockCounter, EstimateService

parse_network = NetworkService.parse_network
serialize_network = NetworkService.serialize_network
focal_point = NetworkService.focal_point
validate = NetworkService.validate
out_directions = NetworkService.out_directions

local_map = DynamicsService.local_map
compose = DynamicsService.compose
cycle_map = DynamicsService.cycle_map
exit_time = DynamicsService.exit_time
step = DynamicsService.step
simulate = DynamicsService.simulate

build_tg = GraphService.build_tg
graph_entropy = GraphService.graph_entropy
scc_decompose = GraphService.scc_decompose
enumerate_first_return_cycles = GraphService.enumerate_first_return_cycles

alt_exit_rows = ConeService.alt_exit_rows
reduce_rows = ConeService.reduce_rows
extremal_rays = ConeService.extremal_rays
is_empty = ConeService.is_empty
map_cone = ConeService.map_cone
returning_region = ConeService.returning_region
union_contains = ConeService.union_contains
verify_trapping = ConeService.verify_trapping
transient_words = ConeService.transient_words

build_tgr = RefineService.build_tgr
build_tgr_k = RefineService.build_tgr_k
entropy_sequence = RefineService.entropy_sequence
forbid_words = RefineService.forbid_words

count_blocks = EstimateService.count_blocks
growth_curve = EstimateService.growth_curve
fit_entropy = EstimateService.fit_entropy
observed_words = EstimateService.observed_words

__all__ = [
    'NetworkService', 'DynamicsService', 'GraphService', 'ConeService', 'RefineService',
    'EstimateService', 'BlockCounter',
    'parse_network', 'serialize_network', 'focal_point', 'validate', 'out_directions',
    'local_map', 'compose', 'cycle_map', 'exit_time', 'step', 'simulate',
    'build_tg', 'graph_entropy', 'scc_decompose', 'enumerate_first_return_cycles',
    'alt_exit_rows', 'reduce_rows', 'extremal_rays', 'is_empty', 'map_cone',
    'returning_region', 'union_contains', 'verify_trapping', 'transient_words',
    'build_tgr', 'build_tgr_k', 'entropy_sequence', 'forbid_words',
    'count_blocks', 'growth_curve', 'fit_entropy', 'observed_words',
]
