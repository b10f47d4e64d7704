"""Trace-driven sizing of hierarchical caches in cellular networks."""
from .cache import (ARCHITECTURES, Architecture, CachePlan, CacheWorthySet, PairPopularity,
                    achieved_hit_ratio, mark_cache_worthy, place_caches, tally_popularity)
from .demand import (DemandConfig, DeploymentStyle, Request, apply_locality, apply_recommendation,
                     assign_content_ids, generate_synthetic_scenario)
from .geo import great_circle_distance
from .metrics import (Scenario, SweepResult, emit_report, evaluate, mean_hit_distance, price_of_fog, read_report,
                      run_sweep)
from .records import (ContentCategory, MobilityClass, TraceRecord, classify_mobility, filter_vehicular,
                      map_app_to_category, parse_trace)
from .topology import (CellEstimate, Level, Topology, ancestor_at_level, build_tree, estimate_cells)

__version__ = "0.1.0"
