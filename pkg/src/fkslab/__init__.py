"""fkslab: Monte Carlo and exact-enumeration lab for the ferromagnetic
Ising model and its random-cluster representation on boxes and slab graphs."""

from .lattice import (LatticeGraph, build_cubic_box, build_slab,
                      build_slab_region, neighbors, column_index,
                      GraphBuildError, GraphTooLargeError)
from .clusters import (ClusterLabeling, label_open_clusters,
                       label_sign_clusters, bfs_open_clusters,
                       bfs_sign_clusters, connected, origin_touches_boundary,
                       connected_without_edge, same_partition)
from .sampler import (ModelParams, CouplingState, Schedule, p_from_beta,
                      initial_state, bond_update_given_spins,
                      spin_update_given_bonds, sw_sweep, fk_heatbath_edge,
                      fk_heatbath_sweep, glauber_spin_site, glauber_sweep,
                      run_chain, run_chain_table, run_glauber_table,
                      check_es_constraint, ChainError)
from .observables import (magnetization_indicator, fk_origin_spans,
                          plus_cluster_spans, column_majority_sign,
                          column_percolation_spans, event_a, e_class,
                          c_y_plus_indicator)
from .exact import (onsager_magnetization, onsager_magnetization_x,
                    low_temp_predictions, theorem_gap_bound,
                    enumerate_gibbs, enumerate_fk, fk_census,
                    fk_span_probability, verify_coupling_identities,
                    verify_eq4_conditionals, verify_impl_npiani,
                    verify_rotation_invariance, ExactDistribution,
                    EnumerationBudgetError)
from .stats import Estimate, accumulate, merge, merge_all, inequality_verdict
from .config import parse_config, parse_config_file, ExperimentConfig, ConfigError
from .experiments import run_experiment, run_exact_checks

__version__ = "0.1.0"
