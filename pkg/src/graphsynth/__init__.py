"""Graphon-level predictive synthesis for random networks.

The package combines agent network models (ER, block, logistic dot-product,
product-weight, degree-histogram) into synthesized edge-probability
forecasts: closed-form entropic tilts and KL-optimal moment calibration at
enumeration scale, least-squares/ridge/simplex synthesis of dyad forecasts,
graphon functionals with Lipschitz error transfer, sparse-regime
phase-transition simulation, heavy-tail analysis, and a link-prediction
evaluation protocol with calibration diagnostics and paired effect sizes.
"""

from .graphons import (Block, Constant, DEFAULT_QUAD, FunctionalSet, Graphon,
                       GraphonError, LinearCombo, LipschitzBudget,
                       LogisticLowRank, ProductWeight, QuadratureSpec, StepMap,
                       as_block, common_refinement, functionals, gram_and_target,
                       grid_values, l2_distance, l2_inner, lipschitz_budget,
                       spectral_bracket, spectral_radius, uniform_step_map)
from .agents import (AgentError, CalibrationFailure, ChungLu, DegHist, ER,
                     ErgmSpec, GraphEnumeration, GraphPmf, InfeasibleTarget,
                     RDPG, SBM, TiltState, apply_tilt, calibrate_moment,
                     edge_prob_matrix, edge_tilt_weights, er_as_ergm,
                     ergm_stack_tilt, exact_enumeration_pmf, mixture_pmf,
                     stat_tilt_weights, statistic_matrix, tilt_er, tilt_rdpg,
                     tilt_sbm)
from .synthesis import (DyadData, SingularDesign, WeightVector, combo_graphon,
                        fit_ls, fit_ridge, fit_simplex, l2_risk,
                        population_projection, predict_clipped, project_simplex)
from .sampling import (GraphSample, PhaseCurve, giant_fraction, make_rng,
                       phase_sweep, sample_dyads, sample_graph,
                       sample_graph_from_prob_matrix, sample_sparse_graph,
                       split_rngs)
from .netstats import (DegreePmf, GraphStatistics, NetstatsError,
                       bounded_tilt_bracket, centralities,
                       degree_pmf_from_sample, fit_tail_exponent,
                       graph_statistics, hill_tail_exponent,
                       mixture_degree_pmf, polynomial_tilt_exponent_bracket,
                       power_law_pmf, tilt_degree_pmf, triangle_count,
                       verify_tail_bracket)
from .evaluation import (MetricReport, PairedGapReport, SplitError, SplitSpec,
                         audit_split, auc_score, average_precision, baselines,
                         cv_best_agent, fit_logistic_stack, make_split,
                         paired_gaps, score_metrics)
from .experiments import (ConfigError, ExperimentConfig, RunManifest,
                          StageFailure, agent_dyad_probs, config_hash,
                          default_generator, fit_agents_to_graph,
                          load_edge_list, run_experiment)
from .serialize import (SerializeError, agent_from_dict, agent_to_dict,
                        graphon_from_dict, graphon_to_dict, load_model,
                        save_model, write_edge_list)

__version__ = "0.1.0"
