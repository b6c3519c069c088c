"""Continuum ensembles: Airy and Painleve II, beta gases, bridges, parking, edge sampling."""
from .airy import airy_eval, airy_eval_mp, airy_leading
from .bridges import KMReport, km_bridge_logconcavity_check, km_log_density
from .gas import (ConvexityReport, Custom, GasConfig, Laguerre, Quadratic, SupermodularBatch,
                  SupermodularReport, gas_convexity_check, gas_supermodular_batch,
                  gas_supermodular_check, ldl_psd)
from .hermite import hermite_beta_edge_sample, kolmogorov_distance, top_eigenvalue
from .painleve import (PainleveGrid, TW2Report, hastings_mcleod_solve, tw2_distribution,
                       tw2_logconcavity_report)
from .parking import parking_displacement_counts, parking_displacement_pmf
