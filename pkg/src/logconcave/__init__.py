"""Exact and certified numerical verification of log-concavity for ensembles of
random partitions, discrete and continuous Coulomb gases, Schur measures,
last-passage percolation and the Tracy-Widom law."""
from ._errors import DomainError, ResourceError, SolverError
from .discrete_gas import (Charlier, CustomInteraction, CustomWeights, EnsembleSpec,
                           GeometricPower, Hahn, Krawtchouk, Meixner, Power, QTheta,
                           all_marginals, build_proof_functions, discrete_beta_lambda1_pmf,
                           ensemble_weight, hks_verify, marginal_pmf,
                           poisson_concentration_check, qtheta)
from .lpp import LppSpec, SampleBatch, exact_g2_pmf_small, meixner_crosscheck, sample_passage
from .partitions import (Partition, dim_syt, enumerate_partitions, hook_lengths, lis_counts,
                         partition_count, schur_eval, ssyt_count, word_lis_counts)
from .plancherel import (MixtureSpec, chen_check, gamma_lambda1_pmf, limiting_ratio_check,
                         mixture_lambda_pmf, nu_mixture, plancherel_lambda_pmf,
                         poissonization_condition, poissonize, rho_check, word_chen_check)
from .pmf import (LogConcavityReport, Pmf, check_logconcave, check_ultra_logconcave,
                  total_variation)
from .schur import Specialization, okounkov_check, schur_marginal_pmf

__version__ = "0.1.0"
