"""Positivity-preserving extension of degree-2 pseudomoment matrices to
higher-degree pseudoexpectations over the hypercube, with the supporting
forest combinatorics, contractive graphical evaluation, multiharmonic
bases, incoherence diagnostics, and experiment harness."""

from .cgraph import (DegreeTwoInput, cgs, cgs_batch, cgs_tight, cgm_block,
                     delta, delta_batch, max_span, naive_cgs)
from .combinat import (MonomialIndex, Partition, double_factorial,
                       enumerate_partitions, enumerate_transport_plans,
                       mobius_even_bottom, mobius_partition, mobius_subset,
                       nu)
from .contract import BACKEND
from .diagram_algebra import (LabelledDiagram, direct_sum_decompose,
                              eval_generalized, factorize,
                              forest_to_diagram, norm_bound, pin_cut,
                              split_edge, split_intersection, tensorize)
from .extend import (CertificationReport, ConstructionError,
                     Pseudoexpectation, certify, err_value, extend,
                     extend_degree6_lowrank, identity_pseudoexpectation,
                     main_value, pseudoexpectation_from_json,
                     pseudoexpectation_to_json, pseudomoment_matrix)
from .forests import (GoodForest, RibbonForest, enumerate_good_forests,
                      enumerate_ribbon_forests, star_forest,
                      star_mobius_recursion, stretched_forests,
                      stretched_mu_sum, verify_mobius, verify_xi)
from .harness import (InstanceConfig, MatrixFileError, SkInstance,
                      goe_sample, laurent_closed_form, laurent_matrix,
                      load_matrix, projector_instance, projector_t_pow,
                      save_matrix, sk_instance, sk_run)
from .incoherence import (Degree6Report, IncoherenceReport,
                          adjustment_weight, check_theorem1,
                          check_theorem_deg6, eps_corr, eps_err,
                          eps_offdiag, eps_pow, eps_pow_tilde, eps_tree)
from .poly import (apolar, build_harmonic_basis, build_q_down, degree_sets,
                   gram_direct, gram_via_transport, harmonic_polynomial,
                   transport_mu_sum)

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "CertificationReport", "ConstructionError",
    "Degree6Report", "DegreeTwoInput", "GoodForest", "IncoherenceReport",
    "InstanceConfig", "LabelledDiagram", "MatrixFileError",
    "MonomialIndex", "Partition", "Pseudoexpectation", "RibbonForest",
    "SkInstance", "adjustment_weight", "apolar", "build_harmonic_basis",
    "build_q_down", "certify", "cgm_block", "cgs", "cgs_batch",
    "cgs_tight", "check_theorem1", "check_theorem_deg6", "degree_sets",
    "delta", "delta_batch", "direct_sum_decompose", "double_factorial",
    "enumerate_good_forests", "enumerate_partitions",
    "enumerate_ribbon_forests", "enumerate_transport_plans", "eps_corr",
    "eps_err", "eps_offdiag", "eps_pow", "eps_pow_tilde", "eps_tree",
    "err_value", "eval_generalized", "extend", "extend_degree6_lowrank",
    "factorize", "forest_to_diagram", "goe_sample", "gram_direct",
    "gram_via_transport", "harmonic_polynomial",
    "identity_pseudoexpectation", "laurent_closed_form", "laurent_matrix",
    "load_matrix", "main_value", "max_span", "mobius_even_bottom",
    "mobius_partition", "mobius_subset", "naive_cgs", "norm_bound", "nu",
    "pin_cut", "projector_instance", "projector_t_pow",
    "pseudoexpectation_from_json", "pseudoexpectation_to_json",
    "pseudomoment_matrix", "save_matrix", "sk_instance", "sk_run",
    "split_edge", "split_intersection", "star_forest",
    "star_mobius_recursion", "stretched_forests", "stretched_mu_sum",
    "tensorize", "transport_mu_sum", "verify_mobius", "verify_xi",
]
