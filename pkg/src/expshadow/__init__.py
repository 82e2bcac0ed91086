"""Exact finite models of expansive systems, Lewowicz quotients and shadowing."""

from .errors import ExpShadowError, PropertyFailure, ResourceLimit
from .systems import (FiniteMetricSystem, c0_distance, dump_system, fmt_rational, load_system,
                      orbit_sup_distance, parse_rational, product_system)
from .expansivity import (expansiveness_gap, expansiveness_region, expansivity_constant,
                          is_eps_alpha_expansive, is_semi_expansive, uniform_index)
from .quotients import (Partition, QuotientSystem, build_quotient, class_diameters,
                        expansivity_cover, lewowicz_metric, lewowicz_relation)
from .covers import (Cover, cover_power, cover_quotient_pipeline, cover_relation, is_generator,
                     is_U_semi_expansive, pullback_cover)
from .shadowing import (INF, anosov_quotient_pipeline, anosov_reverse, certify_semi_anosov,
                        decide_shadowing, pair_pseudo_orbit_expansiveness,
                        periodic_shadowing_oracle, shadowing_modulus)
from .graphs import trim_bi_essential
from .stability import build_semiconjugacy, stability_sweep
from .envelope import (build_periodic_sigma, build_shadowing_envelope, embed,
                       envelope_expansiveness, sigma_metric, sigma_weights,
                       verify_image_shadowing)
from .fixtures import generate_fixture

__all__ = [name for name in dir() if not name.startswith("_")]
