"""Multiple zeta values and Carlitz multiple star polylogarithms over F_q(T),
in the infinite-place and v-adic completions."""

from .fqarith import (
    FiniteField,
    FqElem,
    Index,
    Poly,
    RatFunc,
    L_factorial,
    binomial_mod_p,
    frobenius_twist,
    inf_valuation,
    irreducible_check,
    monic_enumerate,
    parse_poly,
    parse_ratfunc,
    v_valuation,
)
from .completions import InfSeries, PrecisionError, VAdicSeries, embed_fraction, embed_inf, embed_v
from .tmodule import DomainError, TModule, act, build_G, build_carlitz_tensor, eval_log, exp_coeffs, log_coeffs, special_point
from .polylog import chen_weight_coordinate, domain_check, li_inf, li_star_inf, li_star_trunc, li_star_v_conv, li_star_v_extended, li_trunc
from .stufflealg import H0Error, StuffleAlgebra, StuffleElement, parse_element
from .mzv import (
    Certificate,
    CertificateError,
    builtin_certificate,
    chen_product,
    verify_certificate,
    verify_relation_inf,
    verify_relation_v,
    zeta_inf,
    zeta_partial,
    zeta_v,
)

__version__ = "0.1.0"
