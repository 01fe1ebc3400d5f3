//! Expected facet counts: exact quadrature and tail asymptotics.

pub mod asymptotic;
pub mod exact;

pub use asymptotic::{
    asymptotic_exp, asymptotic_for_model, asymptotic_poly, asymptotic_trunc, coefficient_a, coefficient_a_beta_form,
    coefficient_b, epsilon_fn, falling_factorial_ratio, gamma_ratio, ln_exp_formula, ln_poly_highdim, ln_trunc_highdim, v_diagnostic, AsymptoticValue, Regime,
};
pub use exact::{default_w_floor, expected_facets_exact, ExactExpectation, HTable};
