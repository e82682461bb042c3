//! Numerical checks of the assumptions behind the regret analysis: the POI
//! Lipschitz and Pinsker bounds, concentration constants, posterior
//! concentration, the `Delta_t` decomposition term, and the sampling identity
//! at switch times.

pub mod constants;
pub mod diagnostics;
pub mod poi_checks;
pub mod suite;

pub use constants::{concentration_constants, ConcentrationConstants};
pub use diagnostics::{
    chi2_two_sample, delta_t_diagnostic, sampling_identity_test, posterior_median_trend, switch_count_identity,
    track_concentration, ConcentrationTrack, DeltaSeries, SamplingIdentityReport, SampledEpisode, TestStatus,
};
pub use poi_checks::{bernoulli_kl, check_lipschitz, check_pinsker, poi_l1_distance, LipschitzReport, PinskerCheck, LIPSCHITZ_BOUND};
pub use suite::{run_suite, Check, Status, SuiteOptions, VerifyReport};
