//! Resolvents of the free Dirac operator, weighted norm estimates, Kato
//! smoothness and the Gronwall-type bound used for the uniform estimate.

mod gronwall;
mod kato;
mod resolvent;
mod scan;

pub use gronwall::{gronwall_bound, GronwallInput, GronwallOutcome};
pub use kato::{
    cell_average_inverse_radius, kato_ratio, kato_scaling_check, kato_scan, kato_smooth_integral, kato_trial_family,
    unit_cube_integral, KatoScaling,
    KatoEstimate, KatoSmoothResult,
};
pub use resolvent::{apply_t, f_eps, f_eps_derivative, resolvent_g, DerivativeCheck, ResolventQuery, Sign};
pub use scan::{
    default_lambdas, lap_scan, mode_wise_maximum, mu_min, weighted_resolvent_norm, LapScanMeta, LapScanResult,
    LapScanRow, LapScanSummary, ScanOptions,
};
