//! The single-wall protocol: one `|+>` at the chain edge read out with `O_do`.

use serde::{Deserialize, Serialize};

use super::moments::window_moment_fi;
use super::observable::{
    build_o_do, dyadic_window, DominoObservable, DyadicWindow, DEFAULT_CONCENTRATION,
};
use super::one_dw::{one_dw_evolve, OneDwState};
use crate::channels::PauliChannel;
use crate::error::Result;
use crate::smallsys::FiReport;

/// Moment FI of `obs` on the one-wall state at `theta_pr + theta_tilde`.
pub fn one_dw_moment_fi(
    st: &OneDwState,
    obs: &DominoObservable,
    noise: &PauliChannel,
    theta_tilde: f64,
) -> Result<FiReport> {
    window_moment_fi(&st.to_two_dw(), obs, noise, obs.theta_pr() + theta_tilde)
}

/// Thresholds of the single-wall check.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SingleSettings {
    /// Minimal weight inside the dyadic window.
    pub concentration: f64,
    /// Noise is considered weak when `p <= noise_constant / (v T)`.
    pub noise_constant: f64,
}

impl Default for SingleSettings {
    fn default() -> Self {
        Self {
            concentration: DEFAULT_CONCENTRATION,
            noise_constant: 0.2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingleReport {
    pub n: usize,
    pub time: f64,
    pub theta_pr: f64,
    pub theta_tilde: f64,
    pub window: DyadicWindow,
    pub strings: usize,
    pub noise_threshold: f64,
    /// Whether the channel's transverse decay `(1 - lambda) / 2` is below the threshold.
    pub weak_noise: bool,
    pub fi: FiReport,
    pub fi_over_t2: f64,
}

/// Evolves, builds `O_do`, and evaluates its moment FI.
pub fn domino_single(
    n: usize,
    t: f64,
    noise: &PauliChannel,
    theta_pr: f64,
    theta_tilde: f64,
    settings: SingleSettings,
) -> Result<SingleReport> {
    let st = one_dw_evolve(n, t)?;
    let window = dyadic_window(&st)?;
    let obs = build_o_do(&st, theta_pr, settings.concentration)?;
    let fi = one_dw_moment_fi(&st, &obs, noise, theta_tilde)?;
    let noise_threshold = settings.noise_constant / (window.velocity * t);
    let effective_p = noise
        .transverse_eigenvalue()
        .map_or(f64::INFINITY, |l| (1.0 - l) / 2.0);
    Ok(SingleReport {
        n,
        time: t,
        theta_pr,
        theta_tilde,
        window,
        strings: obs.terms().len(),
        noise_threshold,
        weak_noise: effective_p <= noise_threshold * (1.0 + 1e-12),
        fi_over_t2: fi.fi / (t * t),
        fi,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smallsys::{moment_fi, SensingFamily};

    #[test]
    fn matches_dense_moment_fi() {
        let n = 10;
        let st = one_dw_evolve(n, 2.0).unwrap();
        let obs = build_o_do(&st, 0.05, 0.0).unwrap();
        let noise = PauliChannel::dephasing(0.02, 0.0).unwrap();
        let fast = one_dw_moment_fi(&st, &obs, &noise, 1e-3).unwrap();
        let fam = SensingFamily::new(st.to_pure_state().unwrap().to_density(), noise);
        let dense = moment_fi(
            &obs.to_local_product_sum().to_observable(n).unwrap(),
            &fam,
            0.05 + 1e-3,
        )
        .unwrap();
        assert!(
            (fast.fi - dense.fi).abs() < 1e-8 * dense.fi,
            "{} vs {}",
            fast.fi,
            dense.fi
        );
        assert!((fast.variance - dense.variance).abs() < 1e-10);
        assert!((fast.mean - dense.mean).abs() < 1e-10);
    }

    #[test]
    fn half_dephasing_kills_the_signal() {
        let st = one_dw_evolve(60, 8.0).unwrap();
        let obs = build_o_do(&st, 0.0, 0.5).unwrap();
        let fi =
            one_dw_moment_fi(&st, &obs, &PauliChannel::dephasing(0.5, 0.0).unwrap(), 0.0).unwrap();
        assert_eq!(fi.fi, 0.0);
    }

    #[test]
    fn unequal_transverse_decay_is_rejected() {
        let st = one_dw_evolve(20, 2.0).unwrap();
        let obs = build_o_do(&st, 0.0, 0.0).unwrap();
        let noise = PauliChannel::new(0.0, [0.9, 0.1, 0.0, 0.0]).unwrap();
        assert!(matches!(
            one_dw_moment_fi(&st, &obs, &noise, 0.0),
            Err(crate::Error::UnsupportedNoise(_))
        ));
    }

    #[test]
    fn noiseless_fi_grows_quadratically() {
        let f = |t: f64| {
            domino_single(
                200,
                t,
                &PauliChannel::noiseless(0.0),
                0.0,
                0.0,
                SingleSettings::default(),
            )
            .unwrap()
            .fi
            .fi
        };
        let slope = (f(16.0) / f(8.0)).ln() / 2f64.ln();
        assert!((slope - 2.0).abs() < 0.2, "{slope}");
    }
}
