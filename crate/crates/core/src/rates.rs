//! Generation-rate model: fiber transmission, per-trial protocol timing for
//! even and odd node counts, and distance sweeps.
//!
//! Timing: every trial needs two spin-photon generation rounds (early and
//! late); an odd ring needs a third round for the branch where an early mode
//! meets a late one. Photons then travel half the inter-node distance to
//! their station and the outcome travels back, d/(2c) each way. The fast-use
//! rate counts only the preparation rounds, for applications that consume the
//! nodes before the outcome returns.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// All experimental scalars of the rate model.
///
/// `t_ps_s` (spin-photon pair generation time) is not fixed by the protocol;
/// the 6 µs default is an assumption typical of spin-photon attempt times.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProtocolParams {
    /// Number of nodes in the ring.
    pub n_nodes: usize,
    /// Inter-node distance in km.
    pub d_km: f64,
    /// Fiber attenuation length in km.
    pub l0_km: f64,
    /// Attenuation coefficient in dB/km.
    pub alpha_db_per_km: f64,
    /// Speed of light in fiber, km/s.
    pub c_km_per_s: f64,
    /// Spin-photon pair generation time, seconds.
    pub t_ps_s: f64,
    /// Beam-splitter transmission.
    pub eta_bs: f64,
    /// Detector efficiency.
    pub eta_d: f64,
    /// Frequency-conversion efficiency.
    pub p_fc: f64,
    /// Outcoupling efficiency.
    pub p_out: f64,
}

impl Default for ProtocolParams {
    fn default() -> Self {
        ProtocolParams {
            n_nodes: 4,
            d_km: 20.0,
            l0_km: 20.0,
            alpha_db_per_km: 0.2,
            c_km_per_s: 2.0e5,
            t_ps_s: 6.0e-6,
            eta_bs: 0.933_254_300_796_991, // 10^{-0.03}
            eta_d: 0.86,
            p_fc: 0.3,
            p_out: 0.3,
        }
    }
}

impl ProtocolParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_nodes == 0 || self.n_nodes > 16 {
            return Err(Error::NodeCount(self.n_nodes, "1..=16"));
        }
        for (name, value) in [
            ("d_km", self.d_km),
            ("l0_km", self.l0_km),
            ("c_km_per_s", self.c_km_per_s),
            ("t_ps_s", self.t_ps_s),
        ] {
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::Domain {
                    name,
                    value,
                    expected: "positive",
                });
            }
        }
        if !(self.alpha_db_per_km >= 0.0) || !self.alpha_db_per_km.is_finite() {
            return Err(Error::Domain {
                name: "alpha_db_per_km",
                value: self.alpha_db_per_km,
                expected: "non-negative",
            });
        }
        for (name, value) in [
            ("eta_bs", self.eta_bs),
            ("eta_d", self.eta_d),
            ("p_fc", self.p_fc),
            ("p_out", self.p_out),
        ] {
            if !(0.0..=1.0).contains(&value) || !value.is_finite() {
                return Err(Error::Domain {
                    name,
                    value,
                    expected: "[0, 1]",
                });
            }
        }
        Ok(())
    }
}

/// Which trial time enters the rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimingMode {
    /// Preparation, photon travel, and classical reply.
    Full,
    /// Preparation only (fast-use rate).
    Fast,
}

impl TimingMode {
    pub fn as_str(self) -> &'static str {
        match self {
            TimingMode::Full => "full",
            TimingMode::Fast => "fast",
        }
    }
}

impl std::str::FromStr for TimingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(TimingMode::Full),
            "fast" => Ok(TimingMode::Fast),
            _ => Err(Error::Domain {
                name: "mode",
                value: f64::NAN,
                expected: "full or fast",
            }),
        }
    }
}

/// Overall transmission η = η_BS η_D p_fc p_out 10^(−α d / L0).
pub fn transmission(params: &ProtocolParams) -> Result<f64> {
    params.validate()?;
    let fiber = 10f64.powf(-params.alpha_db_per_km * params.d_km / params.l0_km);
    Ok(params.eta_bs * params.eta_d * params.p_fc * params.p_out * fiber)
}

/// Preparation rounds per trial: two for an even ring, three for an odd one.
fn preparation_rounds(n_nodes: usize) -> f64 {
    if n_nodes % 2 == 0 {
        2.0
    } else {
        3.0
    }
}

/// Trial time: (2 or 3)·t_PS plus, in full mode, d/(2c) photon travel and
/// d/(2c) classical reply.
pub fn total_time(params: &ProtocolParams, mode: TimingMode) -> Result<f64> {
    params.validate()?;
    let preparation = preparation_rounds(params.n_nodes) * params.t_ps_s;
    Ok(match mode {
        TimingMode::Full => preparation + params.d_km / params.c_km_per_s,
        TimingMode::Fast => preparation,
    })
}

/// One evaluated point of the rate model, both timing modes included.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RatePoint {
    pub d_km: f64,
    pub n_nodes: usize,
    pub eta: f64,
    pub p_tot: f64,
    pub t_tot_full_s: f64,
    pub t_tot_fast_s: f64,
    pub r_full_hz: f64,
    pub r_fast_hz: f64,
}

impl RatePoint {
    pub fn t_tot_s(&self, mode: TimingMode) -> f64 {
        match mode {
            TimingMode::Full => self.t_tot_full_s,
            TimingMode::Fast => self.t_tot_fast_s,
        }
    }

    pub fn rate_hz(&self, mode: TimingMode) -> f64 {
        match mode {
            TimingMode::Full => self.r_full_hz,
            TimingMode::Fast => self.r_fast_hz,
        }
    }
}

/// Rate r = p_tot / t_tot with p_tot = (η/2)^N per GHZ-like state.
/// `factor2` counts both phase classes together, p_tot = 2(η/2)^N.
pub fn ghz_rate(params: &ProtocolParams, factor2: bool) -> Result<RatePoint> {
    let eta = transmission(params)?;
    let mut p_tot = (eta / 2.0).powi(params.n_nodes as i32);
    if factor2 {
        p_tot *= 2.0;
    }
    let t_tot_full_s = total_time(params, TimingMode::Full)?;
    let t_tot_fast_s = total_time(params, TimingMode::Fast)?;
    Ok(RatePoint {
        d_km: params.d_km,
        n_nodes: params.n_nodes,
        eta,
        p_tot,
        t_tot_full_s,
        t_tot_fast_s,
        r_full_hz: p_tot / t_tot_full_s,
        r_fast_hz: p_tot / t_tot_fast_s,
    })
}

/// Evaluate the rate model over a distance grid for several node counts.
/// Rows are ordered by (N, d).
pub fn sweep(
    d_min_km: f64,
    d_max_km: f64,
    steps: usize,
    n_list: &[usize],
    params: &ProtocolParams,
    factor2: bool,
) -> Result<Vec<RatePoint>> {
    if n_list.is_empty() {
        return Err(Error::EmptyInput("n_list"));
    }
    if !(d_min_km > 0.0) || !(d_max_km > d_min_km) {
        return Err(Error::Domain {
            name: "d_min_km..d_max_km",
            value: d_min_km,
            expected: "0 < d_min < d_max",
        });
    }
    if steps < 2 {
        return Err(Error::Domain {
            name: "steps",
            value: steps as f64,
            expected: "at least 2",
        });
    }

    let mut n_sorted = n_list.to_vec();
    n_sorted.sort_unstable();
    let mut rows = Vec::with_capacity(n_sorted.len() * steps);
    for &n in &n_sorted {
        for i in 0..steps {
            let d = d_min_km + (d_max_km - d_min_km) * i as f64 / (steps - 1) as f64;
            let point = ghz_rate(
                &ProtocolParams {
                    n_nodes: n,
                    d_km: d,
                    ..params.clone()
                },
                factor2,
            )?;
            rows.push(point);
        }
    }
    Ok(rows)
}

/// CSV column header for sweep output.
pub const CSV_HEADER: &str = "mode,N,d_km,eta,p_tot,t_tot_s,rate_hz";

/// Format a float with 12 significant digits.
pub fn format_sig(x: f64) -> String {
    format!("{x:.11e}")
}

/// One CSV row in the sweep contract.
pub fn csv_row(point: &RatePoint, mode: TimingMode) -> String {
    format!(
        "{},{},{},{},{},{},{}",
        mode.as_str(),
        point.n_nodes,
        format_sig(point.d_km),
        format_sig(point.eta),
        format_sig(point.p_tot),
        format_sig(point.t_tot_s(mode)),
        format_sig(point.rate_hz(mode)),
    )
}
