use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::timefreq::{ErbBank, ErbBankParams, Frontend, FrontendKind, StftParams};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FrontendConfig {
    pub kind: FrontendKind,
    pub fft_size: usize,
    pub hop: usize,
    pub f_lo: f64,
    pub f_hi: f64,
    pub n_channels: usize,
}

impl Default for FrontendConfig {
    fn default() -> Self {
        FrontendConfig {
            kind: FrontendKind::Afb,
            fft_size: 1536,
            hop: 768,
            f_lo: 60.0,
            f_hi: 6000.0,
            n_channels: 42,
        }
    }
}

impl FrontendConfig {
    pub fn with_kind(mut self, kind: FrontendKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn build(&self, sample_rate: u32) -> Result<Frontend> {
        Ok(match self.kind {
            FrontendKind::Stft => Frontend::Stft(StftParams::hann(self.fft_size, self.hop)?),
            FrontendKind::Afb => Frontend::Afb(ErbBank::new(ErbBankParams::new(
                self.f_lo,
                self.f_hi,
                self.n_channels,
                sample_rate,
            ))?),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SmoothingParams {
    /// Averaging interval in seconds; each channel averages
    /// `ceil(time_window / time_step)` frames.
    pub time_window: f64,
    /// Number of adjacent channels averaged, the target included.
    pub j_omega: usize,
    /// Channels whose centre frequency falls outside `[lo, hi]` Hz yield no bins.
    pub band: (f64, f64),
}

impl Default for SmoothingParams {
    fn default() -> Self {
        SmoothingParams {
            time_window: 0.064,
            j_omega: 2,
            band: (1000.0, 6000.0),
        }
    }
}

impl SmoothingParams {
    pub fn j_tau(&self, time_step: f64) -> usize {
        // Guard against 0.064 / 0.016 evaluating to 4.000000000000001.
        ((self.time_window / time_step) * (1.0 - 1e-12))
            .ceil()
            .max(1.0) as usize
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.time_window > 0.0) {
            return Err(Error::invalid("smoothing time window must be positive"));
        }
        if self.j_omega < 1 {
            return Err(Error::invalid("J_omega must be at least 1"));
        }
        if !(self.band.0 >= 0.0 && self.band.0 <= self.band.1) {
            return Err(Error::invalid("band limits must satisfy 0 <= lo <= hi"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", content = "value", rename_all = "snake_case")]
pub enum DpdMode {
    /// Pass bins with `sigma_s / sigma_n >= threshold`.
    Threshold(f64),
    /// Pass the top fraction `q` of bins ranked by the ratio.
    TopFraction(f64),
}

impl Default for DpdMode {
    fn default() -> Self {
        DpdMode::TopFraction(0.05)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SearchMode {
    #[serde(rename = "1d")]
    OneD,
    #[serde(rename = "2d")]
    TwoD,
}

impl SearchMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            SearchMode::OneD => "1d",
            SearchMode::TwoD => "2d",
        }
    }
}

impl std::str::FromStr for SearchMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "1d" => Ok(SearchMode::OneD),
            "2d" => Ok(SearchMode::TwoD),
            other => Err(Error::invalid(format!(
                "unknown search mode '{other}' (expected 1d or 2d)"
            ))),
        }
    }
}

impl std::fmt::Display for SearchMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Dpd,
    Je,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Dpd => "dpd",
            Method::Je => "je",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dpd" => Ok(Method::Dpd),
            "je" => Ok(Method::Je),
            other => Err(Error::invalid(format!(
                "unknown method '{other}' (expected dpd or je)"
            ))),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchConfig {
    pub mode: SearchMode,
    pub method: Method,
    /// Lateral grid step in degrees.
    pub lateral_step: f64,
    /// Intraconic samples per cone when building lateral steering vectors.
    pub intraconic_samples: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            mode: SearchMode::OneD,
            method: Method::Dpd,
            lateral_step: 2.0,
            intraconic_samples: 36,
        }
    }
}

/// Cue-matching parameters of the JE baseline.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JeParams {
    /// ITD scale in seconds.
    pub s_itd: f64,
    /// ILD scale in dB.
    pub s_ild: f64,
    /// ITD is used below this frequency (Hz).
    pub itd_max_freq: f64,
    /// ILD is used above this frequency (Hz).
    pub ild_min_freq: f64,
}

impl Default for JeParams {
    fn default() -> Self {
        JeParams {
            s_itd: 1e-4,
            s_ild: 3.0,
            itd_max_freq: 3000.0,
            ild_min_freq: 1500.0,
        }
    }
}

impl JeParams {
    pub fn uses_itd(&self, f: f64) -> bool {
        f <= self.itd_max_freq
    }

    pub fn uses_ild(&self, f: f64) -> bool {
        f >= self.ild_min_freq
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LocalizationConfig {
    pub frontend: FrontendConfig,
    pub smoothing: SmoothingParams,
    pub dpd: DpdMode,
    pub search: SearchConfig,
    pub je: JeParams,
}

impl LocalizationConfig {
    pub fn validate(&self) -> Result<()> {
        self.smoothing.validate()?;
        match self.dpd {
            DpdMode::Threshold(t) if !(t > 0.0) => {
                return Err(Error::invalid("DPD threshold must be positive"))
            }
            DpdMode::TopFraction(q) if !(q > 0.0 && q <= 1.0) => {
                return Err(Error::invalid(format!("DPD fraction {q} outside (0, 1]")))
            }
            _ => {}
        }
        if !(self.search.lateral_step > 0.0 && self.search.lateral_step <= 90.0) {
            return Err(Error::invalid("lateral step must lie in (0, 90]"));
        }
        if self.search.intraconic_samples < 2 {
            return Err(Error::invalid("need at least two intraconic samples"));
        }
        if !(self.je.s_itd > 0.0 && self.je.s_ild > 0.0) {
            return Err(Error::invalid("JE scales must be positive"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn j_tau_rounding() {
        let s = SmoothingParams::default();
        assert_eq!(s.j_tau(768.0 / 48000.0), 4);
        assert_eq!(s.j_tau(180.0 / 48000.0), 18);
        assert_eq!(s.j_tau(1.0), 1);
    }

    #[test]
    fn json_shape() {
        let cfg: LocalizationConfig = serde_json::from_str(
            r#"{"dpd": {"mode": "threshold", "value": 4.0}, "search": {"mode": "2d", "method": "je"},
                "frontend": {"kind": "stft"}}"#,
        )
        .unwrap();
        assert_eq!(cfg.dpd, DpdMode::Threshold(4.0));
        assert_eq!(cfg.search.mode, SearchMode::TwoD);
        assert_eq!(cfg.search.method, Method::Je);
        assert_eq!(cfg.frontend.kind, FrontendKind::Stft);
        assert_eq!(cfg.smoothing, SmoothingParams::default());
        assert!(serde_json::from_str::<LocalizationConfig>(r#"{"bogus": 1}"#).is_err());
    }

    #[test]
    fn validation() {
        assert!(LocalizationConfig::default().validate().is_ok());
        let mut c = LocalizationConfig::default();
        c.dpd = DpdMode::TopFraction(1.5);
        assert!(c.validate().is_err());
        c.dpd = DpdMode::TopFraction(1.0);
        assert!(c.validate().is_ok());
        c.smoothing.j_omega = 0;
        assert!(c.validate().is_err());
    }
}
