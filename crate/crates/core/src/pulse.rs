//! Pulse model: Gaussian (or tabulated) pump/Stokes envelopes split into
//! polarization components, plus the flat key-value configuration format the
//! CLI consumes.

use std::f64::consts::{FRAC_PI_2, TAU};
use std::fmt::Write as _;

use crate::angular::q;
use crate::error::{Error, Result};

/// A single pulse envelope R(t) >= 0.
///
/// Gaussian is the built-in family; a tabulated envelope (time-value pairs,
/// linearly interpolated, zero outside the table) is accepted for robustness
/// experiments against fluctuating pulse shapes.
#[derive(Debug, Clone, PartialEq)]
pub enum Envelope {
    Gaussian {
        amplitude: f64,
        center: f64,
        width: f64,
    },
    Tabulated {
        samples: Vec<(f64, f64)>,
    },
}

impl Envelope {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Envelope::Gaussian {
                amplitude,
                center,
                width,
            } => {
                let u = (t - center) / width;
                amplitude * (-u * u).exp()
            }
            Envelope::Tabulated { samples } => {
                if samples.is_empty() {
                    return 0.0;
                }
                match samples.binary_search_by(|(ts, _)| ts.total_cmp(&t)) {
                    Ok(i) => samples[i].1,
                    Err(0) => 0.0,
                    Err(i) if i == samples.len() => 0.0,
                    Err(i) => {
                        let (t0, v0) = samples[i - 1];
                        let (t1, v1) = samples[i];
                        v0 + (v1 - v0) * (t - t0) / (t1 - t0)
                    }
                }
            }
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Envelope::Gaussian {
                amplitude, width, ..
            } => {
                if *amplitude < 0.0 {
                    return Err(Error::InvalidInput("pulse amplitude must be >= 0".into()));
                }
                if *width <= 0.0 {
                    return Err(Error::InvalidInput("pulse width must be > 0".into()));
                }
            }
            Envelope::Tabulated { samples } => {
                if samples.windows(2).any(|w| w[0].0 >= w[1].0) {
                    return Err(Error::InvalidInput(
                        "tabulated envelope times must be strictly increasing".into(),
                    ));
                }
                if samples.iter().any(|(_, v)| *v < 0.0) {
                    return Err(Error::InvalidInput(
                        "tabulated envelope values must be >= 0".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Full pulse-pair configuration: Gaussian pump and Stokes pulses, the
/// polarization angles eta (pump) and nu (Stokes), four constant optical
/// phases, and the one-photon detuning.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseConfig {
    pub pump_amplitude: f64,
    pub pump_center: f64,
    pub pump_width: f64,
    pub stokes_amplitude: f64,
    pub stokes_center: f64,
    pub stokes_width: f64,
    pub eta: f64,
    pub nu: f64,
    pub phi_a: f64,
    pub phi_b: f64,
    pub phi_c: f64,
    pub phi_d: f64,
    pub detuning: f64,
}

impl Default for PulseConfig {
    fn default() -> Self {
        Self {
            pump_amplitude: 0.0,
            pump_center: 0.0,
            pump_width: 1.0,
            stokes_amplitude: 0.0,
            stokes_center: 0.0,
            stokes_width: 1.0,
            eta: 0.0,
            nu: 0.0,
            phi_a: 0.0,
            phi_b: 0.0,
            phi_c: 0.0,
            phi_d: 0.0,
            detuning: 0.0,
        }
    }
}

/// Config-file keys, in serialization order. Part of the CLI contract.
pub const CONFIG_KEYS: [&str; 13] = [
    "rp_amp", "rs_amp", "tp", "ts", "taup", "taus", "eta", "nu", "phia", "phib", "phic", "phid",
    "delta",
];

impl PulseConfig {
    pub fn validate(&self) -> Result<()> {
        self.pump_envelope().validate()?;
        self.stokes_envelope().validate()?;
        for (v, name) in [(self.eta, "eta"), (self.nu, "nu")] {
            if !(0.0..=FRAC_PI_2).contains(&v) {
                return Err(Error::InvalidInput(format!(
                    "{name} = {v} outside [0, pi/2]"
                )));
            }
        }
        for (v, name) in [
            (self.phi_a, "phia"),
            (self.phi_b, "phib"),
            (self.phi_c, "phic"),
            (self.phi_d, "phid"),
        ] {
            if !(0.0..TAU).contains(&v) {
                return Err(Error::InvalidInput(format!(
                    "{name} = {v} outside [0, 2pi)"
                )));
            }
        }
        if !self.detuning.is_finite() {
            return Err(Error::InvalidInput("delta must be finite".into()));
        }
        Ok(())
    }

    pub fn pump_envelope(&self) -> Envelope {
        Envelope::Gaussian {
            amplitude: self.pump_amplitude,
            center: self.pump_center,
            width: self.pump_width,
        }
    }

    pub fn stokes_envelope(&self) -> Envelope {
        Envelope::Gaussian {
            amplitude: self.stokes_amplitude,
            center: self.stokes_center,
            width: self.stokes_width,
        }
    }

    /// The one phase that survives phase reduction:
    /// phi = phi_B - phi_A + phi_C - phi_D, reduced to [0, 2pi).
    pub fn reduced_phase(&self) -> f64 {
        (self.phi_b - self.phi_a + self.phi_c - self.phi_d).rem_euclid(TAU)
    }

    /// Integration window covering both pulses out to where Gaussian tails
    /// are below 2e-9 of peak: [ts - 4.5*taus, tp + 4.5*taup].
    pub fn default_span(&self) -> (f64, f64) {
        (
            self.stokes_center - 4.5 * self.stokes_width,
            self.pump_center + 4.5 * self.pump_width,
        )
    }

    /// Parse the flat `key = value` format. Unknown keys are rejected,
    /// `#` starts a comment, every key must appear exactly once.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut seen = [false; CONFIG_KEYS.len()];
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Parse(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            let key = key.trim();
            let idx = CONFIG_KEYS
                .iter()
                .position(|k| *k == key)
                .ok_or_else(|| Error::Parse(format!("line {}: unknown key `{key}`", lineno + 1)))?;
            if seen[idx] {
                return Err(Error::Parse(format!(
                    "line {}: duplicate key `{key}`",
                    lineno + 1
                )));
            }
            seen[idx] = true;
            cfg.set(key, value.trim())?;
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(Error::Parse(format!("missing key `{}`", CONFIG_KEYS[i])));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Apply one `key=value` override. Keys and value types are checked.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v: f64 = value.parse().map_err(|_| {
            Error::Parse(format!("value `{value}` for key `{key}` is not a number"))
        })?;
        match key {
            "rp_amp" => self.pump_amplitude = v,
            "rs_amp" => self.stokes_amplitude = v,
            "tp" => self.pump_center = v,
            "ts" => self.stokes_center = v,
            "taup" => self.pump_width = v,
            "taus" => self.stokes_width = v,
            "eta" => self.eta = v,
            "nu" => self.nu = v,
            "phia" => self.phi_a = v,
            "phib" => self.phi_b = v,
            "phic" => self.phi_c = v,
            "phid" => self.phi_d = v,
            "delta" => self.detuning = v,
            _ => return Err(Error::Parse(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// Serialize in the same flat key-value format `parse` accepts.
    pub fn serialize(&self) -> String {
        let vals = [
            self.pump_amplitude,
            self.stokes_amplitude,
            self.pump_center,
            self.stokes_center,
            self.pump_width,
            self.stokes_width,
            self.eta,
            self.nu,
            self.phi_a,
            self.phi_b,
            self.phi_c,
            self.phi_d,
            self.detuning,
        ];
        let mut out = String::new();
        for (k, v) in CONFIG_KEYS.iter().zip(vals) {
            writeln!(out, "{k} = {v}").unwrap();
        }
        out
    }
}

/// The four coupling envelopes at one instant: A, B from the pump split by
/// eta; C, D from the Stokes split by nu with the channel normalization
/// 1/sqrt(1+q^2) baked in so `rs_amp` is the total Stokes scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeSample {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl EnvelopeSample {
    pub fn from_envelopes(pump: &Envelope, stokes: &Envelope, eta: f64, nu: f64, t: f64) -> Self {
        let rp = pump.eval(t);
        let rs = stokes.eval(t) / (1.0 + q() * q()).sqrt();
        Self {
            a: rp * eta.cos(),
            b: rp * eta.sin(),
            c: rs * nu.cos(),
            d: rs * nu.sin(),
        }
    }
}

/// Evaluate the four envelopes of `cfg` at time `t`.
pub fn envelopes(t: f64, cfg: &PulseConfig) -> EnvelopeSample {
    EnvelopeSample::from_envelopes(
        &cfg.pump_envelope(),
        &cfg.stokes_envelope(),
        cfg.eta,
        cfg.nu,
        t,
    )
}

/// The two paper-style reference configurations and the sweep envelope set,
/// used across tests and shipped as example config files.
pub mod reference {
    use super::PulseConfig;

    /// Resonant transfer demo: R_p = 10 exp[-((t-1.6)/2.8)^2],
    /// R_S = 10 sqrt(7) exp[-((t+1.6)/2.8)^2], eta = 0.5, nu = 1.04,
    /// phi = 3.34 carried on phi_B.
    pub fn fig2() -> PulseConfig {
        PulseConfig {
            pump_amplitude: 10.0,
            pump_center: 1.6,
            pump_width: 2.8,
            stokes_amplitude: 10.0 * 7.0_f64.sqrt(),
            stokes_center: -1.6,
            stokes_width: 2.8,
            eta: 0.5,
            nu: 1.04,
            phi_a: 0.0,
            phi_b: 3.34,
            phi_c: 0.0,
            phi_d: 0.0,
            detuning: 0.0,
        }
    }

    /// Same pulses as `fig2` with phi = 4.74.
    pub fn fig3() -> PulseConfig {
        PulseConfig {
            phi_b: 4.74,
            ..fig2()
        }
    }

    /// Sweep envelope set: R_p = 15 exp[-((t-1.8)/2.82)^2],
    /// R_S = 15 sqrt(7) exp[-((t+1.8)/2.82)^2]. Angles default to the fig2
    /// values; sweeps override them per grid point.
    pub fn sweep() -> PulseConfig {
        PulseConfig {
            pump_amplitude: 15.0,
            pump_center: 1.8,
            pump_width: 2.82,
            stokes_amplitude: 15.0 * 7.0_f64.sqrt(),
            stokes_center: -1.8,
            stokes_width: 2.82,
            ..fig2()
        }
    }
}
