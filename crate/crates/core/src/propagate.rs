//! Schrödinger propagation over a pulse sequence with population and
//! bright-subspace tracking.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::frame::{dark_frame, dark_state_d1, dark_state_d2, NU_CLAMP};
use crate::hamiltonian::{reduce_phases, CVec6, HamiltonianOp};
use crate::ode::integrate_adaptive;
use crate::pulse::{Envelope, PulseConfig};

/// Integrator controls. `span = None` uses the pulse-derived default window.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegratorSettings {
    pub rtol: f64,
    pub atol: f64,
    pub span: Option<(f64, f64)>,
    pub samples: usize,
}

impl Default for IntegratorSettings {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            span: None,
            samples: 2000,
        }
    }
}

/// Time-sampled solution with per-sample level populations and bright
/// population b(t) = 1 − |⟨D₁|ψ⟩|² − |⟨D₂|ψ⟩|² (dark states of the
/// phase-reduced frame, applied through U₁).
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<CVec6>,
    pub populations: Vec<[f64; 6]>,
    /// Raw bright-population series; may dip below zero by rounding.
    pub bright: Vec<f64>,
    pub norm_drift: f64,
}

/// Integrate the Schrödinger equation for `cfg` from `psi0`.
pub fn integrate(
    cfg: &PulseConfig,
    psi0: &CVec6,
    settings: &IntegratorSettings,
) -> Result<Trajectory> {
    integrate_shaped(
        &cfg.pump_envelope(),
        &cfg.stokes_envelope(),
        cfg,
        psi0,
        settings,
    )
}

/// Same as [`integrate`] but with explicit (possibly tabulated) envelopes;
/// angles, phases and detuning still come from `cfg`.
pub fn integrate_shaped(
    pump: &Envelope,
    stokes: &Envelope,
    cfg: &PulseConfig,
    psi0: &CVec6,
    settings: &IntegratorSettings,
) -> Result<Trajectory> {
    cfg.validate()?;
    if (psi0.norm() - 1.0).abs() > 1e-10 {
        return Err(Error::Precondition("initial state must be unit norm".into()));
    }
    let span = settings.span.unwrap_or_else(|| cfg.default_span());
    if span.0 >= span.1 {
        return Err(Error::InvalidInput("empty integration span".into()));
    }

    let op = HamiltonianOp::with_envelopes(pump.clone(), stokes.clone(), cfg);
    let sol = integrate_adaptive(
        |t, y| op.schrodinger_rhs(t, y),
        span,
        *psi0,
        settings.rtol,
        settings.atol,
        settings.samples,
    )?;

    // dark-subspace projection in the phase-reduced frame
    let (u1, phi) = reduce_phases(cfg);
    let nu_c = cfg.nu.clamp(NU_CLAMP, std::f64::consts::FRAC_PI_2 - NU_CLAMP);
    let frame_cfg = PulseConfig {
        nu: nu_c,
        ..cfg.clone()
    };

    let mut populations = Vec::with_capacity(sol.times.len());
    let mut bright = Vec::with_capacity(sol.times.len());
    let mut norm_drift = 0.0_f64;
    for (t, psi) in sol.times.iter().zip(&sol.states) {
        let mut p = [0.0; 6];
        for i in 0..6 {
            p[i] = psi[i].norm_sqr();
        }
        populations.push(p);
        norm_drift = norm_drift.max((psi.norm() - 1.0).abs());

        let env = crate::pulse::EnvelopeSample::from_envelopes(
            pump,
            stokes,
            frame_cfg.eta,
            frame_cfg.nu,
            *t,
        );
        let psi1 = u1 * psi;
        let b = if env.c > 0.0 || env.d > 0.0 {
            let d1 = dark_state_d1(env.c, env.d)?;
            let frame = dark_frame(&env, phi)?;
            let d2 = dark_state_d2(&frame);
            let n = psi.norm_sqr();
            n - d1.dotc(&psi1).norm_sqr() - d2.dotc(&psi1).norm_sqr()
        } else {
            // Stokes fully off: the followed dark pair degenerates to
            // {|0,0>, J=2 manifold}; count everything in the excited levels
            psi[1].norm_sqr() + psi[2].norm_sqr()
        };
        bright.push(b);
    }

    Ok(Trajectory {
        times: sol.times,
        states: sol.states,
        populations,
        bright,
        norm_drift,
    })
}

impl Trajectory {
    pub fn final_state(&self) -> &CVec6 {
        self.states.last().expect("trajectory is never empty")
    }

    /// CSV with columns t, p00, p1m1, p1p1, p2m2, p20, p2p2, bright.
    /// Bright population is clamped to [0, 1] at reporting time.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,p00,p1m1,p1p1,p2m2,p20,p2p2,bright\n");
        for ((t, p), b) in self.times.iter().zip(&self.populations).zip(&self.bright) {
            out.push_str(&format!(
                "{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}\n",
                t,
                p[0],
                p[1],
                p[2],
                p[3],
                p[4],
                p[5],
                b.clamp(0.0, 1.0)
            ));
        }
        out
    }
}

/// Maximum bright population over the trajectory, clamped to [0, 1].
pub fn max_bright_population(traj: &Trajectory) -> f64 {
    traj.bright
        .iter()
        .fold(0.0_f64, |acc, b| acc.max(*b))
        .clamp(0.0, 1.0)
}

/// Population transferred into the J=2 manifold.
pub fn transfer_efficiency(psi: &CVec6) -> f64 {
    psi[3].norm_sqr() + psi[4].norm_sqr() + psi[5].norm_sqr()
}

/// The default initial state |0,0⟩.
pub fn initial_state() -> CVec6 {
    let mut v = CVec6::zeros();
    v[0] = C64::new(1.0, 0.0);
    v
}
