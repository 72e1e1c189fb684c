//! Dark/bright separation of the six-level system.
//!
//! At every instant the phase-reduced Hamiltonian H₁ has a two-dimensional
//! null space with no excited-state component: the constant superposition D₁
//! of the J=2 sublevels, and the time-dependent D₂ that carries the
//! population from |0,0⟩ into the J=2 manifold. The unitary U = U₄U₃U₂ moves
//! those two states onto basis positions 4 and 6, leaving a 4×4 bright block
//! whose eigensystem drives the adiabaticity diagnostics.
//!
//! Branch conventions (all validated against H₁·D = 0 and the early-time
//! limit D₂ → |0,0⟩):
//! - α = atan2((k⁴+1)·y·D, r) ∈ [−π/2, 0] with r = √(A²k² + B² − 2ABk cosφ),
//! - tan β = −(y/x)·s/hypot(m, r) with m = (k⁴+1)·y·D and
//!   s = √(A² + B²k⁶ + 2ABk³ cosφ), which stays finite through r → 0,
//! - ξ = atan2(B sinφ, Ak − B cosφ), ζ = ξ + atan2(Bk³ sinφ, A + Bk³ cosφ).

use nalgebra::{SMatrix, SVector};
use num_complex::Complex64 as C64;

use crate::angular::q;
use crate::error::{Error, Result};
use crate::hamiltonian::{build_h1, CMat6, CVec6};
use crate::pulse::{envelopes, EnvelopeSample, PulseConfig};

/// Clamp on the Stokes polarization angle: inside the general branch, ν is
/// kept this far from {0, π/2} so k = C/D stays finite; the endpoints are
/// cross-checked against the reduced three-level limits in tests.
pub const NU_CLAMP: f64 = 1e-9;

fn cis(phi: f64) -> C64 {
    C64::new(phi.cos(), phi.sin())
}

/// Instantaneous frame parameters {k, x, y, α, β, ξ, ζ}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DarkFrame {
    pub k: f64,
    pub x: f64,
    pub y: f64,
    pub alpha: f64,
    pub beta: f64,
    pub xi: f64,
    pub zeta: f64,
}

/// Frame parameters from the instantaneous envelopes and the reduced phase.
///
/// Requires D > 0 (general branch); with both Stokes components zero the
/// frame does not exist. For ν at the domain endpoints, evaluate with a
/// clamped ν (see [`NU_CLAMP`]) or use [`dark_states_reduced`].
pub fn dark_frame(env: &EnvelopeSample, phi: f64) -> Result<DarkFrame> {
    if env.d <= 0.0 {
        return Err(if env.c <= 0.0 {
            Error::Degenerate("no Stokes field: dark frame undefined".into())
        } else {
            Error::Degenerate(
                "D = 0 with C > 0: k = C/D undefined, use the reduced three-level branch".into(),
            )
        });
    }
    let (a, b, c, d) = (env.a, env.b, env.c, env.d);
    let k = c / d;
    let k4p1 = k.powi(4) + 1.0;
    let x = (k.powi(4) + k * k * q() * q() + 1.0).sqrt() / k4p1.sqrt();
    let y = -q() / k4p1.sqrt();
    let cos_phi = phi.cos();
    let r = (a * a * k * k + b * b - 2.0 * a * b * k * cos_phi).max(0.0).sqrt();
    let s = (a * a + b * b * k.powi(6) + 2.0 * a * b * k.powi(3) * cos_phi)
        .max(0.0)
        .sqrt();
    let m = k4p1 * y * d;
    let alpha = m.atan2(r);
    let beta = (-(y / x) * s / m.hypot(r)).atan();
    let xi = (b * phi.sin()).atan2(a * k - b * cos_phi);
    let zeta = xi + (b * k.powi(3) * phi.sin()).atan2(a + b * k.powi(3) * cos_phi);
    Ok(DarkFrame {
        k,
        x,
        y,
        alpha,
        beta,
        xi,
        zeta,
    })
}

/// The constant dark state: a superposition of the J=2 sublevels fixed by
/// the Stokes component ratio alone,
/// (0, 0, 0, D², −qCD, C²) / √(C⁴ + D⁴ + q²C²D²).
pub fn dark_state_d1(c: f64, d: f64) -> Result<CVec6> {
    if c == 0.0 && d == 0.0 {
        return Err(Error::Degenerate("C = D = 0: no Stokes field".into()));
    }
    let norm = (c.powi(4) + d.powi(4) + q() * q() * c * c * d * d).sqrt();
    let mut v = CVec6::zeros();
    v[3] = C64::new(d * d / norm, 0.0);
    v[4] = C64::new(-q() * c * d / norm, 0.0);
    v[5] = C64::new(c * c / norm, 0.0);
    Ok(v)
}

/// The transfer dark state: the unit-norm null vector of H₁ orthogonal to
/// D₁, with components only on |0,0⟩ and the J=2 sublevels. Equals the
/// complex conjugate of row 6 of [`build_u`].
pub fn dark_state_d2(frame: &DarkFrame) -> CVec6 {
    let DarkFrame {
        k,
        x,
        y,
        alpha,
        beta,
        xi,
        zeta,
    } = *frame;
    let (sa, ca) = alpha.sin_cos();
    let (sb, cb) = beta.sin_cos();
    let e_xi = cis(-xi);
    let e_ze = cis(-zeta);
    let mut v = CVec6::zeros();
    v[0] = e_xi * (-cb * sa);
    v[3] = e_ze * (-(y * y * k / (q() * x)) * sb) + C64::new((y * k * k / q()) * cb * ca, 0.0);
    v[4] = e_ze * (-sb / x);
    v[5] = e_ze * (-(y * y * k.powi(3) / (q() * x)) * sb) - C64::new((y / q()) * cb * ca, 0.0);
    v
}

/// Both dark states in the reduced three-level limits ν = 0 (D = 0, single
/// Stokes component C) and ν = π/2 (C = 0). Null vectors of H₁ by direct
/// construction from the coupling balance.
pub fn dark_states_reduced(env: &EnvelopeSample, phi: f64) -> Result<(CVec6, CVec6)> {
    let (a, b, c, d) = (env.a, env.b, env.c, env.d);
    let d1 = dark_state_d1(c, d)?;
    let mut v = CVec6::zeros();
    if d == 0.0 {
        // A ψ₁ + qC ψ₄ = 0 and B e^{−iφ} ψ₁ + C ψ₅ = 0
        v[0] = C64::new(1.0, 0.0);
        v[3] = C64::new(-a / (q() * c), 0.0);
        v[4] = cis(-phi) * (-b / c);
    } else if c == 0.0 {
        // A ψ₁ + D ψ₅ = 0 and B e^{−iφ} ψ₁ + qD ψ₆ = 0
        v[0] = C64::new(1.0, 0.0);
        v[4] = C64::new(-a / d, 0.0);
        v[5] = cis(-phi) * (-b / (q() * d));
    } else {
        return Err(Error::InvalidInput(
            "reduced branch needs C = 0 or D = 0".into(),
        ));
    }
    let norm = v.norm();
    Ok((d1, v / C64::new(norm, 0.0)))
}

fn u2_matrix(frame: &DarkFrame) -> CMat6 {
    let DarkFrame { k, x, y, .. } = *frame;
    let mut u = CMat6::identity();
    let set = |u: &mut CMat6, i: usize, j: usize, v: f64| u[(i, j)] = C64::new(v, 0.0);
    set(&mut u, 3, 3, -y / (q() * x));
    set(&mut u, 3, 4, y * k / x);
    set(&mut u, 3, 5, -y * k * k / (q() * x));
    set(&mut u, 4, 3, y * y * k / (q() * x));
    set(&mut u, 4, 4, 1.0 / x);
    set(&mut u, 4, 5, y * y * k.powi(3) / (q() * x));
    set(&mut u, 5, 3, y * k * k / q());
    set(&mut u, 5, 4, 0.0);
    set(&mut u, 5, 5, -y / q());
    u
}

fn u3_matrix(frame: &DarkFrame) -> CMat6 {
    let mut u = CMat6::identity();
    u[(0, 0)] = cis(frame.xi);
    u[(4, 4)] = cis(frame.zeta);
    u
}

fn u4_matrix(frame: &DarkFrame) -> CMat6 {
    let (sa, ca) = frame.alpha.sin_cos();
    let (sb, cb) = frame.beta.sin_cos();
    let mut u = CMat6::identity();
    let set = |u: &mut CMat6, i: usize, j: usize, v: f64| u[(i, j)] = C64::new(v, 0.0);
    set(&mut u, 0, 0, ca);
    set(&mut u, 0, 5, sa);
    set(&mut u, 4, 0, -sb * sa);
    set(&mut u, 4, 4, cb);
    set(&mut u, 4, 5, sb * ca);
    set(&mut u, 5, 0, -cb * sa);
    set(&mut u, 5, 4, -sb);
    set(&mut u, 5, 5, cb * ca);
    u
}

/// The frame unitary U = U₄U₃U₂. Rows 4 and 6 carry the dark states: row 4
/// equals D₁ and row 6 equals conj(D₂), so U H₁ U† has rows and columns 4
/// and 6 identically zero.
pub fn build_u(frame: &DarkFrame) -> CMat6 {
    u4_matrix(frame) * u3_matrix(frame) * u2_matrix(frame)
}

/// Eigenvalues and eigenvectors of the nonzero 4×4 block of U H₁ U†, mapped
/// back to the bare basis. Eigenvalues sorted ascending; each eigenvector is
/// gauge-fixed with its largest-magnitude component real positive.
#[derive(Debug, Clone)]
pub struct BrightSystem {
    pub eigenvalues: [f64; 4],
    pub states: [CVec6; 4],
}

/// Bare-basis positions of the bright block inside the transformed frame
/// (rows/columns 4 and 6 hold the dark states).
const BRIGHT_IDX: [usize; 4] = [0, 1, 2, 4];

pub fn bright_eigensystem(h1: &CMat6, frame: &DarkFrame) -> Result<BrightSystem> {
    if h1.iter().all(|z| z.norm() == 0.0) {
        return Err(Error::Degenerate(
            "all envelopes zero: bright block degenerate".into(),
        ));
    }
    let u = build_u(frame);
    let transformed = u * h1 * u.adjoint();
    let mut block = SMatrix::<C64, 4, 4>::zeros();
    for (bi, &i) in BRIGHT_IDX.iter().enumerate() {
        for (bj, &j) in BRIGHT_IDX.iter().enumerate() {
            block[(bi, bj)] = transformed[(i, j)];
        }
    }
    let eig = block.symmetric_eigen();
    let mut order: [usize; 4] = [0, 1, 2, 3];
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let mut eigenvalues = [0.0; 4];
    let mut states = [CVec6::zeros(); 4];
    for (slot, &col) in order.iter().enumerate() {
        eigenvalues[slot] = eig.eigenvalues[col];
        let mut emb = CVec6::zeros();
        for (bi, &i) in BRIGHT_IDX.iter().enumerate() {
            emb[i] = eig.eigenvectors[(bi, col)];
        }
        let mut vec = u.adjoint() * emb;
        gauge_fix(&mut vec);
        states[slot] = vec;
    }
    Ok(BrightSystem {
        eigenvalues,
        states,
    })
}

/// Rotate a state so its largest-magnitude component is real positive.
pub fn gauge_fix(v: &mut CVec6) {
    let mut best = 0;
    let mut best_norm = 0.0;
    for i in 0..6 {
        let n = v[i].norm();
        if n > best_norm {
            best_norm = n;
            best = i;
        }
    }
    if best_norm > 0.0 {
        let phase = v[best] / C64::new(best_norm, 0.0);
        *v *= phase.conj();
    }
}

/// Three-level adiabaticity check for the reduced polarizations
/// η, ν ∈ {0, π/2}: returns (|ϑ̇ sin²ϱ / cosϱ|, |ϑ̇ cos²ϱ / sinϱ|, Ω/2) with
/// Ω = √(Ω_p² + κ²Ω_S²), tanϑ = Ω_p/(κΩ_S), tan2ϱ = Ω/Δ, κ ∈ {1, q}, and
/// ϑ̇ evaluated analytically from the Gaussian envelopes.
pub fn adiabaticity_three_level(cfg: &PulseConfig, kappa: f64, t: f64) -> Result<(f64, f64, f64)> {
    let reduced = |v: f64| v == 0.0 || v == std::f64::consts::FRAC_PI_2;
    if !reduced(cfg.eta) || !reduced(cfg.nu) {
        return Err(Error::InvalidInput(
            "three-level reduction requires eta, nu in {0, pi/2}".into(),
        ));
    }
    if kappa != 1.0 && kappa != q() {
        return Err(Error::InvalidInput("kappa must be 1 or q".into()));
    }
    let omega_p = cfg.pump_envelope().eval(t);
    let omega_s = cfg.stokes_envelope().eval(t) / (1.0 + q() * q()).sqrt();
    let omega_sq = omega_p * omega_p + kappa * kappa * omega_s * omega_s;
    if omega_sq == 0.0 {
        return Ok((0.0, 0.0, 0.0));
    }
    let omega = omega_sq.sqrt();
    // d/dt of the Gaussian log-envelopes
    let lp = -2.0 * (t - cfg.pump_center) / (cfg.pump_width * cfg.pump_width);
    let ls = -2.0 * (t - cfg.stokes_center) / (cfg.stokes_width * cfg.stokes_width);
    let theta_dot = kappa * omega_p * omega_s * (lp - ls) / omega_sq;
    let rho = 0.5 * omega.atan2(cfg.detuning);
    let (sr, cr) = rho.sin_cos();
    let lhs1 = (theta_dot * sr * sr / cr).abs();
    let lhs2 = (theta_dot * cr * cr / sr).abs();
    Ok((lhs1, lhs2, 0.5 * omega))
}

/// Time series of the general adiabaticity ratios
/// r_k(t) = |ε_k − ε₀| / |⟨D₂|Ḃ_k⟩| with ε₀ = 0, Ḃ_k from centered finite
/// differences of continuity-tracked eigenvectors.
#[derive(Debug, Clone)]
pub struct AdiabaticitySeries {
    pub times: Vec<f64>,
    /// r_k per time sample; +inf where the matrix element underflows.
    pub ratios: Vec<[f64; 4]>,
    pub eigenvalues: Vec<[f64; 4]>,
}

pub fn adiabaticity_general(cfg: &PulseConfig, t_grid: &[f64]) -> Result<AdiabaticitySeries> {
    if t_grid.len() < 3 {
        return Err(Error::InvalidInput(
            "adiabaticity grid needs at least 3 samples".into(),
        ));
    }
    let phi = cfg.reduced_phase();
    let nu_c = cfg.nu.clamp(NU_CLAMP, std::f64::consts::FRAC_PI_2 - NU_CLAMP);
    let clamped = PulseConfig {
        nu: nu_c,
        ..cfg.clone()
    };

    let mut systems: Vec<BrightSystem> = Vec::with_capacity(t_grid.len());
    let mut frames = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let env = envelopes(t, &clamped);
        if env.c + env.d == 0.0 {
            return Err(Error::Degenerate(format!(
                "no Stokes field at t = {t}: enlarge the grid or the pulse"
            )));
        }
        let frame = dark_frame(&env, phi)?;
        let h1 = build_h1(&env, phi, cfg.detuning);
        let mut sys = bright_eigensystem(&h1, &frame)?;
        // sign continuity against the previous sample
        if let Some(prev) = systems.last() {
            for k in 0..4 {
                let overlap: C64 = prev.states[k].dotc(&sys.states[k]);
                if overlap.re < 0.0 {
                    sys.states[k] = -sys.states[k];
                }
            }
        }
        systems.push(sys);
        frames.push(frame);
    }

    let n = t_grid.len();
    let mut times = Vec::with_capacity(n - 2);
    let mut ratios = Vec::with_capacity(n - 2);
    let mut eigenvalues = Vec::with_capacity(n - 2);
    for i in 1..n - 1 {
        let dt = t_grid[i + 1] - t_grid[i - 1];
        let d2 = dark_state_d2(&frames[i]);
        let mut r = [0.0; 4];
        let mut eps = [0.0; 4];
        for k in 0..4 {
            let db = (systems[i + 1].states[k] - systems[i - 1].states[k]) / C64::new(dt, 0.0);
            let me = d2.dotc(&db).norm();
            eps[k] = systems[i].eigenvalues[k];
            r[k] = if me < 1e-300 {
                f64::INFINITY
            } else {
                eps[k].abs() / me
            };
        }
        times.push(t_grid[i]);
        ratios.push(r);
        eigenvalues.push(eps);
    }
    Ok(AdiabaticitySeries {
        times,
        ratios,
        eigenvalues,
    })
}

impl AdiabaticitySeries {
    /// CSV with columns t, r1..r4, eps1..eps4.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,r1,r2,r3,r4,eps1,eps2,eps3,eps4\n");
        for ((t, r), e) in self
            .times
            .iter()
            .zip(&self.ratios)
            .zip(&self.eigenvalues)
        {
            out.push_str(&format!(
                "{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}\n",
                t, r[0], r[1], r[2], r[3], e[0], e[1], e[2], e[3]
            ));
        }
        out
    }
}
