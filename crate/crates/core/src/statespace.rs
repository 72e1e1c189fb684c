//! Closed-form adiabatic final state, (θ, χ, δ) target coordinates, pulse
//! phase adjustment, and inverse pulse design.
//!
//! The final superposition over {|2,−2⟩, |2,0⟩, |2,+2⟩} depends only on the
//! polarization angles, the single reduced phase φ, and the optical phases —
//! not on the pulse amplitudes or widths (the transfer is adiabatically
//! robust), so the design map (η, ν, φ) → (θ, χ, δ) is envelope-free.

use std::f64::consts::{FRAC_PI_2, TAU};

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::angular::q;
use crate::error::{Error, Result};
use crate::frame::NU_CLAMP;
use crate::hamiltonian::CVec6;
use crate::pulse::PulseConfig;

fn cis(phi: f64) -> C64 {
    C64::new(phi.cos(), phi.sin())
}

/// Adiabatic-limit final state for `cfg` (counterintuitive pulse ordering
/// assumed), with the frame parameters evaluated in the late-time limit
/// C, D → 0 at fixed k = cot ν.
pub fn analytic_final_state(cfg: &PulseConfig) -> CVec6 {
    let phi = cfg.reduced_phase();
    let nu = cfg.nu.clamp(NU_CLAMP, FRAC_PI_2 - NU_CLAMP);
    let k = nu.cos() / nu.sin();
    let (a, b) = (cfg.eta.cos(), cfg.eta.sin());

    let k4p1 = k.powi(4) + 1.0;
    let x = (k.powi(4) + k * k * q() * q() + 1.0).sqrt() / k4p1.sqrt();
    let y = -q() / k4p1.sqrt();
    let cos_phi = phi.cos();
    let r = (a * a * k * k + b * b - 2.0 * a * b * k * cos_phi).max(0.0).sqrt();
    let s = (a * a + b * b * k.powi(6) + 2.0 * a * b * k.powi(3) * cos_phi)
        .max(0.0)
        .sqrt();
    let xi = (b * phi.sin()).atan2(a * k - b * cos_phi);
    let zeta = xi + (b * k.powi(3) * phi.sin()).atan2(a + b * k.powi(3) * cos_phi);
    let beta = (-(y / x) * s / r).atan();
    let (sb, cb) = beta.sin_cos();

    let e_ze = cis(-zeta);
    let b4 = e_ze * (-(y * y * k / (q() * x)) * sb) + C64::from((y * k * k / q()) * cb);
    let b5 = e_ze * (-sb / x);
    let b6 = e_ze * (-(y * y * k.powi(3) / (q() * x)) * sb) - C64::from((y / q()) * cb);

    let mut v = CVec6::zeros();
    v[3] = b4 * cis(-(cfg.phi_a + cfg.phi_c - xi));
    v[4] = b5 * cis(-(cfg.phi_a + cfg.phi_d - xi));
    v[5] = b6 * cis(-(cfg.phi_a - cfg.phi_c + 2.0 * cfg.phi_d - xi));
    v
}

/// A prescribed final superposition: non-negative amplitudes (c₁, c₂, c₃)
/// on {|2,−2⟩, |2,0⟩, |2,+2⟩} with phases (φ₁, φ₂, φ₃).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetState {
    amplitudes: [f64; 3],
    phases: [f64; 3],
}

impl TargetState {
    pub fn new(amplitudes: [f64; 3], phases: [f64; 3]) -> Result<Self> {
        if amplitudes.iter().any(|c| *c < 0.0) {
            return Err(Error::InvalidInput("target amplitudes must be >= 0".into()));
        }
        let norm2: f64 = amplitudes.iter().map(|c| c * c).sum();
        if (norm2 - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!(
                "target not normalized: |c|^2 = {norm2}"
            )));
        }
        if phases.iter().any(|p| !(0.0..TAU).contains(p)) {
            return Err(Error::InvalidInput("target phases must be in [0, 2pi)".into()));
        }
        Ok(Self { amplitudes, phases })
    }

    pub fn amplitudes(&self) -> [f64; 3] {
        self.amplitudes
    }

    pub fn phases(&self) -> [f64; 3] {
        self.phases
    }

    /// The target as a bare-basis state vector.
    pub fn to_vector(&self) -> CVec6 {
        let mut v = CVec6::zeros();
        for i in 0..3 {
            v[3 + i] = cis(self.phases[i]) * self.amplitudes[i];
        }
        v
    }

    pub fn from_vector(psi: &CVec6) -> Result<Self> {
        let support: f64 = (0..3).map(|i| psi[i].norm_sqr()).sum();
        if support.sqrt() > 1e-6 {
            return Err(Error::InvalidInput(format!(
                "state has support {} outside the J=2 components",
                support.sqrt()
            )));
        }
        let mut amplitudes = [0.0; 3];
        let mut phases = [0.0; 3];
        for i in 0..3 {
            let z = psi[3 + i];
            amplitudes[i] = z.norm();
            phases[i] = if z.norm() < ZERO_AMPLITUDE {
                0.0
            } else {
                z.arg().rem_euclid(TAU)
            };
        }
        let norm2: f64 = amplitudes.iter().map(|c| c * c).sum();
        let norm = norm2.sqrt();
        for c in &mut amplitudes {
            *c /= norm;
        }
        Ok(Self { amplitudes, phases })
    }
}

/// Amplitudes below this contribute phase 0 to δ and mark the state
/// gauge-degenerate (δ is not well defined on the boundary).
pub const ZERO_AMPLITUDE: f64 = 1e-10;

/// Polar coordinates of a target state: c₁ = cos θ, c₂ = sin θ cos χ,
/// c₃ = sin θ sin χ, δ = φ₁ + φ₃ − 2φ₂ mod 2π.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateCoords {
    pub theta: f64,
    pub chi: f64,
    pub delta: f64,
    /// True when some amplitude is ≈ 0, making δ (or χ) a gauge choice.
    pub gauge_degenerate: bool,
}

/// Coordinates of a state supported on the J=2 components.
pub fn state_to_coords(psi: &CVec6) -> Result<StateCoords> {
    let target = TargetState::from_vector(psi)?;
    Ok(target_coords(&target))
}

pub fn target_coords(t: &TargetState) -> StateCoords {
    let [c1, c2, c3] = t.amplitudes;
    let theta = c1.clamp(0.0, 1.0).acos();
    let chi = if c2 < ZERO_AMPLITUDE && c3 < ZERO_AMPLITUDE {
        0.0
    } else {
        c3.atan2(c2)
    };
    let degenerate = t.amplitudes.iter().any(|c| *c < ZERO_AMPLITUDE);
    let ph = |i: usize| {
        if t.amplitudes[i] < ZERO_AMPLITUDE {
            0.0
        } else {
            t.phases[i]
        }
    };
    let delta = (ph(0) + ph(2) - 2.0 * ph(1)).rem_euclid(TAU);
    StateCoords {
        theta,
        chi,
        delta,
        gauge_degenerate: degenerate,
    }
}

/// Inverse of [`state_to_coords`] with the gauge convention
/// φ₁ = φ₃ = δ/2, φ₂ = 0.
pub fn coords_to_state(coords: &StateCoords) -> TargetState {
    let (st, ct) = coords.theta.sin_cos();
    let (sx, cx) = coords.chi.sin_cos();
    let half = (coords.delta / 2.0).rem_euclid(TAU);
    TargetState {
        amplitudes: [ct, st * cx, st * sx],
        phases: [half, 0.0, half],
    }
}

/// Coordinates of an arbitrary final state after projecting out any residual
/// excited/initial population (used on numerically integrated states, which
/// carry O(leakage) amplitude outside the J=2 components).
pub fn coords_from_projection(psi: &CVec6) -> StateCoords {
    let mut proj = CVec6::zeros();
    for i in 3..6 {
        proj[i] = psi[i];
    }
    let n = proj.norm();
    if n > 0.0 {
        proj /= C64::from(n);
    }
    state_to_coords(&proj).expect("projected state is supported on J=2")
}

/// Pulse phases (φ_A, φ_B, φ_C, φ_D) that turn a base run — produced with
/// φ_A = φ_C = φ_D = 0, φ_B = `base_phi` — into the prescribed target:
///
/// φ_A = arg ψ₅ − φ₂, φ_B = φ + arg ψ₆ − φ₃,
/// φ_C = arg ψ₅ − arg ψ₆ + φ₃ − φ₂, φ_D = 0.
///
/// Populations are untouched (φ is invariant) and the final phases become
/// the target's. Preconditions: matching populations and the δ congruence.
pub fn adjust_phases(
    base_final: &CVec6,
    base_phi: f64,
    target: &TargetState,
) -> Result<(f64, f64, f64, f64)> {
    let base = TargetState::from_vector(base_final)?;
    for i in 0..3 {
        let db = base.amplitudes[i] - target.amplitudes[i];
        if db.abs() > 1e-8 {
            return Err(Error::Precondition(format!(
                "population mismatch on component {i}: base {} vs target {}",
                base.amplitudes[i], target.amplitudes[i]
            )));
        }
    }
    let bc = target_coords(&base);
    let tc = target_coords(target);
    let ddiff = (bc.delta - tc.delta + std::f64::consts::PI).rem_euclid(TAU) - std::f64::consts::PI;
    if !(bc.gauge_degenerate || tc.gauge_degenerate) && ddiff.abs() > 1e-8 {
        return Err(Error::Precondition(format!(
            "delta mismatch: base {} vs target {}",
            bc.delta, tc.delta
        )));
    }
    let arg5 = base_final[4].arg();
    let arg6 = base_final[5].arg();
    let [_, p2, p3] = target.phases;
    let phi_a = (arg5 - p2).rem_euclid(TAU);
    let phi_b = (base_phi + arg6 - p3).rem_euclid(TAU);
    let phi_c = (arg5 - arg6 + p3 - p2).rem_euclid(TAU);
    Ok((phi_a, phi_b, phi_c, 0.0))
}

/// Euclidean distance over the three J=2 components after removing the
/// global phase (aligned at the largest-magnitude target component).
pub fn state_distance(achieved: &CVec6, target: &CVec6) -> f64 {
    let mut best = 3;
    for i in 4..6 {
        if target[i].norm() > target[best].norm() {
            best = i;
        }
    }
    let phase = if achieved[best].norm() > 0.0 && target[best].norm() > 0.0 {
        (target[best] / achieved[best]).arg()
    } else {
        0.0
    };
    let rot = cis(phase);
    (3..6)
        .map(|i| (achieved[i] * rot - target[i]).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Precomputed (η, ν, φ) → (θ, χ, δ) map on a regular grid, for
/// nearest-neighbor seeding of the inverse design.
pub struct DesignGrid {
    pub n_eta: usize,
    pub n_nu: usize,
    pub n_phi: usize,
    coords: Vec<[f32; 3]>,
}

pub const DEFAULT_GRID: (usize, usize, usize) = (141, 141, 283);

impl DesignGrid {
    fn eta_at(&self, i: usize) -> f64 {
        FRAC_PI_2 * i as f64 / (self.n_eta - 1) as f64
    }

    fn nu_at(&self, i: usize) -> f64 {
        FRAC_PI_2 * i as f64 / (self.n_nu - 1) as f64
    }

    fn phi_at(&self, i: usize) -> f64 {
        TAU * i as f64 / self.n_phi as f64
    }

    /// Evaluate the analytic map over the full grid (η, ν inclusive of both
    /// endpoints, φ half-open on [0, 2π)).
    pub fn build(n_eta: usize, n_nu: usize, n_phi: usize) -> Self {
        let mut grid = Self {
            n_eta,
            n_nu,
            n_phi,
            coords: Vec::new(),
        };
        let total = n_eta * n_nu * n_phi;
        grid.coords = (0..total)
            .into_par_iter()
            .map(|idx| {
                let (eta, nu, phi) = grid.point(idx);
                let c = coords_of_triplet(eta, nu, phi);
                [c.theta as f32, c.chi as f32, c.delta as f32]
            })
            .collect();
        grid
    }

    fn point(&self, idx: usize) -> (f64, f64, f64) {
        let i_phi = idx % self.n_phi;
        let i_nu = (idx / self.n_phi) % self.n_nu;
        let i_eta = idx / (self.n_phi * self.n_nu);
        (self.eta_at(i_eta), self.nu_at(i_nu), self.phi_at(i_phi))
    }

    /// Grid point whose image is closest to `target` in coordinate space
    /// (circular metric in δ; the δ term is dropped for gauge-degenerate
    /// targets).
    pub fn nearest(&self, target: &StateCoords) -> (f64, f64, f64) {
        let use_delta = !target.gauge_degenerate;
        let (tt, tc, td) = (
            target.theta as f32,
            target.chi as f32,
            target.delta as f32,
        );
        let tau = TAU as f32;
        let best = self
            .coords
            .par_iter()
            .enumerate()
            .map(|(i, c)| {
                let dt = c[0] - tt;
                let dc = c[1] - tc;
                let mut d2 = dt * dt + dc * dc;
                if use_delta {
                    let mut dd = (c[2] - td).abs() % tau;
                    if dd > tau / 2.0 {
                        dd = tau - dd;
                    }
                    d2 += dd * dd;
                }
                (ordered(d2), i)
            })
            .min()
            .expect("grid is not empty");
        self.point(best.1)
    }

    /// Binary cache: header (magic, dims) + little-endian f32 triples.
    pub fn save(&self, path: &std::path::Path) -> std::io::Result<()> {
        use std::io::Write;
        let tmp = path.with_extension("tmp");
        {
            let mut f = std::io::BufWriter::new(std::fs::File::create(&tmp)?);
            f.write_all(b"S6DG0001")?;
            for n in [self.n_eta as u64, self.n_nu as u64, self.n_phi as u64] {
                f.write_all(&n.to_le_bytes())?;
            }
            for c in &self.coords {
                for v in c {
                    f.write_all(&v.to_le_bytes())?;
                }
            }
        }
        std::fs::rename(tmp, path)
    }

    pub fn load(path: &std::path::Path) -> std::io::Result<Self> {
        use std::io::Read;
        let mut f = std::io::BufReader::new(std::fs::File::open(path)?);
        let mut magic = [0u8; 8];
        f.read_exact(&mut magic)?;
        if &magic != b"S6DG0001" {
            return Err(std::io::Error::new(
                std::io::ErrorKind::InvalidData,
                "not a design-grid cache",
            ));
        }
        let mut dims = [0usize; 3];
        for d in &mut dims {
            let mut buf = [0u8; 8];
            f.read_exact(&mut buf)?;
            *d = u64::from_le_bytes(buf) as usize;
        }
        let total = dims[0] * dims[1] * dims[2];
        let mut coords = Vec::with_capacity(total);
        let mut buf = [0u8; 12];
        for _ in 0..total {
            f.read_exact(&mut buf)?;
            coords.push([
                f32::from_le_bytes(buf[0..4].try_into().unwrap()),
                f32::from_le_bytes(buf[4..8].try_into().unwrap()),
                f32::from_le_bytes(buf[8..12].try_into().unwrap()),
            ]);
        }
        Ok(Self {
            n_eta: dims[0],
            n_nu: dims[1],
            n_phi: dims[2],
            coords,
        })
    }
}

fn ordered(v: f32) -> ordered_float_bits::F32Ord {
    ordered_float_bits::F32Ord(v)
}

mod ordered_float_bits {
    #[derive(PartialEq)]
    pub struct F32Ord(pub f32);
    impl Eq for F32Ord {}
    impl PartialOrd for F32Ord {
        fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
            Some(self.cmp(other))
        }
    }
    impl Ord for F32Ord {
        fn cmp(&self, other: &Self) -> std::cmp::Ordering {
            self.0.total_cmp(&other.0)
        }
    }
}

/// Coordinates produced by the analytic map at one parameter triplet, with
/// the base gauge φ_A = φ_C = φ_D = 0, φ_B = φ.
pub fn coords_of_triplet(eta: f64, nu: f64, phi: f64) -> StateCoords {
    let cfg = PulseConfig {
        eta,
        nu,
        phi_a: 0.0,
        phi_b: phi.rem_euclid(TAU),
        phi_c: 0.0,
        phi_d: 0.0,
        ..crate::pulse::reference::sweep()
    };
    coords_from_projection(&analytic_final_state(&cfg))
}

/// Result of inverse pulse design.
#[derive(Debug, Clone)]
pub struct DesignResult {
    /// Base configuration with the designed polarizations and phases filled in.
    pub config: PulseConfig,
    pub achieved: CVec6,
    pub residual: f64,
    /// Target coordinates the search aimed for.
    pub theta: f64,
    pub chi: f64,
    pub delta_target: f64,
}

impl DesignResult {
    /// Key-value record: the PulseConfig keys plus residual, theta, chi,
    /// delta_target.
    pub fn serialize(&self) -> String {
        let mut out = self.config.serialize();
        out.push_str(&format!("residual = {}\n", self.residual));
        out.push_str(&format!("theta = {}\n", self.theta));
        out.push_str(&format!("chi = {}\n", self.chi));
        out.push_str(&format!("delta_target = {}\n", self.delta_target));
        out
    }
}

fn coord_mismatch(c: &StateCoords, target: &StateCoords, use_delta: bool) -> f64 {
    let dt = c.theta - target.theta;
    let dc = c.chi - target.chi;
    let mut d2 = dt * dt + dc * dc;
    if use_delta {
        let mut dd = (c.delta - target.delta).abs() % TAU;
        if dd > std::f64::consts::PI {
            dd = TAU - dd;
        }
        d2 += dd * dd;
    }
    d2
}

/// Two-stage inverse design: nearest grid neighbor, then coordinate descent
/// with step halving on the coordinate mismatch, then the phase adjustment
/// for the gauge phases. Fails with the best candidate when the final
/// state distance exceeds `threshold`.
pub fn design_pulses(
    target: &TargetState,
    base: &PulseConfig,
    grid: &DesignGrid,
    threshold: f64,
) -> Result<DesignResult> {
    let tc = target_coords(target);
    let use_delta = !tc.gauge_degenerate;
    let (mut eta, mut nu, mut phi) = grid.nearest(&tc);
    let objective =
        |eta: f64, nu: f64, phi: f64| coord_mismatch(&coords_of_triplet(eta, nu, phi), &tc, use_delta);

    let mut f = objective(eta, nu, phi);
    let mut steps = [
        FRAC_PI_2 / (grid.n_eta - 1) as f64,
        FRAC_PI_2 / (grid.n_nu - 1) as f64,
        TAU / grid.n_phi as f64,
    ];
    for _ in 0..200 {
        let mut improved = false;
        for axis in 0..3 {
            for dir in [-1.0, 1.0] {
                let (mut e, mut n, mut p) = (eta, nu, phi);
                match axis {
                    0 => e = (e + dir * steps[0]).clamp(0.0, FRAC_PI_2),
                    1 => n = (n + dir * steps[1]).clamp(0.0, FRAC_PI_2),
                    _ => p = (p + dir * steps[2]).rem_euclid(TAU),
                }
                let fx = objective(e, n, p);
                if fx < f {
                    (eta, nu, phi) = (e, n, p);
                    f = fx;
                    improved = true;
                }
            }
        }
        if !improved {
            for s in &mut steps {
                *s *= 0.5;
            }
            if steps[0] < 1e-12 {
                break;
            }
        }
    }

    // gauge phases via the phase-adjustment map
    let base_cfg = PulseConfig {
        eta,
        nu,
        phi_a: 0.0,
        phi_b: phi,
        phi_c: 0.0,
        phi_d: 0.0,
        ..base.clone()
    };
    let base_final = analytic_final_state(&base_cfg);
    // populations were matched by the search only approximately; the
    // adjustment map needs exact-enough amplitudes, so gauge the phases
    // against a target carrying the *achieved* amplitudes
    let achieved_base = TargetState::from_vector(&base_final)?;
    let gauge_target = TargetState {
        amplitudes: achieved_base.amplitudes,
        phases: target.phases,
    };
    let (pa, pb, pc, pd) = adjust_phases(&base_final, phi, &gauge_target)?;
    let config = PulseConfig {
        phi_a: pa,
        phi_b: pb,
        phi_c: pc,
        phi_d: pd,
        ..base_cfg
    };
    let achieved = analytic_final_state(&config);
    let residual = state_distance(&achieved, &target.to_vector());
    let result = DesignResult {
        config,
        achieved,
        residual,
        theta: tc.theta,
        chi: tc.chi,
        delta_target: tc.delta,
    };
    if residual > threshold {
        return Err(Error::NoConvergence {
            eta,
            nu,
            phi,
            residual,
        });
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::{build_u, dark_frame};
    use crate::hamiltonian::{reduce_phases, CMat6};
    use crate::propagate::{initial_state, integrate, IntegratorSettings};
    use crate::pulse::{envelopes, reference};
    use approx::assert_abs_diff_eq;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    /// Direct matrix composition U₁† U_f† U_i U₁ |0,0⟩ from the frame
    /// unitaries at the span edges — the independent route to the final state.
    fn matrix_final_state(cfg: &PulseConfig) -> CVec6 {
        let (u1, phi) = reduce_phases(cfg);
        let nu = cfg.nu.clamp(NU_CLAMP, FRAC_PI_2 - NU_CLAMP);
        let clamped = PulseConfig {
            nu,
            ..cfg.clone()
        };
        let (t0, t1) = cfg.default_span();
        let u_of = |t: f64| {
            let env = envelopes(t, &clamped);
            build_u(&dark_frame(&env, phi).unwrap())
        };
        let ui = u_of(t0);
        let uf = u_of(t1);
        u1.adjoint() * uf.adjoint() * ui * u1 * initial_state()
    }

    #[test]
    fn analytic_state_is_normalized_and_j2_supported() {
        let mut rng = StdRng::seed_from_u64(31);
        for _ in 0..500 {
            let cfg = PulseConfig {
                eta: rng.gen_range(0.0..FRAC_PI_2),
                nu: rng.gen_range(0.0..FRAC_PI_2),
                phi_b: rng.gen_range(0.0..TAU),
                phi_a: rng.gen_range(0.0..TAU),
                phi_c: rng.gen_range(0.0..TAU),
                phi_d: rng.gen_range(0.0..TAU),
                ..reference::sweep()
            };
            let psi = analytic_final_state(&cfg);
            assert!((psi.norm() - 1.0).abs() < 1e-12);
            for i in 0..3 {
                assert_eq!(psi[i], C64::new(0.0, 0.0));
            }
        }
    }

    #[test]
    fn matches_matrix_composition_oracle() {
        let mut rng = StdRng::seed_from_u64(32);
        for _ in 0..200 {
            let cfg = PulseConfig {
                eta: rng.gen_range(0.0..FRAC_PI_2),
                nu: rng.gen_range(0.01..FRAC_PI_2 - 0.01),
                phi_b: rng.gen_range(0.0..TAU),
                phi_a: rng.gen_range(0.0..TAU),
                phi_c: rng.gen_range(0.0..TAU),
                phi_d: rng.gen_range(0.0..TAU),
                ..reference::sweep()
            };
            let closed = analytic_final_state(&cfg);
            let composed = matrix_final_state(&cfg);
            // the span edges carry Gaussian tails ~1e-9 of peak, so the
            // composed frames are that far from their limits
            assert!(
                (closed - composed).norm() < 1e-10,
                "closed form vs composition: {}",
                (closed - composed).norm()
            );
        }
    }

    #[test]
    fn agrees_with_integration_at_sweep_envelopes() {
        let mut worst = 0.0_f64;
        for (eta, nu, phi) in [
            (0.5, 1.04, 3.34),
            (0.5, 1.04, 4.74),
            (0.9, 0.7, 1.0),
            (0.3, 1.2, 5.5),
        ] {
            let cfg = PulseConfig {
                eta,
                nu,
                phi_b: phi,
                ..reference::sweep()
            };
            let ana = analytic_final_state(&cfg);
            let num = integrate(&cfg, &initial_state(), &IntegratorSettings::default()).unwrap();
            let dev = (0..6)
                .map(|i| (ana[i] - num.final_state()[i]).norm())
                .fold(0.0, f64::max);
            worst = worst.max(dev);
        }
        assert!(worst < 0.01, "worst per-component deviation {worst}");
    }

    #[test]
    fn coords_round_trip() {
        let mut rng = StdRng::seed_from_u64(33);
        for _ in 0..500 {
            let coords = StateCoords {
                theta: rng.gen_range(0.01..FRAC_PI_2 - 0.01),
                chi: rng.gen_range(0.01..FRAC_PI_2 - 0.01),
                delta: rng.gen_range(0.0..TAU),
                gauge_degenerate: false,
            };
            let state = coords_to_state(&coords);
            let back = target_coords(&state);
            assert_abs_diff_eq!(back.theta, coords.theta, epsilon = 1e-12);
            assert_abs_diff_eq!(back.chi, coords.chi, epsilon = 1e-12);
            let dd = (back.delta - coords.delta).abs();
            assert!(dd.min(TAU - dd) < 1e-12);
            assert!(!back.gauge_degenerate);
        }
    }

    #[test]
    fn coords_conventions_at_poles() {
        let t = TargetState::new([1.0, 0.0, 0.0], [0.0; 3]).unwrap();
        let c = target_coords(&t);
        assert_eq!((c.theta, c.chi), (0.0, 0.0));
        assert!(c.gauge_degenerate);

        let t = TargetState::new([0.0, 1.0, 0.0], [0.0; 3]).unwrap();
        let c = target_coords(&t);
        assert_abs_diff_eq!(c.theta, FRAC_PI_2, epsilon = 1e-15);
        assert_eq!(c.chi, 0.0);
    }

    #[test]
    fn rejects_support_outside_j2() {
        let mut psi = CVec6::zeros();
        psi[0] = C64::new(0.1, 0.0);
        psi[4] = C64::new((1.0_f64 - 0.01).sqrt(), 0.0);
        assert!(state_to_coords(&psi).is_err());
    }

    #[test]
    fn delta_invariant_under_phase_adjustment() {
        let mut rng = StdRng::seed_from_u64(34);
        for _ in 0..200 {
            let cfg = PulseConfig {
                eta: rng.gen_range(0.05..FRAC_PI_2 - 0.05),
                nu: rng.gen_range(0.05..FRAC_PI_2 - 0.05),
                phi_b: rng.gen_range(0.0..TAU),
                ..reference::sweep()
            };
            let base = analytic_final_state(&cfg);
            let base_coords = coords_from_projection(&base);
            // a compatible target: same amplitudes, same delta, random gauge
            let amps = TargetState::from_vector(&base).unwrap().amplitudes();
            let p2 = rng.gen_range(0.0..TAU);
            let p1 = rng.gen_range(0.0..TAU);
            let p3 = (base_coords.delta - p1 + 2.0 * p2).rem_euclid(TAU);
            let target = TargetState::new(amps, [p1, p2, p3]).unwrap();

            let (pa, pb, pc, pd) = adjust_phases(&base, cfg.phi_b, &target).unwrap();
            // the reduced phase is invariant
            let phi_after = (pb - pa + pc - pd).rem_euclid(TAU);
            let dphi = (phi_after - cfg.phi_b).abs();
            assert!(dphi.min(TAU - dphi) < 1e-10, "phi changed by {dphi}");

            // rebuilding with the new phases reproduces the target exactly
            let adjusted = PulseConfig {
                phi_a: pa,
                phi_b: pb,
                phi_c: pc,
                phi_d: pd,
                ..cfg.clone()
            };
            let out = analytic_final_state(&adjusted);
            let got = TargetState::from_vector(&out).unwrap();
            for i in 0..3 {
                assert_abs_diff_eq!(got.amplitudes()[i], amps[i], epsilon = 1e-10);
                let dp = (got.phases()[i] - target.phases()[i]).abs();
                assert!(dp.min(TAU - dp) < 1e-10, "phase {i} off by {dp}");
            }
            // delta unchanged
            let out_coords = coords_from_projection(&out);
            let dd = (out_coords.delta - base_coords.delta).abs();
            assert!(dd.min(TAU - dd) < 1e-12);
        }
    }

    #[test]
    fn adjust_phases_self_target() {
        let cfg = reference::fig2();
        let base = analytic_final_state(&cfg);
        let target = TargetState::from_vector(&base).unwrap();
        let (pa, pb, pc, pd) = adjust_phases(&base, cfg.phi_b, &target).unwrap();
        let out = analytic_final_state(&PulseConfig {
            phi_a: pa,
            phi_b: pb,
            phi_c: pc,
            phi_d: pd,
            ..cfg
        });
        assert!(state_distance(&out, &base) < 1e-12);
    }

    #[test]
    fn adjust_phases_rejects_mismatch() {
        let cfg = reference::fig2();
        let base = analytic_final_state(&cfg);
        let bad = TargetState::new(
            [0.8, 0.6, 0.0],
            [0.0, 0.0, 0.0],
        )
        .unwrap();
        assert!(matches!(
            adjust_phases(&base, cfg.phi_b, &bad),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn design_round_trip_small_grid() {
        let grid = DesignGrid::build(41, 41, 83);
        let base = reference::sweep();
        let mut rng = StdRng::seed_from_u64(35);
        for _ in 0..10 {
            let cfg = PulseConfig {
                eta: rng.gen_range(0.1..FRAC_PI_2 - 0.1),
                nu: rng.gen_range(0.1..FRAC_PI_2 - 0.1),
                phi_b: rng.gen_range(0.0..TAU),
                ..base.clone()
            };
            let target = TargetState::from_vector(&analytic_final_state(&cfg)).unwrap();
            let result = design_pulses(&target, &base, &grid, 1e-6).unwrap();
            assert!(result.residual < 1e-6, "residual {}", result.residual);
        }
    }

    #[test]
    fn design_reaches_pure_center_level() {
        // |2,0> is the A,D (eta=0, nu=pi/2) three-level limit
        let grid = DesignGrid::build(41, 41, 83);
        let target = TargetState::new([0.0, 1.0, 0.0], [0.0; 3]).unwrap();
        let result = design_pulses(&target, &reference::sweep(), &grid, 1e-6).unwrap();
        assert!(result.residual < 1e-6, "residual {}", result.residual);
        let reduced = |v: f64, lo: f64| (v - lo).abs() < 0.05;
        assert!(
            (reduced(result.config.eta, 0.0) && reduced(result.config.nu, FRAC_PI_2))
                || (reduced(result.config.eta, FRAC_PI_2) && reduced(result.config.nu, 0.0)),
            "expected a reduced-polarization solution, got eta={} nu={}",
            result.config.eta,
            result.config.nu
        );
    }

    #[test]
    fn design_interior_target() {
        let grid = DesignGrid::build(41, 41, 83);
        let coords = StateCoords {
            theta: std::f64::consts::FRAC_PI_4,
            chi: std::f64::consts::FRAC_PI_4,
            delta: 0.0,
            gauge_degenerate: false,
        };
        let target = coords_to_state(&coords);
        let result = design_pulses(&target, &reference::sweep(), &grid, 1e-4).unwrap();
        assert!(result.residual < 1e-4, "residual {}", result.residual);
    }

    #[test]
    fn grid_cache_round_trip() {
        let grid = DesignGrid::build(9, 9, 16);
        let dir = std::env::temp_dir().join("stirap6-grid-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("grid.bin");
        grid.save(&path).unwrap();
        let loaded = DesignGrid::load(&path).unwrap();
        assert_eq!(loaded.n_eta, 9);
        assert_eq!(loaded.coords.len(), grid.coords.len());
        for (a, b) in grid.coords.iter().zip(&loaded.coords) {
            assert_eq!(a, b);
        }
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn design_record_serialization() {
        let grid = DesignGrid::build(21, 21, 41);
        let target = TargetState::new([0.6, 0.64, (1.0_f64 - 0.36 - 0.4096).sqrt()], [0.1, 0.2, 0.3])
            .unwrap();
        let result = design_pulses(&target, &reference::sweep(), &grid, 1e-3).unwrap();
        let record = result.serialize();
        for key in ["rp_amp", "eta", "phib", "residual", "theta", "chi", "delta_target"] {
            assert!(record.contains(key), "missing {key} in record");
        }
    }
}
