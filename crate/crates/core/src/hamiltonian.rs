//! The 6×6 interaction Hamiltonian in the rotating frame and the diagonal
//! phase reduction that leaves a single relevant phase.
//!
//! Basis ordering: {|0,0⟩, |1,−1⟩, |1,+1⟩, |2,−2⟩, |2,0⟩, |2,+2⟩}, ħ = 1.
//! Every coupling element carries the global 1/2 so eigenvalues are directly
//! comparable with pulse amplitudes.

use nalgebra::{SMatrix, SVector};
use num_complex::Complex64 as C64;

use crate::angular::q;
use crate::pulse::{EnvelopeSample, PulseConfig};

pub type CMat6 = SMatrix<C64, 6, 6>;
pub type CVec6 = SVector<C64, 6>;

fn cis(phi: f64) -> C64 {
    C64::new(phi.cos(), phi.sin())
}

/// Interaction Hamiltonian with explicit optical phases:
///
/// ```text
///        | 0        A e^{ia}  B e^{ib}  0         0        0        |
///        | A e^{-ia} Δ        0         qC e^{ic} D e^{id} 0        |
///  1/2 · | B e^{-ib} 0        Δ         0         C e^{ic} qD e^{id}|
///        | 0        qC e^{-ic} 0        0         0        0        |
///        | 0        D e^{-id} C e^{-ic} 0         0        0        |
///        | 0        0        qD e^{-id} 0         0        0        |
/// ```
pub fn build_hamiltonian(
    env: &EnvelopeSample,
    phases: (f64, f64, f64, f64),
    delta: f64,
) -> CMat6 {
    let (pa, pb, pc, pd) = phases;
    let mut h = CMat6::zeros();
    let half = C64::new(0.5, 0.0);
    h[(0, 1)] = half * env.a * cis(pa);
    h[(0, 2)] = half * env.b * cis(pb);
    h[(1, 1)] = half * delta;
    h[(1, 3)] = half * q() * env.c * cis(pc);
    h[(1, 4)] = half * env.d * cis(pd);
    h[(2, 2)] = half * delta;
    h[(2, 4)] = half * env.c * cis(pc);
    h[(2, 5)] = half * q() * env.d * cis(pd);
    for i in 0..6 {
        for j in (i + 1)..6 {
            h[(j, i)] = h[(i, j)].conj();
        }
    }
    h
}

/// Phase-reduced Hamiltonian H₁: all couplings real except the B element,
/// which carries e^{±iφ} with φ = φ_B − φ_A + φ_C − φ_D.
pub fn build_h1(env: &EnvelopeSample, phi: f64, delta: f64) -> CMat6 {
    build_hamiltonian(env, (0.0, phi, 0.0, 0.0), delta)
}

/// Diagonal unitary U₁ that maps H onto H₁ = U₁ H U₁†, together with the
/// surviving phase φ (reduced mod 2π).
pub fn reduce_phases(cfg: &PulseConfig) -> (CMat6, f64) {
    let (pa, pc, pd) = (cfg.phi_a, cfg.phi_c, cfg.phi_d);
    let diag = [
        cis(-(pa + pc)),
        cis(-pc),
        cis(pd - 2.0 * pc),
        C64::new(1.0, 0.0),
        cis(pd - pc),
        cis(2.0 * pd - 2.0 * pc),
    ];
    let mut u1 = CMat6::zeros();
    for (i, v) in diag.into_iter().enumerate() {
        u1[(i, i)] = v;
    }
    (u1, cfg.reduced_phase())
}

/// Hamiltonian evaluator with per-run constants (phase factors, detuning)
/// precomputed; the propagator hot loop only pays for two envelope
/// evaluations and a handful of scalar products per call.
pub struct HamiltonianOp {
    pump: crate::pulse::Envelope,
    stokes: crate::pulse::Envelope,
    eta: f64,
    nu: f64,
    delta: f64,
    ph_a: C64,
    ph_b: C64,
    ph_c: C64,
    ph_d: C64,
}

impl HamiltonianOp {
    pub fn new(cfg: &PulseConfig) -> Self {
        Self::with_envelopes(cfg.pump_envelope(), cfg.stokes_envelope(), cfg)
    }

    /// Same phases/angles/detuning as `cfg` but arbitrary envelope shapes.
    pub fn with_envelopes(
        pump: crate::pulse::Envelope,
        stokes: crate::pulse::Envelope,
        cfg: &PulseConfig,
    ) -> Self {
        Self {
            pump,
            stokes,
            eta: cfg.eta,
            nu: cfg.nu,
            delta: cfg.detuning,
            ph_a: cis(cfg.phi_a),
            ph_b: cis(cfg.phi_b),
            ph_c: cis(cfg.phi_c),
            ph_d: cis(cfg.phi_d),
        }
    }

    pub fn sample(&self, t: f64) -> EnvelopeSample {
        EnvelopeSample::from_envelopes(&self.pump, &self.stokes, self.eta, self.nu, t)
    }

    /// dψ/dt = −i H(t) ψ, written out against the sparsity pattern.
    pub fn schrodinger_rhs(&self, t: f64, psi: &CVec6) -> CVec6 {
        let e = self.sample(t);
        let half = 0.5;
        let a = self.ph_a * (half * e.a);
        let b = self.ph_b * (half * e.b);
        let qc = self.ph_c * (half * q() * e.c);
        let c = self.ph_c * (half * e.c);
        let d = self.ph_d * (half * e.d);
        let qd = self.ph_d * (half * q() * e.d);
        let dl = half * self.delta;
        let mut h_psi = CVec6::zeros();
        h_psi[0] = a * psi[1] + b * psi[2];
        h_psi[1] = a.conj() * psi[0] + dl * psi[1] + qc * psi[3] + d * psi[4];
        h_psi[2] = b.conj() * psi[0] + dl * psi[2] + c * psi[4] + qd * psi[5];
        h_psi[3] = qc.conj() * psi[1];
        h_psi[4] = d.conj() * psi[1] + c.conj() * psi[2];
        h_psi[5] = qd.conj() * psi[2];
        h_psi * (-C64::i())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pulse::{envelopes, reference};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_2;

    fn mat_abs_max(m: &CMat6) -> f64 {
        m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn detuning_only() {
        let env = EnvelopeSample {
            a: 0.0,
            b: 0.0,
            c: 0.0,
            d: 0.0,
        };
        let h = build_hamiltonian(&env, (0.0, 0.0, 0.0, 0.0), 2.0);
        for i in 0..6 {
            for j in 0..6 {
                let want = if i == j && (i == 1 || i == 2) { 1.0 } else { 0.0 };
                assert_eq!(h[(i, j)], C64::new(want, 0.0));
            }
        }
    }

    #[test]
    fn single_coupling() {
        let env = EnvelopeSample {
            a: 2.0,
            b: 0.0,
            c: 0.0,
            d: 0.0,
        };
        let h = build_hamiltonian(&env, (0.0, 0.0, 0.0, 0.0), 2.0);
        assert_eq!(h[(0, 1)], C64::new(1.0, 0.0));
        assert_eq!(h[(1, 0)], C64::new(1.0, 0.0));
        assert_eq!(h[(1, 1)], C64::new(1.0, 0.0));
        assert_eq!(h[(2, 2)], C64::new(1.0, 0.0));
        assert_eq!(h[(0, 2)], C64::new(0.0, 0.0));
    }

    #[test]
    fn stokes_strong_channel_phase() {
        let env = EnvelopeSample {
            a: 0.0,
            b: 0.0,
            c: 1.0,
            d: 0.0,
        };
        let h = build_hamiltonian(&env, (0.0, 0.0, FRAC_PI_2, 0.0), 0.0);
        let want = C64::new(0.0, 0.5 * 6.0_f64.sqrt());
        assert_abs_diff_eq!((h[(1, 3)] - want).norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn zero_pattern_matches_linkage() {
        let env = EnvelopeSample {
            a: 1.0,
            b: 2.0,
            c: 3.0,
            d: 4.0,
        };
        let h = build_hamiltonian(&env, (0.1, 0.2, 0.3, 0.4), 1.5);
        let coupled = [
            (0, 1),
            (0, 2),
            (1, 3),
            (1, 4),
            (2, 4),
            (2, 5),
            (1, 1),
            (2, 2),
        ];
        for i in 0..6 {
            for j in i..6 {
                let expect_zero = !coupled.contains(&(i, j));
                assert_eq!(
                    h[(i, j)] == C64::new(0.0, 0.0),
                    expect_zero,
                    "pattern mismatch at ({i},{j})"
                );
            }
        }
    }

    #[test]
    fn reduce_phases_trivial_and_single() {
        let cfg = PulseConfig {
            ..reference::fig2()
        };
        let zeroed = PulseConfig {
            phi_b: 0.0,
            ..cfg.clone()
        };
        let (u1, phi) = reduce_phases(&zeroed);
        assert_eq!(phi, 0.0);
        assert!(mat_abs_max(&(u1 - CMat6::identity())) < 1e-15);

        let only_b = PulseConfig {
            phi_b: std::f64::consts::PI,
            phi_a: 0.0,
            phi_c: 0.0,
            phi_d: 0.0,
            ..cfg
        };
        let (_, phi) = reduce_phases(&only_b);
        assert_abs_diff_eq!(phi, std::f64::consts::PI, epsilon = 1e-15);
    }

    proptest! {
        #[test]
        fn hermitian_and_phase_reduction(
            a in 0.0..10.0f64, b in 0.0..10.0f64,
            c in 0.0..10.0f64, d in 0.0..10.0f64,
            pa in 0.0..std::f64::consts::TAU, pb in 0.0..std::f64::consts::TAU,
            pc in 0.0..std::f64::consts::TAU, pd in 0.0..std::f64::consts::TAU,
            delta in -5.0..5.0f64,
        ) {
            let env = EnvelopeSample { a, b, c, d };
            let h = build_hamiltonian(&env, (pa, pb, pc, pd), delta);
            prop_assert!(mat_abs_max(&(h - h.adjoint())) < 1e-14);

            // U1 H U1+ must equal the reduced form with the single phase phi
            let cfg = PulseConfig {
                phi_a: pa, phi_b: pb, phi_c: pc, phi_d: pd,
                ..reference::fig2()
            };
            let (u1, phi) = reduce_phases(&cfg);
            let transformed = u1 * h * u1.adjoint();
            let h1 = build_h1(&env, phi, delta);
            prop_assert!(mat_abs_max(&(transformed - h1)) < 1e-13);
            if b > 1e-9 {
                let el = transformed[(0, 2)];
                prop_assert!((el.norm() - b / 2.0).abs() < 1e-12);
                let arg_diff = (el.arg() - phi).rem_euclid(std::f64::consts::TAU);
                prop_assert!(arg_diff < 1e-10 || arg_diff > std::f64::consts::TAU - 1e-10);
            }
        }

        #[test]
        fn rhs_matches_dense_matvec(
            t in -10.0..10.0f64,
            eta in 0.0..FRAC_PI_2, nu in 0.0..FRAC_PI_2,
            pa in 0.0..std::f64::consts::TAU, pb in 0.0..std::f64::consts::TAU,
            re in proptest::array::uniform6(-1.0..1.0f64),
            im in proptest::array::uniform6(-1.0..1.0f64),
        ) {
            let cfg = PulseConfig { eta, nu, phi_a: pa, phi_b: pb, ..reference::fig2() };
            let op = HamiltonianOp::new(&cfg);
            let psi = CVec6::from_iterator(
                re.iter().zip(im.iter()).map(|(&r, &i)| C64::new(r, i)),
            );
            let fast = op.schrodinger_rhs(t, &psi);
            let h = build_hamiltonian(
                &envelopes(t, &cfg),
                (cfg.phi_a, cfg.phi_b, cfg.phi_c, cfg.phi_d),
                cfg.detuning,
            );
            let dense = (h * psi) * (-C64::i());
            prop_assert!((fast - dense).norm() < 1e-13);
        }
    }
}
