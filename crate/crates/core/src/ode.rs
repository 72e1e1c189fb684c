//! Adaptive Dormand-Prince 5(4) integrator for complex state vectors, with
//! the standard quartic dense-output interpolant for equally spaced samples.

use nalgebra::SVector;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Dense solution samples plus integration statistics.
pub struct OdeSolution<const N: usize> {
    pub times: Vec<f64>,
    pub states: Vec<SVector<C64, N>>,
    pub steps_accepted: usize,
    pub steps_rejected: usize,
}

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// embedded 4th-order weights
const E1: f64 = B1 - 5179.0 / 57600.0;
const E3: f64 = B3 - 7571.0 / 16695.0;
const E4: f64 = B4 - 393.0 / 640.0;
const E5: f64 = B5 + 92097.0 / 339200.0;
const E6: f64 = B6 - 187.0 / 2100.0;
const E7: f64 = -1.0 / 40.0;
// dense-output weights
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;

fn scaled_error<const N: usize>(
    err: &SVector<C64, N>,
    y0: &SVector<C64, N>,
    y1: &SVector<C64, N>,
    rtol: f64,
    atol: f64,
) -> f64 {
    let mut acc = 0.0;
    for i in 0..N {
        let scale = atol + rtol * y0[i].norm().max(y1[i].norm());
        let e = err[i].norm() / scale;
        acc += e * e;
    }
    (acc / N as f64).sqrt()
}

/// Integrate dy/dt = f(t, y) over `span`, producing `samples` equally spaced
/// dense-output points (the span endpoints included).
pub fn integrate_adaptive<const N: usize, F>(
    rhs: F,
    span: (f64, f64),
    y0: SVector<C64, N>,
    rtol: f64,
    atol: f64,
    samples: usize,
) -> Result<OdeSolution<N>>
where
    F: Fn(f64, &SVector<C64, N>) -> SVector<C64, N>,
{
    let (t0, t1) = span;
    if !(t1 > t0) || rtol <= 0.0 || atol <= 0.0 || samples < 2 {
        return Err(Error::InvalidInput(
            "integration needs t1 > t0, positive tolerances, >= 2 samples".into(),
        ));
    }
    let sample_t =
        |i: usize| t0 + (t1 - t0) * i as f64 / (samples - 1) as f64;

    let mut times = Vec::with_capacity(samples);
    let mut states = Vec::with_capacity(samples);
    times.push(t0);
    states.push(y0);
    let mut next_sample = 1;

    let mut t = t0;
    let mut y = y0;
    let mut k1 = rhs(t, &y);
    let mut h = ((t1 - t0) * 1e-4).min(0.1);
    let mut accepted = 0;
    let mut rejected = 0;

    while t < t1 {
        if h < 16.0 * f64::EPSILON * t.abs().max(1.0) {
            return Err(Error::IntegrationFailure { t_last: t });
        }
        if t + h > t1 {
            h = t1 - t;
        }
        let final_step = t + h >= t1 - 1e-14 * (t1 - t0);
        let k2 = rhs(t + A21 * h, &(y + k1 * C64::from(A21 * h)));
        let k3 = rhs(
            t + 0.3 * h,
            &(y + k1 * C64::from(A31 * h) + k2 * C64::from(A32 * h)),
        );
        let k4 = rhs(
            t + 0.8 * h,
            &(y + k1 * C64::from(A41 * h) + k2 * C64::from(A42 * h) + k3 * C64::from(A43 * h)),
        );
        let k5 = rhs(
            t + 8.0 / 9.0 * h,
            &(y + k1 * C64::from(A51 * h)
                + k2 * C64::from(A52 * h)
                + k3 * C64::from(A53 * h)
                + k4 * C64::from(A54 * h)),
        );
        let k6 = rhs(
            t + h,
            &(y + k1 * C64::from(A61 * h)
                + k2 * C64::from(A62 * h)
                + k3 * C64::from(A63 * h)
                + k4 * C64::from(A64 * h)
                + k5 * C64::from(A65 * h)),
        );
        let y_new = y
            + (k1 * C64::from(B1) + k3 * C64::from(B3) + k4 * C64::from(B4)
                + k5 * C64::from(B5)
                + k6 * C64::from(B6))
                * C64::from(h);
        let k7 = rhs(t + h, &y_new);
        let err_vec = (k1 * C64::from(E1)
            + k3 * C64::from(E3)
            + k4 * C64::from(E4)
            + k5 * C64::from(E5)
            + k6 * C64::from(E6)
            + k7 * C64::from(E7))
            * C64::from(h);
        let err = scaled_error(&err_vec, &y, &y_new, rtol, atol);

        if err <= 1.0 {
            // dense output over (t, t+h]
            let ydiff = y_new - y;
            let bspl = k1 * C64::from(h) - ydiff;
            let c4 = ydiff - k7 * C64::from(h) - bspl;
            let c5 = (k1 * C64::from(D1)
                + k3 * C64::from(D3)
                + k4 * C64::from(D4)
                + k5 * C64::from(D5)
                + k6 * C64::from(D6)
                + k7 * C64::from(D7))
                * C64::from(h);
            while next_sample < samples {
                let ts = sample_t(next_sample);
                if ts > t + h && !final_step {
                    break;
                }
                let theta = ((ts - t) / h).clamp(0.0, 1.0);
                let u = y
                    + (ydiff
                        + (bspl + (c4 + c5 * C64::from(1.0 - theta)) * C64::from(theta))
                            * C64::from(1.0 - theta))
                        * C64::from(theta);
                times.push(ts);
                states.push(u);
                next_sample += 1;
            }
            t = if final_step { t1 } else { t + h };
            y = y_new;
            k1 = k7; // FSAL
            accepted += 1;
            let fac = if err == 0.0 {
                FAC_MAX
            } else {
                (SAFETY * err.powf(-0.2)).clamp(FAC_MIN, FAC_MAX)
            };
            h *= fac;
        } else {
            rejected += 1;
            h *= (SAFETY * err.powf(-0.2)).clamp(FAC_MIN, 1.0);
        }
    }

    Ok(OdeSolution {
        times,
        states,
        steps_accepted: accepted,
        steps_rejected: rejected,
    })
}
