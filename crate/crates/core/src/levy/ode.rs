use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub min_step: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rtol: 1e-9,
            atol: 1e-12,
            min_step: 1e-14,
            max_steps: 1_000_000,
        }
    }
}

// Dormand–Prince 5(4) tableau (autonomous, so the nodes are not needed).
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrates the autonomous scalar ODE `y' = f(y)` from `y0` over `[0, t]`
/// with an adaptive Dormand–Prince pair.
pub fn integrate_scalar(f: &dyn Fn(f64) -> f64, y0: f64, t: f64, opts: OdeOptions) -> Result<f64> {
    if t <= 0.0 {
        return Ok(y0);
    }
    let mut s = 0.0;
    let mut y = y0;
    let mut h = (t / 100.0).min(1e-2).max(opts.min_step);
    let mut k = [0.0; 7];
    for _ in 0..opts.max_steps {
        if s >= t {
            return Ok(y);
        }
        if s + h > t {
            h = t - s;
        }
        for i in 0..7 {
            let mut yi = y;
            for j in 0..i {
                yi += h * A[i][j] * k[j];
            }
            k[i] = f(yi);
        }
        let mut y5 = y;
        let mut y4 = y;
        for i in 0..7 {
            y5 += h * B5[i] * k[i];
            y4 += h * B4[i] * k[i];
        }
        let scale = opts.atol + opts.rtol * y.abs().max(y5.abs());
        let err = ((y5 - y4) / scale).abs();
        if err <= 1.0 || h <= opts.min_step {
            if !y5.is_finite() {
                return Err(Error::StepUnderflow { at: s });
            }
            s += h;
            y = y5;
        }
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        let next = h * factor;
        if next < opts.min_step && s < t {
            return Err(Error::StepUnderflow { at: s });
        }
        h = next;
    }
    Err(Error::StepUnderflow { at: s })
}

/// `u_t(lambda) = lambda - int_0^t psi(u_s(lambda)) ds`, solved as
/// `du/ds = -psi(u)`, `u_0 = lambda`.
pub fn semigroup_u(psi: &dyn Fn(f64) -> f64, lambda: f64, t: f64, opts: OdeOptions) -> Result<f64> {
    integrate_scalar(&|u| -psi(u), lambda, t, opts)
}
