use rand::Rng;
use rand_distr::{Distribution, Exp};

use crate::path::{CadlagPath, KnotBuf, Terminal};

#[derive(Clone, Debug, PartialEq)]
pub struct YuleContour {
    pub contour: CadlagPath,
    /// Number of individuals alive at height `r`.
    pub n_r: usize,
}

/// Truncated Yule contour: slope `-1` segments started at `r`, each cut by
/// an `Exp(b)` spacing when it is shorter than `r`; the first spacing
/// longer than `r` gives the final segment down to 0.
pub fn simulate_yule_contour<R: Rng + ?Sized>(b: f64, r: f64, rng: &mut R) -> YuleContour {
    let mut buf = KnotBuf::default();
    let mut t = 0.0;
    let mut n = 1;
    buf.push(t, r);
    loop {
        let s = if b > 0.0 {
            Exp::new(b).unwrap().sample(rng)
        } else {
            f64::INFINITY
        };
        if s > r {
            buf.push(t + r, 0.0);
            break;
        }
        t += s;
        buf.push(t, r - s);
        buf.push(t, r);
        n += 1;
    }
    YuleContour {
        contour: CadlagPath::from_knots(buf.knots, Terminal::HitZero, None),
        n_r: n,
    }
}
