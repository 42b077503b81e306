use serde::Serialize;

use crate::error::{Error, Result};
use crate::path::{CadlagPath, KnotBuf};

/// Values of the occupation estimator on a time grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HeightEstimate {
    pub times: Vec<f64>,
    /// Estimate at the last (smallest) epsilon.
    pub values: Vec<f64>,
    pub epsilons: Vec<f64>,
    /// `ladder[i][k]`: estimate at `times[i]` with `epsilons[k]`.
    pub ladder: Vec<Vec<f64>>,
    /// The path jumps at this time.
    pub upward: Vec<bool>,
}

/// `(1/eps) Leb{s <= t : X_s - min_{[s,t]} X <= eps}` for each `t` and each
/// `eps` of a decreasing ladder.
///
/// The path must carry a Brownian mesh `h`, and every `eps` must be at
/// least `10 sqrt(2 beta h)`.
pub fn height_estimate(path: &CadlagPath, times: &[f64], epsilons: &[f64], beta: f64) -> Result<HeightEstimate> {
    let Some(h) = path.mesh().filter(|_| beta > 0.0) else {
        return Err(Error::NonGrey);
    };
    let floor = 10.0 * (2.0 * beta * h).sqrt();
    if let Some(&eps) = epsilons.iter().find(|&&e| e < floor) {
        return Err(Error::EpsilonBelowResolution { eps, floor });
    }
    if epsilons.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Config("epsilon ladder must be strictly decreasing".into()));
    }
    let jumps: Vec<f64> = path.jumps().iter().map(|j| j.0).collect();
    let mut ladder = Vec::with_capacity(times.len());
    for &t in times {
        if !(0.0..=path.lifetime()).contains(&t) {
            return Err(Error::OutOfDomain { t, m: path.lifetime() });
        }
        let occ = backward_occupation(path, t, epsilons);
        ladder.push(occ.iter().zip(epsilons).map(|(o, e)| o / e).collect::<Vec<f64>>());
    }
    Ok(HeightEstimate {
        times: times.to_vec(),
        values: ladder.iter().map(|l| *l.last().unwrap_or(&0.0)).collect(),
        epsilons: epsilons.to_vec(),
        upward: times
            .iter()
            .map(|t| jumps.iter().any(|j| (j - t).abs() <= 1e-12))
            .collect(),
        ladder,
    })
}

/// Walks the pieces backwards from `t`, keeping the minimum over `[s, t]`.
fn backward_occupation(path: &CadlagPath, t: f64, epsilons: &[f64]) -> Vec<f64> {
    let knots = path.knots();
    let mut occ = vec![0.0; epsilons.len()];
    let end = knots.partition_point(|k| k.t <= t);
    if end == 0 {
        return occ;
    }
    // The piece containing t is cut at t.
    let mut hi_t = t;
    let mut hi_v = path.value_at(t).unwrap();
    let mut m = hi_v;
    for k in knots[..end].iter().rev() {
        let (lo_t, lo_v) = (k.t, k.v);
        let len = hi_t - lo_t;
        if len > 0.0 {
            for (o, &e) in occ.iter_mut().zip(epsilons) {
                *o += measure_within(lo_v, hi_v, len, m, e);
            }
            m = m.min(lo_v).min(hi_v);
        } else {
            m = m.min(lo_v);
        }
        hi_t = lo_t;
        hi_v = lo_v;
    }
    occ
}

/// Time spent by the linear piece from `lo` to `hi` (over `len`) at points
/// `s` with `v(s) - min(m, min_{[s, end]} v) <= eps`.
fn measure_within(lo: f64, hi: f64, len: f64, m: f64, eps: f64) -> f64 {
    let level = if lo <= hi { m + eps } else { m.min(hi) + eps };
    // Linear piece: fraction of the piece below `level`.
    let (a, b) = (lo.min(hi), lo.max(hi));
    if level >= b {
        len
    } else if level <= a {
        0.0
    } else {
        len * (level - a) / (b - a)
    }
}

/// Exact heights for a continuous exponent without jumps:
/// `H = (X - I) / beta`, with `I` the running minimum from time 0.
pub fn height_process(contour: &CadlagPath, beta: f64) -> Result<CadlagPath> {
    if beta <= 0.0 {
        return Err(Error::NonGrey);
    }
    let mut buf = KnotBuf::default();
    let mut run_min = f64::INFINITY;
    let mut prev: Option<(f64, f64)> = None;
    for k in contour.knots() {
        if let Some((pt, pv)) = prev {
            // A new minimum reached inside a piece is reached at its end.
            if k.t > pt && k.v < run_min && pv > run_min {
                let tc = pt + (pv - run_min) / (pv - k.v) * (k.t - pt);
                buf.push(tc, 0.0);
            }
        }
        run_min = run_min.min(k.v);
        buf.push(k.t, (k.v - run_min) / beta);
        prev = Some((k.t, k.v));
    }
    Ok(CadlagPath::from_knots(buf.knots, contour.terminal(), contour.mesh()))
}
