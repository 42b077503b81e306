//! Goodness-of-fit and two-sample tests with asymptotic p-values.

use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
    /// Degrees of freedom (chi-square) or effective sample size (KS).
    pub df: f64,
}

const MIN_EXPECTED: f64 = 5.0;

fn chi_square_sf(stat: f64, df: f64) -> f64 {
    ChiSquared::new(df).unwrap().sf(stat).clamp(0.0, 1.0)
}

/// Pearson test of integer samples against `pmf` on `0, 1, 2, ...`.
/// Adjacent values are merged until every bin expects at least 5; the
/// last bin takes the whole upper tail.
pub fn chi_square_gof(samples: &[u64], pmf: &dyn Fn(u64) -> f64) -> Result<TestResult> {
    let n = samples.len();
    if n < 1000 {
        return Err(Error::DegenerateBinning(format!("{n} samples, need at least 1000")));
    }
    let max = *samples.iter().max().unwrap();
    let mut counts = vec![0u64; max as usize + 1];
    for &s in samples {
        counts[s as usize] += 1;
    }
    let nf = n as f64;
    // (observed, expected) per merged bin.
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let mut cur = (0.0, 0.0);
    let mut cum = 0.0;
    let mut k = 0u64;
    loop {
        let p = pmf(k);
        cum += p;
        cur.0 += counts.get(k as usize).copied().unwrap_or(0) as f64;
        cur.1 += nf * p;
        let tail = nf * (1.0 - cum).max(0.0);
        if cur.1 >= MIN_EXPECTED && tail >= MIN_EXPECTED {
            bins.push(cur);
            cur = (0.0, 0.0);
        } else if tail < MIN_EXPECTED {
            // Close with the upper tail.
            let observed_rest: u64 = counts.iter().skip(k as usize + 1).sum();
            cur.0 += observed_rest as f64;
            cur.1 += tail;
            bins.push(cur);
            break;
        }
        k += 1;
        if k > 1_000_000 {
            return Err(Error::DegenerateBinning("pmf does not exhaust its mass".into()));
        }
    }
    // A short last bin joins its neighbour.
    if bins.len() > 1 && bins.last().unwrap().1 < MIN_EXPECTED {
        let last = bins.pop().unwrap();
        let prev = bins.last_mut().unwrap();
        prev.0 += last.0;
        prev.1 += last.1;
    }
    if bins.len() < 2 {
        return Err(Error::DegenerateBinning("fewer than two bins".into()));
    }
    let stat: f64 = bins.iter().map(|(o, e)| (o - e).powi(2) / e).sum();
    let df = (bins.len() - 1) as f64;
    Ok(TestResult {
        statistic: stat,
        p_value: chi_square_sf(stat, df),
        df,
    })
}

/// Homogeneity test of two integer samples, merging adjacent values until
/// every cell expects at least 5.
pub fn chi_square_two_sample(a: &[u64], b: &[u64]) -> Result<TestResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::DegenerateBinning("empty sample".into()));
    }
    let max = a.iter().chain(b).copied().max().unwrap() as usize;
    let mut ca = vec![0f64; max + 1];
    let mut cb = vec![0f64; max + 1];
    a.iter().for_each(|&x| ca[x as usize] += 1.0);
    b.iter().for_each(|&x| cb[x as usize] += 1.0);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let n = na + nb;
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let mut cur = (0.0, 0.0);
    for k in 0..=max {
        cur.0 += ca[k];
        cur.1 += cb[k];
        let tot = cur.0 + cur.1;
        if tot * na.min(nb) / n >= MIN_EXPECTED {
            bins.push(cur);
            cur = (0.0, 0.0);
        }
    }
    if cur.0 + cur.1 > 0.0 {
        match bins.last_mut() {
            Some(l) => {
                l.0 += cur.0;
                l.1 += cur.1;
            }
            None => bins.push(cur),
        }
    }
    if bins.len() < 2 {
        // Both samples concentrated on one merged cell: identical laws.
        return Ok(TestResult {
            statistic: 0.0,
            p_value: 1.0,
            df: 0.0,
        });
    }
    let mut stat = 0.0;
    for &(oa, ob) in &bins {
        let tot = oa + ob;
        let ea = tot * na / n;
        let eb = tot * nb / n;
        stat += (oa - ea).powi(2) / ea + (ob - eb).powi(2) / eb;
    }
    let df = (bins.len() - 1) as f64;
    Ok(TestResult {
        statistic: stat,
        p_value: chi_square_sf(stat, df),
        df,
    })
}

/// `P(K > x)` for the Kolmogorov distribution.
pub fn kolmogorov_sf(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < 0.3 {
        // The alternating series converges slowly here; the dual series
        // sqrt(2 pi)/x sum exp(-(2k-1)^2 pi^2 / (8 x^2)) gives the cdf.
        let mut cdf = 0.0;
        for k in 1..50 {
            let m = (2 * k - 1) as f64;
            cdf += (-m * m * std::f64::consts::PI.powi(2) / (8.0 * x * x)).exp();
        }
        return (1.0 - (2.0 * std::f64::consts::PI).sqrt() / x * cdf).clamp(0.0, 1.0);
    }
    let mut s = 0.0;
    for k in 1..200 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * x * x).exp();
        s += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * s).clamp(0.0, 1.0)
}

fn ks_p(d: f64, ne: f64) -> f64 {
    let sq = ne.sqrt();
    kolmogorov_sf((sq + 0.12 + 0.11 / sq) * d)
}

/// One-sample KS test against a continuous cdf.
pub fn ks_one_sample(samples: &[f64], cdf: &dyn Fn(f64) -> f64) -> TestResult {
    let mut x = samples.to_vec();
    x.sort_by(f64::total_cmp);
    let n = x.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &v) in x.iter().enumerate() {
        let f = cdf(v);
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    TestResult {
        statistic: d,
        p_value: ks_p(d, n),
        df: n,
    }
}

/// Two-sample KS test. Ties are processed together, so the statistic only
/// compares the empirical cdfs after each distinct value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> TestResult {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (n, m) = (x.len() as f64, y.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < x.len() && j < y.len() {
        let v = x[i].min(y[j]);
        while i < x.len() && x[i] == v {
            i += 1;
        }
        while j < y.len() && y[j] == v {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    let ne = n * m / (n + m);
    TestResult {
        statistic: d,
        p_value: ks_p(d, ne),
        df: ne,
    }
}

/// Two-sided normal p-value of `(estimate - target) / se`.
pub fn z_test(estimate: f64, se: f64, target: f64) -> TestResult {
    let z = if se > 0.0 {
        (estimate - target) / se
    } else if estimate == target {
        0.0
    } else {
        f64::INFINITY
    };
    let p = 2.0 * Normal::standard().sf(z.abs());
    TestResult {
        statistic: z,
        p_value: p.clamp(0.0, 1.0),
        df: 1.0,
    }
}

/// Sample mean and its standard error.
pub fn mean_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (m, f64::INFINITY);
    }
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}
