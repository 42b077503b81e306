//! Piecewise-affine càdlàg paths.
//!
//! A [`CadlagPath`] is stored as an ordered list of knots `(t, v)`, linearly
//! interpolated. Two consecutive knots sharing a time form a jump: the first
//! holds the left limit, the second the value. Brownian parts are folded into
//! the knot list on a uniform mesh, recorded in [`CadlagPath::mesh`].

mod ops;
mod rmq;
mod simulate;

pub use ops::{concatenate, post_minimum, time_change_below};
pub use rmq::RangeMin;
pub use simulate::{simulate_levy, Guard, JumpSampler, SimConfig, StopRule};

use std::io::Write;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Knot {
    pub t: f64,
    pub v: f64,
}

/// How a path ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Terminal {
    Killed,
    /// Reached the target level of a hitting rule (0 for all tree contours).
    HitZero,
    Horizon,
    /// Stopped by a margin or escape rule: stands for a path drifting to
    /// infinity.
    InfiniteProxy,
}

/// An affine piece `v(t) = start_value + slope * (t - start_time)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Piece {
    pub start_time: f64,
    pub end_time: f64,
    pub start_value: f64,
    pub slope: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CadlagPath {
    knots: Vec<Knot>,
    terminal: Terminal,
    mesh: Option<f64>,
}

impl CadlagPath {
    /// The path with no knots and lifetime 0.
    pub fn empty() -> Self {
        CadlagPath {
            knots: Vec::new(),
            terminal: Terminal::HitZero,
            mesh: None,
        }
    }

    /// Builds a path from knots. Panics if times decrease.
    pub fn from_knots(knots: Vec<Knot>, terminal: Terminal, mesh: Option<f64>) -> Self {
        assert!(
            knots.windows(2).all(|w| w[0].t <= w[1].t),
            "knot times must be nondecreasing"
        );
        assert!(knots.iter().all(|k| k.t.is_finite() && k.v.is_finite()));
        CadlagPath { knots, terminal, mesh }
    }

    /// Convenience constructor from `(t, v)` pairs.
    pub fn from_points(points: &[(f64, f64)]) -> Self {
        Self::from_knots(
            points.iter().map(|&(t, v)| Knot { t, v }).collect(),
            Terminal::HitZero,
            None,
        )
    }

    pub fn knots(&self) -> &[Knot] {
        &self.knots
    }

    pub fn into_knots(self) -> Vec<Knot> {
        self.knots
    }

    pub fn terminal(&self) -> Terminal {
        self.terminal
    }

    pub fn with_terminal(mut self, terminal: Terminal) -> Self {
        self.terminal = terminal;
        self
    }

    pub fn mesh(&self) -> Option<f64> {
        self.mesh
    }

    pub fn is_empty(&self) -> bool {
        self.knots.is_empty()
    }

    pub fn lifetime(&self) -> f64 {
        self.knots.last().map_or(0.0, |k| k.t)
    }

    pub fn is_infinite(&self) -> bool {
        self.terminal == Terminal::InfiniteProxy
    }

    /// True when no Brownian mesh went into the path.
    pub fn is_finite_variation(&self) -> bool {
        self.mesh.is_none()
    }

    pub fn start_value(&self) -> Option<f64> {
        self.value_at(0.0)
    }

    pub fn end_value(&self) -> Option<f64> {
        self.knots.last().map(|k| k.v)
    }

    /// Index of the last knot with time `<= t`.
    fn last_at_or_before(&self, t: f64) -> Option<usize> {
        let n = self.knots.partition_point(|k| k.t <= t);
        n.checked_sub(1)
    }

    /// Right-continuous value `f(t)`; `None` outside `[0, lifetime]`.
    pub fn value_at(&self, t: f64) -> Option<f64> {
        if t < 0.0 || t > self.lifetime() || self.knots.is_empty() {
            return None;
        }
        let i = self.last_at_or_before(t)?;
        if i + 1 == self.knots.len() {
            return Some(self.knots[i].v);
        }
        let (a, b) = (self.knots[i], self.knots[i + 1]);
        if b.t == a.t {
            return Some(a.v);
        }
        Some(a.v + (b.v - a.v) * (t - a.t) / (b.t - a.t))
    }

    /// Left limit `f(t-)`; equals `f(0)` at `t = 0`.
    pub fn left_limit(&self, t: f64) -> Option<f64> {
        if t <= 0.0 {
            return self.value_at(0.0);
        }
        if t > self.lifetime() {
            return None;
        }
        let i = self.knots.partition_point(|k| k.t < t);
        let b = self.knots[i];
        if b.t == t {
            return Some(b.v);
        }
        let a = self.knots[i - 1];
        Some(a.v + (b.v - a.v) * (t - a.t) / (b.t - a.t))
    }

    /// Recorded jumps `(time, size)`, in time order.
    pub fn jumps(&self) -> Vec<(f64, f64)> {
        self.knots
            .windows(2)
            .filter(|w| w[0].t == w[1].t && w[0].v != w[1].v)
            .map(|w| (w[0].t, w[1].v - w[0].v))
            .collect()
    }

    /// The affine pieces of positive length.
    pub fn pieces(&self) -> Vec<Piece> {
        self.knots
            .windows(2)
            .filter(|w| w[1].t > w[0].t)
            .map(|w| Piece {
                start_time: w[0].t,
                end_time: w[1].t,
                start_value: w[0].v,
                slope: (w[1].v - w[0].v) / (w[1].t - w[0].t),
            })
            .collect()
    }

    pub fn sup(&self) -> f64 {
        self.knots.iter().map(|k| k.v).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn inf(&self) -> f64 {
        self.knots.iter().map(|k| k.v).fold(f64::INFINITY, f64::min)
    }

    /// `inf_{u in [s, t]} f(u)` by a linear scan. See [`RangeMin`] for
    /// repeated queries.
    pub fn min_over(&self, s: f64, t: f64) -> Option<f64> {
        let (s, t) = if s <= t { (s, t) } else { (t, s) };
        let mut m = self.value_at(s)?.min(self.value_at(t)?);
        let lo = self.knots.partition_point(|k| k.t <= s);
        let hi = self.knots.partition_point(|k| k.t <= t);
        for k in &self.knots[lo..hi] {
            m = m.min(k.v);
        }
        Some(m)
    }

    /// Lebesgue measure of `{t : f(t) <= r}`.
    pub fn time_at_or_below(&self, r: f64) -> f64 {
        self.pieces()
            .iter()
            .map(|p| {
                let len = p.end_time - p.start_time;
                let (v0, v1) = (p.start_value, p.start_value + p.slope * len);
                match (v0 <= r, v1 <= r) {
                    (true, true) => len,
                    (false, false) => 0.0,
                    (true, false) => (r - v0) / (v1 - v0) * len,
                    (false, true) => (r - v1) / (v0 - v1) * len,
                }
            })
            .sum()
    }

    /// Number of excursions above `low` that reach `high`; the first one may
    /// start at time 0.
    pub fn upcrossings(&self, low: f64, high: f64) -> usize {
        let mut count = 0;
        let mut armed = true;
        for k in &self.knots {
            if armed && k.v >= high {
                count += 1;
                armed = false;
            } else if !armed && k.v < low {
                armed = true;
            }
        }
        count
    }

    /// Writes the `t,value,is_jump` CSV: one row per knot, `is_jump = 1` on
    /// the knot that carries the post-jump value.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t,value,is_jump")?;
        let mut prev: Option<Knot> = None;
        for k in &self.knots {
            let jump = prev.is_some_and(|p| p.t == k.t);
            writeln!(w, "{:?},{:?},{}", k.t, k.v, u8::from(jump))?;
            prev = Some(*k);
        }
        Ok(())
    }

    /// Parses the CSV written by [`write_csv`](Self::write_csv).
    pub fn read_csv(text: &str) -> Result<Self, String> {
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some("t,value,is_jump") {
            return Err("missing header `t,value,is_jump`".into());
        }
        let mut knots = Vec::new();
        for (n, line) in lines.enumerate() {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 3 {
                return Err(format!("row {}: expected 3 columns", n + 1));
            }
            let t = f[0].parse::<f64>().map_err(|e| e.to_string())?;
            let v = f[1].parse::<f64>().map_err(|e| e.to_string())?;
            knots.push(Knot { t, v });
        }
        Ok(Self::from_knots(knots, Terminal::HitZero, None))
    }

    pub(crate) fn from_parts(knots: Vec<Knot>, terminal: Terminal, mesh: Option<f64>) -> Self {
        CadlagPath { knots, terminal, mesh }
    }
}

/// Appends knots, dropping exact repeats.
#[derive(Default)]
pub(crate) struct KnotBuf {
    pub knots: Vec<Knot>,
}

impl KnotBuf {
    pub fn push(&mut self, mut t: f64, v: f64) {
        if let Some(last) = self.knots.last() {
            // Offsets summed in different orders may disagree in the last bits.
            debug_assert!(
                t >= last.t - 1e-9 * (1.0 + last.t.abs()),
                "knot time {t} after {}",
                last.t
            );
            t = t.max(last.t);
            if last.t == t && last.v == v {
                return;
            }
        }
        self.knots.push(Knot { t, v });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zigzag() -> CadlagPath {
        CadlagPath::from_points(&[(0.0, 0.0), (1.0, 1.0), (2.0, 0.5), (3.0, 1.5), (4.0, 0.0)])
    }

    #[test]
    fn evaluation_and_limits() {
        let p = CadlagPath::from_points(&[(0.0, 1.0), (1.0, 0.0), (1.0, 2.0), (3.0, 0.0)]);
        assert_eq!(p.value_at(0.5), Some(0.5));
        assert_eq!(p.value_at(1.0), Some(2.0));
        assert_eq!(p.left_limit(1.0), Some(0.0));
        assert_eq!(p.value_at(3.5), None);
        assert_eq!(p.jumps(), vec![(1.0, 2.0)]);
        assert_eq!(p.pieces().len(), 2);
    }

    #[test]
    fn interval_minimum() {
        let p = zigzag();
        assert_eq!(p.min_over(1.0, 3.0), Some(0.5));
        assert_eq!(p.min_over(3.0, 1.0), Some(0.5));
        assert_eq!(p.min_over(1.5, 1.5), Some(0.75));
    }

    #[test]
    fn occupation_below() {
        let p = CadlagPath::from_points(&[(0.0, 0.0), (2.0, 2.0), (4.0, 0.0)]);
        assert!((p.time_at_or_below(1.0) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn csv_roundtrip() {
        let p = CadlagPath::from_points(&[(0.0, 1.0), (1.0, 0.0), (1.0, 2.0), (3.0, 0.0)]);
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,value,is_jump\n"));
        assert_eq!(text.lines().nth(3), Some("1.0,2.0,1"));
        assert_eq!(CadlagPath::read_csv(&text).unwrap().knots(), p.knots());
    }

    #[test]
    fn upcrossing_count() {
        let p = CadlagPath::from_points(&[(0.0, 1.0), (1.0, 0.0), (1.0, 1.0), (1.5, 0.95), (2.0, 1.0), (3.0, 0.0)]);
        assert_eq!(p.upcrossings(0.9, 1.0), 2);
        assert_eq!(p.upcrossings(0.99, 1.0), 3);
    }
}
