use super::CadlagPath;

/// Sparse table over knot values: `O(n log n)` build, `O(1)` interval
/// minima `inf_{[s, t]} f`.
pub struct RangeMin<'a> {
    path: &'a CadlagPath,
    table: Vec<Vec<f64>>,
}

impl<'a> RangeMin<'a> {
    pub fn new(path: &'a CadlagPath) -> Self {
        let base: Vec<f64> = path.knots().iter().map(|k| k.v).collect();
        let mut table = vec![base];
        let mut width = 1;
        while 2 * width <= table[0].len() {
            let prev = table.last().unwrap();
            let next: Vec<f64> = (0..prev.len() - width).map(|i| prev[i].min(prev[i + width])).collect();
            table.push(next);
            width *= 2;
        }
        RangeMin { path, table }
    }

    pub fn path(&self) -> &CadlagPath {
        self.path
    }

    /// Minimum of knot values with index in `lo..hi`.
    fn knot_min(&self, lo: usize, hi: usize) -> f64 {
        if lo >= hi {
            return f64::INFINITY;
        }
        let level = (usize::BITS - 1 - (hi - lo).leading_zeros()) as usize;
        let row = &self.table[level];
        row[lo].min(row[hi - (1 << level)])
    }

    pub fn min_over(&self, s: f64, t: f64) -> Option<f64> {
        let (s, t) = if s <= t { (s, t) } else { (t, s) };
        let knots = self.path.knots();
        let ends = self.path.value_at(s)?.min(self.path.value_at(t)?);
        let lo = knots.partition_point(|k| k.t <= s);
        let hi = knots.partition_point(|k| k.t <= t);
        Some(ends.min(self.knot_min(lo, hi)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn agrees_with_scan(vals in proptest::collection::vec(-5.0f64..5.0, 2..60),
                            a in 0.0f64..1.0, b in 0.0f64..1.0) {
            let n = vals.len();
            let pts: Vec<(f64, f64)> = vals.iter().enumerate().map(|(i, &v)| (i as f64, v)).collect();
            let p = CadlagPath::from_points(&pts);
            let rm = RangeMin::new(&p);
            let (s, t) = (a * (n - 1) as f64, b * (n - 1) as f64);
            prop_assert_eq!(rm.min_over(s, t), p.min_over(s, t));
        }
    }
}
