use std::io::Write;

use crate::error::{Error, Result};
use crate::path::CadlagPath;
use crate::tree::ChronologicalTree;

/// Bins `[start + i w, start + (i + 1) w)` for `i < bins`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LevelGrid {
    pub start: f64,
    pub width: f64,
    pub bins: usize,
}

impl LevelGrid {
    /// Covers `[0, top)` with bins of width close to `width`.
    pub fn uniform(top: f64, width: f64) -> Self {
        let bins = (top / width).round().max(1.0) as usize;
        LevelGrid {
            start: 0.0,
            width: top / bins as f64,
            bins,
        }
    }

    /// A single bin of width `width` centred on `a`.
    pub fn centred(a: f64, width: f64) -> Self {
        LevelGrid {
            start: a - 0.5 * width,
            width,
            bins: 1,
        }
    }

    pub fn top(&self) -> f64 {
        self.start + self.width * self.bins as f64
    }

    /// Left edges.
    pub fn levels(&self) -> Vec<f64> {
        (0..self.bins).map(|i| self.start + i as f64 * self.width).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LevelProfile {
    pub grid: LevelGrid,
    /// Prolific lines alive at each bin's reference level.
    pub z1: Vec<usize>,
    /// Occupation density of the heights in each bin.
    pub z2: Vec<f64>,
}

impl LevelProfile {
    /// Total mass seen by the grid.
    pub fn z2_mass(&self) -> f64 {
        self.z2.iter().sum::<f64>() * self.grid.width
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "a,z1,z2")?;
        for ((a, z1), z2) in self.grid.levels().iter().zip(&self.z1).zip(&self.z2) {
            writeln!(w, "{a},{z1},{z2}")?;
        }
        Ok(())
    }
}

/// Level counts from the prolific tags of `lines` and occupation densities
/// of the height process `heights`.
///
/// `z1` is read at the centre of a single-bin grid and at the left edge of
/// each bin otherwise. The grid must stay below the truncation height.
pub fn level_profile(
    heights: &CadlagPath,
    lines: Option<&ChronologicalTree>,
    grid: &LevelGrid,
    truncation: f64,
) -> Result<LevelProfile> {
    if grid.top() > truncation + 1e-12 {
        return Err(Error::GridExceedsTruncation {
            top: grid.top(),
            r: truncation,
        });
    }
    let mut z2 = vec![0.0; grid.bins];
    for p in heights.pieces() {
        let len = p.end_time - p.start_time;
        let v0 = p.start_value;
        let v1 = v0 + p.slope * len;
        occupy(&mut z2, grid, v0.min(v1), v0.max(v1), len);
    }
    for z in &mut z2 {
        *z /= grid.width;
    }
    let refs: Vec<f64> = if grid.bins == 1 {
        vec![grid.start + 0.5 * grid.width]
    } else {
        grid.levels()
    };
    let z1 = refs
        .iter()
        .map(|&a| {
            lines.map_or(0, |t| {
                t.nodes()
                    .iter()
                    .filter(|n| n.prolific && n.birth <= a && a < n.top())
                    .count()
            })
        })
        .collect();
    Ok(LevelProfile { grid: *grid, z1, z2 })
}

/// Spreads `len` uniformly over the value range `[lo, hi]`.
fn occupy(z2: &mut [f64], grid: &LevelGrid, lo: f64, hi: f64, len: f64) {
    let w = grid.width;
    let idx = |v: f64| ((v - grid.start) / w).floor();
    if hi - lo <= 0.0 {
        let i = idx(lo);
        if i >= 0.0 && (i as usize) < z2.len() {
            z2[i as usize] += len;
        }
        return;
    }
    let first = idx(lo).max(0.0) as usize;
    let last = idx(hi).min(z2.len() as f64 - 1.0);
    if last < 0.0 {
        return;
    }
    for (i, z) in z2.iter_mut().enumerate().take(last as usize + 1).skip(first) {
        let a = grid.start + i as f64 * w;
        let overlap = (hi.min(a + w) - lo.max(a)).max(0.0);
        *z += len * overlap / (hi - lo);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use crate::sim::simulate_yule_contour;
    use proptest::prelude::*;

    #[test]
    fn segment_has_mass_x() {
        let seg = CadlagPath::from_points(&[(0.0, 0.7), (0.7, 0.0)]);
        let p = level_profile(&seg, None, &LevelGrid::uniform(1.0, 0.05), 1.0).unwrap();
        assert!((p.z2_mass() - 0.7).abs() < 1e-12);
        assert!(p.z2[..14].iter().all(|&z| (z - 1.0).abs() < 1e-9));
        assert!(p.z2[14..].iter().all(|&z| z.abs() < 1e-12));
    }

    #[test]
    fn yule_counts() {
        let y = simulate_yule_contour(1.0, 1.0, &mut stream(2, 2));
        let mut t = ChronologicalTree::from_contour(&y.contour).unwrap();
        for i in 0..t.len() {
            t.set_prolific(i, true);
        }
        let p = level_profile(&y.contour, Some(&t), &LevelGrid::uniform(1.0, 0.1), 1.0).unwrap();
        assert_eq!(p.z1[0], 1);
        assert!(p.z1.windows(2).all(|w| w[0] <= w[1]));
        let last = t.nodes().iter().filter(|n| n.birth <= 0.999).count();
        let p2 = level_profile(&y.contour, Some(&t), &LevelGrid::centred(0.999, 0.001), 1.0).unwrap();
        assert_eq!(p2.z1[0], last);
        assert_eq!(last, y.n_r);
    }

    #[test]
    fn sin_tree_has_one_line() {
        let t = ChronologicalTree::with_root(0.0, 1.0, true);
        let p = level_profile(&CadlagPath::empty(), Some(&t), &LevelGrid::uniform(1.0, 0.25), 1.0).unwrap();
        assert_eq!(p.z1, vec![1, 1, 1, 1]);
    }

    #[test]
    fn grid_above_truncation() {
        let err = level_profile(&CadlagPath::empty(), None, &LevelGrid::uniform(2.0, 0.1), 1.0).unwrap_err();
        assert!(matches!(err, Error::GridExceedsTruncation { .. }));
    }

    #[test]
    fn csv_header() {
        let seg = CadlagPath::from_points(&[(0.0, 0.5), (0.5, 0.0)]);
        let p = level_profile(&seg, None, &LevelGrid::uniform(1.0, 0.5), 1.0).unwrap();
        let mut out = Vec::new();
        p.write_csv(&mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "a,z1,z2\n0,0,1\n0.5,0,0\n");
    }

    proptest! {
        #[test]
        fn conservation(pts in proptest::collection::vec((0.01f64..1.0, 0.0f64..0.99), 1..40)) {
            let mut t = 0.0;
            let mut p = vec![(0.0, 0.5)];
            for (dt, v) in pts {
                t += dt;
                p.push((t, v));
            }
            let path = CadlagPath::from_points(&p);
            let prof = level_profile(&path, None, &LevelGrid::uniform(1.0, 0.03), 1.0).unwrap();
            prop_assert!((prof.z2_mass() - path.lifetime()).abs() <= 1e-9 * path.lifetime().max(1.0));
            prop_assert!(prof.z2.iter().all(|&z| z >= 0.0));
        }
    }
}
