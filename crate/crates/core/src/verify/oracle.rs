//! Slow reference implementations used to check the fast ones.

use crate::path::CadlagPath;

/// Generation sizes of the tree coded by a finite-variation contour.
///
/// Each jump is an individual born at the pre-jump level. Its parent is the
/// latest earlier individual `i` whose contour has not gone back down to
/// its birth level between the two jumps, i.e. `inf_[t_i, t_j) f > a_i`;
/// the root when there is none. Quadratic in the number of jumps.
pub fn brute_force_generations(contour: &CadlagPath) -> Vec<usize> {
    let knots = contour.knots();
    if knots.is_empty() {
        return Vec::new();
    }
    // Index of the post-jump knot and birth level of each individual.
    let mut born: Vec<(usize, f64)> = vec![(0, f64::NEG_INFINITY)];
    for i in 1..knots.len() {
        if knots[i].t == knots[i - 1].t && knots[i].v > knots[i - 1].v {
            born.push((i, knots[i - 1].v));
        }
    }
    let mut generation = vec![0usize; born.len()];
    for j in 1..born.len() {
        let end = born[j].0 - 1;
        let parent = (1..j)
            .rev()
            .find(|&i| {
                let (start, level) = born[i];
                knots[start..=end].iter().all(|k| k.v > level)
            })
            .unwrap_or(0);
        generation[j] = generation[parent] + 1;
    }
    let mut sizes = Vec::new();
    for g in generation {
        if sizes.len() <= g {
            sizes.resize(g + 1, 0);
        }
        sizes[g] += 1;
    }
    sizes
}
