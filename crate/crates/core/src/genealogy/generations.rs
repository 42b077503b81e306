use crate::error::{Error, Result};
use crate::path::CadlagPath;
use crate::tree::ChronologicalTree;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Generations {
    /// Number of individuals in each generation, the root's first.
    pub sizes: Vec<usize>,
    /// Generation of each individual, in order of first visit.
    pub per_node: Vec<usize>,
}

impl Generations {
    fn from_per_node(per_node: Vec<usize>) -> Self {
        let mut sizes = Vec::new();
        for &g in &per_node {
            if sizes.len() <= g {
                sizes.resize(g + 1, 0);
            }
            sizes[g] += 1;
        }
        Generations { sizes, per_node }
    }
}

/// Generations read off a finite-variation contour: each jump starts a new
/// individual, one generation below the individual visited just before it.
pub fn discrete_generations(contour: &CadlagPath) -> Result<Generations> {
    if !contour.is_finite_variation() {
        return Err(Error::NotFiniteVariation);
    }
    if contour.is_empty() {
        return Ok(Generations::from_per_node(Vec::new()));
    }
    // (birth level, generation) of the individuals being visited.
    let mut stack: Vec<(f64, usize)> = vec![(f64::NEG_INFINITY, 0)];
    let mut per_node = vec![0];
    let knots = contour.knots();
    for w in knots.windows(2).filter(|w| w[0].t == w[1].t && w[1].v > w[0].v) {
        let before = w[0].v;
        while stack.len() > 1 && stack.last().unwrap().0 >= before {
            stack.pop();
        }
        let g = stack.last().unwrap().1 + 1;
        stack.push((before, g));
        per_node.push(g);
    }
    Ok(Generations::from_per_node(per_node))
}

/// Generations of an explicit tree, in contour visit order.
pub fn tree_generations(tree: &ChronologicalTree) -> Generations {
    let order = tree.contour_order();
    Generations::from_per_node(order.iter().map(|&i| tree.depth(i)).collect())
}
