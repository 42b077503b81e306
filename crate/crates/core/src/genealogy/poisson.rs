use rand::Rng;
use rand_distr::{Distribution, Exp};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::levy::{LaplaceExponent, SplitSampler};
use crate::tree::ChronologicalTree;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BranchKind {
    /// Two prolific lines out of a Gaussian branch point.
    Binary,
    /// Branch point of infinite multiplicity created by a jump.
    Infinite,
}

impl BranchKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BranchKind::Binary => "binary",
            BranchKind::Infinite => "infinite",
        }
    }
}

/// A branch point on a prolific line with `k` new prolific lines.
#[derive(Clone, Debug, PartialEq)]
pub struct BranchEvent {
    pub parent: usize,
    pub height: f64,
    pub k: usize,
    pub kind: BranchKind,
    /// Jump size and the height of the compact part below the split, for
    /// infinite branch points.
    pub jump: Option<(f64, f64)>,
}

/// Prolific lines of the genealogical tree truncated at `a_max`, with the
/// branch points that created them.
#[derive(Clone, Debug, PartialEq)]
pub struct GenealogyTree {
    pub a_max: f64,
    pub lines: ChronologicalTree,
    /// How each line was born (`None` for the root).
    pub kinds: Vec<Option<BranchKind>>,
    pub events: Vec<BranchEvent>,
    /// Infinite-multiplicity points without new prolific lines.
    pub compact_splits: usize,
}

impl GenealogyTree {
    pub fn to_json(&self) -> Value {
        let mut nodes = self.lines.to_json();
        let order = self.lines.preorder();
        for (item, i) in nodes.as_array_mut().unwrap().iter_mut().zip(order) {
            item["branch_kind"] = match self.kinds[i] {
                Some(k) => Value::from(k.as_str()),
                None => Value::Null,
            };
        }
        nodes
    }

    /// Heights of the first branch point on the root line.
    pub fn first_event(&self) -> Option<&BranchEvent> {
        self.events
            .iter()
            .filter(|e| e.parent == 0)
            .min_by(|a, b| a.height.total_cmp(&b.height))
    }
}

/// Rates per unit of prolific length of a jump to `j + k`, `k = 1..=kmax`,
/// computed from the closed form `1{k=1} beta b + int b^k z^{k+1} /
/// (k+1)! e^{-bz} pi(dz)`.
pub fn infinite_split_rates(exponent: &LaplaceExponent, kmax: usize) -> Vec<f64> {
    let q = exponent.quartet();
    let b = exponent.b();
    (1..=kmax)
        .map(|k| {
            let mut r = if k == 1 { q.beta * b } else { 0.0 };
            for a in &q.atoms {
                r += a.mass * poisson_tail_term(b * a.size, k) / b;
            }
            if let Some(e) = q.exp_component {
                r += e.mass * e.rate * b.powi(k as i32) / (b + e.rate).powi(k as i32 + 2);
            }
            r
        })
        .collect()
}

/// `(bz)^{k+1} / (k+1)! e^{-bz}`.
fn poisson_tail_term(bz: f64, k: usize) -> f64 {
    let mut t = (-bz).exp();
    for i in 1..=k + 1 {
        t *= bz / i as f64;
    }
    t
}

/// Samples the prolific lines of the genealogy up to height `a_max`: each
/// line branches into two at rate `beta b` and meets jump-created branch
/// points carrying `k ~ Poisson(b (y - x))` new lines.
pub fn sample_genealogy_poisson<R: Rng + ?Sized>(
    exponent: &LaplaceExponent,
    a_max: f64,
    node_budget: usize,
    rng: &mut R,
) -> Result<GenealogyTree> {
    let q = exponent.quartet();
    if q.beta <= 0.0 {
        return Err(Error::NonGrey);
    }
    if !exponent.is_supercritical() {
        return Err(Error::SubcriticalInput);
    }
    let b = exponent.b();
    let splits = SplitSampler::new(exponent);
    // Both routes to the prolific split rate must agree.
    let direct: f64 = infinite_split_rates(exponent, 200).iter().sum::<f64>() - q.beta * b;
    if (direct - splits.prolific_rate()).abs() > 1e-6 * direct.abs().max(1.0) {
        return Err(Error::NonConvergence(format!(
            "split rates disagree: {direct} from the closed form, {} from the factorized kernel",
            splits.prolific_rate()
        )));
    }
    let binary_rate = q.beta * b;
    let total = binary_rate + splits.total();

    let mut lines = ChronologicalTree::with_root(0.0, a_max, true);
    let mut kinds = vec![None];
    let mut events = Vec::new();
    let mut compact_splits = 0;
    let mut stack = vec![0usize];
    let clock = Exp::new(total).unwrap();
    while let Some(u) = stack.pop() {
        let mut h = lines.node(u).birth;
        loop {
            h += clock.sample(rng);
            if h >= a_max {
                break;
            }
            let (kind, k, jump) = if rng.random::<f64>() * total < binary_rate {
                (BranchKind::Binary, 1, None)
            } else {
                let (y, x, k) = splits.sample(rng);
                (BranchKind::Infinite, k, Some((y, x)))
            };
            if k == 0 {
                compact_splits += 1;
                continue;
            }
            if lines.len() + k > node_budget {
                return Err(Error::NodeBudgetExceeded {
                    budget: node_budget,
                    seed: 0,
                });
            }
            for _ in 0..k {
                let c = lines.add_child(u, h, a_max - h, true);
                kinds.push(Some(kind));
                stack.push(c);
            }
            events.push(BranchEvent {
                parent: u,
                height: h,
                k,
                kind,
                jump,
            });
        }
    }
    Ok(GenealogyTree {
        a_max,
        lines,
        kinds,
        events,
        compact_splits,
    })
}
