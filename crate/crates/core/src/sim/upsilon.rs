use rand::Rng;
use rand_distr::{Distribution, Exp};

use super::contour::{descent_stage, post_minimum_stage};
use super::TreeConfig;
use crate::error::{Error, Result};
use crate::levy::LaplaceExponent;
use crate::path::{concatenate, CadlagPath, KnotBuf, Terminal};
use crate::tree::ChronologicalTree;

/// A sample of the tree with all its lines reaching the truncation height
/// tagged prolific.
#[derive(Clone, Debug, PartialEq)]
pub struct UpsilonTree {
    pub contour: CadlagPath,
    /// The prolific lines, each living from its branch height up to `r`.
    /// Children are ranked by decreasing birth height.
    pub spines: ChronologicalTree,
}

/// Builds the tree from one infinite line with compact trees hung on it
/// and, at the points of a rate `b` Poisson process on the line, copies of
/// the same construction started at the branch height.
pub fn simulate_upsilon_tree<R: Rng + ?Sized>(
    exponent: &LaplaceExponent,
    r: f64,
    cfg: &TreeConfig,
    rng: &mut R,
) -> Result<UpsilonTree> {
    let sharp = exponent.sharp();
    let mut left = cfg.node_budget;
    let (contour, spines) = build(exponent, &sharp, r, cfg, rng, &mut left)?;
    Ok(UpsilonTree { contour, spines })
}

/// Decreasing points of a rate `b` Poisson process on `[0, r)`.
pub(crate) fn poisson_heights<R: Rng + ?Sized>(b: f64, r: f64, rng: &mut R) -> Vec<f64> {
    let mut out = Vec::new();
    if b <= 0.0 {
        return out;
    }
    let exp = Exp::new(b).unwrap();
    let mut h = r;
    loop {
        h -= exp.sample(rng);
        if h < 0.0 {
            return out;
        }
        out.push(h);
    }
}

fn build<R: Rng + ?Sized>(
    exponent: &LaplaceExponent,
    sharp: &LaplaceExponent,
    r: f64,
    cfg: &TreeConfig,
    rng: &mut R,
    budget: &mut usize,
) -> Result<(CadlagPath, ChronologicalTree)> {
    if *budget == 0 {
        return Err(Error::NodeBudgetExceeded {
            budget: cfg.node_budget,
            seed: 0,
        });
    }
    *budget -= 1;
    let left = post_minimum_stage(exponent, r, cfg, rng)?;
    let right = descent_stage(sharp, r, r, cfg, rng)?;
    let mut spines = ChronologicalTree::with_root(0.0, r, true);
    let mut grafts = Vec::new();
    for a in poisson_heights(exponent.b(), r, rng) {
        let (c, t) = build(exponent, sharp, r - a, cfg, rng, budget)?;
        attach(&mut spines, 0, &t, 0, a);
        grafts.push((a, c));
    }
    let right = splice_descending(&right, grafts);
    let contour = concatenate(&[left, right])?.with_terminal(Terminal::HitZero);
    Ok((contour, spines))
}

/// Copies the subtree of `guest` below `from` under `parent`, shifting
/// heights by `offset`.
fn attach(host: &mut ChronologicalTree, parent: usize, guest: &ChronologicalTree, from: usize, offset: f64) {
    let n = guest.node(from);
    let id = host.add_child(parent, n.birth + offset, n.lifespan, n.prolific);
    for &c in &n.children {
        attach(host, id, guest, c, offset);
    }
}

/// Inserts each guest contour, shifted up by its height `a`, at the first
/// time the path is at or below `a`. Heights must be decreasing. Guests
/// whose height is never reached go at the end.
pub fn splice_descending(path: &CadlagPath, grafts: Vec<(f64, CadlagPath)>) -> CadlagPath {
    let knots = path.knots();
    let mut buf = KnotBuf::default();
    let mut shift = 0.0;
    let mut it = grafts.into_iter().peekable();
    let insert = |buf: &mut KnotBuf, t: f64, a: f64, g: &CadlagPath, shift: &mut f64| {
        buf.push(t + *shift, a);
        for k in g.knots() {
            buf.push(t + *shift + k.t, a + k.v);
        }
        *shift += g.lifetime();
        buf.push(t + *shift, a);
    };
    for (i, p) in knots.iter().enumerate() {
        buf.push(p.t + shift, p.v);
        let Some(q) = knots.get(i + 1) else { break };
        if q.t <= p.t {
            continue;
        }
        while let Some((a, g)) = it.next_if(|(a, _)| q.v <= *a) {
            let tc = if p.v <= a {
                p.t
            } else {
                (p.t + (p.v - a) / (p.v - q.v) * (q.t - p.t)).clamp(p.t, q.t)
            };
            insert(&mut buf, tc, a, &g, &mut shift);
        }
    }
    let end = path.lifetime();
    for (a, g) in it {
        insert(&mut buf, end, a, &g, &mut shift);
    }
    let mesh = path.mesh();
    CadlagPath::from_knots(buf.knots, path.terminal(), mesh)
}
