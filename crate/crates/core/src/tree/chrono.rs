use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::path::{CadlagPath, Knot, KnotBuf, Terminal};

/// One individual: alive on `[birth, birth + lifespan]` (heights from the
/// root).
#[derive(Clone, Debug, PartialEq)]
pub struct Node {
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    pub birth: f64,
    pub lifespan: f64,
    pub prolific: bool,
}

impl Node {
    pub fn top(&self) -> f64 {
        self.birth + self.lifespan
    }
}

/// A plane chronological tree stored as an arena. Node 0 is the root; the
/// children of a node are kept in rank order, so the Ulam-Harris label of a
/// node is the sequence of 1-based ranks on its ancestral path.
///
/// The contour starts at the top of the root and runs down at unit speed.
/// Passing the birth of a child it jumps to the child's top; children are
/// visited by decreasing birth height, equal heights by increasing rank.
#[derive(Clone, Debug)]
pub struct ChronologicalTree {
    nodes: Vec<Node>,
}

/// Structural equality: same plane tree with the same marks, regardless of
/// arena layout.
impl PartialEq for ChronologicalTree {
    fn eq(&self, other: &Self) -> bool {
        let (a, b) = (self.preorder(), other.preorder());
        a.len() == b.len()
            && a.iter().zip(&b).all(|(&i, &j)| {
                let (x, y) = (&self.nodes[i], &other.nodes[j]);
                x.birth == y.birth
                    && x.lifespan == y.lifespan
                    && x.prolific == y.prolific
                    && x.children.len() == y.children.len()
            })
    }
}

impl ChronologicalTree {
    pub fn new(lifespan: f64) -> Self {
        Self::with_root(0.0, lifespan, false)
    }

    pub fn with_root(birth: f64, lifespan: f64, prolific: bool) -> Self {
        ChronologicalTree {
            nodes: vec![Node {
                parent: None,
                children: Vec::new(),
                birth,
                lifespan,
                prolific,
            }],
        }
    }

    /// Appends a child with the next rank. Panics if the birth lies outside
    /// the parent's life.
    pub fn add_child(&mut self, parent: usize, birth: f64, lifespan: f64, prolific: bool) -> usize {
        let p = &self.nodes[parent];
        assert!(
            birth >= p.birth - 1e-12 && birth <= p.top() + 1e-12,
            "birth {birth} outside parent life [{}, {}]",
            p.birth,
            p.top()
        );
        let id = self.nodes.len();
        self.nodes.push(Node {
            parent: Some(parent),
            children: Vec::new(),
            birth,
            lifespan,
            prolific,
        });
        self.nodes[parent].children.push(id);
        id
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, i: usize) -> &Node {
        &self.nodes[i]
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn set_prolific(&mut self, i: usize, prolific: bool) {
        self.nodes[i].prolific = prolific;
    }

    /// Ranks (1-based) along the path from the root.
    pub fn label(&self, mut i: usize) -> Vec<usize> {
        let mut out = Vec::new();
        while let Some(p) = self.nodes[i].parent {
            let rank = self.nodes[p].children.iter().position(|&c| c == i).unwrap();
            out.push(rank + 1);
            i = p;
        }
        out.reverse();
        out
    }

    /// Dot-separated label; the root is the empty string.
    pub fn label_string(&self, i: usize) -> String {
        format_label(&self.label(i))
    }

    pub fn find(&self, label: &[usize]) -> Option<usize> {
        let mut i = 0;
        for &r in label {
            i = *self.nodes[i].children.get(r.checked_sub(1)?)?;
        }
        Some(i)
    }

    pub fn depth(&self, mut i: usize) -> usize {
        let mut d = 0;
        while let Some(p) = self.nodes[i].parent {
            d += 1;
            i = p;
        }
        d
    }

    /// Node indices in depth-first preorder, children by rank.
    pub fn preorder(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![0];
        while let Some(i) = stack.pop() {
            out.push(i);
            stack.extend(self.nodes[i].children.iter().rev());
        }
        out
    }

    /// Number of nodes per generation, found by a breadth-first walk.
    pub fn generation_sizes(&self) -> Vec<usize> {
        let mut sizes = Vec::new();
        let mut level = vec![0];
        while !level.is_empty() {
            sizes.push(level.len());
            level = level
                .iter()
                .flat_map(|&i| self.nodes[i].children.iter().copied())
                .collect();
        }
        sizes
    }

    pub fn height(&self) -> f64 {
        self.nodes.iter().map(Node::top).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Total length (the measure of the tree).
    pub fn total_length(&self) -> f64 {
        self.nodes.iter().map(|n| n.lifespan).sum()
    }

    /// Children of `i` in contour visit order.
    pub fn visit_order(&self, i: usize) -> Vec<usize> {
        let mut c = self.nodes[i].children.clone();
        c.sort_by(|&a, &b| self.nodes[b].birth.total_cmp(&self.nodes[a].birth));
        c
    }

    /// Nodes in the order their tops are visited by the contour.
    pub fn contour_order(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![0];
        while let Some(i) = stack.pop() {
            out.push(i);
            stack.extend(self.visit_order(i).into_iter().rev());
        }
        out
    }

    /// Clips every life at height `r` and drops individuals born at or
    /// above `r`.
    pub fn truncate(&self, r: f64) -> ChronologicalTree {
        let root = &self.nodes[0];
        let mut out =
            ChronologicalTree::with_root(root.birth, (r - root.birth).max(0.0).min(root.lifespan), root.prolific);
        let mut stack = vec![(0usize, 0usize)];
        while let Some((src, dst)) = stack.pop() {
            for &c in &self.nodes[src].children {
                let n = &self.nodes[c];
                if n.birth < r {
                    let id = out.add_child(dst, n.birth, n.lifespan.min(r - n.birth), n.prolific);
                    stack.push((c, id));
                }
            }
        }
        // Children were pushed per parent in rank order, so ranks survive.
        out
    }

    fn check_finite(&self) -> Result<()> {
        if self.nodes.iter().any(|n| !n.lifespan.is_finite()) {
            return Err(Error::MalformedPath(
                "tree has an infinite lifespan; truncate it first".into(),
            ));
        }
        Ok(())
    }

    /// The jumping contour. It ends at the root's birth height.
    pub fn contour(&self) -> Result<CadlagPath> {
        self.check_finite()?;
        let mut buf = KnotBuf::default();
        let mut t = 0.0;
        let mut level = self.nodes[0].top();
        buf.push(t, level);
        // Frames: (node, remaining children in visit order, reversed).
        let mut stack: Vec<(usize, Vec<usize>)> = vec![(0, rev(self.visit_order(0)))];
        while let Some((i, pending)) = stack.last_mut() {
            let i = *i;
            if let Some(c) = pending.pop() {
                let b = self.nodes[c].birth;
                t += level - b;
                buf.push(t, b);
                level = self.nodes[c].top();
                buf.push(t, level);
                stack.push((c, rev(self.visit_order(c))));
            } else {
                let b = self.nodes[i].birth;
                t += level - b;
                buf.push(t, b);
                level = b;
                stack.pop();
            }
        }
        Ok(CadlagPath::from_knots(buf.knots, Terminal::HitZero, None))
    }

    /// Sum of lifespans over the subtree of each node.
    pub fn subtree_lengths(&self) -> Vec<f64> {
        let mut acc: Vec<f64> = self.nodes.iter().map(|n| n.lifespan).collect();
        for i in self.preorder().into_iter().rev() {
            if let Some(p) = self.nodes[i].parent {
                acc[p] += acc[i];
            }
        }
        acc
    }

    /// Contour time at which the top of each node is visited.
    pub fn top_times(&self) -> Vec<f64> {
        let sub = self.subtree_lengths();
        let mut out = vec![0.0; self.nodes.len()];
        for i in self.contour_order() {
            let n = &self.nodes[i];
            let mut t = out[i];
            for c in self.visit_order(i) {
                let cn = &self.nodes[c];
                out[c] = t + (n.top() - cn.birth);
                t += sub[c];
            }
        }
        out
    }

    /// Contour time of the point at height `h` on the life of `i` (the last
    /// visit, after all children born at or above `h`).
    pub fn contour_time(&self, i: usize, h: f64, top_times: &[f64], sub: &[f64]) -> f64 {
        let n = &self.nodes[i];
        let above: f64 = n
            .children
            .iter()
            .filter(|&&c| self.nodes[c].birth >= h)
            .map(|&c| sub[c])
            .sum();
        top_times[i] + (n.top() - h) + above
    }

    fn ancestry(&self, mut i: usize) -> Vec<usize> {
        let mut out = vec![i];
        while let Some(p) = self.nodes[i].parent {
            out.push(p);
            i = p;
        }
        out.reverse();
        out
    }

    /// Distance between the point at height `h` on `u` and the point at
    /// height `k` on `v`.
    pub fn distance(&self, u: usize, h: f64, v: usize, k: f64) -> f64 {
        let au = self.ancestry(u);
        let av = self.ancestry(v);
        let mut j = 0;
        while j + 1 < au.len() && j + 1 < av.len() && au[j + 1] == av[j + 1] {
            j += 1;
        }
        let side = |a: &[usize], own: f64| a.get(j + 1).map_or(own, |&c| self.nodes[c].birth);
        let meet = side(&au, h).min(side(&av, k));
        h + k - 2.0 * meet
    }

    /// Builds the tree coded by a finite-variation contour: the root lives
    /// on `[0, f(0)]` and each jump from level `a` creates a child of the
    /// individual alive at `a` on the current ancestral stack.
    pub fn from_contour(path: &CadlagPath) -> Result<ChronologicalTree> {
        if !path.is_finite_variation() {
            return Err(Error::NotFiniteVariation);
        }
        let knots = path.knots();
        let Some(first) = knots.first() else {
            return Err(Error::MalformedPath("empty contour".into()));
        };
        let mut tree = ChronologicalTree::new(first.v);
        let mut stack = vec![0usize];
        for w in knots.windows(2) {
            let (a, b): (Knot, Knot) = (w[0], w[1]);
            if a.t != b.t {
                continue;
            }
            if b.v < a.v {
                return Err(Error::MalformedPath("downward jump in contour".into()));
            }
            while stack.len() > 1 && tree.nodes[*stack.last().unwrap()].birth >= a.v {
                stack.pop();
            }
            let parent = *stack.last().unwrap();
            let id = tree.add_child(parent, a.v, b.v - a.v, false);
            stack.push(id);
        }
        Ok(tree)
    }

    /// Node list for export.
    pub fn to_json(&self) -> Value {
        let nodes: Vec<Value> = self
            .preorder()
            .into_iter()
            .map(|i| {
                let n = &self.nodes[i];
                let lifespan = if n.lifespan.is_finite() {
                    json!(n.lifespan)
                } else {
                    json!("inf")
                };
                json!({
                    "label": self.label_string(i),
                    "birth": n.birth,
                    "lifespan": lifespan,
                    "prolific": n.prolific,
                })
            })
            .collect();
        Value::Array(nodes)
    }

    /// Inverse of [`to_json`](Self::to_json). Nodes must come parents first.
    pub fn from_json(v: &Value) -> Result<ChronologicalTree> {
        let bad = |m: &str| Error::Config(format!("tree json: {m}"));
        let arr = v.as_array().ok_or_else(|| bad("expected an array"))?;
        let mut tree: Option<ChronologicalTree> = None;
        for item in arr {
            let label = parse_label(item["label"].as_str().ok_or_else(|| bad("label"))?)?;
            let birth = item["birth"].as_f64().ok_or_else(|| bad("birth"))?;
            let lifespan = match &item["lifespan"] {
                Value::String(s) if s == "inf" => f64::INFINITY,
                x => x.as_f64().ok_or_else(|| bad("lifespan"))?,
            };
            let prolific = item["prolific"].as_bool().unwrap_or(false);
            match (&mut tree, label.split_last()) {
                (None, None) => tree = Some(ChronologicalTree::with_root(birth, lifespan, prolific)),
                (Some(t), Some((&rank, parent))) => {
                    let p = t.find(parent).ok_or_else(|| bad("parent missing"))?;
                    if t.nodes[p].children.len() + 1 != rank {
                        return Err(bad("ranks out of order"));
                    }
                    t.add_child(p, birth, lifespan, prolific);
                }
                _ => return Err(bad("root must come first, exactly once")),
            }
        }
        tree.ok_or_else(|| bad("no nodes"))
    }
}

fn rev(mut v: Vec<usize>) -> Vec<usize> {
    v.reverse();
    v
}

pub fn format_label(label: &[usize]) -> String {
    label.iter().map(usize::to_string).collect::<Vec<_>>().join(".")
}

pub fn parse_label(s: &str) -> Result<Vec<usize>> {
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split('.')
        .map(|p| match p.parse::<usize>() {
            Ok(r) if r >= 1 => Ok(r),
            _ => Err(Error::Config(format!("bad label {s:?}"))),
        })
        .collect()
}
