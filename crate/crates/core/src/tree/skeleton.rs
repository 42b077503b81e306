use serde::{Deserialize, Serialize};

use super::chrono::format_label;
use super::ChronologicalTree;
use crate::error::{Error, Result};

const TOL: f64 = 1e-9;

/// One line of descent reaching the truncation height, born at `alpha`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkeletonLine {
    pub label: Vec<usize>,
    pub alpha: f64,
}

/// The marked plane tree of lines reaching height `r`, in the order the
/// extraction produced them (the root line first).
#[derive(Clone, Debug, PartialEq)]
pub struct ProlificSkeleton {
    pub r: f64,
    pub lines: Vec<SkeletonLine>,
}

/// How surviving individuals are recognized.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Detection {
    /// A node survives when its subtree holds a node tagged prolific.
    Tagged,
    /// A node survives when its subtree reaches height `r`.
    Geometric,
}

impl ProlificSkeleton {
    pub fn len(&self) -> usize {
        self.lines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }

    /// Number of lines alive at height `a < r`.
    pub fn lines_at(&self, a: f64) -> usize {
        self.lines.iter().filter(|l| l.alpha <= a).count()
    }

    /// Lines sorted by label.
    pub fn sorted(&self) -> Vec<SkeletonLine> {
        let mut l = self.lines.clone();
        l.sort_by(|a, b| a.label.cmp(&b.label));
        l
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.sorted()
                .iter()
                .map(|l| serde_json::json!({"label": format_label(&l.label), "alpha": l.alpha}))
                .collect(),
        )
    }

    /// The tree whose individuals are the lines: each label lives on
    /// `[alpha, r]`, children in plane order by decreasing `alpha`, equal
    /// heights by increasing label.
    pub fn reconstruct(&self) -> ChronologicalTree {
        let lines = self.sorted();
        let Some(root) = lines.first() else {
            return ChronologicalTree::with_root(0.0, 0.0, false);
        };
        let mut tree = ChronologicalTree::with_root(root.alpha, self.r - root.alpha, true);
        let mut ids = std::collections::HashMap::new();
        ids.insert(root.label.clone(), 0usize);
        // Parents sort before their children, so a parent's node exists when
        // its children are attached. Children are attached per parent in
        // the required plane order.
        let mut by_parent: std::collections::BTreeMap<Vec<usize>, Vec<&SkeletonLine>> = Default::default();
        for l in &lines[1..] {
            by_parent
                .entry(l.label[..l.label.len() - 1].to_vec())
                .or_default()
                .push(l);
        }
        let mut queue = std::collections::VecDeque::from([root.label.clone()]);
        while let Some(p) = queue.pop_front() {
            let Some(kids) = by_parent.get_mut(&p) else { continue };
            kids.sort_by(|a, b| b.alpha.total_cmp(&a.alpha).then(a.label.cmp(&b.label)));
            let pid = ids[&p];
            for k in kids.iter() {
                let id = tree.add_child(pid, k.alpha, self.r - k.alpha, true);
                ids.insert(k.label.clone(), id);
                queue.push_back(k.label.clone());
            }
        }
        tree
    }
}

/// Extracts the lines of descent reaching `r` from a tree truncated at `r`.
///
/// The first line is the ancestral line of the first point at height `r`
/// in contour order. The subtrees hanging off it that still reach `r` are
/// numbered by increasing root height (ties in contour order) and treated
/// the same way recursively.
pub fn prolific_skeleton(tree: &ChronologicalTree, r: f64, detection: Detection) -> Result<ProlificSkeleton> {
    if let Some(n) = tree.nodes().iter().find(|n| n.top() > r + TOL) {
        return Err(Error::NotTruncated { r, height: n.top() });
    }
    let survives = surviving(tree, r, detection);
    let visit_time = tree.top_times();
    let mut lines = Vec::new();
    if !survives[0] {
        return Ok(ProlificSkeleton { r, lines });
    }
    // (component root node, label, root height)
    let mut work = vec![(0usize, Vec::new(), tree.node(0).birth)];
    while let Some((root, label, alpha)) = work.pop() {
        lines.push(SkeletonLine {
            label: label.clone(),
            alpha,
        });
        // Follow the first line, collecting hanging components.
        let mut hanging: Vec<(f64, f64, usize)> = Vec::new(); // (height, visit time, node)
        let mut u = root;
        loop {
            let reaches = reaches_r(tree, u, r, detection);
            let next = if reaches {
                None
            } else {
                tree.visit_order(u).into_iter().find(|&c| survives[c])
            };
            for c in tree.visit_order(u) {
                if survives[c] && Some(c) != next {
                    hanging.push((tree.node(c).birth, visit_time[c], c));
                }
            }
            match next {
                Some(c) => u = c,
                None => break,
            }
        }
        hanging.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        for (i, &(h, _, c)) in hanging.iter().enumerate().rev() {
            let mut l = label.clone();
            l.push(i + 1);
            work.push((c, l, h));
        }
    }
    Ok(ProlificSkeleton { r, lines })
}

fn reaches_r(tree: &ChronologicalTree, u: usize, r: f64, detection: Detection) -> bool {
    match detection {
        Detection::Tagged => tree.node(u).prolific,
        Detection::Geometric => tree.node(u).top() >= r - TOL,
    }
}

fn surviving(tree: &ChronologicalTree, r: f64, detection: Detection) -> Vec<bool> {
    let mut s: Vec<bool> = (0..tree.len()).map(|i| reaches_r(tree, i, r, detection)).collect();
    for i in tree.preorder().into_iter().rev() {
        if let Some(p) = tree.node(i).parent {
            s[p] |= s[i];
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_line() {
        let t = ChronologicalTree::with_root(0.0, 1.0, true);
        let s = prolific_skeleton(&t, 1.0, Detection::Tagged).unwrap();
        assert_eq!(
            s.lines,
            vec![SkeletonLine {
                label: vec![],
                alpha: 0.0
            }]
        );
    }

    #[test]
    fn one_branch() {
        let mut t = ChronologicalTree::with_root(0.0, 1.0, true);
        t.add_child(0, 0.4, 0.6, true);
        t.add_child(0, 0.2, 0.3, false);
        for d in [Detection::Tagged, Detection::Geometric] {
            let s = prolific_skeleton(&t, 1.0, d).unwrap();
            assert_eq!(s.len(), 2);
            assert_eq!(
                s.sorted()[1],
                SkeletonLine {
                    label: vec![1],
                    alpha: 0.4
                }
            );
        }
    }

    #[test]
    fn first_line_through_several_individuals() {
        // Root dies at 0.5; its child born at 0.3 reaches 1, and a
        // grandchild born at 0.6 also reaches 1.
        let mut t = ChronologicalTree::with_root(0.0, 0.5, false);
        let c = t.add_child(0, 0.3, 0.7, true);
        t.add_child(c, 0.6, 0.4, true);
        let s = prolific_skeleton(&t, 1.0, Detection::Tagged).unwrap();
        let alphas: Vec<f64> = s.sorted().iter().map(|l| l.alpha).collect();
        assert_eq!(alphas, vec![0.0, 0.6]);
        assert_eq!(s.lines_at(0.7), 2);
        let re = s.reconstruct();
        assert_eq!(
            prolific_skeleton(&re, 1.0, Detection::Tagged).unwrap().sorted(),
            s.sorted()
        );
    }

    #[test]
    fn untruncated_rejected() {
        let t = ChronologicalTree::with_root(0.0, 2.0, true);
        assert!(matches!(
            prolific_skeleton(&t, 1.0, Detection::Tagged),
            Err(Error::NotTruncated { .. })
        ));
    }

    #[test]
    fn json_lists_labels() {
        let mut t = ChronologicalTree::with_root(0.0, 1.0, true);
        let c = t.add_child(0, 0.4, 0.6, true);
        t.add_child(c, 0.8, 0.2, true);
        let s = prolific_skeleton(&t, 1.0, Detection::Tagged).unwrap();
        let j = s.to_json();
        assert_eq!(j[2]["label"], "1.1");
        assert_eq!(j[2]["alpha"], 0.8);
    }
}
