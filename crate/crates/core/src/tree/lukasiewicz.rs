use super::ChronologicalTree;
use crate::error::{Error, Result};

/// Lukasiewicz path `e_0 = 0, e_{n+1} = e_n + k_{u_n} - 1`, nodes in
/// depth-first preorder by rank.
pub fn tree_to_lukasiewicz(tree: &ChronologicalTree) -> Vec<i64> {
    let mut e = vec![0i64];
    for i in tree.preorder() {
        let k = tree.node(i).children.len() as i64;
        e.push(e.last().unwrap() + k - 1);
    }
    e
}

/// Decodes a skip-free excursion into the plane tree with unit edges: the
/// node `u` lives on `[|u|, |u| + 1]` and its children are born at its top.
pub fn lukasiewicz_to_tree(e: &[i64]) -> Result<ChronologicalTree> {
    let bad = |m: &str| Error::MalformedPath(format!("Lukasiewicz path: {m}"));
    if e.len() < 2 || e[0] != 0 {
        return Err(bad("must start at 0 and have at least one step"));
    }
    let n = e.len() - 1;
    if e[n] != -1 {
        return Err(bad("must end at -1"));
    }
    if e[..n].iter().any(|&v| v < 0) {
        return Err(bad("hits -1 before the end"));
    }
    let ks: Vec<i64> = e.windows(2).map(|w| w[1] - w[0] + 1).collect();
    if ks.iter().any(|&k| k < 0) {
        return Err(bad("increment below -1"));
    }

    let mut tree = ChronologicalTree::new(1.0);
    let mut depth = vec![0usize];
    let mut stack: Vec<(usize, i64)> = Vec::new();
    if ks[0] > 0 {
        stack.push((0, ks[0]));
    }
    for &k in &ks[1..] {
        let Some((parent, remaining)) = stack.last_mut() else {
            return Err(bad("too many nodes"));
        };
        let parent = *parent;
        *remaining -= 1;
        if *remaining == 0 {
            stack.pop();
        }
        let d = depth[parent] + 1;
        let id = tree.add_child(parent, d as f64, 1.0, false);
        depth.push(d);
        if k > 0 {
            stack.push((id, k));
        }
    }
    if !stack.is_empty() {
        return Err(bad("unfinished nodes"));
    }
    Ok(tree)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        let t = lukasiewicz_to_tree(&[0, 1, 0, -1]).unwrap();
        assert_eq!(t.len(), 3);
        assert_eq!(t.node(0).children.len(), 2);
        assert_eq!(lukasiewicz_to_tree(&[0, -1]).unwrap().len(), 1);
        let t = lukasiewicz_to_tree(&[0, 2, 1, 0, -1]).unwrap();
        assert_eq!(t.node(0).children.len(), 3);
        assert_eq!(t.generation_sizes(), vec![1, 3]);
    }

    #[test]
    fn malformed() {
        for e in [&[0, 0][..], &[1, 0, -1], &[0, -1, 0, -1], &[0, 2, -1], &[0, 1, -1, -2]] {
            assert!(lukasiewicz_to_tree(e).is_err(), "{e:?}");
        }
    }

    pub(crate) fn arb_unit_tree() -> impl Strategy<Value = ChronologicalTree> {
        proptest::collection::vec(0usize..4, 1..60).prop_map(|ks| {
            // Breadth-first growth from a list of offspring counts.
            let mut t = ChronologicalTree::new(1.0);
            let mut queue = std::collections::VecDeque::from([0usize]);
            let mut it = ks.into_iter();
            while let Some(u) = queue.pop_front() {
                let Some(k) = it.next() else { break };
                let d = t.depth(u) as f64 + 1.0;
                for _ in 0..k {
                    queue.push_back(t.add_child(u, d, 1.0, false));
                }
            }
            t
        })
    }

    proptest! {
        #[test]
        fn roundtrip(t in arb_unit_tree()) {
            let e = tree_to_lukasiewicz(&t);
            let back = lukasiewicz_to_tree(&e).unwrap();
            prop_assert_eq!(back.len(), t.len());
            for i in t.preorder() {
                let j = back.find(&t.label(i)).unwrap();
                prop_assert_eq!(back.node(j).children.len(), t.node(i).children.len());
                prop_assert_eq!(back.node(j).birth, t.node(i).birth);
            }
            prop_assert_eq!(tree_to_lukasiewicz(&back), e);
        }

        #[test]
        fn generation_is_word_length(t in arb_unit_tree()) {
            let c = t.contour().unwrap();
            let d = ChronologicalTree::from_contour(&c).unwrap();
            prop_assert_eq!(d.generation_sizes(), t.generation_sizes());
        }
    }
}
