//! Reads a finite splitting tree off its contour, extracts the lines that
//! reach the truncation height and rebuilds the skeleton from its labels.

use splitree::levy::{LaplaceExponent, LevyQuartet};
use splitree::sim::{simulate_nu_r, TreeConfig};
use splitree::tree::{prolific_skeleton, ChronologicalTree, Detection};

fn main() {
    let e = LaplaceExponent::new(LevyQuartet::splitting(2.0, 1.0)).unwrap();
    let r = 1.5;
    let mut rng = splitree::rng::stream(5, 0);
    let contour = simulate_nu_r(&e, r, &TreeConfig::default(), &mut rng).unwrap().contour;
    let tree = ChronologicalTree::from_contour(&contour).unwrap();
    println!("tree with {} individuals", tree.len());

    let skeleton = prolific_skeleton(&tree, r, Detection::Geometric).unwrap();
    println!("{} lines reach {r}:", skeleton.len());
    println!("{}", serde_json::to_string_pretty(&skeleton.to_json()).unwrap());

    let rebuilt = skeleton.reconstruct();
    let again = prolific_skeleton(&rebuilt, r, Detection::Geometric).unwrap();
    println!("reconstruct then extract is the identity: {}", again == skeleton);
}
