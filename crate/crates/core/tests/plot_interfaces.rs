//! The CSV and JSON files read by the plotting scripts.

use std::fs;
use std::path::Path;
use std::process::Command;

use serde_json::Value;
use splitree::levy::LevyQuartet;
use splitree::path::CadlagPath;
use splitree::verify::atom_exponent;

fn splitree(args: &[&str]) {
    let out = Command::new(env!("CARGO_BIN_EXE_splitree"))
        .args(args)
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(0),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn psi_file(dir: &Path, q: &LevyQuartet) -> String {
    let p = dir.join("psi.json");
    fs::write(&p, serde_json::to_string(q).unwrap()).unwrap();
    p.to_str().unwrap().to_string()
}

fn header(path: &Path) -> String {
    fs::read_to_string(path).unwrap().lines().next().unwrap().to_string()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn has_keys(v: &Value, keys: &[&str]) -> bool {
    keys.iter().all(|k| v.get(k).is_some())
}

#[test]
fn contour_and_exports() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let psi = psi_file(d, &LevyQuartet::splitting(2.0, 1.0));
    let sim = d.join("sim");
    splitree(&[
        "simulate",
        "nu-r",
        "--psi",
        &psi,
        "--r",
        "1.5",
        "--samples",
        "3",
        "--seed",
        "4",
        "--out",
        sim.to_str().unwrap(),
    ]);

    let contour = sim.join("contour_0.csv");
    assert_eq!(header(&contour), "t,value,is_jump");
    let text = fs::read_to_string(&contour).unwrap();
    let path = CadlagPath::read_csv(&text).unwrap();
    let mut again = Vec::new();
    path.write_csv(&mut again).unwrap();
    assert_eq!(String::from_utf8(again).unwrap(), text);
    let flags: Vec<&str> = text.lines().skip(1).map(|l| l.rsplit(',').next().unwrap()).collect();
    assert!(flags.iter().all(|f| *f == "0" || *f == "1"));
    assert_eq!(
        header(&sim.join("functionals.csv")),
        "sample,lifetime,crossings,low_occupation"
    );

    let c = contour.to_str().unwrap();
    for kind in ["tree", "skeleton", "generations", "profile"] {
        let out = d.join(kind);
        splitree(&[
            "export",
            kind,
            "--contour",
            c,
            "--r",
            "1.5",
            "--width",
            "0.1",
            "--out",
            out.to_str().unwrap(),
        ]);
    }
    let tree = json(&d.join("tree/tree.json"));
    let nodes = tree.as_array().unwrap();
    assert_eq!(nodes[0]["label"], "");
    assert!(nodes
        .iter()
        .all(|n| has_keys(n, &["label", "birth", "lifespan", "prolific"])));
    let skeleton = json(&d.join("skeleton/skeleton.json"));
    assert!(skeleton
        .as_array()
        .unwrap()
        .iter()
        .all(|l| has_keys(l, &["label", "alpha"])));
    assert_eq!(header(&d.join("generations/generations.csv")), "generation,size");
    let profile = fs::read_to_string(d.join("profile/profile.csv")).unwrap();
    assert_eq!(profile.lines().next(), Some("a,z1,z2"));
    assert_eq!(profile.lines().count(), 16);
}

#[test]
fn branching_paths_and_genealogies() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let psi = psi_file(d, &atom_exponent());
    let cb = d.join("cb");
    splitree(&[
        "simulate",
        "cb",
        "--psi",
        &psi,
        "--t",
        "0.5",
        "--samples",
        "2",
        "--out",
        cb.to_str().unwrap(),
    ]);
    assert_eq!(header(&cb.join("path_0.csv")), "t,z");
    let tt = d.join("twotype");
    splitree(&[
        "simulate",
        "twotype",
        "--psi",
        &psi,
        "--t",
        "0.5",
        "--samples",
        "2",
        "--out",
        tt.to_str().unwrap(),
    ]);
    assert_eq!(header(&tt.join("path_1.csv")), "t,z,n");

    let g = d.join("genealogy");
    splitree(&[
        "simulate",
        "genealogy",
        "--psi",
        &psi,
        "--r",
        "1.5",
        "--samples",
        "5",
        "--seed",
        "2",
        "--out",
        g.to_str().unwrap(),
    ]);
    let mut kinds = Vec::new();
    for i in 0..5 {
        let v = json(&g.join(format!("genealogy_{i}.json")));
        for n in v.as_array().unwrap() {
            assert!(has_keys(n, &["label", "birth", "lifespan", "prolific", "branch_kind"]));
            kinds.push(n["branch_kind"].clone());
        }
    }
    assert!(kinds.iter().all(|k| k.is_null() || k == "binary" || k == "infinite"));
}

#[test]
fn experiment_data_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    splitree(&["verify", "yule-geometric", "--out", out]);
    splitree(&["verify", "generations-oracle", "--out", out]);
    let d = dir.path();
    assert_eq!(header(&d.join("yule-geometric/pmf.csv")), "k,observed,expected");
    assert_eq!(
        header(&d.join("yule-geometric/checks.csv")),
        "name,statistic,p_value,pass,detail"
    );
    let report = json(&d.join("generations-oracle/report.json"));
    assert!(has_keys(
        &report,
        &[
            "name",
            "n",
            "statistic",
            "p_value",
            "pass",
            "seed",
            "config_hash",
            "runtime_s"
        ]
    ));
    let config = json(&d.join("generations-oracle/config.json"));
    assert_eq!(config["samples"], 1000);
}
