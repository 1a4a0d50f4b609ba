mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use common::data;
use taxalign::{Mapping, TaxonomyGraph};

fn taxalign(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_taxalign"))
        .args(args)
        .output()
        .unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn align_birds(dir: &Path, pack: &str, extra: &[&str]) -> Output {
    let (s, t, d) = (
        data("birds_source.tax"),
        data("birds_target.tax"),
        data("birds_dict.tsv"),
    );
    let out = dir.join("map.tsv");
    let mut args = vec![
        "align",
        "--source",
        p(&s),
        "--target",
        p(&t),
        "--dict",
        p(&d),
        "--constraints",
        pack,
        "--out",
        p(&out),
    ];
    args.extend_from_slice(extra);
    taxalign(&args)
}

#[test]
fn align_writes_mapping_dump_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("w.tsv");
    let out = align_birds(dir.path(), "AA*", &["--dump-weights", p(&dump)]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let mapping = Mapping::load(fs::read(dir.path().join("map.tsv")).unwrap().as_slice()).unwrap();
    let faisan = mapping.get("faisan.1").unwrap();
    assert_eq!(faisan.selected.as_ref().unwrap().as_str(), "pheasant.n.01");

    let dump = fs::read_to_string(&dump).unwrap();
    let lines: Vec<&str> = dump.lines().collect();
    let mut sorted = lines.clone();
    sorted.sort();
    assert_eq!(lines, sorted);
    assert!(lines.iter().all(|l| l.split('\t').count() == 3));

    let manifest: serde_json::Value = serde_json::from_str(
        &fs::read_to_string(dir.path().join("map.tsv.manifest.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(manifest["converged"], true);
    assert!(manifest["iterations"].as_u64().unwrap() >= 1);
}

#[test]
fn unknown_pack_is_a_format_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = align_birds(dir.path(), "QQ*", &[]);
    assert_eq!(out.status.code(), Some(3));
    assert!(!String::from_utf8_lossy(&out.stderr).is_empty());
}

#[test]
fn missing_input_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.tax");
    let out = taxalign(&[
        "stats",
        "--source",
        p(&missing),
        "--target",
        p(&data("birds_target.tax")),
        "--dict",
        p(&data("birds_dict.tsv")),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nope.tax"));
}

#[test]
fn bad_settings_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    for extra in [
        &["--epsilon", "0"][..],
        &["--max-iters", "0"],
        &["--threads", "0"],
    ] {
        let out = align_birds(dir.path(), "II*", extra);
        assert_eq!(out.status.code(), Some(4), "{extra:?}");
    }
    assert_eq!(taxalign(&["align"]).status.code(), Some(4));
}

#[test]
fn malformed_taxonomy_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.tax");
    fs::write(&bad, "N\ta\ta\nE\ta\tb\n").unwrap();
    let out = taxalign(&[
        "transform",
        "--input",
        p(&bad),
        "--output",
        p(&dir.path().join("o.tax")),
        "--add-top",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn transform_applies_collapse_then_top() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.tax");
    fs::write(
        &input,
        "N\tr\troot\nN\ta1\tx\tsense=1\nN\ta2\tx\tsense=2\nN\tq\tother\n\
         E\tr\ta1\nE\tr\ta2\n",
    )
    .unwrap();
    let output = dir.path().join("out.tax");
    let out = taxalign(&[
        "transform",
        "--input",
        p(&input),
        "--output",
        p(&output),
        "--collapse-senses",
        "--add-top",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let g = TaxonomyGraph::load_path(&output).unwrap();
    assert_eq!(g.len(), 4);
    assert!(g.get("a2").is_none());
    let top = g.index_of("__TOP__").unwrap();
    assert_eq!(g.roots(), vec![top]);
    assert_eq!(g.hyponyms(top).len(), 2);
    let merge = fs::read_to_string(dir.path().join("out.tax.merge")).unwrap();
    assert!(merge.lines().any(|l| l == "a2\ta1"));

    let only_top = dir.path().join("top.tax");
    let out = taxalign(&[
        "transform",
        "--input",
        p(&input),
        "--output",
        p(&only_top),
        "--add-top",
    ]);
    assert!(out.status.success());
    assert_eq!(TaxonomyGraph::load_path(&only_top).unwrap().len(), 5);
}

#[test]
fn eval_reports_planted_precision() {
    let dir = tempfile::tempdir().unwrap();
    let tsv = dir.path().join("eval.tsv");
    let out = taxalign(&[
        "eval",
        "--mapping",
        p(&data("planted_mapping.tsv")),
        "--gold",
        p(&data("planted_gold.tsv")),
        "--tsv",
        p(&tsv),
    ]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("17/20 (85%)"));
    let report = fs::read_to_string(&tsv).unwrap();
    assert!(report
        .lines()
        .any(|l| l == "precision_file\tall\ttok_pct\t85.0000"));
}

#[test]
fn stats_counts_connections() {
    let dir = tempfile::tempdir().unwrap();
    let tsv = dir.path().join("stats.tsv");
    let out = taxalign(&[
        "stats",
        "--source",
        p(&data("piel_source.tax")),
        "--target",
        p(&data("piel_target.tax")),
        "--dict",
        p(&data("piel_dict.tsv")),
        "--tsv",
        p(&tsv),
    ]);
    assert!(out.status.success());
    let report = fs::read_to_string(&tsv).unwrap();
    assert!(report.lines().any(|l| l == "connection\tall\tnodes\t3"));
    assert!(report
        .lines()
        .any(|l| l == "connection\tall\tpct_connected\t100.0000"));
}
