//! Replays the checked-in fuzz corpus through the same checks the fuzz
//! targets make, so the seeds stay valid under a stable toolchain.

use std::fs;
use std::path::PathBuf;

use sicascade::experiment::{summarize, ExperimentConfig};
use sicascade::io::{
    format_rounds, format_trajectory, parse_results_csv, parse_rounds, parse_trajectory, read_edge_list,
    write_edge_list, write_results_csv,
};

fn seeds(target: &str) -> Vec<(PathBuf, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<_> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| e.unwrap().path())
        .map(|p| {
            let text = fs::read_to_string(&p).unwrap();
            (p, text)
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

#[test]
fn edge_list_seeds() {
    for (path, text) in seeds("parse_edge_list") {
        let g = read_edge_list(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        let mut buf = Vec::new();
        write_edge_list(&mut buf, &g).unwrap();
        assert_eq!(read_edge_list(std::str::from_utf8(&buf).unwrap()).unwrap().edges(), g.edges());
    }
}

#[test]
fn trajectory_seeds() {
    for (path, text) in seeds("parse_trajectory") {
        let t = parse_trajectory(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert_eq!(parse_trajectory(&format_trajectory(&t)).unwrap(), t);
    }
}

#[test]
fn round_seeds() {
    for (path, text) in seeds("parse_rounds") {
        let r = parse_rounds(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert_eq!(parse_rounds(&format_rounds(&r)).unwrap(), r);
    }
}

#[test]
fn config_seeds() {
    for (path, text) in seeds("parse_config") {
        let c = ExperimentConfig::from_toml_str(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert_eq!(ExperimentConfig::from_toml_str(&c.to_toml_string()).unwrap(), c);
    }
}

#[test]
fn results_csv_seeds() {
    for (path, text) in seeds("parse_results_csv") {
        let rows = parse_results_csv(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        summarize(&rows).unwrap();
        let mut buf = Vec::new();
        write_results_csv(&mut buf, &rows).unwrap();
        assert_eq!(std::str::from_utf8(&buf).unwrap(), text);
    }
}
