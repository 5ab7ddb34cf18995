use std::path::PathBuf;

use sepconf::mps::{histogram, parse_mps, ConstraintType};

fn corpus() -> Vec<(PathBuf, ConstraintType)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/mps");
    let mut files: Vec<PathBuf> = std::fs::read_dir(&dir).unwrap().map(|e| e.unwrap().path()).collect();
    files.sort();
    files
        .into_iter()
        .map(|p| {
            let stem = p.file_stem().unwrap().to_string_lossy().into_owned();
            let key = stem.rsplit_once('_').unwrap().0.to_string();
            let tag = ConstraintType::from_key(&key).unwrap_or_else(|| panic!("bad fixture name {stem}"));
            (p, tag)
        })
        .collect()
}

#[test]
fn every_type_has_two_fixtures() {
    let files = corpus();
    for t in ConstraintType::ALL {
        assert!(files.iter().filter(|(_, tag)| *tag == t).count() >= 2, "{t}");
    }
}

#[test]
fn fixtures_classify_as_named() {
    for (path, tag) in corpus() {
        let milp = parse_mps(&path).unwrap();
        let h = histogram(&milp);
        assert_eq!(h.total(), milp.m(), "{}", path.display());
        assert_eq!(h.count(tag), milp.m(), "{}: {:?}", path.display(), h.counts);
    }
}
