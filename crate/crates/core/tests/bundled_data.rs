//! The instance files under `data/delivery` are generated from
//! `genmark::delivery`; this keeps them in sync. Run with
//! `GENMARK_REGEN=1` to rewrite them.

use std::fs;
use std::path::{Path, PathBuf};

use genmark::delivery;

fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data/delivery")
}

fn expected_files() -> Vec<(PathBuf, String)> {
    let dir = data_dir();
    let mut files = vec![(dir.join("domain.pddl"), delivery::DOMAIN.to_string())];
    for spec in delivery::training_instances() {
        files.push((
            dir.join("train").join(format!("{}.pddl", spec.name)),
            spec.to_pddl(),
        ));
    }
    let mut manifest = String::from(
        "# HAdd alone against the discovered graph plus HAdd, pruning on.\n\
         domain = \"domain.pddl\"\n\
         timeout = 600\n\
         instances = [\n",
    );
    for spec in delivery::test_instances() {
        files.push((
            dir.join("test").join(format!("{}.pddl", spec.name)),
            spec.to_pddl(),
        ));
        manifest.push_str(&format!("  \"test/{}.pddl\",\n", spec.name));
    }
    manifest.push_str(
        "]\n\n\
         [[configs]]\n\
         name = \"hadd\"\n\
         helper = \"hadd\"\n\n\
         [[configs]]\n\
         name = \"lmg+hadd\"\n\
         helper = \"hadd\"\n\
         graph = \"graph.json\"\n\
         prune = true\n",
    );
    files.push((dir.join("bench.toml"), manifest));
    files
}

#[test]
fn bundled_instances_match_generator() {
    let regen = std::env::var_os("GENMARK_REGEN").is_some();
    for (path, text) in expected_files() {
        if regen {
            fs::create_dir_all(path.parent().unwrap()).unwrap();
            fs::write(&path, &text).unwrap();
        }
        let on_disk =
            fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert_eq!(
            on_disk,
            text,
            "{} is stale; rerun with GENMARK_REGEN=1",
            path.display()
        );
    }
}
