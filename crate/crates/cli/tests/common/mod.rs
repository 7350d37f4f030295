#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use cultbias::synth::{gen_world, SynthSpec, SynthWorld};

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cultbias"))
}

/// Runs the binary in `dir` with a clean environment for config lookup.
pub fn run(dir: &Path, args: &[&str]) -> Output {
    bin()
        .current_dir(dir)
        .env_remove("CULTBIAS_CONFIG")
        .env("RUST_LOG", "warn")
        .args(args)
        .output()
        .expect("spawn cultbias")
}

pub fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

pub fn assert_ok(out: &Output) {
    assert!(
        out.status.success(),
        "exit {:?}\nstderr:\n{}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
}

/// Six small cultures: enough for the pipeline, fast enough for tests.
pub fn small_spec() -> SynthSpec {
    SynthSpec {
        n_cultures: 6,
        sentences: 3000,
        ..SynthSpec::default()
    }
}

/// Writes a small world under `dir/world` and returns it.
pub fn small_world(dir: &Path) -> SynthWorld {
    let world = gen_world(&small_spec()).unwrap();
    world.write(&dir.join("world")).unwrap();
    world
}

/// Every file under `root` keyed by relative path.
pub fn read_tree(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<PathBuf, Vec<u8>>) {
        for e in fs::read_dir(dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                walk(root, &p, out);
            } else {
                out.insert(p.strip_prefix(root).unwrap().to_path_buf(), fs::read(&p).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(root, root, &mut out);
    out
}

/// Line-delimited records for three regions plus one rejected of each kind.
pub fn raw_records() -> String {
    let mut lines = Vec::new();
    for (i, region) in ["AA", "BB", "CC"].iter().enumerate() {
        for j in 0..20 {
            lines.push(format!(
                r#"{{"id":"{i}-{j}","text":"post {j} from @friend about the weather https://t.co/x today","lang":"en","region":"{region}"}}"#
            ));
        }
    }
    lines.push(r#"{"id":"x1","text":"hola amigos como estan","lang":"es","region":"AA"}"#.into());
    lines.push(r#"{"id":"x2","text":"ok 👍","lang":"en","region":"BB"}"#.into());
    lines.push("not json".into());
    lines.join("\n") + "\n"
}
