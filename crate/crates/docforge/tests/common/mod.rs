#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use docforge::config::Config;
use docforge::workflows::{prepare, synth_corpus, Context, Prepared};

pub const SMALL: &str = "
[synth]
width = 240
height = 160
line_chars = [4, 12]

[segments]
max_run = 4

[mining]
negatives = 16
augmented = 2
";

pub fn small_config() -> Config {
    Config::parse(SMALL).unwrap()
}

pub fn context(workers: usize, seed: u64) -> Context {
    Context::new(small_config(), seed, workers, false).unwrap()
}

/// Synthesize `pages` small pages into `dir` and return the manifest path.
pub fn fixture(dir: &Path, pages: usize, seed: u64) -> PathBuf {
    synth_corpus(&context(2, seed), pages, dir).unwrap();
    dir.join("manifest.jsonl")
}

pub fn prepared(ctx: &Context, manifest: &Path, contrastive: bool) -> Prepared {
    prepare(ctx, manifest, contrastive).unwrap()
}

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_docforge"))
}

pub fn run_bin(args: &[&dyn AsRef<std::ffi::OsStr>]) -> Output {
    let mut c = bin();
    for a in args {
        c.arg(a);
    }
    c.output().unwrap()
}

pub fn write_config(dir: &Path) -> PathBuf {
    let p = dir.join("small.toml");
    std::fs::write(&p, SMALL).unwrap();
    p
}

/// Every file under `root`, relative path and bytes, sorted.
pub fn tree(root: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((p.strip_prefix(root).unwrap().to_path_buf(), std::fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}
