#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use gfconv::field::ScalarField;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gfconv"))
}

pub fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn gfconv")
}

pub fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 temp path")
}

/// Random 8-bit-valued map, seeded.
pub fn random_map(h: usize, w: usize, seed: u64) -> ScalarField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ScalarField::from_fn(h, w, |_, _| f64::from(rng.random::<u8>()) / 255.0)
}

/// Binary blob that always has both classes.
pub fn random_mask(h: usize, w: usize, seed: u64) -> ScalarField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ScalarField::from_fn(h, w, |r, c| {
        if (r + c) % 7 == 0 {
            1.0
        } else if (r + c) % 7 == 1 {
            0.0
        } else if rng.random_bool(0.4) {
            1.0
        } else {
            0.0
        }
    })
}

pub fn write_images(dir: &Path, names: &[&str], fields: &[ScalarField]) -> Vec<PathBuf> {
    std::fs::create_dir_all(dir).unwrap();
    names
        .iter()
        .zip(fields)
        .map(|(n, f)| {
            let p = dir.join(n);
            gfconv::io::save_image(f, &p).unwrap();
            p
        })
        .collect()
}

/// Parses a CSV written by the CLI into (header, rows).
pub fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

/// Every file under `dir` with its bytes, sorted by relative path.
pub fn snapshot(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((p.strip_prefix(dir).unwrap().to_path_buf(), std::fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}
