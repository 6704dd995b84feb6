#![allow(dead_code)]

use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

pub fn read(name: &str) -> String {
    std::fs::read_to_string(data(name)).unwrap()
}

const GROUPS: &[&[&str]] = &[
    &["bàbá", "ìyá", "ọkọ", "aya"],
    &["ọmọkùnrin", "ọmọbìnrin", "bàbá", "ìyá"],
    &["ẹ̀gbọ́n", "àbúrò", "bàbá", "ìyá"],
    &["ọkọ̀", "ọkọ", "ilé", "ìlú"],
    &["ìlú", "ilé", "ọjà", "ojú"],
    &["wá", "lọ", "àgbà", "ọdọ"],
    &["wá", "lọ", "òwúrọ̀", "ìrọ̀lẹ́"],
    &["wá", "lọ", "ọ̀tá", "ọ̀rẹ́"],
    &["wá", "lọ", "ńlá", "kékeré"],
];

const FUNCTION: &[&str] = &["ni", "ti", "ati", "wọn", "sí", "pé"];

const FOREIGN: &[&str] = &[
    "the quick brown fox jumps over the lazy dog",
    "le chat est sur la table",
    "see also external links",
];

/// Raw Yorùbá-looking text built from the fixture vocabulary, with markup
/// and foreign lines mixed in.
pub fn synthetic_raw_corpus(seed: u64, lines: usize) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..lines)
        .map(|_| {
            if rng.gen_bool(0.05) {
                return FOREIGN.choose(&mut rng).unwrap().to_string();
            }
            let group = GROUPS.choose(&mut rng).unwrap();
            let n = rng.gen_range(6..=10);
            let mut words: Vec<String> = (0..n)
                .map(|_| {
                    if rng.gen_bool(0.7) {
                        group.choose(&mut rng).unwrap().to_string()
                    } else {
                        FUNCTION.choose(&mut rng).unwrap().to_string()
                    }
                })
                .collect();
            if rng.gen_bool(0.1) {
                words.push("[[Ìbàdàn|ìlú]]".into());
            }
            words.join(" ")
        })
        .collect()
}
