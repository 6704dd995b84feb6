use proptest::prelude::*;
use unicode_normalization::UnicodeNormalization;
use unicode_segmentation::UnicodeSegmentation;

use yorvec::corpus::{sentences, tokenize};
use yorvec::eval::{analogy_accuracy, cosine, derive_undiacritized_set, pearson, spearman, AnalogyOptions, AnalogySet};
use yorvec::matrix::Matrix;
use yorvec::textnorm::{normalize_str, NormalizationPolicy};
use yorvec::vocab::count_tokens;
use yorvec::WordEmbeddings;

fn policies() -> Vec<NormalizationPolicy> {
    let mut out = Vec::new();
    for bits in 0..8u8 {
        out.push(NormalizationPolicy {
            strip_tone: bits & 1 != 0,
            strip_underdot: bits & 2 != 0,
            strip_markup: bits & 4 != 0,
        });
    }
    out
}

/// Text over Yorùbá letters, marks in either encoding, punctuation, markup
/// fragments and a little arbitrary Unicode.
fn yoruba_text() -> impl Strategy<Value = String> {
    let piece = prop_oneof![
        4 => prop::sample::select(vec![
            "a", "à", "á", "ā", "e", "ẹ", "ẹ̀", "ẹ́", "e\u{301}\u{323}", "i", "í", "o", "ọ", "ọ̀", "o\u{323}\u{301}", "u", "ù",
            "n", "ń", "ǹ", "m", "ḿ", "s", "ṣ", "Ṣ", "Ẹ́", "À", "gb", "k", "y", "w"
        ])
        .prop_map(str::to_owned),
        2 => prop::sample::select(vec![" ", " ", "-", "'", ".", ",", "\u{2019}", "\t", "9"]).prop_map(str::to_owned),
        1 => prop::sample::select(vec!["[[", "]]", "|", "<b>", "</b>", "<!-- x -->"]).prop_map(str::to_owned),
        1 => any::<char>().prop_map(|c| c.to_string()),
    ];
    prop::collection::vec(piece, 0..40).prop_map(|v| v.concat())
}

proptest! {
    #[test]
    fn normalization_is_idempotent(text in yoruba_text()) {
        for p in policies() {
            let once = normalize_str(&text, &p);
            prop_assert_eq!(normalize_str(&once, &p), once);
        }
    }

    #[test]
    fn normalization_ignores_encoding(text in yoruba_text()) {
        let nfc: String = text.nfc().collect();
        let nfd: String = text.nfd().collect();
        for p in policies() {
            prop_assert_eq!(normalize_str(&nfc, &p), normalize_str(&nfd, &p));
        }
    }

    #[test]
    fn stripped_marks_never_survive(text in yoruba_text()) {
        for p in policies() {
            let out = normalize_str(&text, &p);
            prop_assert!(!out.nfd().any(|c| p.strips(c)), "{:?}", out);
        }
    }

    #[test]
    fn grapheme_count_preserved_without_markup(text in yoruba_text()) {
        for p in policies().into_iter().filter(|p| !p.strip_markup) {
            let nfc: String = text.nfc().collect();
            prop_assert_eq!(normalize_str(&text, &p).graphemes(true).count(), nfc.graphemes(true).count());
        }
    }

    #[test]
    fn tokenize_commutes_with_normalize(text in yoruba_text()) {
        let p = NormalizationPolicy::undiacritize();
        let after: Vec<String> = tokenize(&normalize_str(&text, &p)).into_iter().map(str::to_owned).collect();
        let before: Vec<String> = tokenize(&text).into_iter().map(|t| normalize_str(t, &p)).collect();
        prop_assert_eq!(after, before);
    }

    #[test]
    fn normalizing_merges_vocabulary(lines in prop::collection::vec(yoruba_text(), 1..12)) {
        let normalized: Vec<String> = lines.iter().map(|l| normalize_str(l, &NormalizationPolicy::undiacritize())).collect();
        let d = count_tokens(&sentences(&lines, false));
        let u = count_tokens(&sentences(&normalized, false));
        prop_assert!(u.len() <= d.len());
        prop_assert_eq!(u.values().sum::<u64>(), d.values().sum::<u64>());
    }

    #[test]
    fn spearman_ignores_monotone_transforms(
        pairs in prop::collection::vec((0u8..20, -50i32..50), 3..60),
    ) {
        let xs: Vec<f64> = pairs.iter().map(|p| f64::from(p.0)).collect();
        let ys: Vec<f64> = pairs.iter().map(|p| f64::from(p.1)).collect();
        if let Ok(s) = spearman(&xs, &ys) {
            let warped: Vec<f64> = xs.iter().map(|x| x.powi(3) + (x / 7.0).exp()).collect();
            prop_assert_eq!(spearman(&warped, &ys).unwrap(), s);
            let flipped: Vec<f64> = ys.iter().map(|y| -y).collect();
            prop_assert!((spearman(&xs, &flipped).unwrap() + s).abs() < 1e-12);
        }
    }

    #[test]
    fn pearson_ignores_positive_affine_maps(
        xs in prop::collection::vec(-100.0f64..100.0, 3..60),
        a in 0.01f64..50.0,
        b in -1e3f64..1e3,
    ) {
        let ys: Vec<f64> = xs.iter().enumerate().map(|(i, x)| x.sin() + i as f64 * 0.1).collect();
        if let Ok(r) = pearson(&xs, &ys) {
            let mapped: Vec<f64> = xs.iter().map(|x| a * x + b).collect();
            prop_assert!((pearson(&mapped, &ys).unwrap() - r).abs() < 1e-9);
            prop_assert!(r.abs() <= 1.0);
        }
    }

    #[test]
    fn cosine_is_symmetric_and_bounded(
        u in prop::collection::vec(-10.0f32..10.0, 1..16),
        seed in any::<u64>(),
    ) {
        let v: Vec<f32> = u.iter().enumerate().map(|(i, x)| (x * 1.3 + (seed >> (i % 60)) as f32 % 5.0) - 2.0).collect();
        if let (Ok(a), Ok(b)) = (cosine(&u, &v), cosine(&v, &u)) {
            prop_assert_eq!(a, b);
            prop_assert!((-1.0..=1.0).contains(&a));
        }
    }

    #[test]
    fn analogy_ignores_vector_scale(
        data in prop::collection::vec(-1.0f32..1.0, 12 * 4),
        exps in prop::collection::vec(-4i32..4, 12),
        quads in prop::collection::vec(prop::array::uniform4(0usize..12), 1..20),
    ) {
        let words: Vec<String> = (0..12).map(|i| format!("w{i}")).collect();
        let scaled: Vec<f32> = data.chunks(4).zip(&exps).flat_map(|(r, &e)| r.iter().map(move |x| x * 2f32.powi(e))).collect();
        let base = WordEmbeddings::new(words.clone(), Matrix::from_vec(12, 4, data.clone()));
        let other = WordEmbeddings::new(words.clone(), Matrix::from_vec(12, 4, scaled));
        let mut text = String::new();
        for (i, q) in quads.iter().enumerate() {
            text.push_str(&format!(": s{i}\n{} {} {} {}\n", words[q[0]], words[q[1]], words[q[2]], words[q[3]]));
        }
        let set = AnalogySet::parse(&text).unwrap();
        let opts = AnalogyOptions::default();
        let (a, b) = (analogy_accuracy(&base, &set, &opts), analogy_accuracy(&other, &set, &opts));
        if let (Ok(a), Ok(b)) = (a, b) {
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn derived_sets_are_fixed_points(
        rows in prop::collection::vec(prop::array::uniform4(prop::sample::select(vec![
            "ọkọ", "ọkọ̀", "oko", "ìyá", "iya", "bàbá", "ilé", "ìlú", "wá", "lọ", "ọ̀rẹ́", "ọ̀tá", "ojú", "ọjà",
        ])), 1..25),
    ) {
        let mut text = String::from(": s\n");
        let mut seen = std::collections::HashSet::new();
        for r in &rows {
            if seen.insert(*r) {
                text.push_str(&r.join(" "));
                text.push('\n');
            }
        }
        let set = AnalogySet::parse(&text).unwrap();
        let p = NormalizationPolicy::undiacritize();
        let once = derive_undiacritized_set(&set, &p);
        let twice = derive_undiacritized_set(&once.set, &p);
        prop_assert_eq!(&twice.set, &once.set);
        prop_assert_eq!(once.set.len() + once.degenerate_dropped + once.duplicates_dropped, set.len());
    }

    #[test]
    fn word2vec_text_round_trip(data in prop::collection::vec(-1e3f32..1e3, 3 * 5)) {
        let words = vec!["ìyá".to_owned(), "a-b".to_owned(), "x'y".to_owned()];
        let emb = WordEmbeddings::new(words, Matrix::from_vec(3, 5, data));
        let mut buf = Vec::new();
        emb.write_text(&mut buf).unwrap();
        let back = WordEmbeddings::read_text(buf.as_slice()).unwrap();
        prop_assert_eq!(back.words(), emb.words());
        prop_assert_eq!(back.vectors().as_slice(), emb.vectors().as_slice());
    }
}
