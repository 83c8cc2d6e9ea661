use proptest::prelude::*;

use labelhot::descriptor::{describe_event, describe_triplet, extract_windows, FeatureLayout, WindowTriplet, N_FEATURES};
use labelhot::encoding::{assemble_agnostic, assemble_training_example, assemble_voting_set, encode_labeler, EncodingScheme, SchemeKind};
use labelhot::eval::average_precision;
use labelhot::gbdt::{grow_tree, logistic_grad_hess, train, train_with_history, ModelMeta, Node, TrainConfig};
use labelhot::signal::{load_recording, parse_annotations, save_annotations, save_recording, Annotation, EventClass, Recording};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn signal(len: usize) -> impl Strategy<Value = Vec<f32>> {
    prop::collection::vec(-500.0f32..500.0, len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn recording_round_trip_is_bit_exact(a in signal(300), b in signal(300), fs in 1u32..2000) {
        let dir = tempfile::tempdir().unwrap();
        let rec = Recording::new("r", fs, vec!["x".into(), "y".into()], vec![a, b]).unwrap();
        let path = dir.path().join("r.json");
        save_recording(&rec, &path).unwrap();
        let back = load_recording(&path).unwrap();
        prop_assert_eq!(back.samples.len(), 2);
        for (x, y) in rec.samples.iter().flatten().zip(back.samples.iter().flatten()) {
            prop_assert_eq!(x.to_bits(), y.to_bits());
        }
        prop_assert_eq!(back, rec);
    }

    #[test]
    fn annotation_round_trip(t0 in 0.0f64..100.0, d in 0.001f64..2.0, class in 0usize..8) {
        let a = Annotation {
            recording_id: "r".into(),
            channel: "c".into(),
            labeler: "L".into(),
            t_start: t0,
            t_end: t0 + d,
            class: EventClass::ALL[class],
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.jsonl");
        save_annotations(std::slice::from_ref(&a), &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let back = parse_annotations(text.as_bytes()).unwrap();
        prop_assert_eq!(back, vec![a]);
    }

    #[test]
    fn descriptor_is_shift_invariant(x in signal(700), offset in 0usize..200) {
        let center = 300;
        let mut shifted = vec![0.0f32; offset];
        shifted.extend_from_slice(&x);
        let a = describe_event(&x, center, 256).unwrap();
        let b = describe_event(&shifted, center + offset, 256).unwrap();
        prop_assert_eq!(a.values, b.values);
    }

    #[test]
    fn ratio_features_are_scale_invariant(x in prop::collection::vec(-100.0f64..100.0, 461), a in 0.01f64..100.0) {
        let t = WindowTriplet::from_parts(256, x[..205].to_vec(), x[205..256].to_vec(), x[256..].to_vec());
        let base = describe_triplet(&t, 8).values;
        let scaled = describe_triplet(&t.scaled(a), 8).values;
        let layout = FeatureLayout::standard();
        let ratio: Vec<usize> = layout
            .names
            .iter()
            .enumerate()
            .filter(|(_, n)| *n == "anomaly" || n.starts_with("fft_quotient") || n.starts_with("cwt_") || *n == "teager_quotient" || *n == "wl_quotient")
            .map(|(i, _)| i)
            .collect();
        prop_assert_eq!(ratio.len(), 1 + 8 + 25 + 2);
        for i in ratio {
            let (u, v) = (base[i], scaled[i]);
            prop_assert!((u - v).abs() <= 1e-9 * u.abs().max(v.abs()).max(1.0), "{} {} vs {}", layout.names[i], u, v);
        }
    }

    #[test]
    fn descriptor_outputs_are_finite(x in prop::collection::vec(prop_oneof![Just(0.0f32), -1e6f32..1e6, -1e-6f32..1e-6], 461)) {
        let v = describe_event(&x, 230, 256).unwrap();
        prop_assert_eq!(v.values.len(), N_FEATURES);
        prop_assert!(v.values.iter().all(|f| f.is_finite()));
    }

    #[test]
    fn labeler_rows_sum_and_are_injective(k in 2usize..7, v2 in any::<bool>()) {
        let kind = if v2 { SchemeKind::V2 } else { SchemeKind::V1 };
        let s = EncodingScheme::new(kind, k);
        let codes: Vec<Vec<f64>> = (0..k).map(|l| encode_labeler(l, &s).unwrap()).collect();
        for c in &codes {
            prop_assert_eq!(c.len(), s.encoded_length());
            let want = if v2 { k as f64 } else { 1.0 };
            prop_assert_eq!(c.iter().sum::<f64>(), want);
        }
        for i in 0..k {
            for j in i + 1..k {
                prop_assert_ne!(&codes[i], &codes[j]);
            }
        }
    }

    #[test]
    fn agnostic_and_voting_share_signal_part(f in prop::collection::vec(-10.0f64..10.0, 5), k in 2usize..6, v2 in any::<bool>(), force in any::<bool>()) {
        let s = EncodingScheme::new(if v2 { SchemeKind::V2 } else { SchemeKind::V1 }, k);
        let a = assemble_agnostic(&f, 5, &s).unwrap();
        prop_assert!(a[5..].iter().all(|&v| v == 0.0));
        for v in assemble_voting_set(&f, 5, &s, force).unwrap() {
            prop_assert_eq!(&v[..5], &a[..5]);
        }
        let t = assemble_training_example(&f, 5, Some(k - 1), &s).unwrap();
        prop_assert_eq!(&t[..5], &f[..]);
    }

    #[test]
    fn ap_is_invariant_under_increasing_transforms(
        raw in prop::collection::vec((0u8..20, any::<bool>()), 1..200)
    ) {
        let scores: Vec<f64> = raw.iter().map(|(s, _)| *s as f64 / 10.0).collect();
        let mut labels: Vec<u8> = raw.iter().map(|(_, l)| *l as u8).collect();
        labels[0] = 1;
        let a = average_precision(&scores, &labels).unwrap();
        let t: Vec<f64> = scores.iter().map(|s| (3.0 * s).exp() - 7.0).collect();
        prop_assert_eq!(a, average_precision(&t, &labels).unwrap());
        prop_assert!((0.0..=1.0).contains(&a));
    }
}

fn dataset(seed: u64, n: usize, d: usize) -> (Vec<Vec<f64>>, Vec<u8>) {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..d).map(|_| (rng.gen_range(0..12) as f64) * 0.5 + rng.gen_range(-1.0..1.0)).collect())
        .collect();
    let y = x
        .iter()
        .map(|r| (r[0] + 0.5 * r[1 % d] + rng.gen_range(-2.0..2.0) > 3.0) as u8)
        .collect();
    (x, y)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn training_loss_never_increases(seed in any::<u64>(), n in 2usize..150, d in 1usize..5) {
        let (x, y) = dataset(seed, n, d);
        let cfg = TrainConfig { n_trees: 60, max_depth: 3, learning_rate: 0.3, ..TrainConfig::default() };
        let (_, hist) = train_with_history(&x, &y, &cfg, ModelMeta::generic(d)).unwrap();
        for w in hist.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12, "{} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn leaf_weights_are_finite(seed in any::<u64>(), n in 1usize..80, lambda in prop_oneof![Just(0.0), 0.0f64..5.0]) {
        let (x, y) = dataset(seed, n, 3);
        let margins: Vec<f64> = (0..n).map(|i| (i as f64 * 7.3).sin() * 40.0).collect();
        let (g, h): (Vec<f64>, Vec<f64>) = margins.iter().zip(&y).map(|(&m, &l)| logistic_grad_hess(m, l)).unzip();
        let cfg = TrainConfig { max_depth: 4, lambda, ..TrainConfig::default() };
        let tree = grow_tree(&x, &g, &h, &cfg, &mut ChaCha8Rng::seed_from_u64(seed));
        for node in &tree.nodes {
            if let Node::Leaf { weight } = node {
                prop_assert!(weight.is_finite());
            }
        }
    }

    #[test]
    fn predictions_ignore_monotone_feature_transforms(seed in any::<u64>(), n in 2usize..100, col in 0usize..3) {
        let (x, y) = dataset(seed, n, 3);
        let mut xt = x.clone();
        for r in &mut xt {
            r[col] = (r[col] * 0.7).exp() + 2.0;
        }
        let cfg = TrainConfig { n_trees: 15, max_depth: 3, seed, ..TrainConfig::default() };
        let a = train(&x, &y, &cfg, ModelMeta::generic(3)).unwrap();
        let b = train(&xt, &y, &cfg, ModelMeta::generic(3)).unwrap();
        for (r, rt) in x.iter().zip(&xt) {
            prop_assert_eq!(a.predict_proba(r).unwrap(), b.predict_proba(rt).unwrap());
        }
    }
}

#[test]
fn polarity_has_exactly_three_positive_classes() {
    let pos: Vec<EventClass> = EventClass::ALL.into_iter().filter(|c| c.polarity().is_positive()).collect();
    assert_eq!(pos, vec![EventClass::SharpWave, EventClass::Spike, EventClass::SharpAndSpikeComplex]);
}

#[test]
fn context_is_required() {
    let x = vec![0.0f32; 461];
    assert!(extract_windows(&x, 229, 256).is_err());
    assert!(extract_windows(&x, 230, 256).is_ok());
}
