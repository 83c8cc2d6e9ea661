use std::collections::{BTreeMap, BTreeSet};
use std::sync::OnceLock;

use proptest::prelude::*;

use labelhot::consensus::{sample_scenario, AnnotationIndex, EventSource, SamplingParams, Scenario};
use labelhot::signal::{validate_manifest, Annotation, DatasetManifest};
use labelhot::synth::{generate_dataset, DatasetPlan, SynthConfig};

struct Data {
    _dir: tempfile::TempDir,
    manifest: DatasetManifest,
    annotations: Vec<Annotation>,
}

fn plan() -> DatasetPlan {
    DatasetPlan {
        recording: SynthConfig {
            duration_s: 60.0,
            n_channels: 8,
            event_rate_per_min: 40.0,
            ..SynthConfig::default()
        },
        n_train: 6,
        n_test: 2,
        train_blocks: 6,
        test_blocks: 3,
        block_s: 5.0,
        extra_labeled_test_recordings: 1,
        ..DatasetPlan::default()
    }
}

fn data() -> &'static Data {
    static D: OnceLock<Data> = OnceLock::new();
    D.get_or_init(|| {
        let dir = tempfile::tempdir().unwrap();
        let ds = generate_dataset(&plan(), 9, dir.path()).unwrap();
        let annotations = ds.train.load_annotations().unwrap();
        Data {
            _dir: dir,
            manifest: ds.train,
            annotations,
        }
    })
}

fn params(n: usize) -> SamplingParams {
    SamplingParams {
        k: 3,
        n_rec: 2,
        n_pos: n,
        n_neg: n,
    }
}

#[test]
fn synthesized_dataset_is_consistent() {
    let d = data();
    let report = validate_manifest(&d.manifest, &d.annotations);
    assert!(report.is_empty(), "{report:?}");
}

#[test]
fn synthesis_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let mut small = plan();
    small.n_train = 2;
    small.n_test = 1;
    let da = generate_dataset(&small, 4, a.path()).unwrap();
    let db = generate_dataset(&small, 4, b.path()).unwrap();
    assert_eq!(da.train.recordings, db.train.recordings);
    for f in ["train_annotations.jsonl", "test_annotations.jsonl", "recordings/train_000.json", "recordings/train_000.f32"] {
        let (x, y) = (a.path().join(f), b.path().join(f));
        assert_eq!(std::fs::read(x).unwrap(), std::fs::read(y).unwrap(), "{f}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn b_repeats_a_once_per_labeler(rs in 0u64..1000, es in 0u64..1000) {
        let d = data();
        let index = AnnotationIndex::new(&d.manifest, &d.annotations);
        let a = sample_scenario(&d.manifest, &index, Scenario::A, &params(10), rs, es).unwrap();
        let b = sample_scenario(&d.manifest, &index, Scenario::B, &params(10), rs, es).unwrap();
        prop_assert_eq!(b.len(), 3 * a.len());
        let mut want: BTreeMap<_, usize> = BTreeMap::new();
        for e in &a.examples {
            *want.entry(e.key()).or_default() += 3;
        }
        let mut got: BTreeMap<_, usize> = BTreeMap::new();
        for e in &b.examples {
            *got.entry(e.key()).or_default() += 1;
        }
        prop_assert_eq!(got, want);
    }

    #[test]
    fn d_gives_each_labeler_its_own_recordings(rs in 0u64..1000, es in 0u64..1000) {
        let d = data();
        let index = AnnotationIndex::new(&d.manifest, &d.annotations);
        let spec = sample_scenario(&d.manifest, &index, Scenario::D, &params(10), rs, es).unwrap();
        let mut owners: BTreeMap<&str, BTreeSet<usize>> = BTreeMap::new();
        for e in &spec.examples {
            let EventSource::Single(l) = e.source else {
                return Err(TestCaseError::fail("D example without a labeler"));
            };
            owners.entry(&e.recording_id).or_default().insert(l);
        }
        prop_assert_eq!(owners.len(), 3 * 2);
        prop_assert!(owners.values().all(|o| o.len() == 1));
    }

    #[test]
    fn same_seeds_same_spec(s in 0usize..4, rs in 0u64..1000, es in 0u64..1000) {
        let d = data();
        let index = AnnotationIndex::new(&d.manifest, &d.annotations);
        let scenario = Scenario::ALL[s];
        let x = sample_scenario(&d.manifest, &index, scenario, &params(6), rs, es).unwrap();
        let y = sample_scenario(&d.manifest, &index, scenario, &params(6), rs, es).unwrap();
        prop_assert_eq!(x, y);
    }

    #[test]
    fn larger_samples_contain_smaller(s in 0usize..4, rs in 0u64..1000, es in 0u64..1000) {
        let d = data();
        let index = AnnotationIndex::new(&d.manifest, &d.annotations);
        let scenario = Scenario::ALL[s];
        let small = sample_scenario(&d.manifest, &index, scenario, &params(3), rs, es).unwrap();
        let large = sample_scenario(&d.manifest, &index, scenario, &params(6), rs, es).unwrap();
        let keys: BTreeSet<_> = large.examples.iter().map(|e| (e.key(), e.source, e.polarity)).collect();
        for e in &small.examples {
            prop_assert!(keys.contains(&(e.key(), e.source, e.polarity)));
        }
    }
}
