use oce::batch;
use oce::cost::CostSpec;
use oce::data::{Dataset, Label, LabeledInstance};
use oce::drift::{generate, DriftKind, DriftStreamSpec};
use oce::ensemble::{Algorithm, EnsembleConfig};
use oce::eval::{auc_from_scores, prequential_online};
use oce::learners::LearnerKind;
use oce::online::OnlineEnsemble;
use oce::rng::RngStream;
use proptest::prelude::*;

fn separable(n: usize, seed: u64) -> Dataset {
    let mut rng = RngStream::new(seed, 0);
    let instances = (0..n)
        .map(|i| {
            let label = if i % 8 == 0 { Label::Positive } else { Label::Negative };
            let off = if label.is_positive() { 5.0 } else { 0.0 };
            LabeledInstance::new(vec![off + rng.uniform(), off + rng.uniform()], label).unwrap()
        })
        .collect();
    Dataset::new(instances).unwrap()
}

#[test]
fn every_algorithm_separates_easy_data() {
    let train = separable(400, 1);
    let test = separable(200, 2);
    let labels = test.labels();
    for alg in Algorithm::ALL {
        let cfg = EnsembleConfig { cost: CostSpec::new(1.0, 0.5, 2.0).unwrap(), ..Default::default() };
        let rng = RngStream::new(3, 7);
        let b = batch::train(alg, &train, &cfg, &rng).unwrap();
        let mut o = OnlineEnsemble::new(alg, cfg, 2, &rng).unwrap();
        for inst in train.instances() {
            o.update(inst).unwrap();
        }
        let bs: Vec<f64> = test.instances().iter().map(|i| b.score(&i.features)).collect();
        let os: Vec<f64> = test.instances().iter().map(|i| o.score(&i.features)).collect();
        assert!(auc_from_scores(&bs, &labels).unwrap() >= 0.95, "batch {alg}");
        assert!(auc_from_scores(&os, &labels).unwrap() >= 0.95, "online {alg}");
    }
}

#[test]
fn prequential_runs_are_reproducible() {
    for kind in [DriftKind::Sine1, DriftKind::Sine1G, DriftKind::Sine1M] {
        let stream = generate(&DriftStreamSpec::new(kind, 2000, 20.0, 5)).unwrap();
        let cfg = EnsembleConfig { learner: LearnerKind::Lda, beta: 0.9, ..Default::default() };
        let run = || {
            let mut e = OnlineEnsemble::new(Algorithm::Csb2, cfg, 2, &RngStream::new(5, 7)).unwrap();
            prequential_online(&stream, &mut e).unwrap()
        };
        let (a, b) = (run(), run());
        assert_eq!(a.scores, b.scores);
        assert_eq!(a.auc, b.auc);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn scores_stay_in_unit_interval(
        seed in 0u64..1000,
        alg in 0usize..12,
        learner in 0usize..3,
        n_pos in 2usize..15,
        n_neg in 2usize..60,
    ) {
        let mut rng = RngStream::new(seed, 1);
        let mut instances = Vec::new();
        for i in 0..n_pos + n_neg {
            let label = if i < n_pos { Label::Positive } else { Label::Negative };
            instances.push(LabeledInstance::new(vec![rng.uniform() * 3.0, rng.uniform()], label).unwrap());
        }
        rng.shuffle(&mut instances);
        let data = Dataset::new(instances).unwrap();
        let cfg = EnsembleConfig {
            members: 4,
            learner: LearnerKind::ALL[learner],
            cost: CostSpec::new(1.0, 0.3, 3.0).unwrap(),
            ..Default::default()
        };
        let alg = Algorithm::ALL[alg];
        let rng = RngStream::new(seed, 7);
        let b = batch::train(alg, &data, &cfg, &rng).unwrap();
        let mut o = OnlineEnsemble::new(alg, cfg, 2, &rng).unwrap();
        for inst in data.instances() {
            o.update(inst).unwrap();
        }
        for inst in data.instances() {
            for s in [b.score(&inst.features), o.score(&inst.features)] {
                prop_assert!((0.0..=1.0).contains(&s), "{alg}: {s}");
            }
        }
    }
}
