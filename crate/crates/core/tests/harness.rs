use std::collections::BTreeSet;

use proptest::prelude::*;

use textbench::harness::report::{results_csv, summary_csv, table2_text, table3_text, Comparisons};
use textbench::harness::{
    compare_models, run_experiment, split, Cell, CompareMetric, ConstantSpec, ExperimentResult, FeatureViews,
    Fractions, MnbSpec, ModelConfig, ModelOutcome, ModelSpec, SplitPlan, SynthModel, SynthSpec,
};
use textbench::stats::{metrics, Confusion};
use textbench::textprep::{Document, Stopwords};

fn model(name: &str, spec: ModelSpec) -> ModelConfig {
    ModelConfig { name: name.into(), spec }
}

/// Each label has its own marker words, so the classes never share a term.
fn separable_corpus(n: usize) -> Vec<Document> {
    (0..n)
        .map(|i| {
            let pos = i % 3 != 0;
            let text = if pos { "good good alpha" } else { "bad bad beta" };
            Document { id: format!("d{i}"), text: text.into(), label: Some(pos) }
        })
        .collect()
}

fn cell(split: usize, c: Confusion) -> Cell {
    Cell { split, seed: split as u64 + 1, confusion: c, metrics: metrics(&c), seconds: 0.0 }
}

/// Confusion over 100 documents with accuracy `acc` percent.
fn with_accuracy(acc: usize, fp: usize) -> Confusion {
    Confusion { tp: acc - 40, tn: 40, fp, fn_: 100 - acc - fp }
}

fn outcome(name: &str, cells: Vec<Cell>) -> ModelOutcome {
    ModelOutcome { config: model(name, ModelSpec::Mnb(MnbSpec::default())), cells, failure: None }
}

/// Two-sided exact signed-rank p by listing all sign assignments.
fn enumeration_p(d: &[f64]) -> f64 {
    let nz: Vec<f64> = d.iter().copied().filter(|&v| v != 0.0).collect();
    let n = nz.len();
    if n == 0 {
        return 1.0;
    }
    let doubled: Vec<u64> = nz
        .iter()
        .map(|a| {
            let less = nz.iter().filter(|b| b.abs() < a.abs()).count() as u64;
            let equal = nz.iter().filter(|b| b.abs() == a.abs()).count() as u64;
            2 * less + equal + 1
        })
        .collect();
    let obs: u64 = nz.iter().zip(&doubled).filter(|(v, _)| **v > 0.0).map(|(_, r)| r).sum();
    let (mut lo, mut hi) = (0u64, 0u64);
    for mask in 0u64..(1 << n) {
        let w: u64 = (0..n).filter(|&i| mask >> i & 1 == 1).map(|i| doubled[i]).sum();
        lo += (w <= obs) as u64;
        hi += (w >= obs) as u64;
    }
    (2.0 * lo.min(hi) as f64 / (1u64 << n) as f64).min(1.0)
}

#[test]
fn split_parts_partition_the_corpus_on_fifty_fixtures() {
    for i in 0..50u64 {
        let n = 3 + (i as usize * 37) % 400;
        let labels: Vec<bool> = (0..n).map(|j| (j * 7 + i as usize) % 5 < 2).collect();
        let s = split(&labels, i, Fractions::default(), false).unwrap();
        let (tr, va, te): (BTreeSet<usize>, BTreeSet<usize>, BTreeSet<usize>) = (
            s.train.iter().copied().collect(),
            s.val.iter().copied().collect(),
            s.test.iter().copied().collect(),
        );
        assert!(tr.is_disjoint(&va) && tr.is_disjoint(&te) && va.is_disjoint(&te));
        let all: BTreeSet<usize> = tr.union(&va).chain(&te).copied().collect();
        assert_eq!(all, (0..n).collect());
        assert_eq!((s.train.len(), s.val.len(), s.test.len()), Fractions::default().sizes(n));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn splits_are_partitions(n in 3usize..300, seed: u64, stratify: bool, bits in proptest::collection::vec(any::<bool>(), 300)) {
        let labels = &bits[..n];
        let s = split(labels, seed, Fractions::default(), stratify).unwrap();
        let mut all: Vec<usize> = s.train.iter().chain(&s.val).chain(&s.test).copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
        prop_assert_eq!(&s, &split(labels, seed, Fractions::default(), stratify).unwrap());
    }

    #[test]
    fn referent_is_weakly_best(accs in proptest::collection::vec(45usize..=95, 12), fps in proptest::collection::vec(0usize..=5, 12)) {
        let result = ExperimentResult {
            plan: SplitPlan { seeds: vec![1, 2, 3, 4], ..SplitPlan::default() },
            models: (0..3)
                .map(|m| outcome(&format!("m{m}"), (0..4).map(|s| cell(s, with_accuracy(accs[m * 4 + s], fps[m * 4 + s]))).collect()))
                .collect(),
        };
        let acc = compare_models(&result, CompareMetric::Accuracy).unwrap();
        let best = acc.rows.iter().find(|r| r.is_referent).unwrap().mean;
        prop_assert!(acc.rows.iter().all(|r| r.mean <= best));
        let dp = compare_models(&result, CompareMetric::DiffPos).unwrap();
        let best = dp.rows.iter().find(|r| r.is_referent).unwrap().mean.abs();
        prop_assert!(dp.rows.iter().all(|r| r.mean.abs() >= best));
    }
}

#[test]
fn memorizable_corpus_scores_perfectly() {
    let views = FeatureViews::build(&separable_corpus(60), &Stopwords::default(), 1).unwrap();
    let plan = SplitPlan { seeds: vec![5], ..SplitPlan::default() };
    let r = run_experiment(&views, &[model("MNB", ModelSpec::Mnb(MnbSpec::default()))], &plan).unwrap();
    let cells = &r.models[0].cells;
    assert_eq!(cells.len(), 1);
    assert_eq!(cells[0].metrics.acc, Some(100.0));
}

#[test]
fn constant_positive_baseline() {
    let views = FeatureViews::build(&separable_corpus(90), &Stopwords::default(), 1).unwrap();
    let plan = SplitPlan { seeds: vec![1, 2, 3], ..SplitPlan::default() };
    let models = [model("always", ModelSpec::Constant(ConstantSpec { positive: true }))];
    let r = run_experiment(&views, &models, &plan).unwrap();
    let s = r.models[0].summary().unwrap();
    assert_eq!(s.sens, Some(100.0));
    assert_eq!(s.spec, Some(0.0));
    let (_, _, test) = Fractions::default().sizes(90);
    assert_eq!(s.n_pos, test as f64);
    for c in &r.models[0].cells {
        let k = c.confusion;
        assert_eq!(c.metrics.n_pos as i64 - (k.tp + k.fn_) as i64, k.fp as i64 - k.fn_ as i64);
    }
}

#[test]
fn experiment_csv_is_reproducible() {
    let corpus = textbench::harness::synth_corpus(&SynthSpec {
        n_docs: 200,
        vocab_size: 200,
        length: textbench::harness::LengthModel { scale: 0.05, ..Default::default() },
        ..SynthSpec::default()
    })
    .unwrap();
    let views = FeatureViews::build(&corpus, &Stopwords::default(), 2).unwrap();
    let plan = SplitPlan { seeds: vec![1, 2, 3], ..SplitPlan::default() };
    let models = [
        model("MNB", ModelSpec::Mnb(MnbSpec::default())),
        model("always", ModelSpec::Constant(ConstantSpec { positive: false })),
    ];
    let a = run_experiment(&views, &models, &plan).unwrap();
    let b = run_experiment(&views, &models, &plan).unwrap();
    assert_eq!(results_csv(&a).unwrap(), results_csv(&b).unwrap());
    assert_eq!(summary_csv(&a).unwrap(), summary_csv(&b).unwrap());
    for m in &a.models {
        for c in &m.cells {
            let k = c.confusion;
            assert_eq!(c.metrics.diff_pos, k.fp as i64 - k.fn_ as i64);
        }
    }
}

#[test]
fn identical_cells_average_to_themselves() {
    let c = Confusion { tp: 30, fp: 7, tn: 55, fn_: 8 };
    let m = outcome("m", (0..10).map(|s| cell(s, c)).collect());
    let s = m.summary().unwrap();
    let row = metrics(&c);
    assert_eq!(s.acc, row.acc);
    assert_eq!(s.sens, row.sens);
    assert_eq!(s.f1, row.f1);
    assert_eq!(s.fp, 7.0);
    assert_eq!(s.diff_pos, row.diff_pos as f64);
}

#[test]
fn comparison_matches_the_chained_oracle() {
    let base = [85, 87, 86, 88, 84, 89, 85, 86, 87, 88];
    let gap_b = [1, 2, 0, 3, -1, 2, 1, 4, 2, 1];
    let gap_c = [3, 5, 2, 6, 4, 1, 7, 2, 5, 3];
    let build = |gap: &[i32], fp0: usize| -> Vec<Cell> {
        (0..10).map(|s| cell(s, with_accuracy((base[s] - gap[s]) as usize, fp0 + s % 3))).collect()
    };
    let result = ExperimentResult {
        plan: SplitPlan::default(),
        models: vec![outcome("B", build(&gap_b, 4)), outcome("A", build(&[0; 10], 6)), outcome("C", build(&gap_c, 2))],
    };
    let t = compare_models(&result, CompareMetric::Accuracy).unwrap();
    assert_eq!(t.referent, "A");
    let values = |name: &str| -> Vec<f64> {
        let m = result.models.iter().find(|m| m.name() == name).unwrap();
        m.cells.iter().map(|c| c.metrics.acc.unwrap()).collect()
    };
    let a = values("A");
    let diff = |other: &[f64]| a.iter().zip(other).map(|(x, y)| x - y).collect::<Vec<f64>>();
    let (pb, pc) = (enumeration_p(&diff(&values("B"))), enumeration_p(&diff(&values("C"))));

    // m = 2, c(2) = 3/2: the larger p is scaled by 2·1.5/2, the smaller by
    // 2·1.5/1 and then capped by the larger's value.
    let (lo, hi) = if pb <= pc { (pb, pc) } else { (pc, pb) };
    let adj_hi = (1.5 * hi).min(1.0);
    let adj_lo = (3.0 * lo).min(adj_hi);
    let (adj_b, adj_c) = if pb <= pc { (adj_lo, adj_hi) } else { (adj_hi, adj_lo) };

    let row = |name: &str| t.rows.iter().find(|r| r.model == name).unwrap();
    assert!(row("A").is_referent && row("A").adjusted_p.is_none());
    assert_eq!(row("B").raw_p, Some(pb));
    assert_eq!(row("C").raw_p, Some(pc));
    assert!((row("B").adjusted_p.unwrap() - adj_b).abs() < 1e-12);
    assert!((row("C").adjusted_p.unwrap() - adj_c).abs() < 1e-12);
    for m in &result.models {
        let d: Vec<f64> = m.cells.iter().map(|c| c.metrics.diff_pos as f64).collect();
        assert_eq!(row(m.name()).diff_pos_p, enumeration_p(&d));
    }
}

#[test]
fn identical_models_are_not_distinguished() {
    let cells: Vec<Cell> = (0..10).map(|s| cell(s, with_accuracy(80 + s, 3))).collect();
    let result = ExperimentResult {
        plan: SplitPlan::default(),
        models: vec![outcome("x", cells.clone()), outcome("y", cells)],
    };
    let t = compare_models(&result, CompareMetric::Accuracy).unwrap();
    let other = t.rows.iter().find(|r| !r.is_referent).unwrap();
    assert_eq!(other.adjusted_p, Some(1.0));
}

#[test]
fn empty_result_renders_headers_only() {
    let r = ExperimentResult { plan: SplitPlan::default(), models: Vec::new() };
    let cmp = Comparisons::of(&r);
    assert_eq!(results_csv(&r).unwrap().lines().count(), 1);
    assert_eq!(summary_csv(&r).unwrap().lines().count(), 1);
    assert_eq!(table2_text(&r, &cmp), "Model  Sens  Spec  PPV  NPV  F1  Acc  Acc p (adj)\n");
    assert_eq!(table3_text(&r, &cmp).lines().count(), 1);
}

#[test]
fn synthetic_word_frequencies_match_the_mixture() {
    let spec = SynthSpec { n_docs: 10_000, ..SynthSpec::default() };
    let model = SynthModel::new(spec).unwrap();
    let docs = model.sample().unwrap();
    for (label, expected) in [(true, &model.positive), (false, &model.negative)] {
        let mut counts = vec![0u64; expected.len()];
        let mut total = 0u64;
        for (_, tokens) in docs.iter().filter(|(l, _)| *l == label) {
            for &t in tokens {
                counts[t as usize] += 1;
            }
            total += tokens.len() as u64;
        }
        let tv: f64 =
            0.5 * counts.iter().zip(expected.iter()).map(|(&c, &p)| (c as f64 / total as f64 - p).abs()).sum::<f64>();
        assert!(tv < 0.01, "class {label}: total variation {tv}");
    }
}

#[test]
fn default_prevalence_at_two_thousand_documents() {
    let docs = SynthModel::new(SynthSpec::default()).unwrap().sample().unwrap();
    assert_eq!(docs.len(), 2000);
    let pos = docs.iter().filter(|(l, _)| *l).count() as f64 / 2000.0;
    assert!((pos - 0.489).abs() < 0.03, "{pos}");
}
