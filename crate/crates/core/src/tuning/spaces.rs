//! Search spaces and budgets used to tune each classifier.

use super::{Domain, SearchSpace};

/// Bayesian-optimization iterations per model.
pub const MNB_ITERS: usize = 50;
pub const SVM_ITERS: usize = 50;
pub const NBSVM_ITERS: usize = 30;
pub const NN_ITERS: usize = 20;

fn build(params: Vec<(&'static str, Domain)>) -> SearchSpace {
    SearchSpace::of(params).expect("built-in spaces are valid")
}

/// `n_topics × C`, searched exhaustively.
pub fn lda() -> SearchSpace {
    build(vec![
        ("n_topics", Domain::Discrete(vec![5.0, 10.0, 15.0, 20.0, 30.0])),
        ("c", Domain::Discrete(vec![0.001, 0.01, 0.1, 1.0, 2.0, 8.0, 16.0])),
    ])
}

/// `d × C`, searched exhaustively.
pub fn lsa() -> SearchSpace {
    build(vec![
        ("d", Domain::Discrete(vec![10.0, 25.0, 50.0, 100.0, 200.0])),
        ("c", Domain::Discrete(vec![0.001, 0.01, 0.1, 1.0, 2.0, 8.0, 16.0])),
    ])
}

pub fn mnb() -> SearchSpace {
    build(vec![("alpha", Domain::log(0.0001, 1.0))])
}

pub fn svm() -> SearchSpace {
    build(vec![("c", Domain::Discrete(vec![0.0001, 0.001, 0.01, 0.1, 1.0, 2.0, 5.0]))])
}

pub fn nbsvm() -> SearchSpace {
    build(vec![
        ("c", Domain::Discrete(vec![0.001, 0.01, 1.0, 2.0, 4.0])),
        ("beta", Domain::linear(0.0, 1.0)),
    ])
}

fn nn(patience: Vec<f64>, learning_rate: Vec<f64>) -> SearchSpace {
    build(vec![
        ("dropout", Domain::linear(0.0, 0.9)),
        ("patience", Domain::Discrete(patience)),
        ("dim", Domain::Discrete(vec![64.0, 128.0, 256.0, 512.0])),
        ("batch_size", Domain::Discrete(vec![32.0, 64.0, 128.0, 256.0])),
        ("learning_rate", Domain::Discrete(learning_rate)),
    ])
}

pub fn nn_avg() -> SearchSpace {
    nn(vec![5.0, 10.0, 15.0, 20.0, 25.0], vec![0.0001, 0.001, 0.01, 0.1])
}

pub fn nn_sum() -> SearchSpace {
    nn(vec![2.0, 5.0, 10.0], vec![0.00001, 0.0001, 0.001])
}
