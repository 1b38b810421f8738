//! Design-discussion mining toolkit.
//!
//! The crate is organised as a pipeline:
//!
//! * [`corpus`] loads, labels and splits discussion datasets;
//! * [`textproc`] turns raw discussion text into token sequences;
//! * [`embedding`] trains and queries skipgram word vectors with subword n-grams;
//! * [`augment`] injects similar words into token sequences;
//! * [`features`] builds count, TF-IDF and embedding document vectors;
//! * [`learn`] holds the classifiers, resampling and fold construction;
//! * [`metrics`] holds the evaluation maths and the study harness;
//! * [`protocol`] wires the stages into a reproducible experiment.
//!
//! The positive class throughout is [`corpus::Label::Design`].

pub mod augment;
pub mod corpus;
pub mod embedding;
pub mod features;
pub mod learn;
pub mod metrics;
pub mod protocol;
pub mod synthetic;
pub mod textproc;

mod rng;

pub use rng::seeded_rng;
