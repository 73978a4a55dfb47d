//! Contextuality games, strategies and their exact values.
//!
//! A game lists its questions, an answer alphabet of integer labels, the
//! contexts (sets of compatible questions), a rational distribution over
//! contexts and, per context, the set of accepted answer tuples. Answer
//! tuples are ordered like the context's question list.

mod builtin;
mod json;
mod strategy;

pub use builtin::{chsh, chsh_nonlocal, embed_nonlocal_game, kcbs, magic_square, NonlocalGame};
pub use json::{GameJson, StrategyJson};
pub use strategy::{pad_strategy, QuantumStrategy};

use std::collections::BTreeSet;

use num_rational::Ratio;
use num_traits::{One, Zero};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::qsim::QsimError;

/// Exact probability weight.
pub type Weight = Ratio<i64>;

/// Largest brute-force search space for [`ContextualityGame::nc_value`].
pub const MAX_ASSIGNMENTS: u64 = 1 << 24;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GameError {
    #[error("context weights must be nonnegative and sum to 1")]
    BadWeights,
    #[error("context {0} is empty")]
    EmptyContext(usize),
    #[error("context {context} refers to unknown question {question}")]
    UnknownQuestion { context: usize, question: String },
    #[error("context {0} repeats a question")]
    RepeatedQuestion(usize),
    #[error("context {0} has an accepted tuple of the wrong length or with unknown labels")]
    BadTuple(usize),
    #[error("{0} weights for {1} contexts")]
    WeightCount(usize, usize),
    #[error("search space of {0} assignments exceeds the brute-force bound")]
    SearchTooLarge(u128),
    #[error("observable for question {question} has eigenvalue {value} outside the answer set")]
    SpectrumMismatch { question: String, value: f64 },
    #[error("observables for {0} and {1} do not commute")]
    NotCompatible(String, String),
    #[error("strategy has {found} observables for {expected} questions")]
    ObservableCount { expected: usize, found: usize },
    #[error("invalid game description: {0}")]
    Malformed(String),
    #[error(transparent)]
    Sim(#[from] QsimError),
}

pub type Result<T> = std::result::Result<T, GameError>;

/// Deterministic answer table, one label per question.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Assignment(pub Vec<i64>);

impl Assignment {
    pub fn labels(&self) -> &[i64] {
        &self.0
    }

    /// Answers restricted to `context`, in context order.
    pub fn restrict(&self, context: &[usize]) -> Vec<i64> {
        context.iter().map(|&q| self.0[q]).collect()
    }
}

/// Best deterministic value and the first table (lexicographic) attaining it.
#[derive(Debug, Clone, PartialEq)]
pub struct NcValue {
    pub value: Weight,
    pub table: Assignment,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContextualityGame {
    questions: Vec<String>,
    answers: Vec<i64>,
    contexts: Vec<Vec<usize>>,
    weights: Vec<Weight>,
    accept: Vec<BTreeSet<Vec<i64>>>,
}

impl ContextualityGame {
    pub fn new(
        questions: Vec<String>,
        answers: Vec<i64>,
        contexts: Vec<Vec<usize>>,
        weights: Vec<Weight>,
        accept: Vec<BTreeSet<Vec<i64>>>,
    ) -> Result<Self> {
        if weights.len() != contexts.len() || accept.len() != contexts.len() {
            return Err(GameError::WeightCount(weights.len(), contexts.len()));
        }
        if weights.iter().any(|w| *w < Weight::zero())
            || weights.iter().copied().sum::<Weight>() != Weight::one()
        {
            return Err(GameError::BadWeights);
        }
        for (c, ctx) in contexts.iter().enumerate() {
            if ctx.is_empty() {
                return Err(GameError::EmptyContext(c));
            }
            for (i, &q) in ctx.iter().enumerate() {
                if q >= questions.len() {
                    return Err(GameError::UnknownQuestion {
                        context: c,
                        question: q.to_string(),
                    });
                }
                if ctx[..i].contains(&q) {
                    return Err(GameError::RepeatedQuestion(c));
                }
            }
            let ok = accept[c]
                .iter()
                .all(|t| t.len() == ctx.len() && t.iter().all(|a| answers.contains(a)));
            if !ok {
                return Err(GameError::BadTuple(c));
            }
        }
        Ok(Self {
            questions,
            answers,
            contexts,
            weights,
            accept,
        })
    }

    /// Uniform weights over `contexts`.
    pub fn uniform(
        questions: Vec<String>,
        answers: Vec<i64>,
        contexts: Vec<Vec<usize>>,
        accept: Vec<BTreeSet<Vec<i64>>>,
    ) -> Result<Self> {
        let n = contexts.len() as i64;
        let weights = vec![Weight::new(1, n.max(1)); contexts.len()];
        Self::new(questions, answers, contexts, weights, accept)
    }

    pub fn questions(&self) -> &[String] {
        &self.questions
    }

    pub fn answers(&self) -> &[i64] {
        &self.answers
    }

    pub fn contexts(&self) -> &[Vec<usize>] {
        &self.contexts
    }

    pub fn context(&self, c: usize) -> &[usize] {
        &self.contexts[c]
    }

    pub fn weights(&self) -> &[Weight] {
        &self.weights
    }

    pub fn accepted(&self, c: usize) -> &BTreeSet<Vec<i64>> {
        &self.accept[c]
    }

    pub fn question_index(&self, name: &str) -> Option<usize> {
        self.questions.iter().position(|q| q == name)
    }

    /// Index of `label` in the answer alphabet.
    pub fn answer_index(&self, label: i64) -> Option<usize> {
        self.answers.iter().position(|&a| a == label)
    }

    /// `pred(answers, C)`.
    pub fn predicate(&self, c: usize, answers: &[i64]) -> bool {
        self.accept[c].contains(answers)
    }

    /// Common context size, if all contexts have the same size.
    pub fn uniform_context_size(&self) -> Option<usize> {
        let first = self.contexts.first()?.len();
        self.contexts
            .iter()
            .all(|c| c.len() == first)
            .then_some(first)
    }

    /// Smallest `Pr(C) / |C|` over contexts.
    pub fn min_weight_per_question(&self) -> Weight {
        self.contexts
            .iter()
            .zip(&self.weights)
            .map(|(c, w)| w / c.len() as i64)
            .min()
            .unwrap_or_else(Weight::zero)
    }

    /// Sample a context index exactly from the rational weights.
    pub fn sample_context<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let denom = self
            .weights
            .iter()
            .fold(1i64, |acc, w| lcm(acc, *w.denom()));
        let draw = rng.random_range(0..denom);
        let mut cum = 0i64;
        for (c, w) in self.weights.iter().enumerate() {
            cum += w.numer() * (denom / w.denom());
            if draw < cum {
                return c;
            }
        }
        self.weights.len() - 1
    }

    /// Winning probability of a deterministic table.
    pub fn value_of_assignment(&self, table: &Assignment) -> Weight {
        self.contexts
            .iter()
            .enumerate()
            .filter(|(c, ctx)| self.predicate(*c, &table.restrict(ctx)))
            .map(|(c, _)| self.weights[c])
            .sum()
    }

    fn assignment_from_index(&self, mut index: u64) -> Assignment {
        let base = self.answers.len() as u64;
        let mut labels = vec![self.answers[0]; self.questions.len()];
        for slot in labels.iter_mut().rev() {
            *slot = self.answers[(index % base) as usize];
            index /= base;
        }
        Assignment(labels)
    }

    /// Number of deterministic tables, `|A|^|Q|`.
    pub fn assignment_count(&self) -> u128 {
        (self.answers.len() as u128).pow(self.questions.len() as u32)
    }

    /// Every deterministic table in lexicographic question order.
    pub fn assignments(&self) -> Result<impl Iterator<Item = Assignment> + '_> {
        let count = self.assignment_count();
        if count > MAX_ASSIGNMENTS as u128 {
            return Err(GameError::SearchTooLarge(count));
        }
        Ok((0..count as u64).map(move |i| self.assignment_from_index(i)))
    }

    /// Non-contextual value by exhaustive search over deterministic tables.
    pub fn nc_value(&self) -> Result<NcValue> {
        let count = self.assignment_count();
        if count > MAX_ASSIGNMENTS as u128 {
            return Err(GameError::SearchTooLarge(count));
        }
        let denom = self
            .weights
            .iter()
            .fold(1i64, |acc, w| lcm(acc, *w.denom()));
        let scaled: Vec<i64> = self
            .weights
            .iter()
            .map(|w| w.numer() * (denom / w.denom()))
            .collect();
        let score = |index: u64| -> i64 {
            let table = self.assignment_from_index(index);
            self.contexts
                .iter()
                .enumerate()
                .filter(|(c, ctx)| self.predicate(*c, &table.restrict(ctx)))
                .map(|(c, _)| scaled[c])
                .sum()
        };
        let (best, index) = (0..count as u64)
            .into_par_iter()
            .map(|i| (score(i), i))
            .reduce(
                || (i64::MIN, u64::MAX),
                |a, b| {
                    if a.0 > b.0 || (a.0 == b.0 && a.1 < b.1) {
                        a
                    } else {
                        b
                    }
                },
            );
        Ok(NcValue {
            value: Weight::new(best, denom),
            table: self.assignment_from_index(index),
        })
    }

    /// Pad every context to the largest size with fresh dummy questions the
    /// predicate ignores. Weights are kept. Uniform games are returned as is.
    pub fn pad_contexts(&self) -> ContextualityGame {
        let target = self.contexts.iter().map(Vec::len).max().unwrap_or(0);
        if self.uniform_context_size().is_some() {
            return self.clone();
        }
        let mut questions = self.questions.clone();
        let mut contexts = Vec::with_capacity(self.contexts.len());
        let mut accept = Vec::with_capacity(self.contexts.len());
        for (c, ctx) in self.contexts.iter().enumerate() {
            let mut padded = ctx.clone();
            for k in 0..target - ctx.len() {
                padded.push(questions.len());
                questions.push(format!("pad:{c}:{k}"));
            }
            let mut tuples: BTreeSet<Vec<i64>> = self.accept[c].clone();
            for _ in ctx.len()..target {
                tuples = tuples
                    .iter()
                    .flat_map(|t| {
                        self.answers.iter().map(move |&a| {
                            let mut ext = t.clone();
                            ext.push(a);
                            ext
                        })
                    })
                    .collect();
            }
            contexts.push(padded);
            accept.push(tuples);
        }
        ContextualityGame {
            questions,
            answers: self.answers.clone(),
            contexts,
            weights: self.weights.clone(),
            accept,
        }
    }

    /// For each context, an accepted tuple closest in Hamming distance to
    /// `table` on that context (first in tuple order on ties).
    pub fn closest_feasible(&self, table: &Assignment) -> Option<Vec<Vec<i64>>> {
        self.contexts
            .iter()
            .enumerate()
            .map(|(c, ctx)| {
                let current = table.restrict(ctx);
                self.accept[c]
                    .iter()
                    .min_by_key(|t| t.iter().zip(&current).filter(|(a, b)| a != b).count())
                    .cloned()
            })
            .collect()
    }
}

fn lcm(a: i64, b: i64) -> i64 {
    fn gcd(mut a: i64, mut b: i64) -> i64 {
        while b != 0 {
            (a, b) = (b, a % b);
        }
        a.abs()
    }
    a / gcd(a, b) * b
}
