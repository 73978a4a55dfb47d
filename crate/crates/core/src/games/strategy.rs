use crate::qsim::{gates, Observable, StateVector, C64, EIGEN_CLUSTER_TOL};

use super::{ContextualityGame, GameError, Result};

/// Commutator entries above this break context compatibility.
const COMMUTE_TOL: f64 = 1e-8;

/// Initial state plus one observable per question, all on the full space.
#[derive(Debug, Clone)]
pub struct QuantumStrategy {
    state: StateVector,
    observables: Vec<Observable>,
}

impl QuantumStrategy {
    pub fn new(state: StateVector, observables: Vec<Observable>) -> Result<Self> {
        let dim = state.amps().len();
        for o in &observables {
            if o.dim() != dim {
                return Err(GameError::Sim(crate::qsim::QsimError::DimensionMismatch {
                    expected: dim,
                    found: o.dim(),
                }));
            }
        }
        Ok(Self { state, observables })
    }

    pub fn dim(&self) -> usize {
        self.state.amps().len()
    }

    pub fn state(&self) -> &StateVector {
        &self.state
    }

    pub fn observables(&self) -> &[Observable] {
        &self.observables
    }

    pub fn observable(&self, q: usize) -> &Observable {
        &self.observables[q]
    }

    /// Register indices covering the whole state.
    pub fn all_registers(&self) -> Vec<usize> {
        (0..self.state.num_registers()).collect()
    }

    /// Check spectra against the answer alphabet and commutation inside
    /// every context.
    pub fn validate(&self, game: &ContextualityGame) -> Result<()> {
        if self.observables.len() != game.questions().len() {
            return Err(GameError::ObservableCount {
                expected: game.questions().len(),
                found: self.observables.len(),
            });
        }
        for (q, o) in self.observables.iter().enumerate() {
            for value in o.eigenvalues() {
                let known = game
                    .answers()
                    .iter()
                    .any(|&a| (a as f64 - value).abs() <= EIGEN_CLUSTER_TOL);
                if !known {
                    return Err(GameError::SpectrumMismatch {
                        question: game.questions()[q].clone(),
                        value,
                    });
                }
            }
        }
        for ctx in game.contexts() {
            for (i, &a) in ctx.iter().enumerate() {
                for &b in &ctx[i + 1..] {
                    if self.observables[a].commutator_norm(&self.observables[b]) > COMMUTE_TOL {
                        return Err(GameError::NotCompatible(
                            game.questions()[a].clone(),
                            game.questions()[b].clone(),
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    /// Probability of reading `labels` when measuring `questions` in order,
    /// starting from `state`.
    pub fn sequence_probability(
        &self,
        state: &StateVector,
        questions: &[usize],
        labels: &[i64],
    ) -> Result<f64> {
        let targets = self.all_registers();
        let mut current = state.clone();
        let mut prob = 1.0;
        for (&q, &label) in questions.iter().zip(labels) {
            let Some(projector) = self.observables[q].projector_for(label as f64) else {
                return Ok(0.0);
            };
            let (p, post) = current.project(projector, &targets)?;
            prob *= p;
            match post {
                Some(s) => current = s,
                None => return Ok(0.0),
            }
        }
        Ok(prob)
    }

    /// Exact winning probability in `game` via sequential projections.
    pub fn value_in(&self, game: &ContextualityGame) -> Result<f64> {
        self.validate(game)?;
        let mut total = 0.0;
        for (c, ctx) in game.contexts().iter().enumerate() {
            let w = *game.weights()[c].numer() as f64 / *game.weights()[c].denom() as f64;
            for tuple in game.accepted(c) {
                total += w * self.sequence_probability(&self.state, ctx, tuple)?;
            }
        }
        Ok(total)
    }

    /// Embed into the smallest qubit register that fits, filling the extra
    /// basis states with amplitude 0 and the observables with `fill * I`.
    pub fn embed_in_qubits(&self, fill: i64) -> Result<QuantumStrategy> {
        let dim = self.dim();
        let mut qubits = 0;
        while (1usize << qubits) < dim {
            qubits += 1;
        }
        let big = 1usize << qubits;
        let mut amps = self.state.amps().to_vec();
        amps.resize(big, C64::new(0.0, 0.0));
        let state = StateVector::new(vec![2; qubits], amps)?;
        let observables = self
            .observables
            .iter()
            .map(|o| {
                let mut m = gates::pad_with_zero_block(o.matrix(), big);
                for i in dim..big {
                    m[(i, i)] = C64::new(fill as f64, 0.0);
                }
                Observable::new(m)
            })
            .collect::<std::result::Result<Vec<_>, _>>()?;
        QuantumStrategy::new(state, observables)
    }
}

/// Pad a strategy to match [`ContextualityGame::pad_contexts`]: dummy
/// questions get `answers[0] * I`.
pub fn pad_strategy(
    game: &ContextualityGame,
    strategy: &QuantumStrategy,
) -> Result<QuantumStrategy> {
    let padded = game.pad_contexts();
    let extra = padded.questions().len() - game.questions().len();
    let filler = Observable::scalar(strategy.dim(), game.answers()[0] as f64);
    let mut observables = strategy.observables.clone();
    observables.extend(std::iter::repeat_n(filler, extra));
    QuantumStrategy::new(strategy.state.clone(), observables)
}
