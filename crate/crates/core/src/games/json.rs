//! JSON forms of games and strategies.
//!
//! Weights serialize as `"p/q"` strings so they round-trip exactly; plain
//! numbers are accepted on input and rationalized.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::qsim::{CMatrix, Observable, StateVector, C64};

use super::{ContextualityGame, GameError, QuantumStrategy, Result, Weight};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WeightRepr {
    Text(String),
    Number(f64),
}

impl WeightRepr {
    fn to_weight(&self) -> Result<Weight> {
        match self {
            WeightRepr::Text(s) => {
                let parsed = match s.split_once('/') {
                    Some((n, d)) => n
                        .trim()
                        .parse::<i64>()
                        .ok()
                        .zip(d.trim().parse::<i64>().ok())
                        .filter(|&(_, d)| d != 0)
                        .map(|(n, d)| Weight::new(n, d)),
                    None => s.trim().parse::<i64>().ok().map(Weight::from_integer),
                };
                parsed.ok_or_else(|| GameError::Malformed(format!("bad weight {s:?}")))
            }
            WeightRepr::Number(x) => Weight::approximate_float(*x)
                .ok_or_else(|| GameError::Malformed(format!("bad weight {x}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameJson {
    pub questions: Vec<String>,
    pub answers: Vec<i64>,
    pub contexts: Vec<Vec<String>>,
    pub context_weights: Vec<WeightRepr>,
    /// Context index (as a string key) to accepted answer tuples.
    pub predicate: BTreeMap<String, Vec<Vec<i64>>>,
}

impl From<&ContextualityGame> for GameJson {
    fn from(g: &ContextualityGame) -> Self {
        GameJson {
            questions: g.questions().to_vec(),
            answers: g.answers().to_vec(),
            contexts: g
                .contexts()
                .iter()
                .map(|c| c.iter().map(|&q| g.questions()[q].clone()).collect())
                .collect(),
            context_weights: g
                .weights()
                .iter()
                .map(|w| WeightRepr::Text(format!("{}/{}", w.numer(), w.denom())))
                .collect(),
            predicate: (0..g.contexts().len())
                .map(|c| (c.to_string(), g.accepted(c).iter().cloned().collect()))
                .collect(),
        }
    }
}

impl GameJson {
    pub fn to_game(&self) -> Result<ContextualityGame> {
        let contexts = self
            .contexts
            .iter()
            .enumerate()
            .map(|(c, ctx)| {
                ctx.iter()
                    .map(|name| {
                        self.questions.iter().position(|q| q == name).ok_or_else(|| {
                            GameError::UnknownQuestion {
                                context: c,
                                question: name.clone(),
                            }
                        })
                    })
                    .collect::<Result<Vec<usize>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let weights = self
            .context_weights
            .iter()
            .map(WeightRepr::to_weight)
            .collect::<Result<Vec<_>>>()?;
        let mut accept = vec![Default::default(); contexts.len()];
        for (key, tuples) in &self.predicate {
            let c: usize = key
                .parse()
                .ok()
                .filter(|&c| c < contexts.len())
                .ok_or_else(|| GameError::Malformed(format!("bad predicate key {key:?}")))?;
            accept[c] = tuples.iter().cloned().collect();
        }
        ContextualityGame::new(
            self.questions.clone(),
            self.answers.clone(),
            contexts,
            weights,
            accept,
        )
    }
}

/// Complex number as `[re, im]`.
type ComplexRepr = [f64; 2];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyJson {
    pub dim: usize,
    pub state: Vec<ComplexRepr>,
    /// Question name to row-major matrix.
    pub observables: BTreeMap<String, Vec<Vec<ComplexRepr>>>,
}

fn to_c(z: &ComplexRepr) -> C64 {
    C64::new(z[0], z[1])
}

impl StrategyJson {
    pub fn from_strategy(game: &ContextualityGame, s: &QuantumStrategy) -> Self {
        let dim = s.dim();
        StrategyJson {
            dim,
            state: s.state().amps().iter().map(|z| [z.re, z.im]).collect(),
            observables: game
                .questions()
                .iter()
                .zip(s.observables())
                .map(|(q, o)| {
                    let m = o.matrix();
                    let rows = (0..dim)
                        .map(|r| (0..dim).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect())
                        .collect();
                    (q.clone(), rows)
                })
                .collect(),
        }
    }

    /// Qubit registers when `dim` is a power of two, one qudit otherwise.
    pub fn to_strategy(&self, game: &ContextualityGame) -> Result<QuantumStrategy> {
        if self.state.len() != self.dim {
            return Err(GameError::Malformed(format!(
                "state has {} amplitudes for dim {}",
                self.state.len(),
                self.dim
            )));
        }
        let dims = if self.dim.is_power_of_two() && self.dim >= 2 {
            vec![2; self.dim.trailing_zeros() as usize]
        } else {
            vec![self.dim]
        };
        let state = StateVector::new(dims, self.state.iter().map(to_c).collect())?;
        let observables = game
            .questions()
            .iter()
            .map(|q| {
                let rows = self
                    .observables
                    .get(q)
                    .ok_or_else(|| GameError::Malformed(format!("no observable for {q:?}")))?;
                if rows.len() != self.dim || rows.iter().any(|r| r.len() != self.dim) {
                    return Err(GameError::Malformed(format!("observable {q:?} has wrong shape")));
                }
                let m = CMatrix::from_fn(self.dim, self.dim, |r, c| to_c(&rows[r][c]));
                Ok(Observable::new(m)?)
            })
            .collect::<Result<Vec<_>>>()?;
        let strategy = QuantumStrategy::new(state, observables)?;
        strategy.validate(game)?;
        Ok(strategy)
    }
}

#[cfg(test)]
mod tests {
    use super::super::{kcbs, magic_square};
    use super::*;

    #[test]
    fn game_round_trips_through_json() {
        let (g, _) = magic_square();
        let text = serde_json::to_string(&GameJson::from(&g)).unwrap();
        let back: GameJson = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_game().unwrap(), g);
    }

    #[test]
    fn numeric_weights_accepted() {
        let text = r#"{"questions":["a","b"],"answers":[0,1],"contexts":[["a"],["b"]],
            "context_weights":[0.25, "3/4"],"predicate":{"0":[[1]],"1":[[0]]}}"#;
        let g: GameJson = serde_json::from_str(text).unwrap();
        let g = g.to_game().unwrap();
        assert_eq!(g.weights()[0], Weight::new(1, 4));
        assert_eq!(g.nc_value().unwrap().value, Weight::from_integer(1));
    }

    #[test]
    fn strategy_round_trips_through_json() {
        let (g, s) = kcbs();
        let j = StrategyJson::from_strategy(&g, &s);
        let text = serde_json::to_string(&j).unwrap();
        let back: StrategyJson = serde_json::from_str(&text).unwrap();
        let s2 = back.to_strategy(&g).unwrap();
        assert!((s2.value_in(&g).unwrap() - s.value_in(&g).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn unknown_context_question_rejected() {
        let text = r#"{"questions":["a"],"answers":[0],"contexts":[["z"]],
            "context_weights":["1/1"],"predicate":{"0":[[0]]}}"#;
        let g: GameJson = serde_json::from_str(text).unwrap();
        assert!(matches!(g.to_game(), Err(GameError::UnknownQuestion { .. })));
    }
}
