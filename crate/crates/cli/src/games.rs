//! Resolving `--game` to a game and, when known, a quantum strategy.

use std::fs;

use ctxlab::games::{self, ContextualityGame, GameJson, QuantumStrategy, StrategyJson};
use serde::Deserialize;

use crate::CliError;

pub const BUILTIN: [&str; 3] = ["magic-square", "kcbs", "chsh"];

/// A game file is either a bare game or a game with a strategy.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum GameFile {
    WithStrategy {
        game: GameJson,
        strategy: Option<StrategyJson>,
    },
    Bare(GameJson),
}

pub struct LoadedGame {
    pub game: ContextualityGame,
    pub strategy: Option<QuantumStrategy>,
}

pub fn load(id: &str) -> Result<LoadedGame, CliError> {
    let builtin = match id {
        "magic-square" => Some(games::magic_square()),
        "kcbs" => Some(games::kcbs()),
        "chsh" => Some(games::chsh()),
        _ => None,
    };
    if let Some((game, strategy)) = builtin {
        return Ok(LoadedGame {
            game,
            strategy: Some(strategy),
        });
    }
    let text = fs::read_to_string(id).map_err(|e| {
        CliError::Config(format!("game {id:?} is neither built in ({}) nor a readable file: {e}", BUILTIN.join(", ")))
    })?;
    let file: GameFile =
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{id}: {e}")))?;
    let (json, strategy) = match file {
        GameFile::WithStrategy { game, strategy } => (game, strategy),
        GameFile::Bare(game) => (game, None),
    };
    let game = json.to_game().map_err(|e| CliError::Config(format!("{id}: {e}")))?;
    let strategy = strategy
        .map(|s| s.to_strategy(&game))
        .transpose()
        .map_err(|e| CliError::Config(format!("{id}: {e}")))?;
    Ok(LoadedGame { game, strategy })
}
