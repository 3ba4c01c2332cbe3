//! Named recipes shipped with the binary.

use std::path::Path;

use serde_json::Value;

use crate::config::Recipe;
use crate::error::{HarnessError, Result};
use crate::experiments;

const BUILTIN: &[(&str, &str)] = &[
    ("fig1", include_str!("../recipes/fig1.toml")),
    ("fig4", include_str!("../recipes/fig4.toml")),
    ("fig5a", include_str!("../recipes/fig5a.toml")),
    ("fig5b", include_str!("../recipes/fig5b.toml")),
    ("fig5c", include_str!("../recipes/fig5c.toml")),
    ("fig5d", include_str!("../recipes/fig5d.toml")),
    ("fig6", include_str!("../recipes/fig6.toml")),
    ("fig7a", include_str!("../recipes/fig7a.toml")),
    ("fig7b", include_str!("../recipes/fig7b.toml")),
    ("fig7c", include_str!("../recipes/fig7c.toml")),
    ("fig8", include_str!("../recipes/fig8.toml")),
    ("fig9", include_str!("../recipes/fig9.toml")),
    ("fig11a", include_str!("../recipes/fig11a.toml")),
    ("fig11b", include_str!("../recipes/fig11b.toml")),
    ("fig11c", include_str!("../recipes/fig11c.toml")),
];

pub fn names() -> impl Iterator<Item = &'static str> {
    BUILTIN.iter().map(|(n, _)| *n)
}

pub fn builtin(name: &str) -> Result<Recipe> {
    let (_, text) = BUILTIN
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| HarnessError::field("recipe", format!("unknown recipe '{name}'")))?;
    Recipe::from_toml(text)
}

/// Runs the selected experiments (all when `only` is empty) into `out/<id>`.
pub fn run_recipe(recipe: &Recipe, out: &Path, only: &[String]) -> Result<Vec<(String, Value)>> {
    if let Some(bad) = only.iter().find(|id| !recipe.experiments.iter().any(|e| &e.id == *id)) {
        return Err(HarnessError::field("only", format!("recipe '{}' has no experiment '{bad}'", recipe.name)));
    }
    let mut done = Vec::new();
    for e in &recipe.experiments {
        if only.is_empty() || only.contains(&e.id) {
            let summary = experiments::run(e, &out.join(&e.id))?;
            done.push((e.id.clone(), summary));
        }
    }
    Ok(done)
}
