//! Scenario files: a TOML list of named portfolios.
//!
//! ```toml
//! [[portfolio]]
//! id = "less_meat"
//! policies = [{ kind = "meat_demand_reduction", magnitude = 0.1 }]
//!
//! [[portfolio]]
//! id = "mix"
//! policies = ["chemical_reduction:0.2", "organic_crop_expansion"]
//! ```

use std::collections::HashSet;
use std::path::Path;

use serde::Deserialize;

use super::{PolicySpec, Portfolio};
use crate::error::{Error, Result};

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum Entry {
    Short(String),
    Full(PolicySpec),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPortfolio {
    id: Option<String>,
    #[serde(default)]
    policies: Vec<Entry>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Raw {
    #[serde(default, alias = "portfolios")]
    portfolio: Vec<RawPortfolio>,
}

/// Named portfolios in file order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScenarioFile {
    pub portfolios: Vec<(String, Portfolio)>,
}

pub fn parse_scenarios(text: &str) -> Result<ScenarioFile> {
    let raw: Raw = toml::from_str(text).map_err(|e| Error::config(format!("scenario file: {e}")))?;
    let mut seen = HashSet::new();
    let mut portfolios = Vec::with_capacity(raw.portfolio.len());
    for (i, rp) in raw.portfolio.into_iter().enumerate() {
        let specs = rp
            .policies
            .into_iter()
            .map(|e| match e {
                Entry::Short(s) => s.parse(),
                Entry::Full(s) => s.validate().map(|()| s),
            })
            .collect::<Result<Vec<PolicySpec>>>()?;
        let portfolio = Portfolio::new(specs)?;
        let id = rp.id.unwrap_or_else(|| format!("s{}", i + 1));
        if !seen.insert(id.clone()) {
            return Err(Error::config(format!("scenario file: duplicate portfolio id `{id}`")));
        }
        portfolios.push((id, portfolio));
    }
    Ok(ScenarioFile { portfolios })
}

pub fn load_scenarios(path: &Path) -> Result<ScenarioFile> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_scenarios(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::PolicyKind;

    #[test]
    fn both_entry_forms() {
        let f = parse_scenarios(
            r#"
            [[portfolio]]
            id = "meat"
            policies = [{ kind = "meat_demand_reduction", magnitude = 0.2 }]
            [[portfolio]]
            policies = ["chemical_reduction:0.3", { kind = "organic_crop_expansion" }]
            "#,
        )
        .unwrap();
        assert_eq!(f.portfolios.len(), 2);
        assert_eq!(f.portfolios[0].0, "meat");
        assert_eq!(f.portfolios[0].1.get(PolicyKind::MeatDemandReduction).unwrap().magnitude, 0.2);
        assert_eq!(f.portfolios[1].0, "s2");
        assert_eq!(f.portfolios[1].1.get(PolicyKind::OrganicCropExpansion).unwrap().magnitude, 0.1);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(parse_scenarios("[[portfolio]]\npolicies = [\"meat_tax\"]").is_err());
        assert!(parse_scenarios("[[portfolio]]\npolicies = [{ kind = \"meat_tax\" }]").is_err());
        assert!(parse_scenarios("[[portfolio]]\npolicies = [\"chemical_reduction:2\"]").is_err());
        assert!(parse_scenarios("[[portfolio]]\nid = \"a\"\n[[portfolio]]\nid = \"a\"").is_err());
        assert!(parse_scenarios("[[portfolio]]\ncolour = 1").is_err());
    }
}
