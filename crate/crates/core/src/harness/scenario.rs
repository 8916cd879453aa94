//! Scenario files: which checks to run over which weights and symbols.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::scalars::WeightParameter;
use crate::symbols::SymbolSpec;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckId {
    CnpMoebiusPass,
    CnpNonmoebiusFail,
    BerezinIdentity,
    BlaschkeDecay,
    SingularNoncompact,
    RescalingIdentity,
    HardyDegenerate,
    Lemma11Ratio,
    InclusionAsymptote,
}

impl CheckId {
    pub const ALL: [CheckId; 9] = [
        CheckId::CnpMoebiusPass,
        CheckId::CnpNonmoebiusFail,
        CheckId::BerezinIdentity,
        CheckId::BlaschkeDecay,
        CheckId::SingularNoncompact,
        CheckId::RescalingIdentity,
        CheckId::HardyDegenerate,
        CheckId::Lemma11Ratio,
        CheckId::InclusionAsymptote,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckId::CnpMoebiusPass => "cnp_moebius_pass",
            CheckId::CnpNonmoebiusFail => "cnp_nonmoebius_fail",
            CheckId::BerezinIdentity => "berezin_identity",
            CheckId::BlaschkeDecay => "blaschke_decay",
            CheckId::SingularNoncompact => "singular_noncompact",
            CheckId::RescalingIdentity => "rescaling_identity",
            CheckId::HardyDegenerate => "hardy_degenerate",
            CheckId::Lemma11Ratio => "lemma11_ratio",
            CheckId::InclusionAsymptote => "inclusion_asymptote",
        }
    }

    /// Checks that do not depend on a weight parameter run once per symbol.
    pub fn uses_alpha(self) -> bool {
        !matches!(self, CheckId::Lemma11Ratio)
    }

    /// Checks that do not depend on a symbol run once per weight parameter.
    pub fn uses_symbol(self) -> bool {
        !matches!(self, CheckId::InclusionAsymptote)
    }
}

impl fmt::Display for CheckId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CheckId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CheckId::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown check '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    #[serde(rename = "alpha")]
    pub alpha_list: Vec<WeightParameter>,
    pub symbols: Vec<SymbolSpec>,
    pub checks: Vec<CheckId>,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if self.name.trim().is_empty() {
            return Err(Error::Config("scenario name must not be empty".into()));
        }
        if self.checks.is_empty() {
            return Err(Error::Config(format!("scenario '{}' lists no checks", self.name)));
        }
        let needs_alpha = self.checks.iter().any(|c| c.uses_alpha());
        if needs_alpha && self.alpha_list.is_empty() {
            return Err(Error::Config(format!("scenario '{}' needs at least one alpha", self.name)));
        }
        let needs_symbol = self.checks.iter().any(|c| c.uses_symbol());
        if needs_symbol && self.symbols.is_empty() {
            return Err(Error::Config(format!("scenario '{}' needs at least one symbol", self.name)));
        }
        Ok(())
    }
}

/// One scenario or a list of them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum ScenarioFile {
    One(Scenario),
    Many(Vec<Scenario>),
}

pub fn parse_scenarios(text: &str) -> Result<Vec<Scenario>> {
    let list = match serde_json::from_str::<ScenarioFile>(text) {
        Ok(ScenarioFile::One(s)) => vec![s],
        Ok(ScenarioFile::Many(v)) => v,
        // untagged enums hide the real error; re-parse as a single scenario to surface it
        Err(_) => vec![serde_json::from_str::<Scenario>(text)
            .map_err(|e| Error::Config(format!("invalid scenario file: {e}")))?],
    };
    if list.is_empty() {
        return Err(Error::Config("scenario file is empty".into()));
    }
    for s in &list {
        s.validate()?;
    }
    Ok(list)
}

pub fn load_scenarios(path: &Path) -> Result<Vec<Scenario>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io("read", path, e))?;
    parse_scenarios(&text)
}

/// The bundled suite that exercises every check.
pub const VERIFY_ALL: &str = include_str!("../../scenarios/verify-all.json");

pub fn verify_all() -> Vec<Scenario> {
    parse_scenarios(VERIFY_ALL).expect("bundled scenario file is valid")
}
