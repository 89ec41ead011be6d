//! The convergence statements run as numerical experiments over nested
//! families of domains, each producing a [`ConvergenceReport`].

pub mod common;
pub mod lemmas;
pub mod propositions;
pub mod ramadanov;
pub mod report;
pub mod theorems;

use std::fmt;
use std::str::FromStr;

pub use common::{BerezinOracle, Settings};
pub use lemmas::run_lemma_suite;
pub use propositions::{run_prop1, run_prop2};
pub use ramadanov::run_ramadanov;
pub use report::{ConvergenceReport, Criterion, Row, Verdict};
pub use theorems::{check_admissible, run_corollary_truncation, run_theorem1, run_theorem2, run_theorem3};

use crate::geometry::{standard_exhaustions, DomainKind};
use crate::operators::{OperatorWord, SymbolExpr};
use crate::{BlabError, Result};

/// Registry of runnable experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExperimentKind {
    LemmaSuite,
    Ramadanov,
    Theorem1,
    Theorem2,
    Theorem3,
    CorollaryTruncation,
    Prop1,
    Prop2,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 8] = [
        ExperimentKind::LemmaSuite,
        ExperimentKind::Ramadanov,
        ExperimentKind::Theorem1,
        ExperimentKind::Theorem2,
        ExperimentKind::Theorem3,
        ExperimentKind::CorollaryTruncation,
        ExperimentKind::Prop1,
        ExperimentKind::Prop2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::LemmaSuite => "lemma_suite",
            ExperimentKind::Ramadanov => "ramadanov",
            ExperimentKind::Theorem1 => "theorem1",
            ExperimentKind::Theorem2 => "theorem2",
            ExperimentKind::Theorem3 => "theorem3",
            ExperimentKind::CorollaryTruncation => "corollary_truncation",
            ExperimentKind::Prop1 => "prop1",
            ExperimentKind::Prop2 => "prop2",
        }
    }

    /// Family used when none is configured.
    pub fn default_exhaustion(self) -> Option<&'static str> {
        match self {
            ExperimentKind::Ramadanov | ExperimentKind::Theorem1 | ExperimentKind::Theorem3 => Some("discs_increasing"),
            ExperimentKind::Theorem2 => Some("discs_decreasing"),
            ExperimentKind::CorollaryTruncation => Some("annuli_to_punctured_disc"),
            _ => None,
        }
    }

    /// Plan length used when none is configured.
    pub fn default_length(self) -> usize {
        match self {
            ExperimentKind::CorollaryTruncation => 512,
            _ => 10,
        }
    }

    /// Word (or symbol) used when none is configured.
    pub fn default_word(self) -> Option<&'static str> {
        match self {
            ExperimentKind::Theorem1 | ExperimentKind::Theorem2 => Some("green:0.3+0i"),
            ExperimentKind::Theorem3 => Some("green:0.3+0i,clamp:log_abs:5"),
            ExperimentKind::CorollaryTruncation => Some("log_abs"),
            _ => None,
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = BlabError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s.trim()).ok_or_else(|| {
            let names: Vec<&str> = Self::ALL.iter().map(|k| k.name()).collect();
            BlabError::Parse(format!("unknown experiment '{}'; known experiments: {}", s.trim(), names.join(", ")))
        })
    }
}

/// A fully specified experiment run.
#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub kind: ExperimentKind,
    /// Named family; `None` takes the experiment default.
    pub exhaustion: Option<String>,
    pub length: Option<usize>,
    /// Operator word (a single symbol for the truncation corollary).
    pub word: Option<String>,
    /// Radius schedule of the proposition experiments.
    pub radii: Option<Vec<f64>>,
    /// Clamp levels of the truncation corollary.
    pub clamp_levels: Option<Vec<f64>>,
    pub settings: Settings,
}

impl Experiment {
    pub fn new(kind: ExperimentKind) -> Self {
        Experiment {
            kind,
            exhaustion: None,
            length: None,
            word: None,
            radii: None,
            clamp_levels: None,
            settings: Settings::default(),
        }
    }

    fn word(&self) -> Result<OperatorWord> {
        let text = self.word.as_deref().or(self.kind.default_word()).ok_or_else(|| {
            BlabError::InvalidArgument(format!("experiment {} takes no operator word", self.kind))
        })?;
        text.parse()
    }

    pub fn run(&self) -> Result<ConvergenceReport> {
        let s = &self.settings;
        let plan = || -> Result<_> {
            let name = self.exhaustion.as_deref().or(self.kind.default_exhaustion()).ok_or_else(|| {
                BlabError::InvalidArgument(format!("experiment {} takes no exhaustion", self.kind))
            })?;
            standard_exhaustions(name, self.length.unwrap_or(self.kind.default_length()))
        };
        match self.kind {
            ExperimentKind::LemmaSuite => run_lemma_suite(s),
            ExperimentKind::Ramadanov => {
                let plan = plan()?;
                let band = if plan.limit.kind() == DomainKind::PuncturedDisc { (0.3, 0.9) } else { (0.1, 0.5) };
                run_ramadanov(&plan, &s.compact(plan.limit, band)?, s)
            }
            ExperimentKind::Theorem1 => {
                let plan = plan()?;
                run_theorem1(&plan, &self.word()?, &s.compact(plan.limit, (0.3, 0.7))?, s)
            }
            ExperimentKind::Theorem2 => {
                let plan = plan()?;
                run_theorem2(&plan, &self.word()?, &s.compact(plan.limit, (0.3, 0.7))?, s)
            }
            ExperimentKind::Theorem3 => {
                let plan = plan()?;
                run_theorem3(&plan, &self.word()?, &s.compact(plan.limit, (0.3, 0.7))?, s)
            }
            ExperimentKind::CorollaryTruncation => {
                let plan = plan()?;
                let word = self.word()?;
                let phi: &SymbolExpr = word.as_single().ok_or_else(|| {
                    BlabError::InvalidArgument("the truncation corollary takes a single symbol".into())
                })?;
                let levels = self.clamp_levels.clone().unwrap_or_else(|| vec![1.0, 2.0, 4.0, 8.0]);
                run_corollary_truncation(&plan, phi, &levels, &s.compact(plan.limit, (0.3, 0.7))?, s)
            }
            ExperimentKind::Prop1 => {
                let radii = self.radii.clone().unwrap_or_else(|| propositions::PROP1_RADII.to_vec());
                let parent = crate::geometry::DomainSpec::punctured_disc(1.0)?;
                run_prop1(&radii, &s.compact(parent, (0.3, 0.9))?, s)
            }
            ExperimentKind::Prop2 => {
                run_prop2(&self.radii.clone().unwrap_or_else(|| propositions::PROP2_RADII.to_vec()), s)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_round_trip() {
        for k in ExperimentKind::ALL {
            assert_eq!(k.name().parse::<ExperimentKind>().unwrap(), k);
        }
        let err = "theorem9".parse::<ExperimentKind>().unwrap_err().to_string();
        assert!(err.contains("lemma_suite") && err.contains("prop2"), "{err}");
    }
}
