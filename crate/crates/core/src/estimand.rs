//! Estimand specification: the five attributes plus one handling strategy
//! per intercurrent-event kind.

use std::collections::BTreeMap;
use std::fmt;

use crate::analysis_sets::AnalysisSet;
use crate::potential_outcomes::{Assessment, PrincipalStratum};

/// Kinds of intercurrent event the simulator produces.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum IceKind {
    ConcomitantTherapy,
    Death,
    Withdrawal,
}

impl IceKind {
    pub const ALL: [IceKind; 3] = [IceKind::ConcomitantTherapy, IceKind::Death, IceKind::Withdrawal];

    pub fn as_str(self) -> &'static str {
        match self {
            IceKind::ConcomitantTherapy => "concomitant_therapy",
            IceKind::Death => "death",
            IceKind::Withdrawal => "withdrawal",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.as_str() == s)
    }
}

impl fmt::Display for IceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Handling strategy for one intercurrent-event kind.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Strategy {
    TreatmentPolicy,
    Hypothetical,
    Composite { worst: f64 },
    WhileOnTreatment,
    PrincipalStratum(PrincipalStratum),
    Confounder,
}

impl Strategy {
    pub fn kind(&self) -> StrategyKind {
        match self {
            Strategy::TreatmentPolicy => StrategyKind::TreatmentPolicy,
            Strategy::Hypothetical => StrategyKind::Hypothetical,
            Strategy::Composite { .. } => StrategyKind::Composite,
            Strategy::WhileOnTreatment => StrategyKind::WhileOnTreatment,
            Strategy::PrincipalStratum(_) => StrategyKind::PrincipalStratum,
            Strategy::Confounder => StrategyKind::ConfounderAdjusted,
        }
    }
}

/// Strategy without parameters.
///
/// The declaration order is the fixed composition order of a multi-strategy
/// analysis: composite recoding, while-on-treatment selection, hypothetical
/// imputation, stratum restriction, regression adjustment. Treatment policy
/// leaves data untouched and sorts first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StrategyKind {
    TreatmentPolicy,
    Composite,
    WhileOnTreatment,
    Hypothetical,
    PrincipalStratum,
    ConfounderAdjusted,
}

impl StrategyKind {
    pub fn as_str(self) -> &'static str {
        match self {
            StrategyKind::TreatmentPolicy => "treatment_policy",
            StrategyKind::Composite => "composite",
            StrategyKind::WhileOnTreatment => "while_on_treatment",
            StrategyKind::Hypothetical => "hypothetical",
            StrategyKind::PrincipalStratum => "principal_stratum",
            StrategyKind::ConfounderAdjusted => "confounder",
        }
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Label of the strategies an estimand combines, in composition order.
/// Treatment policy appears only when nothing else does.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct StrategyTag(Vec<StrategyKind>);

impl StrategyTag {
    pub fn single(kind: StrategyKind) -> Self {
        StrategyTag(vec![kind])
    }

    pub fn kinds(&self) -> &[StrategyKind] {
        &self.0
    }

    pub fn is_single(&self) -> bool {
        self.0.len() == 1
    }
}

impl fmt::Display for StrategyTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<_> = self.0.iter().map(|k| k.as_str()).collect();
        f.write_str(&names.join("+"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Population {
    All,
    Stratum(PrincipalStratum),
    AnalysisSet(AnalysisSet),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Summary {
    MeanDifference,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Endpoint {
    pub name: String,
    pub at: Assessment,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EstimandSpec {
    pub name: String,
    /// (experimental, control) arm identifiers.
    pub treatment: (String, String),
    pub endpoint: Endpoint,
    pub population: Population,
    pub summary: Summary,
    pub ice_policies: BTreeMap<IceKind, Strategy>,
}

impl EstimandSpec {
    /// Spec on the second-assessment disability endpoint over everyone, with
    /// the given policies.
    pub fn with_policies(name: &str, policies: &[(IceKind, Strategy)]) -> Self {
        EstimandSpec {
            name: name.to_string(),
            treatment: ("experimental".into(), "control".into()),
            endpoint: Endpoint { name: "disability".into(), at: Assessment::T2 },
            population: Population::All,
            summary: Summary::MeanDifference,
            ice_policies: policies.iter().copied().collect(),
        }
    }

    /// Strategy for `kind`; undeclared kinds fall back to treatment policy.
    pub fn policy(&self, kind: IceKind) -> Strategy {
        self.ice_policies.get(&kind).copied().unwrap_or(Strategy::TreatmentPolicy)
    }

    /// Stratum the estimand is restricted to, if any.
    pub fn stratum(&self) -> Option<PrincipalStratum> {
        if let Population::Stratum(s) = self.population {
            return Some(s);
        }
        self.ice_policies.values().find_map(|s| match s {
            Strategy::PrincipalStratum(p) => Some(*p),
            _ => None,
        })
    }

    pub fn strategy_tag(&self) -> StrategyTag {
        let mut kinds: Vec<StrategyKind> = self
            .ice_policies
            .values()
            .map(Strategy::kind)
            .filter(|k| *k != StrategyKind::TreatmentPolicy)
            .collect();
        if matches!(self.population, Population::Stratum(_)) {
            kinds.push(StrategyKind::PrincipalStratum);
        }
        kinds.sort();
        kinds.dedup();
        if kinds.is_empty() {
            kinds.push(StrategyKind::TreatmentPolicy);
        }
        StrategyTag(kinds)
    }
}
