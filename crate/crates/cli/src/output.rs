//! JSON output records. Every `--format json` document deserializes back
//! into one of these types (unknown fields rejected), which is what the
//! schema tests check.

use serde::{Deserialize, Serialize};

use empath_core::kripke::ModelDump;
use empath_core::oracle_check::{Case, GridReport, ProbeReport};
use empath_core::planner::TraceLine;
use empath_core::Plan;

pub type Steps = Vec<String>;

pub fn steps(p: &Plan) -> Steps {
    p.steps.iter().map(|s| s.to_string()).collect()
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanOut {
    pub plan: Steps,
    pub cost: usize,
    /// Every optimal plan, with `--all-optimal`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plans: Option<Vec<Steps>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncated: Option<bool>,
    pub states: usize,
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Costs {
    pub empathetic: Option<usize>,
    pub sympathetic: Option<usize>,
    pub actor_self: Option<usize>,
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Executable {
    pub empathetic: bool,
    pub sympathetic: bool,
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareOut {
    pub empathetic_plan: Option<Steps>,
    pub sympathetic_plan: Option<Steps>,
    pub actor_self_plan: Option<Steps>,
    pub costs: Costs,
    pub executable_in_actor_model: Executable,
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckOut {
    pub selectively_task_empathetic: bool,
    pub inconclusive: bool,
    pub witness: Option<Steps>,
    pub projected_plans: Vec<Steps>,
    pub actor_plans: Vec<Steps>,
    pub empathetic_cost: Option<usize>,
    pub dominance_holds: bool,
}

/// A Δ value. JSON has no infinities, so those are written as strings.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Delta {
    Finite(f64),
    Special(String),
}

impl From<f64> for Delta {
    fn from(d: f64) -> Self {
        if d.is_finite() {
            Delta::Finite(d)
        } else if d.is_nan() {
            Delta::Special("nan".into())
        } else if d > 0.0 {
            Delta::Special("inf".into())
        } else {
            Delta::Special("-inf".into())
        }
    }
}

impl std::fmt::Display for Delta {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Delta::Finite(d) => write!(f, "{d}"),
            Delta::Special(s) => f.write_str(s),
        }
    }
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GoalOut {
    pub name: String,
    pub constrained_cost: Option<usize>,
    pub complement_cost: Option<usize>,
    pub delta: Delta,
    pub likelihood: f64,
    pub posterior: f64,
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecognizeOut {
    pub beta: f64,
    pub perspective: String,
    pub prior: f64,
    pub goals: Vec<GoalOut>,
    pub chosen: String,
    pub plan: Steps,
    /// 1-based step matched by each observation.
    pub matching: Vec<usize>,
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticOut {
    pub severity: String,
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanCheckOut {
    pub plan: Steps,
    pub valid: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateOut {
    pub diagnostics: Vec<DiagnosticOut>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plan: Option<PlanCheckOut>,
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectOut {
    pub agent: String,
    pub depth: usize,
    /// The projected problem in domain-language syntax.
    pub problem: String,
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CountermodelOut {
    pub case: Case,
    pub model: ModelDump,
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleOut {
    pub grid: GridReport,
    pub probes: ProbeReport,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub countermodels: Vec<CountermodelOut>,
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QueryOut {
    pub premises: Vec<String>,
    pub conclusion: String,
    pub max_worlds: usize,
    pub oracle_entails: bool,
    /// The KB's verdict, when premises and conclusion are in the fragment.
    pub kb_entails: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub countermodel: Option<ModelDump>,
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceOut {
    pub trace: Vec<TraceLineOut>,
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceLineOut {
    pub step: Option<String>,
    pub change: Option<String>,
    pub kb: Vec<String>,
}

impl From<&TraceLine> for TraceLineOut {
    fn from(t: &TraceLine) -> Self {
        TraceLineOut { step: t.step.clone(), change: t.change.map(|c| c.to_string()), kb: t.kb.clone() }
    }
}

/// One regression record per scenario fixture.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Golden {
    pub name: String,
    pub problem: String,
    pub actor: String,
    pub compare: CompareOut,
    pub empathy: CheckOut,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recognition: Option<RecognizeOut>,
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioStatus {
    pub name: String,
    /// `ok`, `mismatch`, `missing` or `written`.
    pub status: String,
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenariosOut {
    pub fixtures: Vec<ScenarioStatus>,
}
