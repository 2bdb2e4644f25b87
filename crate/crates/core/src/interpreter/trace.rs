use serde::{Deserialize, Serialize};

use crate::competency::FailedRestriction;
use crate::ids::{FrameId, FrameSetId, PlanId, SenseId, StrategyId};

/// Per-utterance record of what each interpretation stage saw.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineTrace {
    pub utterance: String,
    pub verb: String,
    pub framesets: Vec<FrameSetTrace>,
    pub arguments: Vec<ArgumentTrace>,
    /// Product of the raw readings of every argument.
    pub raw_combinations: u64,
    pub combinations: usize,
    pub meanings: usize,
    pub validations: Vec<ValidationTrace>,
    pub plans: usize,
    /// Argument texts that triggered an inquiry, in order.
    pub inquiries: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameSetTrace {
    pub frameset: FrameSetId,
    pub sound: bool,
    pub frame: Option<FrameId>,
    /// Verb senses of the FrameSet that have an alpha-structure.
    pub meaningful_senses: Vec<SenseId>,
    pub meanings: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArgumentTrace {
    pub position: usize,
    pub text: String,
    /// Lexicon-level readings before grounding (for a compound, the
    /// product over its words).
    pub raw_sense_readings: u64,
    pub known_senses: Vec<SenseId>,
    pub inquired: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationTrace {
    pub frameset: FrameSetId,
    pub meaning: usize,
    pub strategy: StrategyId,
    pub strategy_name: String,
    pub valid: bool,
    pub failed_restriction: Option<FailedRestriction>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub plan: Option<PlanId>,
}
