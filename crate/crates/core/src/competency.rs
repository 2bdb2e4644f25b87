//! Competency registry, restriction checking, plan instantiation and
//! simulated execution.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::ids::{CompetencyId, NodeId, PlanId, Role, StrategyId};
use crate::interpreter::MeaningTree;
use crate::kb::{AlphaStructure, CompetencyDescriptor, ExecutionStrategy, Frame, Memory, Predicate, Restriction};

/// The competencies the agent currently has, with their availability.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CompetencyEnvironment {
    registry: BTreeMap<CompetencyId, CompetencyDescriptor>,
}

impl CompetencyEnvironment {
    pub fn new() -> Self {
        Self::default()
    }

    /// Register every competency described in memory.
    pub fn from_memory(memory: &Memory) -> Self {
        let mut env = Self::new();
        for c in memory.competencies() {
            env.register(c.clone());
        }
        env
    }

    /// Register (or replace) a competency.
    pub fn register(&mut self, descriptor: CompetencyDescriptor) {
        self.registry.insert(descriptor.id.clone(), descriptor);
    }

    pub fn deregister(&mut self, id: &CompetencyId) -> Option<CompetencyDescriptor> {
        self.registry.remove(id)
    }

    /// Returns false if the competency is not registered.
    pub fn set_available(&mut self, id: &CompetencyId, available: bool) -> bool {
        match self.registry.get_mut(id) {
            Some(d) => {
                d.available = available;
                true
            }
            None => false,
        }
    }

    pub fn get(&self, id: &CompetencyId) -> Option<&CompetencyDescriptor> {
        self.registry.get(id)
    }

    pub fn is_available(&self, id: &CompetencyId) -> bool {
        self.registry.get(id).is_some_and(|d| d.available)
    }

    pub fn iter(&self) -> impl Iterator<Item = &CompetencyDescriptor> {
        self.registry.values()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanStep {
    pub competency: CompetencyId,
    pub action: String,
    pub bindings: BTreeMap<Role, NodeId>,
}

/// An instantiated execution strategy.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Plan {
    pub id: PlanId,
    pub strategy: StrategyId,
    pub meaning: MeaningTree,
    pub steps: Vec<PlanStep>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailedRestriction {
    pub restriction: Restriction,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationResult {
    pub valid: bool,
    pub failed_restriction: Option<FailedRestriction>,
}

impl ValidationResult {
    fn ok() -> Self {
        Self {
            valid: true,
            failed_restriction: None,
        }
    }

    fn failed(restriction: &Restriction, reason: String) -> Self {
        Self {
            valid: false,
            failed_restriction: Some(FailedRestriction {
                restriction: restriction.clone(),
                reason,
            }),
        }
    }
}

/// The alpha-structure's strategies whose plan templates only use roles the
/// frame provides, in declaration order.
pub fn strategies_for<'m>(alpha: &AlphaStructure, frame: &Frame, memory: &'m Memory) -> Vec<&'m ExecutionStrategy> {
    alpha
        .strategies
        .iter()
        .filter_map(|id| memory.strategy(id))
        .filter(|es| es.template_roles().into_iter().all(|r| frame.has_role(r)))
        .collect()
}

/// Conjunction of the strategy's restrictions; the first failure is
/// reported.
pub fn valid(
    strategy: &ExecutionStrategy,
    meaning: &MeaningTree,
    env: &CompetencyEnvironment,
    memory: &Memory,
) -> ValidationResult {
    for r in &strategy.restrictions {
        if let Some(reason) = check_restriction(r, meaning, env, memory) {
            return ValidationResult::failed(r, reason);
        }
    }
    ValidationResult::ok()
}

fn check_restriction(
    r: &Restriction,
    meaning: &MeaningTree,
    env: &CompetencyEnvironment,
    memory: &Memory,
) -> Option<String> {
    if let Predicate::CompetencyAvailable(c) = &r.predicate {
        return match env.get(c) {
            None => Some(format!("competency {c} is not registered")),
            Some(d) if !d.available => Some(format!("competency {c} is not available")),
            Some(_) => None,
        };
    }
    let Some(node) = meaning.bound_node(&r.role) else {
        return Some(format!("role {} is unbound", r.role));
    };
    match &r.predicate {
        Predicate::IsA(target) => {
            (!memory.isa_descendant(node, target)).then(|| format!("{node} is not a {target}"))
        }
        Predicate::HasRelation(kind, target) => (!memory.has_relation(node, kind, target))
            .then(|| format!("{node} has no {kind} relation to a {target}")),
        Predicate::CompetencyAvailable(_) => unreachable!("handled above"),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InstantiateError {
    #[error("plan template references unbound role `{0}`")]
    UnboundRole(Role),
}

/// Substitute the meaning's bound concepts into the strategy's template.
pub fn instantiate(strategy: &ExecutionStrategy, meaning: &MeaningTree) -> Result<Plan, InstantiateError> {
    let mut steps = Vec::with_capacity(strategy.plan_template.len());
    for step in &strategy.plan_template {
        let mut bindings = BTreeMap::new();
        for role in &step.bindings {
            let node = meaning
                .bound_node(role)
                .ok_or_else(|| InstantiateError::UnboundRole(role.clone()))?;
            bindings.insert(role.clone(), node.clone());
        }
        steps.push(PlanStep {
            competency: step.competency.clone(),
            action: step.action.clone(),
            bindings,
        });
    }
    Ok(Plan {
        id: plan_id(&strategy.id, meaning),
        strategy: strategy.id.clone(),
        meaning: meaning.clone(),
        steps,
    })
}

fn plan_id(strategy: &StrategyId, meaning: &MeaningTree) -> PlanId {
    let content = serde_json::to_vec(&(
        &meaning.verb_alpha,
        &meaning.verb_sense,
        &meaning.frame,
        &meaning.annotated.arg_senses,
        &meaning.role_bindings,
    ))
    .expect("meaning serializes");
    let mut hasher = Sha256::new();
    hasher.update(strategy.as_str().as_bytes());
    hasher.update([0u8]);
    hasher.update(&content);
    let digest = hasher.finalize();
    PlanId::new(format!("{strategy}-{}", &hex::encode(digest)[..12]))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub step: usize,
    pub competency: CompetencyId,
    pub action: String,
    pub bindings: BTreeMap<Role, NodeId>,
    pub result: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecutionTrace {
    pub plan: PlanId,
    pub strategy: StrategyId,
    pub entries: Vec<TraceEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExecutionError {
    #[error("competency `{0}` is unavailable")]
    CompetencyUnavailable(CompetencyId),
}

/// Run a plan against stub handlers: each step records the competency's
/// first declared result. Nothing outside the trace is affected.
pub fn execute_plan(plan: &Plan, env: &CompetencyEnvironment) -> Result<ExecutionTrace, ExecutionError> {
    if let Some(step) = plan.steps.iter().find(|s| !env.is_available(&s.competency)) {
        return Err(ExecutionError::CompetencyUnavailable(step.competency.clone()));
    }
    let entries = plan
        .steps
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let descriptor = env.get(&s.competency).expect("checked above");
            TraceEntry {
                step: i,
                competency: s.competency.clone(),
                action: s.action.clone(),
                bindings: s.bindings.clone(),
                result: descriptor.results.first().cloned().unwrap_or_else(|| "done".to_owned()),
            }
        })
        .collect();
    Ok(ExecutionTrace {
        plan: plan.id.clone(),
        strategy: plan.strategy.clone(),
        entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interpreter::{interpret, MeaningTree};
    use crate::parser::parse_utterance;
    use crate::testkit;
    use crate::LanguageId;

    fn blue_ball_meaning() -> (crate::kb::MemoryStore, MeaningTree) {
        let store = testkit::jacob_store();
        let env = CompetencyEnvironment::from_memory(&store.read());
        let tree = parse_utterance("Jacob find the blue ball", &LanguageId::en(), ["find"]).unwrap();
        let plan = interpret(&tree, &LanguageId::en(), &store, &env).plans().unwrap()[0].clone();
        (store, plan.meaning)
    }

    fn strategy(store: &crate::kb::MemoryStore, id: &str) -> ExecutionStrategy {
        store.read().strategy(&id.into()).unwrap().clone()
    }

    #[test]
    fn environment_tracks_availability() {
        let mut env = CompetencyEnvironment::from_memory(&testkit::jacob());
        let id = CompetencyId::from("person_locator");
        assert!(env.is_available(&id));
        assert!(env.set_available(&id, false));
        assert!(!env.is_available(&id));
        assert!(!env.set_available(&"ghost".into(), true));
        assert!(env.deregister(&id).is_some());
        assert!(env.get(&id).is_none());
        assert_eq!(env.iter().count(), 1);
    }

    #[test]
    fn first_failing_restriction_is_reported() {
        let (store, meaning) = blue_ball_meaning();
        let env = CompetencyEnvironment::from_memory(&store.read());
        let result = valid(&strategy(&store, "person_search"), &meaning, &env, &store.read());
        assert!(!result.valid);
        let failed = result.failed_restriction.unwrap();
        assert_eq!(failed.restriction.to_string(), "Theme: IsA person");
        assert_eq!(failed.reason, "blue+ball is not a person");
    }

    #[test]
    fn competency_restrictions_follow_the_environment() {
        let (store, meaning) = blue_ball_meaning();
        let s = strategy(&store, "colored_ball_search");
        let mut env = CompetencyEnvironment::from_memory(&store.read());
        assert!(valid(&s, &meaning, &env, &store.read()).valid);
        env.set_available(&"colored_ball_detector".into(), false);
        let r = valid(&s, &meaning, &env, &store.read());
        assert_eq!(r.failed_restriction.unwrap().reason, "competency colored_ball_detector is not available");
        env.deregister(&"colored_ball_detector".into());
        let r = valid(&s, &meaning, &env, &store.read());
        assert_eq!(r.failed_restriction.unwrap().reason, "competency colored_ball_detector is not registered");
    }

    #[test]
    fn has_relation_failure_names_the_relation() {
        let (store, mut meaning) = blue_ball_meaning();
        let env = CompetencyEnvironment::from_memory(&store.read());
        meaning.role_bindings.get_mut(&Role::from("Theme")).unwrap().node = "ball".into();
        let r = valid(&strategy(&store, "colored_ball_search"), &meaning, &env, &store.read());
        assert_eq!(r.failed_restriction.unwrap().reason, "ball has no color relation to a color");
    }

    #[test]
    fn unbound_roles_fail_validation_and_instantiation() {
        let (store, mut meaning) = blue_ball_meaning();
        let env = CompetencyEnvironment::from_memory(&store.read());
        meaning.role_bindings.remove(&Role::from("Theme"));
        let s = strategy(&store, "colored_ball_search");
        let r = valid(&s, &meaning, &env, &store.read());
        assert_eq!(r.failed_restriction.unwrap().reason, "role Theme is unbound");
        assert_eq!(instantiate(&s, &meaning), Err(InstantiateError::UnboundRole("Theme".into())));
    }

    #[test]
    fn plan_ids_are_stable_and_content_addressed() {
        let (store, meaning) = blue_ball_meaning();
        let s = strategy(&store, "colored_ball_search");
        let a = instantiate(&s, &meaning).unwrap();
        let b = instantiate(&s, &meaning).unwrap();
        assert_eq!(a.id, b.id);
        let suffix = a.id.as_str().strip_prefix("colored_ball_search-").unwrap();
        assert_eq!(suffix.len(), 12);
        assert!(suffix.chars().all(|c| c.is_ascii_hexdigit()));
        let other = instantiate(&strategy(&store, "person_search"), &meaning).unwrap();
        assert_ne!(a.id, other.id);
    }

    #[test]
    fn strategies_are_filtered_by_frame_roles() {
        let m = testkit::jacob();
        let alpha = m.find_alpha(&"find.v.01".into()).unwrap();
        let full = m.frame(&"np_v_np".into()).unwrap();
        let ids: Vec<&str> = strategies_for(alpha, full, &m).iter().map(|s| s.id.as_str()).collect();
        assert_eq!(ids, ["person_search", "colored_ball_search"]);
        // Only template roles must appear in the frame; both templates bind Theme.
        let short = m.frame(&"v_np".into()).unwrap();
        assert_eq!(strategies_for(alpha, short, &m).len(), 2);
        let mut narrow = short.clone();
        narrow.semantic_roles[1] = "Patient".into();
        assert!(strategies_for(alpha, &narrow, &m).is_empty());
    }

    #[test]
    fn execution_refuses_unavailable_competencies() {
        let (store, meaning) = blue_ball_meaning();
        let plan = instantiate(&strategy(&store, "colored_ball_search"), &meaning).unwrap();
        let mut env = CompetencyEnvironment::from_memory(&store.read());
        let trace = execute_plan(&plan, &env).unwrap();
        assert_eq!(trace.entries[0].result, "found");
        env.set_available(&"colored_ball_detector".into(), false);
        assert_eq!(
            execute_plan(&plan, &env),
            Err(ExecutionError::CompetencyUnavailable("colored_ball_detector".into()))
        );
    }
}
