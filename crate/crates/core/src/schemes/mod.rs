//! Stage-two instantiation schemes and the index-set baseline, each behind a
//! trait object and looked up by name.

mod admissibility;
mod arrays;
mod bradley;
mod st2;
mod stats;
mod stratified;

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::grounder::BoundSet;
use crate::zclause::{Problem, Theory, ZClause};

pub use admissibility::{
    admissibility_probe, is_disc, matches, EMatchingScheme, Probe, ProbeOutcome,
};
pub use arrays::{array_axioms, ground_array_axioms, store_contexts, ArraysScheme, StoreContext};
pub use bradley::{bradley_index_set, BaselineCount, BradleyBaseline};
pub use st2::{injectivity_axioms, transform_st2, St2Options, St2Scheme};
pub use stats::{count_instances, InstanceStats};
pub use stratified::{ground_stratified, integer_pool, StratifiedScheme};

/// A stage-two grounding function over Z-closed clause sets.
pub trait InstantiationScheme: Send + Sync {
    fn name(&self) -> &'static str;

    fn description(&self) -> &'static str;

    /// Rewrites the input before integer instantiation.
    fn preprocess(&self, p: &Problem) -> Result<Problem> {
        Ok(p.clone())
    }

    /// Instantiates the remaining variables of a stage-one output.
    fn ground(&self, p: &Problem, b: &BoundSet) -> Result<Vec<ZClause>>;
}

/// Keeps clauses as they are; stage one must have removed every variable.
pub struct GenericScheme;

impl InstantiationScheme for GenericScheme {
    fn name(&self) -> &'static str {
        "generic"
    }

    fn description(&self) -> &'static str {
        "integer instantiation only; no further variables allowed"
    }

    fn ground(&self, p: &Problem, _b: &BoundSet) -> Result<Vec<ZClause>> {
        if let Some(c) = p.clauses.iter().find(|c| !c.non_int_vars().is_empty()) {
            return Err(Error::Validation(format!(
                "generic theory cannot instantiate non-integer variables in {c}"
            )));
        }
        Ok(p.clauses.clone())
    }
}

/// A baseline instantiation procedure used for instance-count comparisons.
pub trait Baseline: Send + Sync {
    fn name(&self) -> &'static str;

    fn description(&self) -> &'static str;

    fn count(&self, p: &Problem) -> Result<BaselineCount>;
}

/// Name-indexed collection of strategy objects.
pub struct Registry<T: ?Sized> {
    kind: &'static str,
    entries: BTreeMap<&'static str, Box<T>>,
}

impl<T: ?Sized> Registry<T> {
    pub fn new(kind: &'static str) -> Self {
        Registry {
            kind,
            entries: BTreeMap::new(),
        }
    }

    pub fn register(&mut self, name: &'static str, item: Box<T>) {
        self.entries.insert(name, item);
    }

    pub fn get(&self, name: &str) -> Result<&T> {
        self.entries
            .get(name)
            .map(|b| b.as_ref())
            .ok_or_else(|| Error::UnknownStrategy {
                kind: self.kind,
                name: name.to_string(),
            })
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.entries.keys().copied()
    }
}

pub type SchemeRegistry = Registry<dyn InstantiationScheme>;
pub type BaselineRegistry = Registry<dyn Baseline>;

pub fn default_schemes() -> SchemeRegistry {
    let mut r: SchemeRegistry = Registry::new("scheme");
    let items: Vec<Box<dyn InstantiationScheme>> = vec![
        Box::new(ArraysScheme),
        Box::new(StratifiedScheme),
        Box::new(St2Scheme::default()),
        Box::new(GenericScheme),
    ];
    for s in items {
        r.register(s.name(), s);
    }
    r
}

pub fn default_baselines() -> BaselineRegistry {
    let mut r: BaselineRegistry = Registry::new("baseline");
    r.register("bradley", Box::new(BradleyBaseline));
    r
}

/// The registry name of the scheme for a theory tag.
pub fn scheme_for(theory: Theory) -> &'static str {
    theory.name()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_theory_has_a_scheme() {
        let r = default_schemes();
        for t in Theory::ALL {
            assert_eq!(r.get(scheme_for(t)).unwrap().name(), t.name());
        }
    }

    #[test]
    fn unknown_names_are_reported() {
        let err = default_baselines().get("nope").err().unwrap();
        assert!(matches!(
            err,
            Error::UnknownStrategy {
                kind: "baseline",
                ..
            }
        ));
    }
}
