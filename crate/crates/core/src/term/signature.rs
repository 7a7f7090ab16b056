use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::{sym, Sort, Symbol, Term, MINUS, PLUS};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Profile {
    pub args: Vec<Sort>,
    pub range: Sort,
}

impl Profile {
    pub fn new(args: Vec<Sort>, range: Sort) -> Self {
        Profile { args, range }
    }

    pub fn constant(range: Sort) -> Self {
        Profile {
            args: Vec::new(),
            range,
        }
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Signature {
    sorts: BTreeSet<Sort>,
    functions: BTreeMap<Symbol, Profile>,
    pub levels: Option<BTreeMap<Sort, usize>>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SignatureReport {
    /// Functions into `Int` taking a non-integer argument.
    pub int_range_offenders: Vec<String>,
    /// Sorts without any ground term.
    pub uninhabited: Vec<String>,
}

impl SignatureReport {
    pub fn is_empty(&self) -> bool {
        self.int_range_offenders.is_empty() && self.uninhabited.is_empty()
    }
}

pub fn is_reserved(name: &str) -> bool {
    name == PLUS || name == MINUS || name.parse::<i64>().is_ok()
}

impl Signature {
    pub fn new() -> Self {
        let mut sorts = BTreeSet::new();
        sorts.insert(Sort::int());
        Signature {
            sorts,
            functions: BTreeMap::new(),
            levels: None,
        }
    }

    pub fn declare_sort(&mut self, sort: Sort) {
        self.sorts.insert(sort);
    }

    pub fn declare_function(&mut self, name: &str, profile: Profile) -> Result<()> {
        if is_reserved(name) {
            return Err(Error::Sort(format!("`{name}` is a reserved symbol")));
        }
        for s in profile.args.iter().chain(std::iter::once(&profile.range)) {
            if !self.sorts.contains(s) {
                return Err(Error::Sort(format!(
                    "function `{name}` uses undeclared sort `{s}`"
                )));
            }
        }
        if let Some(existing) = self.functions.get(name) {
            if existing != &profile {
                return Err(Error::Sort(format!(
                    "function `{name}` redeclared with a different profile"
                )));
            }
            return Ok(());
        }
        self.functions.insert(sym(name), profile);
        self.levels = None;
        Ok(())
    }

    pub fn sorts(&self) -> impl Iterator<Item = &Sort> {
        self.sorts.iter()
    }

    pub fn has_sort(&self, s: &Sort) -> bool {
        self.sorts.contains(s)
    }

    pub fn functions(&self) -> impl Iterator<Item = (&Symbol, &Profile)> {
        self.functions.iter()
    }

    pub fn function(&self, name: &str) -> Option<&Profile> {
        self.functions.get(name)
    }

    pub fn has_function(&self, name: &str) -> bool {
        self.functions.contains_key(name)
    }

    pub fn constants_of(&self, sort: &Sort) -> Vec<Term> {
        self.functions
            .iter()
            .filter(|(_, p)| p.args.is_empty() && &p.range == sort)
            .map(|(n, p)| Term::constant(n, p.range.clone()))
            .collect()
    }

    /// Sort-checked application of a declared symbol.
    pub fn app(&self, name: &str, args: Vec<Term>) -> Result<Term> {
        let profile = self
            .functions
            .get(name)
            .ok_or_else(|| Error::UnknownSymbol(sym(name)))?;
        if profile.args.len() != args.len() {
            return Err(Error::Sort(format!(
                "`{name}` expects {} arguments, got {}",
                profile.args.len(),
                args.len()
            )));
        }
        for (i, (expected, a)) in profile.args.iter().zip(&args).enumerate() {
            let found = a.sort();
            if &found != expected {
                return Err(Error::Sort(format!(
                    "argument {} of `{name}` has sort {found}, expected {expected}",
                    i + 1
                )));
            }
        }
        Ok(Term::app(name, args, profile.range.clone()))
    }

    pub fn constant(&self, name: &str) -> Result<Term> {
        self.app(name, Vec::new())
    }

    /// A symbol name not yet used by the signature, derived from `base`.
    pub fn fresh_symbol(&self, base: &str) -> String {
        if !self.functions.contains_key(base) {
            return base.to_string();
        }
        (0..)
            .map(|i| format!("{base}!{i}"))
            .find(|n| !self.functions.contains_key(n.as_str()))
            .expect("unbounded name supply")
    }

    /// Sorts that have at least one ground term (the integer sort always does).
    pub fn inhabited_sorts(&self) -> BTreeSet<Sort> {
        let mut inhabited: BTreeSet<Sort> = BTreeSet::new();
        inhabited.insert(Sort::int());
        loop {
            let before = inhabited.len();
            for p in self.functions.values() {
                if p.args.iter().all(|a| inhabited.contains(a)) {
                    inhabited.insert(p.range.clone());
                }
            }
            if inhabited.len() == before {
                return inhabited;
            }
        }
    }

    pub fn validate(&self) -> SignatureReport {
        validate_signature(self)
    }

    /// Adds one fresh witness constant per uninhabited sort and returns their names.
    pub fn ensure_inhabited(&mut self) -> Vec<Symbol> {
        let mut added = Vec::new();
        let inhabited = self.inhabited_sorts();
        let empty: Vec<Sort> = self
            .sorts
            .iter()
            .filter(|s| !inhabited.contains(*s))
            .cloned()
            .collect();
        for s in empty {
            let name = self.fresh_symbol(&format!("w!{s}"));
            self.functions
                .insert(sym(&name), Profile::constant(s.clone()));
            added.push(sym(&name));
        }
        if !added.is_empty() {
            self.levels = None;
        }
        added
    }
}

pub fn validate_signature(sig: &Signature) -> SignatureReport {
    let int_range_offenders = sig
        .functions
        .iter()
        .filter(|(_, p)| p.range.is_int() && p.args.iter().any(|a| !a.is_int()))
        .map(|(n, _)| n.to_string())
        .collect();
    let inhabited = sig.inhabited_sorts();
    let uninhabited = sig
        .sorts
        .iter()
        .filter(|s| !inhabited.contains(*s))
        .map(|s| s.to_string())
        .collect();
    SignatureReport {
        int_range_offenders,
        uninhabited,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn arrays() -> Signature {
        let mut sig = Signature::new();
        let arr = Sort::new("Array");
        let elem = Sort::new("Elem");
        sig.declare_sort(arr.clone());
        sig.declare_sort(elem.clone());
        sig.declare_function("a", Profile::constant(arr.clone()))
            .unwrap();
        sig.declare_function("e", Profile::constant(elem.clone()))
            .unwrap();
        sig.declare_function(
            "select",
            Profile::new(vec![arr.clone(), Sort::int()], elem.clone()),
        )
        .unwrap();
        sig.declare_function(
            "store",
            Profile::new(vec![arr.clone(), Sort::int(), elem], arr),
        )
        .unwrap();
        sig
    }

    #[test]
    fn array_signature_is_valid() {
        assert!(validate_signature(&arrays()).is_empty());
    }

    #[test]
    fn builtin_only_signature_is_valid() {
        assert!(validate_signature(&Signature::new()).is_empty());
    }

    #[test]
    fn integer_function_with_foreign_argument_is_reported() {
        let mut sig = arrays();
        sig.declare_function("f", Profile::new(vec![Sort::new("Elem")], Sort::int()))
            .unwrap();
        assert_eq!(
            validate_signature(&sig).int_range_offenders,
            vec!["f".to_string()]
        );
    }

    #[test]
    fn empty_sort_is_repaired_by_witness() {
        let mut sig = Signature::new();
        sig.declare_sort(Sort::new("S"));
        assert_eq!(validate_signature(&sig).uninhabited, vec!["S".to_string()]);
        let added = sig.ensure_inhabited();
        assert_eq!(added.len(), 1);
        assert!(validate_signature(&sig).is_empty());
    }

    #[test]
    fn app_checks_sorts() {
        let sig = arrays();
        let a = sig.constant("a").unwrap();
        let e = sig.constant("e").unwrap();
        assert!(sig.app("select", vec![a.clone(), Term::num(0)]).is_ok());
        assert!(sig.app("select", vec![a, e]).is_err());
    }

    #[test]
    fn reserved_names_cannot_be_declared() {
        let mut sig = Signature::new();
        assert!(sig
            .declare_function("+", Profile::new(vec![Sort::int()], Sort::int()))
            .is_err());
    }
}
