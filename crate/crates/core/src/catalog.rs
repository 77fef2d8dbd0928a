//! Declarative model-feature specifications and the built-in benchmark set.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum VariableKind {
    DiscreteScalars,
    DiscreteArray,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum DomainKind {
    Open,
    Defined,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ConstraintKind {
    None,
    /// At least one constraint item; which one is left to the generator.
    Simple,
    AllDifferent,
}

impl VariableKind {
    /// Table vocabulary: `discrete` / `array disc.`.
    pub fn label(self) -> &'static str {
        match self {
            VariableKind::DiscreteScalars => "discrete",
            VariableKind::DiscreteArray => "array disc.",
        }
    }
}

impl DomainKind {
    pub fn label(self) -> &'static str {
        match self {
            DomainKind::Open => "open",
            DomainKind::Defined => "defined",
        }
    }
}

impl ConstraintKind {
    pub fn label(self) -> &'static str {
        match self {
            ConstraintKind::None => "no",
            ConstraintKind::Simple => "yes",
            ConstraintKind::AllDifferent => "all_diff",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModelSpec {
    pub id: u32,
    pub variable_kind: VariableKind,
    pub variable_count: u32,
    pub domain_kind: DomainKind,
    pub constraint_kind: ConstraintKind,
    /// Suggested bounds for a defined domain. Conformance accepts any finite domain.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub defined_domain: Option<(i64, i64)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpecError {
    #[error("spec id must be positive")]
    ZeroId,
    #[error("variable_count must be at least 1")]
    ZeroCount,
    #[error("an open domain cannot carry defined bounds")]
    OpenWithBounds,
    #[error("defined domain bounds {0}..{1} are empty")]
    EmptyBounds(i64, i64),
    #[error("an all_different constraint requires a defined domain")]
    AllDifferentOnOpenDomain,
}

impl ModelSpec {
    /// Checks the invariants that hold for every spec, user-supplied or not.
    pub fn validate(&self) -> Result<(), SpecError> {
        if self.id == 0 {
            return Err(SpecError::ZeroId);
        }
        if self.variable_count == 0 {
            return Err(SpecError::ZeroCount);
        }
        match (self.domain_kind, self.defined_domain) {
            (DomainKind::Open, Some(_)) => return Err(SpecError::OpenWithBounds),
            (_, Some((lo, hi))) if lo > hi => return Err(SpecError::EmptyBounds(lo, hi)),
            _ => {}
        }
        Ok(())
    }

    /// [`validate`](Self::validate) plus the rule the built-in rows follow:
    /// all_different only appears with a defined domain.
    pub fn validate_strict(&self) -> Result<(), SpecError> {
        self.validate()?;
        if self.constraint_kind == ConstraintKind::AllDifferent
            && self.domain_kind != DomainKind::Defined
        {
            return Err(SpecError::AllDifferentOnOpenDomain);
        }
        Ok(())
    }

    /// Bounds to suggest in prompts when the domain is defined.
    pub fn suggested_bounds(&self) -> Option<(i64, i64)> {
        match self.domain_kind {
            DomainKind::Open => None,
            DomainKind::Defined => Some(
                self.defined_domain
                    .unwrap_or((1, i64::from(self.variable_count))),
            ),
        }
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "#{} {} x{} / {} / {}",
            self.id,
            self.variable_kind.label(),
            self.variable_count,
            self.domain_kind.label(),
            self.constraint_kind.label()
        )
    }
}

/// The ten benchmark rows, in order: five scalar rows then five array rows.
pub fn builtin_instances() -> Vec<ModelSpec> {
    use ConstraintKind as C;
    use DomainKind as D;
    use VariableKind as V;
    const ROWS: [(VariableKind, DomainKind, ConstraintKind); 10] = [
        (V::DiscreteScalars, D::Open, C::None),
        (V::DiscreteScalars, D::Open, C::Simple),
        (V::DiscreteScalars, D::Defined, C::None),
        (V::DiscreteScalars, D::Defined, C::Simple),
        (V::DiscreteScalars, D::Defined, C::AllDifferent),
        (V::DiscreteArray, D::Open, C::None),
        (V::DiscreteArray, D::Open, C::Simple),
        (V::DiscreteArray, D::Defined, C::None),
        (V::DiscreteArray, D::Defined, C::Simple),
        (V::DiscreteArray, D::Defined, C::AllDifferent),
    ];
    ROWS.iter()
        .enumerate()
        .map(|(i, &(variable_kind, domain_kind, constraint_kind))| ModelSpec {
            id: i as u32 + 1,
            variable_kind,
            variable_count: 10,
            domain_kind,
            constraint_kind,
            defined_domain: match domain_kind {
                DomainKind::Open => None,
                DomainKind::Defined => Some((1, 10)),
            },
        })
        .collect()
}

/// Looks up a built-in row by its 1-based id.
pub fn builtin_instance(id: u32) -> Option<ModelSpec> {
    builtin_instances().into_iter().find(|s| s.id == id)
}

/// One English sentence describing the requested features.
pub fn spec_feature_sentence(spec: &ModelSpec) -> String {
    let noun = if spec.variable_count == 1 {
        "discrete variable"
    } else {
        "discrete variables"
    };
    let subject = match spec.variable_kind {
        VariableKind::DiscreteScalars => format!("{} {}", spec.variable_count, noun),
        VariableKind::DiscreteArray => format!("an array of {} {}", spec.variable_count, noun),
    };
    let domain = match spec.domain_kind {
        DomainKind::Open => "without domain",
        DomainKind::Defined => "with a defined domain",
    };
    let constraint = match spec.constraint_kind {
        ConstraintKind::None => "without constraints",
        ConstraintKind::Simple => "with constraints",
        ConstraintKind::AllDifferent => "an all_different constraint",
    };
    format!("A source code with {subject} {domain} and {constraint}.")
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    #[test]
    fn builtin_rows_match_the_benchmark_table() {
        let specs = builtin_instances();
        assert_eq!(specs.len(), 10);
        let s1 = &specs[0];
        assert_eq!(
            (s1.id, s1.variable_kind, s1.variable_count, s1.domain_kind, s1.constraint_kind),
            (1, VariableKind::DiscreteScalars, 10, DomainKind::Open, ConstraintKind::None)
        );
        let s5 = &specs[4];
        assert_eq!(
            (s5.id, s5.variable_kind, s5.domain_kind, s5.constraint_kind),
            (5, VariableKind::DiscreteScalars, DomainKind::Defined, ConstraintKind::AllDifferent)
        );
        let s10 = &specs[9];
        assert_eq!(
            (s10.id, s10.variable_kind, s10.domain_kind, s10.constraint_kind),
            (10, VariableKind::DiscreteArray, DomainKind::Defined, ConstraintKind::AllDifferent)
        );
        for s in &specs {
            s.validate_strict().unwrap();
            assert_eq!(s.variable_count, 10);
            match s.domain_kind {
                DomainKind::Open => assert_eq!(s.defined_domain, None),
                DomainKind::Defined => assert_eq!(s.defined_domain, Some((1, 10))),
            }
        }
    }

    #[test]
    fn builtin_triple_multiset() {
        let mut got = BTreeMap::new();
        for s in builtin_instances() {
            *got.entry((s.variable_kind.label(), s.domain_kind.label(), s.constraint_kind.label()))
                .or_insert(0) += 1;
        }
        let table = [
            ("discrete", "open", "no"),
            ("discrete", "open", "yes"),
            ("discrete", "defined", "no"),
            ("discrete", "defined", "yes"),
            ("discrete", "defined", "all_diff"),
            ("array disc.", "open", "no"),
            ("array disc.", "open", "yes"),
            ("array disc.", "defined", "no"),
            ("array disc.", "defined", "yes"),
            ("array disc.", "defined", "all_diff"),
        ];
        let mut want = BTreeMap::new();
        for t in table {
            *want.entry(t).or_insert(0) += 1;
        }
        assert_eq!(got, want);
    }

    #[test]
    fn builtins_are_pure() {
        assert_eq!(builtin_instances(), builtin_instances());
    }

    #[test]
    fn feature_sentences() {
        let specs = builtin_instances();
        assert_eq!(
            spec_feature_sentence(&specs[0]),
            "A source code with 10 discrete variables without domain and without constraints."
        );
        assert_eq!(
            spec_feature_sentence(&specs[4]),
            "A source code with 10 discrete variables with a defined domain and an all_different constraint."
        );
        assert_eq!(
            spec_feature_sentence(&specs[5]),
            "A source code with an array of 10 discrete variables without domain and without constraints."
        );
        for s in &specs {
            let sentence = spec_feature_sentence(s);
            assert!(sentence.contains("10"));
        }
    }

    #[test]
    fn invariant_violations() {
        let mut s = builtin_instances()[0].clone();
        s.variable_count = 0;
        assert_eq!(s.validate(), Err(SpecError::ZeroCount));
        let mut s = builtin_instances()[0].clone();
        s.defined_domain = Some((1, 3));
        assert_eq!(s.validate(), Err(SpecError::OpenWithBounds));
        let mut s = builtin_instances()[0].clone();
        s.constraint_kind = ConstraintKind::AllDifferent;
        assert!(s.validate().is_ok());
        assert_eq!(s.validate_strict(), Err(SpecError::AllDifferentOnOpenDomain));
    }
}
