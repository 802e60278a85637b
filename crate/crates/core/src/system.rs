use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{is_identifier, parse_expression, Expr, Scope, UnaryOp};

/// Named real parameters, iterated in name order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParameterSet(BTreeMap<String, f64>);

impl ParameterSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs<K: Into<String>>(pairs: impl IntoIterator<Item = (K, f64)>) -> Self {
        ParameterSet(pairs.into_iter().map(|(k, v)| (k.into(), v)).collect())
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.0.get(name).copied()
    }

    pub fn insert(&mut self, name: impl Into<String>, value: f64) -> Option<f64> {
        self.0.insert(name.into(), value)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.0.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Union of two sets; a name bound to different values in each is an error.
    pub fn merged(&self, other: &ParameterSet) -> Result<ParameterSet> {
        let mut out = self.clone();
        for (name, value) in other.iter() {
            match out.get(name) {
                Some(existing) if existing.to_bits() != value.to_bits() => {
                    return Err(Error::Definition(format!(
                        "parameter `{name}` bound to both {existing} and {value}"
                    )));
                }
                _ => {
                    out.insert(name, value);
                }
            }
        }
        Ok(out)
    }
}

pub(crate) fn validate_names(states: &[String], params: &ParameterSet) -> Result<()> {
    if states.is_empty() {
        return Err(Error::Definition("at least one state variable is required".into()));
    }
    let mut seen = BTreeSet::new();
    for name in states.iter().map(String::as_str).chain(params.names()) {
        if !is_identifier(name) {
            return Err(Error::Definition(format!("`{name}` is not a valid identifier")));
        }
        if UnaryOp::from_function_name(name).is_some() {
            return Err(Error::Definition(format!("`{name}` is reserved for a function")));
        }
        if !seen.insert(name) {
            return Err(Error::Definition(format!("name `{name}` declared more than once")));
        }
    }
    for (name, value) in params.iter() {
        if !value.is_finite() {
            return Err(Error::Definition(format!("parameter `{name}` is not finite")));
        }
    }
    Ok(())
}

pub(crate) fn parse_components<S: AsRef<str>>(sources: &[S], scope: &Scope) -> Result<Vec<Expr>> {
    sources
        .iter()
        .enumerate()
        .map(|(component, src)| {
            parse_expression(src.as_ref(), scope)
                .map_err(|source| Error::Component { component, source })
        })
        .collect()
}

/// An autonomous system `dX/dt = f(X)` with named coordinates and parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemDefinition {
    name: String,
    state_names: Vec<String>,
    parameters: ParameterSet,
    components: Vec<Expr>,
}

impl SystemDefinition {
    pub fn new(
        name: impl Into<String>,
        state_names: Vec<String>,
        parameters: ParameterSet,
        components: Vec<Expr>,
    ) -> Result<Self> {
        validate_names(&state_names, &parameters)?;
        if components.len() != state_names.len() {
            return Err(Error::Definition(format!(
                "{} components for {} state variables",
                components.len(),
                state_names.len()
            )));
        }
        for e in &components {
            for name in e.free_variables() {
                if !state_names.contains(&name) && parameters.get(&name).is_none() {
                    return Err(Error::Definition(format!("`{name}` is not declared")));
                }
            }
        }
        Ok(SystemDefinition { name: name.into(), state_names, parameters, components })
    }

    /// Parse one expression per state variable.
    pub fn parse<S: AsRef<str>, T: AsRef<str>>(
        name: impl Into<String>,
        state_names: &[S],
        parameters: ParameterSet,
        sources: &[T],
    ) -> Result<Self> {
        let states: Vec<String> = state_names.iter().map(|s| s.as_ref().to_string()).collect();
        validate_names(&states, &parameters)?;
        let params: Vec<&str> = parameters.names().collect();
        let scope = Scope::new(&states, &params);
        let components = parse_components(sources, &scope)?;
        SystemDefinition::new(name, states, parameters, components)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.state_names.len()
    }

    pub fn state_names(&self) -> &[String] {
        &self.state_names
    }

    pub fn parameters(&self) -> &ParameterSet {
        &self.parameters
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    pub fn scope(&self) -> Scope {
        let params: Vec<&str> = self.parameters.names().collect();
        Scope::new(&self.state_names, &params)
    }

    /// Same equations with some parameter values replaced.
    pub fn with_parameters(&self, overrides: &ParameterSet) -> Result<Self> {
        let mut parameters = self.parameters.clone();
        for (name, value) in overrides.iter() {
            if parameters.get(name).is_none() {
                return Err(Error::Definition(format!("unknown parameter `{name}`")));
            }
            parameters.insert(name, value);
        }
        SystemDefinition::new(
            self.name.clone(),
            self.state_names.clone(),
            parameters,
            self.components.clone(),
        )
    }
}
