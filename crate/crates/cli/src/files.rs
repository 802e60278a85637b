//! System and map definition files.
//!
//! Both are JSON objects with a fixed set of keys; anything else is rejected.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use perpetua::{AnalysisRegion, Error, ParameterSet, SystemDefinition, TransformationMap, VectorField};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemFile {
    pub name: String,
    pub state: Vec<String>,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    pub field: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapFile {
    /// Components of `h`, written in the system's state names.
    pub map: Vec<String>,
    /// Components of `h^-1`, written in the target names.
    #[serde(default)]
    pub inverse: Option<Vec<String>>,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    pub domain: Vec<[f64; 2]>,
    pub linear: bool,
    /// Names of the new coordinates; `y` in one dimension, `y1..yn` otherwise.
    #[serde(default)]
    pub target_state: Option<Vec<String>>,
}

/// A loaded file with the digest of its exact bytes.
#[derive(Debug, Clone)]
pub struct Loaded<T> {
    pub file: T,
    pub label: String,
    pub sha256: String,
}

pub fn digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn load<T: for<'de> Deserialize<'de>>(path: &Path, what: &str) -> Result<Loaded<T>, CliError> {
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::Input(format!("cannot read {what} file {}: {e}", path.display())))?;
    let file = serde_json::from_slice(&bytes).map_err(|e| {
        CliError::Input(format!(
            "{}:{}:{}: invalid {what} file: {e}",
            path.display(),
            e.line(),
            e.column()
        ))
    })?;
    let label = path.file_name().map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned());
    Ok(Loaded { file, label, sha256: digest(&bytes) })
}

pub fn load_system(path: &Path) -> Result<Loaded<SystemFile>, CliError> {
    load(path, "system")
}

pub fn load_map(path: &Path) -> Result<Loaded<MapFile>, CliError> {
    load(path, "map")
}

/// Prefix a library error with the file it came from.
pub fn in_file(label: &str, e: Error) -> CliError {
    let detail = match &e {
        Error::Component { component, source } => {
            format!("field[{component}], byte {}: {source}", source.offset())
        }
        other => other.to_string(),
    };
    CliError::Input(format!("{label}: {detail}"))
}

pub fn region_from_pairs(pairs: &[[f64; 2]]) -> Result<AnalysisRegion, Error> {
    AnalysisRegion::new(pairs.iter().map(|p| (p[0], p[1])).collect())
}

impl SystemFile {
    pub fn from_field(f: &VectorField, region: Option<&AnalysisRegion>) -> SystemFile {
        SystemFile {
            name: f.name().to_string(),
            state: f.state_names().to_vec(),
            params: f.definition().parameters().iter().map(|(k, v)| (k.to_string(), v)).collect(),
            field: f.components().iter().map(ToString::to_string).collect(),
            region: region.map(|r| r.bounds().iter().map(|&(lo, hi)| [lo, hi]).collect()),
        }
    }

    pub fn parameters(&self) -> ParameterSet {
        ParameterSet::from_pairs(self.params.iter().map(|(k, v)| (k.clone(), *v)))
    }

    pub fn to_field(&self) -> Result<VectorField, Error> {
        let def = SystemDefinition::parse(self.name.clone(), &self.state, self.parameters(), &self.field)?;
        VectorField::new(def)
    }

    pub fn region(&self) -> Option<Result<AnalysisRegion, Error>> {
        self.region.as_deref().map(region_from_pairs)
    }
}

impl MapFile {
    pub fn target_names(&self) -> Vec<String> {
        match &self.target_state {
            Some(names) => names.clone(),
            None if self.map.len() == 1 => vec!["y".to_string()],
            None => (1..=self.map.len()).map(|i| format!("y{i}")).collect(),
        }
    }

    fn parameters(&self) -> ParameterSet {
        ParameterSet::from_pairs(self.params.iter().map(|(k, v)| (k.clone(), *v)))
    }

    /// `h` over the given source coordinates.
    pub fn to_map(&self, source_names: &[String]) -> Result<TransformationMap, Error> {
        TransformationMap::parse(
            source_names,
            &self.target_names(),
            self.parameters(),
            &self.map,
            region_from_pairs(&self.domain)?,
            self.linear,
        )
    }

    /// `h^-1`, defined on the image of the domain under `h`.
    pub fn to_inverse(&self, h: &TransformationMap) -> Option<Result<TransformationMap, Error>> {
        let inverse = self.inverse.as_ref()?;
        Some((|| {
            let image = h
                .image_of(h.domain())
                .ok_or_else(|| Error::Region("map image of its domain is degenerate".into()))?;
            TransformationMap::parse(
                &self.target_names(),
                h.source_names(),
                self.parameters(),
                inverse,
                image,
                self.linear,
            )
        })())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_rejected() {
        let err = serde_json::from_str::<SystemFile>(
            r#"{"name":"s","state":["x"],"field":["x"],"colour":"red"}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("colour"));
        assert!(serde_json::from_str::<MapFile>(r#"{"map":["x"],"domain":[[0,1]]}"#).is_err());
    }

    #[test]
    fn default_target_names() {
        let mut m: MapFile = serde_json::from_str(r#"{"map":["x"],"domain":[[0,1]],"linear":true}"#).unwrap();
        assert_eq!(m.target_names(), ["y"]);
        m.map.push("y".into());
        assert_eq!(m.target_names(), ["y1", "y2"]);
    }

    #[test]
    fn digest_is_hex_sha256() {
        assert_eq!(digest(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }
}
