//! Polytope JSON: `{"dim": d, "vertices": [[..]; n], "facets": [[..]; m]}`
//! with 0-based vertex indices. Missing facets are enumerated.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polytope::{facet_enumeration, FacetIncidence, PolytopeVRep};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolytopeFile {
    pub dim: usize,
    pub vertices: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub facets: Option<Vec<Vec<usize>>>,
}

/// Parses polytope JSON. Syntax errors carry the offending line and column.
pub fn parse_polytope(text: &str) -> Result<(PolytopeVRep, FacetIncidence)> {
    let file: PolytopeFile = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: strip_position(&e.to_string()),
    })?;
    file.into_polytope()
}

fn strip_position(message: &str) -> String {
    match message.rfind(" at line ") {
        Some(pos) => message[..pos].to_string(),
        None => message.to_string(),
    }
}

impl PolytopeFile {
    pub fn from_polytope(v: &PolytopeVRep, incidence: Option<&FacetIncidence>) -> Self {
        Self {
            dim: v.dim(),
            vertices: v.to_rows(),
            facets: incidence.map(FacetIncidence::facets),
        }
    }

    pub fn into_polytope(self) -> Result<(PolytopeVRep, FacetIncidence)> {
        let v = PolytopeVRep::new(self.dim, &self.vertices)?;
        let incidence = match self.facets {
            Some(facets) => FacetIncidence::from_facets(v.len(), &facets, self.dim)?,
            None => facet_enumeration(&v)?,
        };
        Ok((v, incidence))
    }
}

/// Pretty-printed JSON with a trailing newline. Equal inputs give
/// byte-identical output.
pub fn write_polytope(v: &PolytopeVRep, incidence: Option<&FacetIncidence>) -> String {
    let mut text = serde_json::to_string_pretty(&PolytopeFile::from_polytope(v, incidence))
        .expect("plain data always serializes");
    text.push('\n');
    text
}
