//! Exponent specification files.
//!
//! ```toml
//! kappa = 0.0
//! alpha = -1.0
//! beta = 1.0
//! atoms = [[1.0, 0.5]]          # [mass, size] pairs
//! exp_component = { mass = 0.3, rate = 2.0 }
//! ```
//!
//! The same keys are accepted as JSON.

use std::path::Path;

use serde::Deserialize;

use super::{Atom, LevyQuartet};
use crate::error::{Error, Result};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct QuartetFile {
    kappa: f64,
    alpha: f64,
    beta: f64,
    #[serde(default)]
    atoms: Vec<[f64; 2]>,
    exp_component: Option<super::ExpComponent>,
}

impl From<QuartetFile> for LevyQuartet {
    fn from(f: QuartetFile) -> Self {
        LevyQuartet {
            kappa: f.kappa,
            alpha: f.alpha,
            beta: f.beta,
            atoms: f.atoms.into_iter().map(|[mass, size]| Atom { mass, size }).collect(),
            exp_component: f.exp_component,
        }
    }
}

/// Parses TOML, falling back to JSON. The quartet is validated.
pub fn parse_quartet(text: &str) -> Result<LevyQuartet> {
    let parsed: QuartetFile = match toml::from_str(text) {
        Ok(f) => f,
        Err(toml_err) => serde_json::from_str(text).map_err(|json_err| {
            Error::Config(format!(
                "exponent file is neither TOML ({toml_err}) nor JSON ({json_err})"
            ))
        })?,
    };
    let q = LevyQuartet::from(parsed);
    q.validate()?;
    Ok(q)
}

pub fn load_quartet(path: &Path) -> Result<LevyQuartet> {
    parse_quartet(&std::fs::read_to_string(path)?)
}

impl LevyQuartet {
    /// Serializes to the TOML file format read by [`parse_quartet`].
    pub fn to_toml(&self) -> String {
        let mut s = format!(
            "kappa = {:?}\nalpha = {:?}\nbeta = {:?}\n",
            self.kappa, self.alpha, self.beta
        );
        let atoms: Vec<String> = self
            .atoms
            .iter()
            .map(|a| format!("[{:?}, {:?}]", a.mass, a.size))
            .collect();
        s.push_str(&format!("atoms = [{}]\n", atoms.join(", ")));
        if let Some(e) = self.exp_component {
            s.push_str(&format!(
                "exp_component = {{ mass = {:?}, rate = {:?} }}\n",
                e.mass, e.rate
            ));
        }
        s
    }
}
