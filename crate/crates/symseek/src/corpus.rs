//! Corpus files: JSON arrays of ODEs with their expected sigma and nu.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use symseek_core::arith::{Poly, RatFun};
use symseek_core::odemodel::{parse_ode_with_params, Ode2, ParseError};
use symseek_core::verify::{verify_nu, verify_sigma, DarbouxFunction, VerifyError};

pub const KAMKE: &str = include_str!("../data/kamke.json");
pub const NONLOCAL: &str = include_str!("../data/nonlocal.json");
pub const EXAMPLES: &str = include_str!("../data/examples.json");
pub const OSCILLATORS: &str = include_str!("../data/oscillators.json");

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusEntry {
    pub id: String,
    /// Right-hand side of y'' = phi.
    pub phi: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_sigma: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_nu: Option<String>,
    #[serde(default)]
    pub params: Vec<String>,
    /// Each of the form `expr != 0`.
    #[serde(default)]
    pub side_conditions: Vec<String>,
    /// Solve for parameter relations instead of treating parameters as generic.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub parametric: bool,
    #[serde(default)]
    pub notes: String,
}

#[derive(Debug)]
pub enum CorpusError {
    Io(std::io::Error),
    Json(serde_json::Error),
    Entry { id: String, msg: String },
}

impl fmt::Display for CorpusError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CorpusError::Io(e) => write!(f, "{}", e),
            CorpusError::Json(e) => write!(f, "malformed corpus: {}", e),
            CorpusError::Entry { id, msg } => write!(f, "entry {}: {}", id, msg),
        }
    }
}

impl std::error::Error for CorpusError {}

impl CorpusEntry {
    pub fn ode(&self) -> Result<Ode2, ParseError> {
        parse_ode_with_params(&self.phi, &self.params)
    }

    pub fn sigma(&self, ode: &Ode2) -> Option<Result<RatFun, ParseError>> {
        self.expected_sigma.as_ref().map(|s| ode.parse_expr(s))
    }

    pub fn nu(&self, ode: &Ode2) -> Option<Result<DarbouxFunction, VerifyError>> {
        self.expected_nu
            .as_ref()
            .map(|s| DarbouxFunction::parse(s, ode))
    }

    /// The side conditions as polynomials assumed nonzero.
    pub fn nonzero(&self, ode: &Ode2) -> Result<Vec<Poly>, String> {
        parse_nonzero(&self.side_conditions, ode)
    }

    /// Every expected sigma verifies, and every expected nu matches it.
    pub fn self_check(&self) -> Result<(), String> {
        let ode = self.ode().map_err(|e| e.to_string())?;
        self.nonzero(&ode)?;
        let sigma = match self.sigma(&ode) {
            None => return Ok(()),
            Some(s) => s.map_err(|e| format!("expected sigma: {}", e))?,
        };
        if !verify_sigma(&sigma, &ode).0 {
            return Err("expected sigma does not satisfy the determining equation".into());
        }
        if let Some(nu) = self.nu(&ode) {
            let nu = nu.map_err(|e| format!("expected nu: {}", e))?;
            if !verify_nu(&nu, &sigma, &ode) {
                return Err("expected nu does not match expected sigma".into());
            }
        }
        Ok(())
    }
}

/// Parses `expr != 0` (or a bare `expr`) into polynomials.
pub fn parse_nonzero(conds: &[String], ode: &Ode2) -> Result<Vec<Poly>, String> {
    let mut out = Vec::new();
    for c in conds {
        let src = c.split("!=").next().unwrap_or("").trim();
        if let Some(rhs) = c.split("!=").nth(1) {
            if rhs.trim() != "0" {
                return Err(format!("side condition `{}` must be of the form `expr != 0`", c));
            }
        }
        let r = ode
            .parse_expr(src)
            .map_err(|e| format!("side condition `{}`: {}", c, e))?;
        if r.is_zero() {
            return Err(format!("side condition `{}` is identically zero", c));
        }
        out.push(r.num().clone());
    }
    Ok(out)
}

pub fn parse_corpus(src: &str) -> Result<Vec<CorpusEntry>, CorpusError> {
    serde_json::from_str(src).map_err(CorpusError::Json)
}

/// Loads a corpus and runs the self-consistency check on every entry.
pub fn load_checked(src: &str) -> Result<Vec<CorpusEntry>, CorpusError> {
    let entries = parse_corpus(src)?;
    for e in &entries {
        e.self_check().map_err(|msg| CorpusError::Entry {
            id: e.id.clone(),
            msg,
        })?;
    }
    Ok(entries)
}

/// A bundled corpus by name, or a file path.
pub fn read_corpus(name_or_path: &str) -> Result<String, CorpusError> {
    match name_or_path {
        "kamke" => Ok(KAMKE.into()),
        "nonlocal" => Ok(NONLOCAL.into()),
        "examples" => Ok(EXAMPLES.into()),
        "oscillators" => Ok(OSCILLATORS.into()),
        p => std::fs::read_to_string(Path::new(p)).map_err(CorpusError::Io),
    }
}
