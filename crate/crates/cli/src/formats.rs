//! JSON and CSV shapes shared by the subcommands.

use bellforge_core::bell::{BellFunctional, Scenario};
use bellforge_core::construction::{SignDistribution, SignTensor};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Wrapper written around every JSON result.
#[derive(Serialize)]
pub struct Envelope<'a, C: Serialize, R: Serialize> {
    pub tool: &'a str,
    pub version: &'a str,
    pub command: &'a str,
    pub seed: Option<u64>,
    pub config: &'a C,
    pub result: &'a R,
}

impl<'a, C: Serialize, R: Serialize> Envelope<'a, C, R> {
    pub fn new(command: &'a str, seed: Option<u64>, config: &'a C, result: &'a R) -> Self {
        Self {
            tool: crate::TOOL,
            version: crate::VERSION,
            command,
            seed,
            config,
            result,
        }
    }

    pub fn to_json(&self) -> CliResult<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

/// Parses `text`, reporting the JSON path of the first offending node.
pub fn parse_json<T: DeserializeOwned>(text: &str) -> CliResult<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| CliError::Schema {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })
}

fn schema(path: String, message: impl Into<String>) -> CliError {
    CliError::Schema {
        path,
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionalJson {
    pub n_inputs: usize,
    pub n_outputs: usize,
    /// `coeffs[x][y][a][b]`.
    pub coeffs: Vec<Vec<Vec<Vec<f64>>>>,
}

impl FunctionalJson {
    pub fn from_functional(m: &BellFunctional) -> Self {
        let s = m.scenario();
        let (n, k) = (s.n_inputs, s.n_outputs);
        let coeffs = (0..n)
            .map(|x| {
                (0..n)
                    .map(|y| (0..k).map(|a| (0..k).map(|b| m.get(x, y, a, b)).collect()).collect())
                    .collect()
            })
            .collect();
        Self {
            n_inputs: n,
            n_outputs: k,
            coeffs,
        }
    }

    pub fn to_functional(&self) -> CliResult<BellFunctional> {
        let (n, k) = (self.n_inputs, self.n_outputs);
        let scenario = Scenario::new(n, k).map_err(|e| schema(".".into(), e.to_string()))?;
        let check = |len: usize, want: usize, path: String| {
            if len == want {
                Ok(())
            } else {
                Err(schema(path, format!("expected {want} entries, found {len}")))
            }
        };
        check(self.coeffs.len(), n, "coeffs".into())?;
        let mut flat = Vec::with_capacity(scenario.len());
        for (x, rx) in self.coeffs.iter().enumerate() {
            check(rx.len(), n, format!("coeffs[{x}]"))?;
            for (y, ry) in rx.iter().enumerate() {
                check(ry.len(), k, format!("coeffs[{x}][{y}]"))?;
                for (a, ra) in ry.iter().enumerate() {
                    check(ra.len(), k, format!("coeffs[{x}][{y}][{a}]"))?;
                    flat.extend_from_slice(ra);
                }
            }
        }
        Ok(BellFunctional::from_flat(scenario, flat)?)
    }
}

pub fn read_functional(text: &str) -> CliResult<BellFunctional> {
    parse_json::<FunctionalJson>(text)?.to_functional()
}

/// Replayable sign tensor: packed hex bits for Bernoulli draws, raw values
/// for the Gaussian variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignsJson {
    pub n: usize,
    pub seed: u64,
    pub distribution: SignDistribution,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bits: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
}

impl SignsJson {
    pub fn from_tensor(t: &SignTensor) -> Self {
        let bits = t.to_packed_bits().map(hex::encode);
        let values = bits.is_none().then(|| t.values().to_vec());
        Self {
            n: t.n(),
            seed: t.seed(),
            distribution: t.distribution(),
            bits,
            values,
        }
    }

    pub fn to_tensor(&self) -> CliResult<SignTensor> {
        match (&self.bits, &self.values) {
            (Some(h), None) => {
                let bytes = hex::decode(h).map_err(|e| schema("bits".into(), e.to_string()))?;
                Ok(SignTensor::from_packed_bits(self.n, self.seed, &bytes)?)
            }
            (None, Some(v)) => Ok(SignTensor::from_values(self.n, v.clone(), self.seed, self.distribution)?),
            _ => Err(schema(".".into(), "exactly one of `bits` or `values` is required")),
        }
    }
}

/// Writes `text` to `path`, or to stdout when `path` is `None`.
pub fn emit(path: Option<&std::path::Path>, text: &str) -> CliResult<()> {
    use std::io::Write;
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
        }
    }
    Ok(())
}
