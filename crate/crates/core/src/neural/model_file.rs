//! Plain-text model files.
//!
//! ```text
//! synthenv-model
//! format_version = 1
//! input_dim = 6
//! hidden_sizes = 83
//! output_dim = 5
//! activation = lrelu
//! num_params = 591
//! <extra key = value lines>
//! ---
//! -1.2345678901234567e-01
//! ...
//! ```
//!
//! Values use 17 significant digits, which round-trips any `f64`.

use std::fmt::Write as _;

use super::{Activation, NetworkSpec, NeuralError, ParameterVector};

pub const MODEL_FORMAT_VERSION: u32 = 1;
const MAGIC: &str = "synthenv-model";
const SPEC_KEYS: [&str; 6] = ["format_version", "input_dim", "hidden_sizes", "output_dim", "activation", "num_params"];

#[derive(Debug, Clone, PartialEq)]
pub struct ModelFile {
    pub spec: NetworkSpec,
    pub params: ParameterVector,
    /// Extra header entries owned by the caller, in file order.
    pub extra: Vec<(String, String)>,
}

impl ModelFile {
    pub fn new(spec: NetworkSpec, params: ParameterVector) -> Self {
        ModelFile { spec, params, extra: Vec::new() }
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.extra.push((key.to_string(), value.to_string()));
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.extra.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let hidden: Vec<String> = self.spec.hidden_sizes.iter().map(|h| h.to_string()).collect();
        let _ = writeln!(out, "{MAGIC}");
        let _ = writeln!(out, "format_version = {MODEL_FORMAT_VERSION}");
        let _ = writeln!(out, "input_dim = {}", self.spec.input_dim);
        let _ = writeln!(out, "hidden_sizes = {}", hidden.join(","));
        let _ = writeln!(out, "output_dim = {}", self.spec.output_dim);
        let _ = writeln!(out, "activation = {}", self.spec.activation);
        let _ = writeln!(out, "num_params = {}", self.params.len());
        for (k, v) in &self.extra {
            let _ = writeln!(out, "{k} = {v}");
        }
        out.push_str("---\n");
        for p in self.params.iter() {
            let _ = writeln!(out, "{p:.16e}");
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, NeuralError> {
        let err = |m: String| NeuralError::Parse(m);
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some(MAGIC) {
            return Err(err("missing model header".into()));
        }
        let mut fields: Vec<(String, String)> = Vec::new();
        for line in lines.by_ref() {
            let line = line.trim();
            if line == "---" {
                break;
            }
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| err(format!("bad header line '{line}'")))?;
            fields.push((k.trim().to_string(), v.trim().to_string()));
        }
        let field = |key: &str| -> Result<&str, NeuralError> {
            fields
                .iter()
                .find(|(k, _)| k == key)
                .map(|(_, v)| v.as_str())
                .ok_or_else(|| err(format!("missing header field '{key}'")))
        };
        let int = |key: &str| -> Result<usize, NeuralError> {
            field(key)?.parse().map_err(|_| err(format!("field '{key}' is not an integer")))
        };
        let version = int("format_version")?;
        if version != MODEL_FORMAT_VERSION as usize {
            return Err(err(format!("unsupported format version {version}")));
        }
        let hidden = field("hidden_sizes")?
            .split(',')
            .map(|h| h.trim().parse::<usize>().map_err(|_| err("bad hidden_sizes".into())))
            .collect::<Result<Vec<_>, _>>()?;
        let activation: Activation = field("activation")?.parse()?;
        let spec = NetworkSpec::new(int("input_dim")?, hidden, int("output_dim")?, activation)?;
        let num_params = int("num_params")?;
        let values = lines
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(|l| l.parse::<f64>().map_err(|_| err(format!("bad parameter value '{l}'"))))
            .collect::<Result<Vec<_>, _>>()?;
        if values.len() != num_params || num_params != spec.num_params() {
            return Err(err(format!(
                "parameter count mismatch: header {num_params}, body {}, spec {}",
                values.len(),
                spec.num_params()
            )));
        }
        let extra = fields.into_iter().filter(|(k, _)| !SPEC_KEYS.contains(&k.as_str())).collect();
        Ok(ModelFile { spec, params: ParameterVector::new(values), extra })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn header_layout() {
        let spec = NetworkSpec::new(2, vec![3], 1, Activation::PRelu).unwrap();
        let file = ModelFile::new(spec.clone(), spec.init_params(1)).with("kind", "rn");
        let text = file.to_text();
        assert!(text.starts_with("synthenv-model\nformat_version = 1\ninput_dim = 2\nhidden_sizes = 3\n"));
        assert!(text.contains("kind = rn\n---\n"));
        assert_eq!(ModelFile::parse(&text).unwrap(), file);
    }

    #[test]
    fn rejects_corrupt_files() {
        assert!(ModelFile::parse("nope").is_err());
        let spec = NetworkSpec::new(1, vec![1], 1, Activation::Tanh).unwrap();
        let text = ModelFile::new(spec.clone(), spec.init_params(0)).to_text();
        let truncated: String = text.lines().take(text.lines().count() - 1).map(|l| format!("{l}\n")).collect();
        assert!(ModelFile::parse(&truncated).is_err());
    }

    proptest! {
        #[test]
        fn text_roundtrip_is_lossless(
            values in proptest::collection::vec(proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO, 6),
            extra in "[a-z]{1,8}",
        ) {
            let spec = NetworkSpec::new(1, vec![1], 2, Activation::Relu).unwrap();
            let file = ModelFile::new(spec, ParameterVector::new(values)).with("note", extra);
            let back = ModelFile::parse(&file.to_text()).unwrap();
            for (a, b) in back.params.iter().zip(file.params.iter()) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
            prop_assert_eq!(back.extra, file.extra);
        }
    }
}
