use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Completer, CompletionRequest, LlmError, SampleKey};

/// One canned generation, keyed by file and target id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MockFixture {
    pub file: String,
    pub target: String,
    pub text: String,
}

/// Deterministic backend: replays canned text, or echoes a reasoning that
/// concludes with the ground-truth annotation.
#[derive(Debug, Clone)]
pub enum MockBackend {
    Canned(HashMap<SampleKey, String>),
    Echo(BTreeMap<String, String>),
}

impl MockBackend {
    pub fn canned(fixtures: Vec<MockFixture>) -> Self {
        MockBackend::Canned(
            fixtures
                .into_iter()
                .map(|f| {
                    (
                        SampleKey {
                            file: f.file,
                            target: f.target,
                        },
                        f.text,
                    )
                })
                .collect(),
        )
    }

    pub fn from_fixture_file(path: &Path) -> Result<Self, LlmError> {
        let text = fs::read_to_string(path)
            .map_err(|e| LlmError::Config(format!("{}: {e}", path.display())))?;
        let fixtures: Vec<MockFixture> = serde_json::from_str(&text)
            .map_err(|e| LlmError::Config(format!("{}: {e}", path.display())))?;
        Ok(MockBackend::canned(fixtures))
    }

    /// `annotations`: target id → ground-truth type.
    pub fn echo(annotations: BTreeMap<String, String>) -> Self {
        MockBackend::Echo(annotations)
    }
}

fn missing(key: Option<&SampleKey>) -> LlmError {
    let (file, target) = key.map(|k| (k.file.clone(), k.target.clone())).unwrap_or_default();
    LlmError::MissingFixture { file, target }
}

impl Completer for MockBackend {
    fn complete(&self, req: &CompletionRequest) -> Result<Vec<String>, LlmError> {
        req.validate()?;
        let key = req.key.as_ref();
        let text = match self {
            MockBackend::Canned(map) => key.and_then(|k| map.get(k)).cloned().ok_or_else(|| missing(key))?,
            MockBackend::Echo(truth) => {
                let gt = key.and_then(|k| truth.get(&k.target)).ok_or_else(|| missing(key))?;
                format!("1. The annotation is recorded in the dataset. Therefore, the type of the target is `{gt}`.")
            }
        };
        Ok(vec![text; req.n_samples])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn req(file: &str, target: &str, n: usize) -> CompletionRequest {
        CompletionRequest {
            prompt: "prompt".into(),
            n_samples: n,
            temperature: 1.0,
            max_new_tokens: 16,
            model: "mock".into(),
            key: Some(SampleKey {
                file: file.into(),
                target: target.into(),
            }),
        }
    }

    #[test]
    fn canned_copies() {
        let m = MockBackend::canned(vec![MockFixture {
            file: "a.py".into(),
            target: "t1".into(),
            text: "is `int`".into(),
        }]);
        let out = m.complete(&req("a.py", "t1", 3)).unwrap();
        assert_eq!(out, vec!["is `int`"; 3]);
        assert_eq!(m.complete(&req("a.py", "t1", 3)).unwrap(), out);
        assert!(matches!(m.complete(&req("a.py", "t2", 1)), Err(LlmError::MissingFixture { .. })));
    }

    #[test]
    fn echo_concludes_with_truth() {
        let m = MockBackend::echo([("t1".to_string(), "dict[str, int]".to_string())].into_iter().collect());
        let out = m.complete(&req("a.py", "t1", 2)).unwrap();
        assert_eq!(out.len(), 2);
        assert!(out[0].ends_with("is `dict[str, int]`."));
    }
}
