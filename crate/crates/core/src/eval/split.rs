//! Nested leave-one-person-out split plans.

use serde::{Deserialize, Serialize};

use crate::dataset::DatasetManifest;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Session {
    pub test: String,
    pub val: String,
    pub train: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub signers: Vec<String>,
    pub sessions: Vec<Session>,
}

impl SplitPlan {
    /// Every ordered (test, validation) signer pair, test-major in lexicographic order.
    pub fn from_signers<S: AsRef<str>>(signers: &[S]) -> Result<Self> {
        let mut signers: Vec<String> = signers.iter().map(|s| s.as_ref().to_string()).collect();
        signers.sort();
        signers.dedup();
        if signers.len() < 3 {
            return Err(Error::InsufficientSigners(signers.len()));
        }
        let mut sessions = Vec::with_capacity(signers.len() * (signers.len() - 1));
        for test in &signers {
            for val in signers.iter().filter(|v| *v != test) {
                let train = signers
                    .iter()
                    .filter(|s| *s != test && *s != val)
                    .cloned()
                    .collect();
                sessions.push(Session {
                    test: test.clone(),
                    val: val.clone(),
                    train,
                });
            }
        }
        Ok(SplitPlan { signers, sessions })
    }
}

pub fn make_split_plan(manifest: &DatasetManifest) -> Result<SplitPlan> {
    SplitPlan::from_signers(&manifest.signers())
}
