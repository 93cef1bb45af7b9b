//! Model client selection shared by every subcommand.

use std::sync::Arc;

use anyhow::{anyhow, Context};
use clap::{Args, ValueEnum};
use oversight_core::gateway::{HttpClient, HttpConfig, MockModel};
use oversight_core::ModelClient;

pub type SharedClient = Arc<dyn ModelClient>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelKind {
    /// Deterministic in-process model.
    Mock,
    /// Remote endpoint from MODEL_ENDPOINT.
    Http,
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    #[arg(long, value_enum, default_value_t = ModelKind::Mock, env = "OVERSIGHT_MODEL")]
    pub model: ModelKind,
    /// Seed for the mock model.
    #[arg(long, default_value_t = 0)]
    pub model_seed: u64,
}

impl ModelArgs {
    pub fn client(&self) -> anyhow::Result<SharedClient> {
        match self.model {
            ModelKind::Mock => Ok(Arc::new(MockModel::with_seed(self.model_seed))),
            ModelKind::Http => {
                let cfg = HttpConfig::from_env().ok_or_else(|| anyhow!("MODEL_ENDPOINT is not set"))?;
                Ok(Arc::new(HttpClient::new(cfg).context("building HTTP model client")?))
            }
        }
    }
}
