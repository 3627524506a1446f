//! Per-invocation run context: config, store, persona registry, lazily
//! built per-stage gateways, and the backend-call ledger.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use anyhow::Context as _;
use claimdrift_core::{config_digest, PersonaRegistry, PersonaSpec, RunManifest, Store};
use claimdrift_gateway::Gateway;

use crate::config::RunConfig;

pub struct RunContext {
    pub config: RunConfig,
    pub config_dir: PathBuf,
    pub config_hash: String,
    pub store: Store,
    pub seed: u64,
    pub dry_run: bool,
    gateways: Mutex<BTreeMap<String, Arc<Gateway>>>,
}

impl RunContext {
    pub fn new(
        config: RunConfig,
        config_dir: PathBuf,
        store_override: Option<&Path>,
        seed_override: Option<u64>,
        dry_run: bool,
    ) -> anyhow::Result<RunContext> {
        let store_dir = store_override
            .map(|p| p.to_path_buf())
            .unwrap_or_else(|| config_dir.join(&config.store.dir));
        let store = Store::open(&store_dir)
            .with_context(|| format!("opening store at {}", store_dir.display()))?;
        let config_hash = config_digest(&config);
        let seed = seed_override.unwrap_or(config.seed);
        Ok(RunContext {
            config,
            config_dir,
            config_hash,
            store,
            seed,
            dry_run,
            gateways: Mutex::new(BTreeMap::new()),
        })
    }

    /// The gateway for a stage, built on first use and shared after.
    pub fn gateway(&self, stage: &str) -> anyhow::Result<Arc<Gateway>> {
        let mut gateways = self.gateways.lock().expect("gateway registry");
        if let Some(gateway) = gateways.get(stage) {
            return Ok(gateway.clone());
        }
        let stage_config = self.config.stage(stage);
        let cache_dir = if self.config.cache.enabled {
            Some(match &self.config.cache.dir {
                Some(dir) => self.config_dir.join(dir),
                None => self.store.root().join("cache"),
            })
        } else {
            None
        };
        let gateway = stage_config
            .build_gateway(&self.config_dir, cache_dir.as_deref(), self.config.retry)
            .with_context(|| format!("building gateway for stage {stage:?}"))?;
        let gateway = Arc::new(gateway);
        gateways.insert(stage.to_string(), gateway.clone());
        Ok(gateway)
    }

    pub fn personas(&self) -> anyhow::Result<PersonaRegistry> {
        match &self.config.personas.file {
            None => Ok(PersonaRegistry::default_political()),
            Some(file) => {
                let path = self.config_dir.join(file);
                let (personas, rejects) = Store::read_jsonl::<PersonaSpec>(&path)
                    .with_context(|| format!("reading personas {}", path.display()))?;
                anyhow::ensure!(
                    rejects.is_empty(),
                    "personas file has {} malformed line(s)",
                    rejects.len()
                );
                anyhow::ensure!(!personas.is_empty(), "personas file is empty");
                Ok(PersonaRegistry::new(personas))
            }
        }
    }

    /// Load or create the manifest, hand it to `update`, stamp the finish
    /// time, and persist it.
    pub fn update_manifest(
        &self,
        update: impl FnOnce(&mut RunManifest),
    ) -> anyhow::Result<RunManifest> {
        let mut manifest = match self.store.load_manifest()? {
            Some(existing) if existing.config_hash == self.config_hash => existing,
            _ => RunManifest::new(&self.config_hash, self.seed),
        };
        manifest.seed = self.seed;
        manifest.temperature = self.config.stage("generation").temperature;
        update(&mut manifest);
        manifest.finish();
        self.store.save_manifest(&manifest)?;
        Ok(manifest)
    }

    /// Write the per-invocation backend-call counts (stage -> calls) for
    /// the gateways this command actually touched.
    pub fn write_call_ledger(&self, command: &str) -> anyhow::Result<BTreeMap<String, u64>> {
        let gateways = self.gateways.lock().expect("gateway registry");
        let counts: BTreeMap<String, u64> =
            gateways.iter().map(|(stage, gw)| (stage.clone(), gw.backend_calls())).collect();
        let path = self.store.root().join("logs/backend_calls.json");
        let payload = serde_json::json!({ "command": command, "backend_calls": counts });
        std::fs::write(&path, serde_json::to_string_pretty(&payload)?)
            .with_context(|| format!("writing {}", path.display()))?;
        Ok(counts)
    }
}
