use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{induced_source_graph, is_path, validate, Embedding, InstanceFamily, SourceGraph};
use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::ratio::{format_rational, to_f64};
use crate::topology::{import_target, TargetFormat, TargetGraph};

/// Embedding JSON: `{"target": ..., "chains": {"<id>": [...]}, "edges": [[u, v], ...]}`.
/// `edges` is optional; without it the source graph is the induced one.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EmbeddingFile {
    pub target: String,
    pub chains: BTreeMap<NodeId, Vec<NodeId>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<[NodeId; 2]>>,
}

pub fn export_embedding(emb: &Embedding, source: Option<&SourceGraph>, path: &Path) -> Result<()> {
    let file = EmbeddingFile {
        target: emb.target.clone(),
        chains: emb.chains.clone(),
        edges: source.map(|g| g.edges().map(|(u, v)| [u, v]).collect()),
    };
    std::fs::write(path, serde_json::to_string(&file)?)?;
    Ok(())
}

/// Load an embedding whose chains must be disjoint paths in `gt`.
pub fn import_embedding(path: &Path, gt: &TargetGraph) -> Result<(SourceGraph, Embedding)> {
    let file: EmbeddingFile = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    let mut seen = BTreeMap::new();
    for (&v, chain) in &file.chains {
        if let Some(&p) = chain.iter().find(|p| !gt.contains(**p)) {
            return Err(Error::UnknownNode(p));
        }
        if !is_path(chain, gt) {
            return Err(Error::InvalidEmbedding(format!("chain of {v} is not a path: {chain:?}")));
        }
        for &p in chain {
            if let Some(u) = seen.insert(p, v) {
                return Err(Error::InvalidEmbedding(format!("qubit {p} shared by {u} and {v}")));
            }
        }
    }
    let emb = Embedding::new(file.target, file.chains);
    let gs = match file.edges {
        None => induced_source_graph(&emb, gt),
        Some(edges) => {
            let mut g = Graph::with_nodes(emb.chains.keys().copied());
            for [u, v] in edges {
                if u == v {
                    return Err(Error::InvalidEmbedding(format!("self-loop on {u}")));
                }
                g.add_edge(u, v);
            }
            let report = validate(&emb, &g, gt)?;
            if let Some(v) = report.violations.first() {
                return Err(Error::InvalidEmbedding(v.to_string()));
            }
            g
        }
    };
    Ok((gs, emb))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: String,
    pub graph_file: String,
    pub embedding_file: String,
    pub target_density: String,
    pub density: f64,
    pub density_exact: String,
    pub seed: u64,
    pub splits: usize,
    pub n_logical: usize,
    pub n_physical: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyManifest {
    pub schema: u32,
    pub config_hash: String,
    pub target_hash: String,
    pub target_file: String,
    pub n_physical: usize,
    pub instances: Vec<ManifestEntry>,
}

pub const FAMILY_SCHEMA: u32 = 1;

/// Write `manifest.json`, `target.json`, and per-instance graph and
/// embedding files under `dir`.
pub fn write_family(family: &InstanceFamily, gt: &TargetGraph, dir: &Path, config_hash: &str) -> Result<FamilyManifest> {
    std::fs::create_dir_all(dir.join("graphs"))?;
    std::fs::create_dir_all(dir.join("embeddings"))?;
    gt.write(&dir.join("target.json"), TargetFormat::Json)?;
    let mut instances = Vec::with_capacity(family.members.len());
    for m in &family.members {
        let graph_file = format!("graphs/{}.json", m.id);
        let embedding_file = format!("embeddings/{}.json", m.id);
        std::fs::write(dir.join(&graph_file), serde_json::to_string(&m.source)?)?;
        export_embedding(&m.embedding, None, &dir.join(&embedding_file))?;
        instances.push(ManifestEntry {
            id: m.id.clone(),
            graph_file,
            embedding_file,
            target_density: format_rational(m.target_density),
            density: to_f64(m.density),
            density_exact: format_rational(m.density),
            seed: m.seed,
            splits: m.splits,
            n_logical: m.source.node_count(),
            n_physical: m.embedding.qubit_count(),
        });
    }
    let manifest = FamilyManifest {
        schema: FAMILY_SCHEMA,
        config_hash: config_hash.to_string(),
        target_hash: family.target_hash.clone(),
        target_file: "target.json".into(),
        n_physical: family.physical_nodes.len(),
        instances,
    };
    std::fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
    Ok(manifest)
}

pub struct LoadedMember {
    pub entry: ManifestEntry,
    pub source: SourceGraph,
    pub embedding: Embedding,
}

/// Read a family directory back, checking every embedding against the
/// stored target and the shared physical node set.
pub fn read_family(dir: &Path) -> Result<(FamilyManifest, TargetGraph, Vec<LoadedMember>)> {
    let manifest: FamilyManifest = serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json"))?)?;
    let gt = import_target(&dir.join(&manifest.target_file), TargetFormat::Json)?;
    let mut members = Vec::with_capacity(manifest.instances.len());
    let mut physical: Option<BTreeSet<NodeId>> = None;
    for entry in &manifest.instances {
        let source: Graph = serde_json::from_str(&std::fs::read_to_string(dir.join(&entry.graph_file))?)?;
        let (_, embedding) = import_embedding(&dir.join(&entry.embedding_file), &gt)?;
        let nodes = embedding.physical_nodes();
        match &physical {
            Some(p) if *p != nodes => {
                return Err(Error::InvalidEmbedding(format!("{} uses a different qubit set", entry.id)))
            }
            None => physical = Some(nodes),
            _ => {}
        }
        members.push(LoadedMember { entry: entry.clone(), source, embedding });
    }
    Ok((manifest, gt, members))
}

