//! Chain embeddings as `{"nodes": [...], "couplers": [[a, b], ...]}`.

use std::path::Path;

use annealbench_core::chimera::{validate_embedding, ChainEmbedding, ChimeraGraph};
use serde::{Deserialize, Serialize};

use super::{read_text, write_json};
use crate::error::{AppError, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainFile {
    pub nodes: Vec<usize>,
    pub couplers: Vec<[usize; 2]>,
}

impl From<&ChainEmbedding> for ChainFile {
    fn from(c: &ChainEmbedding) -> Self {
        ChainFile {
            nodes: c.nodes.clone(),
            couplers: c.couplers().into_iter().map(|(a, b)| [a, b]).collect(),
        }
    }
}

pub fn write_chain(path: &Path, chain: &ChainEmbedding) -> Result<()> {
    write_json(path, &ChainFile::from(chain))
}

/// Reads a chain and checks it against `graph`, including that the listed
/// couplers are exactly the consecutive hops.
pub fn read_chain(path: &Path, graph: &ChimeraGraph) -> Result<ChainEmbedding> {
    let file: ChainFile =
        serde_json::from_str(&read_text(path)?).map_err(|e| AppError::format(path, Some(e.line()), e.to_string()))?;
    let chain = ChainEmbedding { nodes: file.nodes.clone() };
    if let Some(v) = validate_embedding(graph, &chain) {
        return Err(AppError::format(path, None, v.to_string()));
    }
    if ChainFile::from(&chain) != file {
        return Err(AppError::format(path, None, "couplers do not match consecutive nodes"));
    }
    Ok(chain)
}
