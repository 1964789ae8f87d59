//! Loading graphs and partitions, and parsing the selector-style flags.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use commhide::datasets::karate;
use commhide::detect::{detect_with_names, modularity, Algorithm, DetectorConfig};
use commhide::experiment::TargetSelector;
use commhide::io::{read_edge_list, read_edge_list_in, read_partition, NamedGraph, NodeNames};
use commhide::{CommunityId, Graph, Partition};
use serde::Serialize;

/// Graph argument naming the bundled Zachary karate club network.
pub const KARATE: &str = "builtin:karate";

pub fn load_graph(path: &Path) -> Result<NamedGraph> {
    if path.as_os_str() == KARATE {
        return Ok(NamedGraph::numeric(karate()));
    }
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    read_edge_list(BufReader::new(file)).with_context(|| format!("reading {}", path.display()))
}

/// Reads a second graph over the node names of the first, so ids line up.
pub fn load_graph_in(path: &Path, names: &NodeNames) -> Result<Graph> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    read_edge_list_in(BufReader::new(file), names)
        .with_context(|| format!("reading {}", path.display()))
}

pub fn load_partition(path: &Path, names: &NodeNames) -> Result<Partition> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    read_partition(BufReader::new(file), names)
        .with_context(|| format!("reading {}", path.display()))
}

pub fn create(path: &Path) -> Result<BufWriter<File>> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(file))
}

/// `louvain`, `labelprop`, or the path of a partition file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum DetectorArg {
    Louvain,
    LabelProp,
    File(PathBuf),
}

impl FromStr for DetectorArg {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "louvain" | "louv" => Ok(Self::Louvain),
            "labelprop" | "label-prop" | "lpa" => Ok(Self::LabelProp),
            path if Path::new(path).is_file() => Ok(Self::File(path.into())),
            other => Err(format!(
                "unknown detector {other}: expected louvain, labelprop or an existing partition file"
            )),
        }
    }
}

impl DetectorArg {
    pub fn config(&self, seed: u64) -> DetectorConfig {
        let algorithm = match self {
            Self::Louvain => Algorithm::Louvain,
            Self::LabelProp => Algorithm::LabelProp,
            Self::File(p) => Algorithm::External(p.clone()),
        };
        DetectorConfig::new(algorithm, seed)
    }

    /// Experiment loops re-detect many rewired graphs; a fixed file cannot.
    pub fn built_in(&self, seed: u64) -> Result<DetectorConfig> {
        if let Self::File(p) = self {
            bail!(
                "{} is a fixed partition; repeated experiments need louvain or labelprop",
                p.display()
            );
        }
        Ok(self.config(seed))
    }
}

/// Detects communities and reports modularity when the graph has edges.
pub fn detect_partition(
    ng: &NamedGraph,
    det: &DetectorArg,
    seed: u64,
) -> Result<(Partition, Option<f64>)> {
    let p = detect_with_names(&ng.graph, &ng.names, &det.config(seed))?;
    let q = modularity(&ng.graph, &p).ok();
    Ok((p, q))
}

/// Which community (or communities) to hide.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum TargetArg {
    Id(CommunityId),
    Largest,
    Each,
    Sample(usize),
    /// The community holding this node.
    Node(String),
}

impl FromStr for TargetArg {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s == "largest" {
            return Ok(Self::Largest);
        }
        if s == "each" || s == "all" {
            return Ok(Self::Each);
        }
        if let Some(k) = s.strip_prefix("sample:") {
            return k
                .parse()
                .map(Self::Sample)
                .map_err(|e| format!("bad sample size {k}: {e}"));
        }
        if let Some(name) = s.strip_prefix("node:") {
            return Ok(Self::Node(name.to_owned()));
        }
        s.parse().map(Self::Id).map_err(|_| {
            format!("unknown target {s}: expected an id, largest, each, sample:K or node:NAME")
        })
    }
}

impl TargetArg {
    /// The single community a one-shot deception acts on.
    pub fn single(&self, p: &Partition, names: &NodeNames) -> Result<CommunityId> {
        match self {
            Self::Id(c) => {
                p.check_community(*c)?;
                Ok(*c)
            }
            Self::Largest => p.largest().context("partition has no communities"),
            Self::Node(name) => {
                let v = names
                    .id(name)
                    .with_context(|| format!("unknown node {name}"))?;
                Ok(p.label(v))
            }
            Self::Each | Self::Sample(_) => {
                bail!("this command hides one community; pick an id, largest or node:NAME")
            }
        }
    }

    pub fn selector(&self) -> Result<TargetSelector> {
        Ok(match self {
            Self::Id(c) => TargetSelector::Community(*c),
            Self::Largest => TargetSelector::Largest,
            Self::Each => TargetSelector::EachInTurn,
            Self::Sample(k) => TargetSelector::Sample(*k),
            Self::Node(_) => bail!("node:NAME targets a single deception, not an experiment"),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn target_forms() {
        assert_eq!("3".parse::<TargetArg>().unwrap(), TargetArg::Id(3));
        assert_eq!("largest".parse::<TargetArg>().unwrap(), TargetArg::Largest);
        assert_eq!(
            "sample:5".parse::<TargetArg>().unwrap(),
            TargetArg::Sample(5)
        );
        assert_eq!(
            "node:a".parse::<TargetArg>().unwrap(),
            TargetArg::Node("a".into())
        );
        assert!("bogus".parse::<TargetArg>().is_err());
    }

    #[test]
    fn detector_forms() {
        assert_eq!(
            "louvain".parse::<DetectorArg>().unwrap(),
            DetectorArg::Louvain
        );
        assert_eq!(
            "labelprop".parse::<DetectorArg>().unwrap(),
            DetectorArg::LabelProp
        );
        assert!("no/such/file".parse::<DetectorArg>().is_err());
    }
}
