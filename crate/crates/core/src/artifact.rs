//! JSON forms of clusterings, decompositions and independent sets. Keys
//! keep a fixed order so artifacts diff cleanly. Nodes are written as
//! indices into the input graph.

use serde::{Deserialize, Serialize};

use crate::clustering::{Cluster, Clustering};
use crate::congest::RoundStats;
use crate::decomposition::Decomposition;
use crate::graph::Graph;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterJson {
    pub terminal: usize,
    pub nodes: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusteringJson {
    pub n: usize,
    pub b: u32,
    pub coverage: usize,
    pub clusters: Vec<ClusterJson>,
    pub unclustered: Vec<usize>,
    pub diameter_bound: u64,
    pub max_diameter_observed: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rounds: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_message_bits: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub messages_total: Option<u64>,
    /// `PASS` or `FAIL` when both executors ran.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub equivalence: Option<String>,
}

impl ClusteringJson {
    pub fn new(g: &Graph, c: &Clustering, stats: Option<&RoundStats>) -> Self {
        ClusteringJson {
            n: c.n,
            b: c.b,
            coverage: c.coverage(),
            clusters: c
                .clusters
                .iter()
                .map(|cl| ClusterJson {
                    terminal: cl.terminal,
                    nodes: cl.nodes.clone(),
                })
                .collect(),
            unclustered: c.unclustered.clone(),
            diameter_bound: c.diameter_bound(),
            max_diameter_observed: c.max_diameter_observed(g),
            rounds: stats.map(|s| s.rounds),
            max_message_bits: stats.map(|s| s.max_message_bits),
            messages_total: stats.map(|s| s.messages_total),
            equivalence: None,
        }
    }

    pub fn to_clustering(&self) -> Clustering {
        Clustering {
            n: self.n,
            b: self.b,
            clusters: self
                .clusters
                .iter()
                .map(|c| Cluster {
                    terminal: c.terminal,
                    nodes: c.nodes.clone(),
                })
                .collect(),
            unclustered: self.unclustered.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecompositionJson {
    pub colors: usize,
    pub color_of: Vec<Option<usize>>,
    pub b: u32,
    /// One terminal per cluster, per color.
    pub terminals: Vec<Vec<usize>>,
}

impl From<&Decomposition> for DecompositionJson {
    fn from(d: &Decomposition) -> Self {
        DecompositionJson {
            colors: d.colors_used(),
            color_of: d.color_of.clone(),
            b: d.b,
            terminals: d.terminals.clone(),
        }
    }
}

impl DecompositionJson {
    pub fn to_decomposition(&self) -> Decomposition {
        Decomposition {
            b: self.b,
            color_of: self.color_of.clone(),
            terminals: self.terminals.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MisJson {
    pub n: usize,
    pub mis: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Artifact {
    Clustering(ClusteringJson),
    Decomposition(DecompositionJson),
    Mis(MisJson),
}

impl Artifact {
    /// Recognizes the artifact kind by its distinguishing key.
    pub fn parse(text: &str) -> Result<Artifact, serde_json::Error> {
        let v: serde_json::Value = serde_json::from_str(text)?;
        if v.get("clusters").is_some() {
            Ok(Artifact::Clustering(serde_json::from_value(v)?))
        } else if v.get("color_of").is_some() {
            Ok(Artifact::Decomposition(serde_json::from_value(v)?))
        } else {
            Ok(Artifact::Mis(serde_json::from_value(v)?))
        }
    }
}

pub fn to_pretty<T: Serialize>(x: &T) -> String {
    let mut s = serde_json::to_string_pretty(x).expect("artifacts serialize");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomposition::{strong_cluster, Backend};
    use crate::graph::build_graph;

    #[test]
    fn clustering_round_trip_and_key_order() {
        let (g, ids) = build_graph(3, &[(0, 1), (1, 2)], None).unwrap();
        let c = strong_cluster(&g, &ids, Backend::Reference)
            .unwrap()
            .clustering;
        let j = ClusteringJson::new(&g, &c, None);
        let text = to_pretty(&j);
        let keys: Vec<usize> = [
            "\"n\"",
            "\"b\"",
            "\"coverage\"",
            "\"clusters\"",
            "\"unclustered\"",
            "\"diameter_bound\"",
            "\"max_diameter_observed\"",
        ]
        .iter()
        .map(|k| text.find(k).unwrap())
        .collect();
        assert!(keys.windows(2).all(|w| w[0] < w[1]), "{text}");
        assert!(!text.contains("rounds"));
        match Artifact::parse(&text).unwrap() {
            Artifact::Clustering(back) => assert_eq!(back.to_clustering(), c),
            other => panic!("parsed as {other:?}"),
        }
    }

    #[test]
    fn other_kinds_recognized() {
        assert!(matches!(
            Artifact::parse(r#"{"colors":1,"color_of":[0],"b":1,"terminals":[[0]]}"#),
            Ok(Artifact::Decomposition(_))
        ));
        assert!(matches!(
            Artifact::parse(r#"{"n":2,"mis":[0]}"#),
            Ok(Artifact::Mis(_))
        ));
        assert!(Artifact::parse(r#"{"n":2}"#).is_err());
    }
}
