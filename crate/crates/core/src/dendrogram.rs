//! Complete-linkage agglomeration and partition selection from the
//! resulting dendrogram.

use serde::{Deserialize, Serialize};

use crate::distance::DistanceMatrix;
use crate::error::{Error, Result};
use crate::grid::Partition;

/// One agglomeration step: clusters `left` and `right` joined at `height`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    /// Member indices into the dendrogram labels, ascending.
    pub left: Vec<usize>,
    pub right: Vec<usize>,
    pub height: f64,
}

/// Nested partitions from singletons to a single cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct DendrogramModel {
    labels: Vec<String>,
    merges: Vec<Merge>,
}

impl DendrogramModel {
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn merges(&self) -> &[Merge] {
        &self.merges
    }

    pub fn heights(&self) -> Vec<f64> {
        self.merges.iter().map(|m| m.height).collect()
    }

    /// Partition after replaying the first `steps` merges.
    fn after_merges(&self, steps: usize) -> Partition {
        let mut cluster: Vec<usize> = (0..self.labels.len()).collect();
        for merge in &self.merges[..steps] {
            let target = cluster[merge.left[0]];
            for &i in &merge.right {
                cluster[i] = target;
            }
        }
        Partition::new(self.labels.clone(), cluster).expect("labels are unique")
    }
}

/// Smallest label of a cluster, used for deterministic tie-breaking.
fn min_label<'a>(members: &[usize], labels: &'a [String]) -> &'a str {
    members
        .iter()
        .map(|&i| labels[i].as_str())
        .min()
        .expect("clusters are non-empty")
}

/// Agglomerates singletons by complete linkage.
///
/// At each step the pair of clusters with the smallest maximum pairwise
/// distance is merged. Exact ties go to the lexicographically smallest
/// (min label of one cluster, min label of the other).
pub fn complete_linkage(matrix: &DistanceMatrix) -> Result<DendrogramModel> {
    let s = matrix.len();
    if s < 2 {
        return Err(Error::TooFewSets(s));
    }
    let labels = matrix.labels().to_vec();
    let mut clusters: Vec<Vec<usize>> = (0..s).map(|i| vec![i]).collect();
    // Linkage between active clusters, indexed like `clusters`.
    let mut link: Vec<Vec<f64>> = (0..s)
        .map(|i| (0..s).map(|j| matrix.get(i, j)).collect())
        .collect();
    let mut merges = Vec::with_capacity(s - 1);

    while clusters.len() > 1 {
        let mut best: Option<(usize, usize, f64, (&str, &str))> = None;
        for a in 0..clusters.len() {
            for b in a + 1..clusters.len() {
                let d = link[a][b];
                let (la, lb) = (min_label(&clusters[a], &labels), min_label(&clusters[b], &labels));
                let key = if la <= lb { (la, lb) } else { (lb, la) };
                let better = match best {
                    None => true,
                    Some((_, _, bd, bkey)) => d < bd || (d == bd && key < bkey),
                };
                if better {
                    best = Some((a, b, d, key));
                }
            }
        }
        let (a, b, height, _) = best.expect("at least two clusters");

        let (first, second) = if min_label(&clusters[a], &labels) <= min_label(&clusters[b], &labels) {
            (a, b)
        } else {
            (b, a)
        };
        merges.push(Merge {
            left: clusters[first].clone(),
            right: clusters[second].clone(),
            height,
        });

        // Fold b into a; complete linkage takes the max.
        for c in 0..clusters.len() {
            if c != a && c != b {
                let d = link[a][c].max(link[b][c]);
                link[a][c] = d;
                link[c][a] = d;
            }
        }
        let absorbed = clusters.remove(b);
        clusters[a].extend(absorbed);
        clusters[a].sort_unstable();
        link.remove(b);
        for row in &mut link {
            row.remove(b);
        }
    }

    Ok(DendrogramModel { labels, merges })
}

/// Replays merges until the first one at height `>= gamma` and returns the
/// partition just before it; all labels end in one cluster if none triggers.
pub fn cut_at_threshold(dendro: &DendrogramModel, gamma: f64) -> Partition {
    let steps = dendro
        .merges
        .iter()
        .position(|m| m.height >= gamma)
        .unwrap_or(dendro.merges.len());
    dendro.after_merges(steps)
}

/// Partition with exactly `k` clusters.
pub fn partition_at_k(dendro: &DendrogramModel, k: usize) -> Result<Partition> {
    let s = dendro.labels.len();
    if k == 0 || k > s {
        return Err(Error::InvalidK { k, max: s });
    }
    Ok(dendro.after_merges(s - k))
}
