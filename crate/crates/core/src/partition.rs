use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A partition of the generator indices `0..n` into nonempty disjoint
/// clusters. Members are kept sorted; cluster order is the caller's and fixes
/// the column order of the aggregation matrix.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "PartitionRepr", into = "PartitionRepr")]
pub struct Partition {
    clusters: Vec<Vec<usize>>,
    labels: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct PartitionRepr {
    n: usize,
    clusters: Vec<Vec<usize>>,
}

impl TryFrom<PartitionRepr> for Partition {
    type Error = Error;

    fn try_from(repr: PartitionRepr) -> Result<Self> {
        Partition::new(repr.clusters, repr.n)
    }
}

impl From<Partition> for PartitionRepr {
    fn from(p: Partition) -> Self {
        PartitionRepr {
            n: p.len(),
            clusters: p.clusters,
        }
    }
}

impl Partition {
    pub fn new(mut clusters: Vec<Vec<usize>>, n: usize) -> Result<Self> {
        let mut labels = vec![usize::MAX; n];
        for (c, cluster) in clusters.iter_mut().enumerate() {
            if cluster.is_empty() {
                return Err(Error::InvalidPartition(format!("cluster {c} is empty")));
            }
            cluster.sort_unstable();
            for &i in cluster.iter() {
                if i >= n {
                    return Err(Error::InvalidPartition(format!(
                        "index {i} out of range for {n} generators"
                    )));
                }
                if labels[i] != usize::MAX {
                    return Err(Error::InvalidPartition(format!(
                        "index {i} appears more than once"
                    )));
                }
                labels[i] = c;
            }
        }
        if let Some(i) = labels.iter().position(|&l| l == usize::MAX) {
            return Err(Error::InvalidPartition(format!("index {i} is not covered")));
        }
        Ok(Self { clusters, labels })
    }

    /// Builds a partition from a cluster label per element; clusters are
    /// ordered by their smallest member.
    pub fn from_labels(labels: &[usize]) -> Self {
        let mut order: Vec<usize> = Vec::new();
        let mut clusters: Vec<Vec<usize>> = Vec::new();
        for (i, &l) in labels.iter().enumerate() {
            match order.iter().position(|&o| o == l) {
                Some(c) => clusters[c].push(i),
                None => {
                    order.push(l);
                    clusters.push(vec![i]);
                }
            }
        }
        Self::new(clusters, labels.len()).expect("labels always form a partition")
    }

    pub fn singletons(n: usize) -> Self {
        Self::new((0..n).map(|i| vec![i]).collect(), n).expect("valid")
    }

    pub fn whole(n: usize) -> Self {
        Self::new(vec![(0..n).collect()], n).expect("n > 0")
    }

    /// Partition from one-based cluster members, as used in files and on the
    /// command line.
    pub fn from_one_based(clusters: Vec<Vec<usize>>, n: usize) -> Result<Self> {
        let zero_based = clusters
            .into_iter()
            .map(|c| {
                c.into_iter()
                    .map(|i| {
                        i.checked_sub(1).ok_or_else(|| {
                            Error::InvalidPartition("generator ids start at 1".into())
                        })
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(zero_based, n)
    }

    pub fn to_one_based(&self) -> Vec<Vec<usize>> {
        self.clusters
            .iter()
            .map(|c| c.iter().map(|i| i + 1).collect())
            .collect()
    }

    pub fn clusters(&self) -> &[Vec<usize>] {
        &self.clusters
    }

    /// Cluster index of each element.
    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// Number of elements partitioned.
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn num_clusters(&self) -> usize {
        self.clusters.len()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.clusters.iter().map(Vec::len).collect()
    }

    pub fn is_singletons(&self) -> bool {
        self.clusters.len() == self.labels.len()
    }

    /// Every unordered pair `(i, j)`, `i < j`, lying in a common cluster.
    pub fn within_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.clusters.iter().flat_map(|c| {
            c.iter()
                .enumerate()
                .flat_map(move |(a, &i)| c[a + 1..].iter().map(move |&j| (i, j)))
        })
    }

    /// True if every cluster of `self` lies inside a cluster of `coarser`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        self.len() == coarser.len()
            && self.clusters.iter().all(|c| {
                let l = coarser.labels[c[0]];
                c.iter().all(|&i| coarser.labels[i] == l)
            })
    }

    /// Same clusters irrespective of cluster order.
    pub fn same_sets(&self, other: &Partition) -> bool {
        let mut a = self.clusters.clone();
        let mut b = other.clusters.clone();
        a.sort();
        b.sort();
        a == b
    }

    /// Clusters reordered by their smallest member.
    pub fn canonical(&self) -> Self {
        let mut clusters = self.clusters.clone();
        clusters.sort_by_key(|c| c[0]);
        Self::new(clusters, self.len()).expect("reordering keeps validity")
    }
}
