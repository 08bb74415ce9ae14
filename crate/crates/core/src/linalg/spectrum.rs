use serde::{Deserialize, Serialize};

/// Eigenvalues grouped into numerically distinct clusters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSummary {
    /// Cluster centers (means), descending.
    pub distinct_values: Vec<f64>,
    pub multiplicities: Vec<usize>,
    /// `max - min` inside each cluster.
    pub widths: Vec<f64>,
    /// Degree of the minimal polynomial for diagonalisable input.
    pub m: usize,
    pub cluster_tol: f64,
}

impl SpectrumSummary {
    pub fn dimension(&self) -> usize {
        self.multiplicities.iter().sum()
    }

    /// Clusters as `(center, multiplicity)` pairs.
    pub fn clusters(&self) -> impl Iterator<Item = (f64, usize)> + '_ {
        self.distinct_values.iter().copied().zip(self.multiplicities.iter().copied())
    }
}

/// Greedy single-linkage clustering of sorted values: a new cluster starts
/// whenever the gap to the previous value exceeds `cluster_tol`.
pub fn cluster_eigenvalues(values: &[f64], cluster_tol: f64) -> SpectrumSummary {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));

    let mut groups: Vec<Vec<f64>> = Vec::new();
    for v in sorted {
        match groups.last_mut() {
            Some(g) if g.last().is_some_and(|&last| last - v <= cluster_tol) => g.push(v),
            _ => groups.push(vec![v]),
        }
    }

    let distinct_values = groups.iter().map(|g| g.iter().sum::<f64>() / g.len() as f64).collect();
    let multiplicities = groups.iter().map(Vec::len).collect();
    let widths = groups.iter().map(|g| g[0] - g[g.len() - 1]).collect();
    SpectrumSummary { distinct_values, multiplicities, widths, m: groups.len(), cluster_tol }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strange_spectrum() {
        let eps = (-std::f64::consts::PI * 3f64.sqrt()).exp();
        let s = cluster_eigenvalues(&[1.0, -eps, -eps], 1e-9);
        assert_eq!(s.distinct_values, vec![1.0, -eps]);
        assert_eq!(s.multiplicities, vec![1, 2]);
        assert_eq!(s.m, 2);
    }

    #[test]
    fn distinct_values_stay_apart() {
        let s = cluster_eigenvalues(&[0.2, 1.0, 0.5], 1e-8);
        assert_eq!(s.m, 3);
        assert_eq!(s.distinct_values, vec![1.0, 0.5, 0.2]);
    }

    #[test]
    fn near_duplicates_merge_and_reclustering_is_idempotent() {
        let s = cluster_eigenvalues(&[1.0, 0.5 + 1e-12, 0.5 - 1e-12], 1e-8);
        assert_eq!(s.m, 2);
        assert_eq!(s.multiplicities, vec![1, 2]);
        assert!((s.distinct_values[1] - 0.5).abs() < 1e-15);
        assert!(s.widths[1] > 0.0);

        let expanded: Vec<f64> = s
            .clusters()
            .flat_map(|(c, k)| std::iter::repeat_n(c, k))
            .collect();
        let again = cluster_eigenvalues(&expanded, 1e-8);
        assert_eq!(again.distinct_values, s.distinct_values);
        assert_eq!(again.multiplicities, s.multiplicities);
    }

    #[test]
    fn empty_input() {
        let s = cluster_eigenvalues(&[], 1e-8);
        assert_eq!(s.m, 0);
        assert_eq!(s.dimension(), 0);
    }
}
