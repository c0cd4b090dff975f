//! Incidence matrices of observation graphs and their constraints.

use nalgebra::DMatrix;

use crate::{GapError, ObservationAssignment};

/// M x N incidence matrix over {-1, 0, +1}: row `e` carries -1 at the tail
/// (observer) of edge `e` and +1 at its head (observed).
#[derive(Debug, Clone, PartialEq)]
pub struct IncidenceMatrix {
    entries: DMatrix<f64>,
}

impl IncidenceMatrix {
    /// Validates an arbitrary candidate matrix: entries in {-1, 0, +1} and
    /// exactly one -1 and one +1 per row.
    pub fn from_matrix(entries: DMatrix<f64>) -> Result<Self, GapError> {
        for &v in entries.iter() {
            if v != -1.0 && v != 0.0 && v != 1.0 {
                return Err(GapError::InvalidEntries);
            }
        }
        for (i, row) in entries.row_iter().enumerate() {
            let minus = row.iter().filter(|&&v| v == -1.0).count();
            let plus = row.iter().filter(|&&v| v == 1.0).count();
            if minus != 1 || plus != 1 {
                return Err(GapError::MalformedRow(i));
            }
        }
        Ok(IncidenceMatrix { entries })
    }

    pub fn rows(&self) -> usize {
        self.entries.nrows()
    }

    pub fn cols(&self) -> usize {
        self.entries.ncols()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    /// The (tail, head) vertex pair of edge row `e`.
    pub fn edge(&self, e: usize) -> (usize, usize) {
        let row = self.entries.row(e);
        let tail = row.iter().position(|&v| v == -1.0).expect("validated row");
        let head = row.iter().position(|&v| v == 1.0).expect("validated row");
        (tail, head)
    }
}

/// Encodes an assignment as its incidence matrix with edges ordered by
/// observer id: row `i` is the edge drone `i` -> target of `i`, so M = N.
pub fn build_incidence(assignment: &ObservationAssignment) -> IncidenceMatrix {
    let n = assignment.len();
    let mut entries = DMatrix::zeros(n, n);
    for (observer, target) in assignment.iter() {
        entries[(observer.index(), observer.index())] = -1.0;
        entries[(observer.index(), target.index())] = 1.0;
    }
    IncidenceMatrix { entries }
}

/// Graph Laplacian `L = D^T D` of the observation graph.
pub fn laplacian(d: &IncidenceMatrix) -> DMatrix<f64> {
    d.entries.transpose() * &d.entries
}

/// Second-smallest eigenvalue of `D^T D`; positive exactly when the
/// underlying undirected graph is connected. Kept as the spectral
/// cross-check for [`check_constraints`].
pub fn algebraic_connectivity(d: &IncidenceMatrix) -> f64 {
    let l = laplacian(d);
    let mut eigen: Vec<f64> = l.symmetric_eigen().eigenvalues.iter().copied().collect();
    eigen.sort_by(|a, b| a.partial_cmp(b).unwrap());
    eigen[1]
}

/// Feasibility of an observation graph: every edge row balances, the
/// underlying undirected graph is connected, and every drone takes part in
/// at least two edges.
///
/// Connectivity is decided by union-find over the undirected edges, which is
/// exact and avoids the eigenvalue solve.
pub fn check_constraints(d: &IncidenceMatrix) -> bool {
    let n = d.cols();
    for row in d.entries.row_iter() {
        if row.iter().sum::<f64>() != 0.0 {
            return false;
        }
    }

    let mut degree = vec![0usize; n];
    let mut uf = UnionFind::new(n);
    for e in 0..d.rows() {
        let (tail, head) = d.edge(e);
        degree[tail] += 1;
        degree[head] += 1;
        uf.union(tail, head);
    }
    if degree.iter().any(|&deg| deg < 2) {
        return false;
    }
    (0..n).all(|v| uf.find(v) == uf.find(0))
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, mut v: usize) -> usize {
        while self.parent[v] != v {
            self.parent[v] = self.parent[self.parent[v]];
            v = self.parent[v];
        }
        v
    }

    fn union(&mut self, a: usize, b: usize) {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra != rb {
            self.parent[ra] = rb;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;
    use swarm_core::DroneId;

    fn assignment(targets: &[usize]) -> ObservationAssignment {
        ObservationAssignment::new(targets.iter().map(|&t| DroneId(t)).collect()).unwrap()
    }

    #[test]
    fn three_cycle_incidence_matches_convention() {
        let d = build_incidence(&assignment(&[1, 2, 0]));
        let expected = dmatrix![
            -1.0, 1.0, 0.0;
            0.0, -1.0, 1.0;
            1.0, 0.0, -1.0;
        ];
        assert_eq!(d.entries(), &expected);
    }

    #[test]
    fn two_cycle_incidence() {
        let d = build_incidence(&assignment(&[1, 0]));
        let expected = dmatrix![
            -1.0, 1.0;
            1.0, -1.0;
        ];
        assert_eq!(d.entries(), &expected);
    }

    #[test]
    fn three_cycle_laplacian() {
        let l = laplacian(&build_incidence(&assignment(&[1, 2, 0])));
        let expected = dmatrix![
            2.0, -1.0, -1.0;
            -1.0, 2.0, -1.0;
            -1.0, -1.0, 2.0;
        ];
        assert_eq!(l, expected);
    }

    #[test]
    fn laplacian_annihilates_the_ones_vector() {
        for targets in [vec![1, 2, 3, 0], vec![2, 3, 1, 0], vec![3, 0, 1, 2]] {
            let l = laplacian(&build_incidence(&assignment(&targets)));
            let ones = nalgebra::DVector::from_element(l.ncols(), 1.0);
            assert!((l * ones).amax() < 1e-12);
        }
    }

    #[test]
    fn four_cycle_spectrum_is_0_2_2_4() {
        // Circulant single 4-cycle; eigenvalues computed by an independent
        // numeric eigen-decomposition.
        let d = build_incidence(&assignment(&[1, 2, 3, 0]));
        let mut eigen: Vec<f64> =
            laplacian(&d).symmetric_eigen().eigenvalues.iter().copied().collect();
        eigen.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let expected = [0.0, 2.0, 2.0, 4.0];
        for (got, want) in eigen.iter().zip(expected) {
            assert!((got - want).abs() < 1e-9, "eigenvalues {eigen:?}");
        }
        assert!(algebraic_connectivity(&d) > 1.9);
    }

    #[test]
    fn constraints_hold_for_single_cycles() {
        let d = build_incidence(&assignment(&[1, 2, 3, 0]));
        assert!(check_constraints(&d));
    }

    #[test]
    fn disjoint_two_cycles_fail_connectivity() {
        // 0 <-> 1 and 2 <-> 3 as four explicit edge rows.
        let entries = dmatrix![
            -1.0, 1.0, 0.0, 0.0;
            1.0, -1.0, 0.0, 0.0;
            0.0, 0.0, -1.0, 1.0;
            0.0, 0.0, 1.0, -1.0;
        ];
        let d = IncidenceMatrix::from_matrix(entries).unwrap();
        assert!(!check_constraints(&d));
        assert!(algebraic_connectivity(&d).abs() < 1e-9);
    }

    #[test]
    fn degree_one_column_fails() {
        // Path graph 0 -> 1 -> 2: drone 0 appears in a single edge.
        let entries = dmatrix![
            -1.0, 1.0, 0.0;
            0.0, -1.0, 1.0;
        ];
        let d = IncidenceMatrix::from_matrix(entries).unwrap();
        assert!(!check_constraints(&d));
    }

    #[test]
    fn union_find_connectivity_matches_lambda2() {
        // Cross-validation of the two connectivity routes on a mixed bag of
        // candidate graphs.
        let candidates = [
            vec![1, 2, 3, 0],
            vec![2, 3, 1, 0],
            vec![1, 0, 3, 2],
            vec![1, 2, 0, 3],
        ];
        for targets in candidates {
            let mut entries = DMatrix::zeros(targets.len(), targets.len());
            for (i, &t) in targets.iter().enumerate() {
                if i == t {
                    continue;
                }
                entries[(i, i)] = -1.0;
                entries[(i, t)] = 1.0;
            }
            if let Ok(d) = IncidenceMatrix::from_matrix(entries) {
                let connected_spectral = algebraic_connectivity(&d) > 1e-9;
                let feasible = check_constraints(&d);
                // check_constraints also demands degree >= 2, so it can only
                // reject connected graphs, never accept disconnected ones.
                if feasible {
                    assert!(connected_spectral);
                }
                if !connected_spectral {
                    assert!(!feasible);
                }
            }
        }
    }

    #[test]
    fn from_matrix_rejects_bad_rows() {
        let two_heads = dmatrix![
            -1.0, 1.0, 1.0;
            1.0, -1.0, 0.0;
        ];
        assert_eq!(IncidenceMatrix::from_matrix(two_heads).unwrap_err(), GapError::MalformedRow(0));
        let bad_value = dmatrix![
            -1.0, 2.0;
            1.0, -1.0;
        ];
        assert_eq!(IncidenceMatrix::from_matrix(bad_value).unwrap_err(), GapError::InvalidEntries);
    }
}
