//! Structural specification of the cluster model: which taxa are parents,
//! offspring (with their parent assignment), or unrelated, plus the
//! role-indexed parameter vector.

use crate::error::{Error, Result};

/// Role of one taxon in the layered arrangement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    /// Homogeneous Poisson process that only serves as a parent.
    Parent,
    /// Clusters around the observed points of `parent` (a taxon index whose
    /// role is Parent or Offspring).
    Offspring { parent: usize },
    /// Homogeneous Poisson process unrelated to the layered arrangement.
    Unrelated,
}

/// Validated role assignment over `m` taxa. Parent assignments are acyclic,
/// so offspring can be generated after their parents; an offspring may itself
/// parent another taxon, and several offspring may share one parent.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelGraph {
    taxa: Vec<String>,
    roles: Vec<Role>,
    parent_idx: Vec<usize>,
    offspring_idx: Vec<usize>,
    unrelated_idx: Vec<usize>,
    // position of each taxon within its role list
    role_pos: Vec<usize>,
    topo: Vec<usize>,
}

/// Collect every violation in a proposed role assignment: bad parent
/// references, offspring of unrelated taxa, self-loops, and cycles.
pub fn violations(taxa: &[String], roles: &[Role]) -> Vec<String> {
    let mut out = Vec::new();
    if taxa.len() != roles.len() {
        out.push(format!(
            "{} taxa but {} roles",
            taxa.len(),
            roles.len()
        ));
        return out;
    }
    for (i, name) in taxa.iter().enumerate() {
        if name.is_empty() {
            out.push(format!("taxon {i} has an empty name"));
        }
        if taxa[..i].contains(name) {
            out.push(format!("duplicate taxon name `{name}`"));
        }
    }
    for (i, role) in roles.iter().enumerate() {
        if let Role::Offspring { parent } = role {
            if *parent >= taxa.len() {
                out.push(format!(
                    "offspring `{}` refers to nonexistent parent index {parent}",
                    taxa[i]
                ));
                continue;
            }
            if *parent == i {
                out.push(format!("offspring `{}` is its own parent", taxa[i]));
                continue;
            }
            if matches!(roles[*parent], Role::Unrelated) {
                out.push(format!(
                    "offspring `{}` points to unrelated taxon `{}`",
                    taxa[i], taxa[*parent]
                ));
            }
        }
    }
    if let Err(cycle) = try_topo_order(taxa, roles) {
        out.push(cycle);
    }
    out
}

/// Kahn topological sort over the taxon -> parent edges. Returns a taxon
/// order in which every parent precedes its offspring, or a description of a
/// cycle. Ties resolve by ascending taxon index, so the order is
/// deterministic.
fn try_topo_order(taxa: &[String], roles: &[Role]) -> std::result::Result<Vec<usize>, String> {
    let m = taxa.len();
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); m];
    let mut indegree = vec![0usize; m];
    for (i, role) in roles.iter().enumerate() {
        if let Role::Offspring { parent } = role {
            if *parent < m && *parent != i {
                children[*parent].push(i);
                indegree[i] += 1;
            }
        }
    }
    let mut ready: Vec<usize> = (0..m).filter(|&i| indegree[i] == 0).collect();
    let mut order = Vec::with_capacity(m);
    while let Some(&next) = ready.iter().min() {
        ready.retain(|&i| i != next);
        order.push(next);
        for &c in &children[next] {
            indegree[c] -= 1;
            if indegree[c] == 0 {
                ready.push(c);
            }
        }
    }
    if order.len() < m {
        let stuck: Vec<&str> = (0..m)
            .filter(|i| !order.contains(i))
            .map(|i| taxa[i].as_str())
            .collect();
        Err(format!("cycle in parent assignments among: {}", stuck.join(", ")))
    } else {
        Ok(order)
    }
}

impl ModelGraph {
    /// Validate and build. All violations are reported at once.
    pub fn new(taxa: Vec<String>, roles: Vec<Role>) -> Result<Self> {
        let found = violations(&taxa, &roles);
        if !found.is_empty() {
            return Err(Error::InvalidGraph { violations: found });
        }
        let topo = try_topo_order(&taxa, &roles).expect("validated graph is acyclic");
        let mut parent_idx = Vec::new();
        let mut offspring_idx = Vec::new();
        let mut unrelated_idx = Vec::new();
        let mut role_pos = vec![0usize; taxa.len()];
        for (i, role) in roles.iter().enumerate() {
            match role {
                Role::Parent => {
                    role_pos[i] = parent_idx.len();
                    parent_idx.push(i);
                }
                Role::Offspring { .. } => {
                    role_pos[i] = offspring_idx.len();
                    offspring_idx.push(i);
                }
                Role::Unrelated => {
                    role_pos[i] = unrelated_idx.len();
                    unrelated_idx.push(i);
                }
            }
        }
        Ok(ModelGraph {
            taxa,
            roles,
            parent_idx,
            offspring_idx,
            unrelated_idx,
            role_pos,
            topo,
        })
    }

    pub fn n_taxa(&self) -> usize {
        self.taxa.len()
    }

    pub fn taxa(&self) -> &[String] {
        &self.taxa
    }

    pub fn name(&self, idx: usize) -> &str {
        &self.taxa[idx]
    }

    pub fn taxon_index(&self, name: &str) -> Option<usize> {
        self.taxa.iter().position(|t| t == name)
    }

    pub fn role(&self, idx: usize) -> Role {
        self.roles[idx]
    }

    /// The parent taxon of an offspring taxon, if any.
    pub fn parent_of(&self, idx: usize) -> Option<usize> {
        match self.roles[idx] {
            Role::Offspring { parent } => Some(parent),
            _ => None,
        }
    }

    /// Parent-only taxa, ascending.
    pub fn parent_indices(&self) -> &[usize] {
        &self.parent_idx
    }

    /// Offspring taxa, ascending. Parameter vectors for alpha and bandwidth
    /// align with this list.
    pub fn offspring_indices(&self) -> &[usize] {
        &self.offspring_idx
    }

    /// Unrelated taxa, ascending.
    pub fn unrelated_indices(&self) -> &[usize] {
        &self.unrelated_idx
    }

    /// Position of a taxon within its role list.
    pub fn role_position(&self, idx: usize) -> usize {
        self.role_pos[idx]
    }

    /// Taxon order in which every parent precedes its offspring.
    pub fn topo_order(&self) -> &[usize] {
        &self.topo
    }
}

/// Model parameters, indexed by the graph's role lists: `alpha[k]` and
/// `bandwidth[k]` belong to `graph.offspring_indices()[k]`, and likewise for
/// the intensity vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamVector {
    pub alpha: Vec<f64>,
    pub bandwidth: Vec<f64>,
    pub lambda_parent: Vec<f64>,
    pub lambda_unrelated: Vec<f64>,
}

impl ParamVector {
    pub fn new(
        graph: &ModelGraph,
        alpha: Vec<f64>,
        bandwidth: Vec<f64>,
        lambda_parent: Vec<f64>,
        lambda_unrelated: Vec<f64>,
    ) -> Result<Self> {
        let check_len = |name: &str, got: usize, want: usize| -> Result<()> {
            if got != want {
                return Err(Error::InvalidParameter(format!(
                    "{name} has {got} entries but the graph requires {want}"
                )));
            }
            Ok(())
        };
        check_len("alpha", alpha.len(), graph.offspring_indices().len())?;
        check_len("bandwidth", bandwidth.len(), graph.offspring_indices().len())?;
        check_len("lambda_parent", lambda_parent.len(), graph.parent_indices().len())?;
        check_len(
            "lambda_unrelated",
            lambda_unrelated.len(),
            graph.unrelated_indices().len(),
        )?;
        for (name, vs) in [
            ("alpha", &alpha),
            ("bandwidth", &bandwidth),
            ("lambda_parent", &lambda_parent),
            ("lambda_unrelated", &lambda_unrelated),
        ] {
            if let Some(v) = vs.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "{name} entries must be strictly positive and finite, got {v}"
                )));
            }
        }
        Ok(ParamVector {
            alpha,
            bandwidth,
            lambda_parent,
            lambda_unrelated,
        })
    }

    /// Number of scalar parameters.
    pub fn len(&self) -> usize {
        self.alpha.len() + self.bandwidth.len() + self.lambda_parent.len() + self.lambda_unrelated.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// The dental-plaque arrangement: Corynebacterium parents Streptococcus
    /// and Porphyromonas; Pasteurellaceae clusters around Streptococcus; five
    /// further taxa are unrelated.
    pub(crate) fn biofilm_graph() -> ModelGraph {
        let taxa: Vec<String> = [
            "Corynebacterium",
            "Streptococcus",
            "Porphyromonas",
            "Pasteurellaceae",
            "Neisseriaceae",
            "Capnocytophaga",
            "Actinomyces",
            "Fusobacterium",
            "Leptotrichia",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        let roles = vec![
            Role::Parent,
            Role::Offspring { parent: 0 },
            Role::Offspring { parent: 0 },
            Role::Offspring { parent: 1 },
            Role::Unrelated,
            Role::Unrelated,
            Role::Unrelated,
            Role::Unrelated,
            Role::Unrelated,
        ];
        ModelGraph::new(taxa, roles).unwrap()
    }

    #[test]
    fn biofilm_graph_is_valid_and_partitioned() {
        let g = biofilm_graph();
        assert_eq!(g.parent_indices(), &[0]);
        assert_eq!(g.offspring_indices(), &[1, 2, 3]);
        assert_eq!(g.unrelated_indices(), &[4, 5, 6, 7, 8]);
        assert_eq!(
            g.parent_indices().len() + g.offspring_indices().len() + g.unrelated_indices().len(),
            g.n_taxa()
        );
    }

    #[test]
    fn topo_order_puts_parents_first() {
        let g = biofilm_graph();
        let order = g.topo_order();
        let pos = |i: usize| order.iter().position(|&t| t == i).unwrap();
        assert!(pos(0) < pos(1), "Corynebacterium before Streptococcus");
        assert!(pos(0) < pos(2), "Corynebacterium before Porphyromonas");
        assert!(pos(1) < pos(3), "Streptococcus before Pasteurellaceae");
        // general invariant: every offspring is after its parent
        for &l in g.offspring_indices() {
            let parent = g.parent_of(l).unwrap();
            assert!(pos(parent) < pos(l));
        }
    }

    #[test]
    fn chain_topo_order() {
        let g = ModelGraph::new(
            vec!["A".into(), "B".into(), "C".into()],
            vec![
                Role::Parent,
                Role::Offspring { parent: 0 },
                Role::Offspring { parent: 1 },
            ],
        )
        .unwrap();
        assert_eq!(g.topo_order(), &[0, 1, 2]);
    }

    #[test]
    fn all_unrelated_is_a_permutation() {
        let g = ModelGraph::new(
            vec!["A".into(), "B".into(), "C".into()],
            vec![Role::Unrelated; 3],
        )
        .unwrap();
        let mut order = g.topo_order().to_vec();
        order.sort_unstable();
        assert_eq!(order, vec![0, 1, 2]);
    }

    #[test]
    fn offspring_of_unrelated_is_rejected() {
        let err = ModelGraph::new(
            vec!["A".into(), "B".into()],
            vec![Role::Unrelated, Role::Offspring { parent: 0 }],
        )
        .unwrap_err();
        match err {
            Error::InvalidGraph { violations } => {
                assert!(violations.iter().any(|v| v.contains("unrelated")));
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn two_cycle_is_rejected() {
        let err = ModelGraph::new(
            vec!["A".into(), "B".into()],
            vec![
                Role::Offspring { parent: 1 },
                Role::Offspring { parent: 0 },
            ],
        )
        .unwrap_err();
        match err {
            Error::InvalidGraph { violations } => {
                assert!(violations.iter().any(|v| v.contains("cycle")));
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn all_violations_reported_at_once() {
        let taxa = vec!["A".into(), "B".into(), "C".into(), "D".into()];
        let roles = vec![
            Role::Unrelated,
            Role::Offspring { parent: 0 },  // points to unrelated
            Role::Offspring { parent: 3 },  // part of a 2-cycle
            Role::Offspring { parent: 2 },
        ];
        let found = violations(&taxa, &roles);
        assert!(found.len() >= 2, "expected multiple violations, got {found:?}");
    }

    #[test]
    fn self_parent_is_rejected() {
        assert!(ModelGraph::new(
            vec!["A".into()],
            vec![Role::Offspring { parent: 0 }],
        )
        .is_err());
    }

    #[test]
    fn param_vector_checks_shape_and_positivity() {
        let g = biofilm_graph();
        let ok = ParamVector::new(
            &g,
            vec![1.5, 1.0, 0.5],
            vec![0.01, 0.02, 0.01],
            vec![150.0],
            vec![95.0; 5],
        );
        assert!(ok.is_ok());
        assert_eq!(ok.unwrap().len(), 3 + 3 + 1 + 5);

        assert!(ParamVector::new(
            &g,
            vec![1.5, 1.0],
            vec![0.01, 0.02, 0.01],
            vec![150.0],
            vec![95.0; 5]
        )
        .is_err());
        assert!(ParamVector::new(
            &g,
            vec![1.5, -1.0, 0.5],
            vec![0.01, 0.02, 0.01],
            vec![150.0],
            vec![95.0; 5]
        )
        .is_err());
    }
}
