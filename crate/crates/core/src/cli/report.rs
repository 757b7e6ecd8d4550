//! JSON form of [`FitReport`]. Complex numbers are `[re, im]` pairs; each
//! basis is a list of column vectors.

use serde::{Deserialize, Serialize};

use super::CliError;
use crate::approximation::{DataSet, Subspace};
use crate::fiber::{CyclicAction, FiberedModel};
use crate::linalg::{Matrix, C64};
use crate::union::{FitReport, Model, Partition, UnionModel};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupJson {
    pub p: usize,
    pub q: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelJson {
    #[serde(rename = "type")]
    pub kind: String,
    /// Dimension the bases live in: `d` for unions, `q` for invariant fibers.
    pub ambient_dim: usize,
    /// Rank bound `r`, or the fiber bound `k`.
    pub rank: usize,
    pub bases: Vec<Vec<Vec<[f64; 2]>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<GroupJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportJson {
    pub cost: f64,
    pub model: ModelJson,
    pub partition: Vec<usize>,
    pub iterations: usize,
    pub restarts_used: usize,
    pub seed: u64,
    pub converged: bool,
    pub trace: Vec<f64>,
    pub warnings: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
}

fn basis_json(s: &Subspace) -> Vec<Vec<[f64; 2]>> {
    s.basis()
        .columns()
        .into_iter()
        .map(|c| c.into_iter().map(|z| [z.re, z.im]).collect())
        .collect()
}

fn basis_from_json(d: usize, cols: &[Vec<[f64; 2]>]) -> Result<Subspace, CliError> {
    let cols: Vec<Vec<C64>> = cols
        .iter()
        .map(|c| c.iter().map(|[re, im]| C64::new(*re, *im)).collect())
        .collect();
    Ok(Subspace::from_basis(Matrix::from_columns(d, &cols)?)?)
}

impl ReportJson {
    pub fn from_report(report: &FitReport, timestamp: Option<String>) -> Self {
        let model = match &report.model {
            Model::Union(m) => ModelJson {
                kind: "union".into(),
                ambient_dim: m.ambient_dim(),
                rank: m.rank_bound(),
                bases: m.subspaces().iter().map(basis_json).collect(),
                group: None,
            },
            Model::Invariant(m) => ModelJson {
                kind: "invariant".into(),
                ambient_dim: m.action().block_size(),
                rank: m.pidim_bound(),
                bases: m.fibers().iter().map(basis_json).collect(),
                group: Some(GroupJson {
                    p: m.action().order(),
                    q: m.action().block_size(),
                }),
            },
        };
        ReportJson {
            cost: report.cost,
            model,
            partition: report.partition.assignment.clone(),
            iterations: report.iterations,
            restarts_used: report.restarts_used,
            seed: report.seed,
            converged: report.converged,
            trace: report.trace.clone(),
            warnings: report.warnings.clone(),
            timestamp,
        }
    }

    pub fn to_model(&self) -> Result<Model, CliError> {
        let m = &self.model;
        let subspaces = m
            .bases
            .iter()
            .map(|b| basis_from_json(m.ambient_dim, b))
            .collect::<Result<Vec<_>, _>>()?;
        match m.kind.as_str() {
            "union" => Ok(Model::Union(UnionModel::new(subspaces, m.rank)?)),
            "invariant" => {
                let g = m
                    .group
                    .as_ref()
                    .ok_or_else(|| CliError::Format("invariant model without group".into()))?;
                let action = CyclicAction::new(g.p, g.q)?;
                Ok(Model::Invariant(FiberedModel::new(action, subspaces, m.rank)?))
            }
            other => Err(CliError::Format(format!("unknown model type '{other}'"))),
        }
    }

    pub fn to_report(&self) -> Result<FitReport, CliError> {
        Ok(FitReport {
            cost: self.cost,
            model: self.to_model()?,
            partition: Partition::new(self.partition.clone()),
            iterations: self.iterations,
            restarts_used: self.restarts_used,
            seed: self.seed,
            converged: self.converged,
            trace: self.trace.clone(),
            warnings: self.warnings.clone(),
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Re-scores a stored report against data; returns `(reported, recomputed)`.
pub fn rescore(report: &ReportJson, data: &DataSet) -> Result<(f64, f64), CliError> {
    let model = report.to_model()?;
    Ok((report.cost, model.cost(data)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fiber::best_invariant;
    use crate::union::{k_subspaces, SolverConfig};
    use crate::random::gaussian_matrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn union_report_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let f = DataSet::new(gaussian_matrix(&mut rng, 3, 8).columns()).unwrap();
        let r = k_subspaces(&f, 2, 1, &SolverConfig::default()).unwrap();
        let json = ReportJson::from_report(&r, None).to_json();
        let back = ReportJson::parse(&json).unwrap();
        assert_eq!(back.to_report().unwrap(), r);
        let (reported, again) = rescore(&back, &f).unwrap();
        assert!((reported - again).abs() <= 1e-10);
        assert!(!json.contains("timestamp"));
    }

    #[test]
    fn invariant_report_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = DataSet::new(gaussian_matrix(&mut rng, 6, 4).columns()).unwrap();
        let action = CyclicAction::new(3, 2).unwrap();
        let (_, r) = best_invariant(&f, action, 1).unwrap();
        let json = ReportJson::from_report(&r, Some("t".into()));
        assert_eq!(json.model.group, Some(GroupJson { p: 3, q: 2 }));
        let back = ReportJson::parse(&json.to_json()).unwrap();
        let (reported, again) = rescore(&back, &f).unwrap();
        assert!((reported - again).abs() <= 1e-10);
    }

    #[test]
    fn rejects_unknown_model() {
        let mut j = ReportJson::from_report(
            &k_subspaces(
                &DataSet::from_real(&[&[1.0, 0.0]]).unwrap(),
                1,
                1,
                &SolverConfig::default(),
            )
            .unwrap(),
            None,
        );
        j.model.kind = "other".into();
        assert!(j.to_model().is_err());
    }
}
