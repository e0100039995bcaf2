//! Observation tables and dummy-expanded design matrices with collinearity
//! detection.

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("column `{0}` has a different length than the outcome")]
    LengthMismatch(String),
    #[error("no rows remain after complete-case filtering")]
    NoRows,
    #[error("outcome must be 0/1 for the logit family")]
    NonBinaryOutcome,
    #[error("design matrix is empty after dropping collinear columns")]
    EmptyDesign,
    #[error("{0}")]
    Degenerate(String),
}

/// A regression table: outcome, named covariates, named categorical
/// fixed-effect columns, and a cluster id per row.
#[derive(Debug, Clone, Default)]
pub struct ObservationMatrix {
    pub outcome: Vec<f64>,
    pub covariates: Vec<(String, Vec<f64>)>,
    pub fixed_effects: Vec<(String, Vec<String>)>,
    pub cluster: Vec<String>,
}

impl ObservationMatrix {
    pub fn validate(&self) -> Result<(), StatsError> {
        let n = self.outcome.len();
        for (name, col) in &self.covariates {
            if col.len() != n {
                return Err(StatsError::LengthMismatch(name.clone()));
            }
        }
        for (name, col) in &self.fixed_effects {
            if col.len() != n {
                return Err(StatsError::LengthMismatch(name.clone()));
            }
        }
        if self.cluster.len() != n {
            return Err(StatsError::LengthMismatch("cluster".into()));
        }
        Ok(())
    }

    /// Row indices where the outcome and every covariate are finite.
    fn complete_rows(&self) -> Vec<usize> {
        (0..self.outcome.len())
            .filter(|&i| {
                self.outcome[i].is_finite()
                    && self.covariates.iter().all(|(_, col)| col[i].is_finite())
            })
            .collect()
    }
}

/// A dummy-expanded design: intercept, covariates in order, then per-FE
/// dummies with the first (sorted) level as the reference.
#[derive(Debug, Clone)]
pub struct DesignMatrix {
    pub x: DMatrix<f64>,
    pub y: DVector<f64>,
    pub column_names: Vec<String>,
    pub cluster_ids: Vec<usize>,
    pub n_clusters: usize,
    pub n_dropped_rows: usize,
    pub dropped_columns: Vec<String>,
}

impl DesignMatrix {
    /// Builds the design from an observation table: complete-case rows,
    /// dummy expansion, and in-order removal of linearly dependent columns
    /// (a column is dropped when it is a linear combination of the columns
    /// before it).
    pub fn build(data: &ObservationMatrix) -> Result<Self, StatsError> {
        data.validate()?;
        let rows = data.complete_rows();
        if rows.is_empty() {
            return Err(StatsError::NoRows);
        }
        let n_dropped_rows = data.outcome.len() - rows.len();
        let n = rows.len();

        let mut column_names: Vec<String> = vec!["intercept".into()];
        let mut columns: Vec<Vec<f64>> = vec![vec![1.0; n]];

        for (name, col) in &data.covariates {
            column_names.push(name.clone());
            columns.push(rows.iter().map(|&i| col[i]).collect());
        }
        for (fe_name, col) in &data.fixed_effects {
            let levels: BTreeSet<&String> = rows.iter().map(|&i| &col[i]).collect();
            for level in levels.iter().skip(1) {
                column_names.push(format!("{fe_name}[{level}]"));
                columns.push(
                    rows.iter().map(|&i| if &col[i] == *level { 1.0 } else { 0.0 }).collect(),
                );
            }
        }

        let (kept, dropped_columns) = drop_collinear(&columns, &column_names);
        if kept.is_empty() {
            return Err(StatsError::EmptyDesign);
        }

        let k = kept.len();
        let mut x = DMatrix::zeros(n, k);
        for (j, &col_idx) in kept.iter().enumerate() {
            for (i, &value) in columns[col_idx].iter().enumerate() {
                x[(i, j)] = value;
            }
        }
        let y = DVector::from_iterator(n, rows.iter().map(|&i| data.outcome[i]));
        let kept_names = kept.iter().map(|&j| column_names[j].clone()).collect();

        // Dense cluster ids in first-appearance order.
        let mut cluster_ids = Vec::with_capacity(n);
        let mut seen: Vec<&str> = Vec::new();
        for &i in &rows {
            let label = data.cluster[i].as_str();
            let id = match seen.iter().position(|s| *s == label) {
                Some(pos) => pos,
                None => {
                    seen.push(label);
                    seen.len() - 1
                }
            };
            cluster_ids.push(id);
        }

        Ok(DesignMatrix {
            x,
            y,
            column_names: kept_names,
            cluster_ids,
            n_clusters: seen.len(),
            n_dropped_rows,
            dropped_columns,
        })
    }
}

/// Modified Gram-Schmidt sweep over columns in order; a column whose
/// residual norm collapses relative to its original norm is dependent on its
/// predecessors and gets dropped.
fn drop_collinear(columns: &[Vec<f64>], names: &[String]) -> (Vec<usize>, Vec<String>) {
    const REL_TOL: f64 = 1e-10;
    let mut kept: Vec<usize> = Vec::new();
    let mut basis: Vec<Vec<f64>> = Vec::new(); // orthonormal
    let mut dropped = Vec::new();

    for (j, col) in columns.iter().enumerate() {
        let orig_norm2: f64 = col.iter().map(|v| v * v).sum();
        if orig_norm2 == 0.0 {
            dropped.push(names[j].clone());
            continue;
        }
        let mut residual = col.clone();
        for q in &basis {
            let proj: f64 = residual.iter().zip(q).map(|(r, qv)| r * qv).sum();
            for (r, qv) in residual.iter_mut().zip(q) {
                *r -= proj * qv;
            }
        }
        let res_norm2: f64 = residual.iter().map(|v| v * v).sum();
        if res_norm2 <= REL_TOL * orig_norm2 {
            dropped.push(names[j].clone());
            continue;
        }
        let norm = res_norm2.sqrt();
        for r in &mut residual {
            *r /= norm;
        }
        basis.push(residual);
        kept.push(j);
    }
    (kept, dropped)
}
