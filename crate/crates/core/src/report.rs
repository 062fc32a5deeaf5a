//! Parameter counts of center matching versus a classification head.
//!
//! A classification head adds `n_dim * n_classes` weights on top of the
//! backbone; center matching adds nothing, whatever the class count.

use std::fmt;
use std::io::Write;

use crate::error::{LscError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Lsc,
    Classification,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Lsc => "LSC",
            Method::Classification => "Classification",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamRow {
    pub method: Method,
    pub n_classes: u64,
    pub backbone_params: u64,
    pub extra_params: u128,
    pub total_params: u128,
    /// Width of the model output: `n_dim` for center matching, `n_classes` otherwise.
    pub output_shape: u64,
}

impl ParamRow {
    /// The head alone outweighs the backbone.
    pub fn crosses_over(&self) -> bool {
        self.extra_params > u128::from(self.backbone_params)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamReport {
    pub n_dim: u64,
    pub backbone_params: u64,
    pub rows: Vec<ParamRow>,
}

/// One LSC and one classification row per class count, in input order.
pub fn report_params(n_dim: u64, backbone_params: u64, n_classes_list: &[u64]) -> Result<ParamReport> {
    if n_dim == 0 || n_classes_list.is_empty() || n_classes_list.contains(&0) {
        return Err(LscError::InvalidInput(
            "n_dim and every class count must be positive, with at least one class count".into(),
        ));
    }
    let mut rows = Vec::with_capacity(2 * n_classes_list.len());
    for &n in n_classes_list {
        rows.push(ParamRow {
            method: Method::Lsc,
            n_classes: n,
            backbone_params,
            extra_params: 0,
            total_params: u128::from(backbone_params),
            output_shape: n_dim,
        });
        let extra = u128::from(n_dim) * u128::from(n);
        rows.push(ParamRow {
            method: Method::Classification,
            n_classes: n,
            backbone_params,
            extra_params: extra,
            total_params: u128::from(backbone_params) + extra,
            output_shape: n,
        });
    }
    Ok(ParamReport {
        n_dim,
        backbone_params,
        rows,
    })
}

impl ParamReport {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        let to_io = |e: csv::Error| LscError::Io(std::io::Error::other(e));
        wtr.write_record([
            "method",
            "n_classes",
            "backbone_params",
            "extra_params",
            "total_params",
            "output_shape",
            "crossover",
        ])
        .map_err(to_io)?;
        for r in &self.rows {
            wtr.write_record([
                r.method.as_str().to_string(),
                r.n_classes.to_string(),
                r.backbone_params.to_string(),
                r.extra_params.to_string(),
                r.total_params.to_string(),
                r.output_shape.to_string(),
                r.crosses_over().to_string(),
            ])
            .map_err(to_io)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

impl fmt::Display for ParamReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<15} {:>12} {:>14} {:>16} {:>16} {:>12}",
            "method", "n_classes", "backbone", "extra", "total", "output"
        )?;
        for r in &self.rows {
            writeln!(
                f,
                "{:<15} {:>12} {:>14} {:>16} {:>16} {:>12}{}",
                r.method.as_str(),
                r.n_classes,
                r.backbone_params,
                r.extra_params,
                r.total_params,
                r.output_shape,
                if r.crosses_over() { "  head > backbone" } else { "" }
            )?;
        }
        Ok(())
    }
}
