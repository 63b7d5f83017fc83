//! Plot-ready CSV exports and the versioned model document.

use pcasvm_core::backtest::ModelKind;
use pcasvm_core::baselines::MlpModel;
use pcasvm_core::pca::{ContributionReport, PcaModel};
use pcasvm_core::svm::SvmModel;
use pcasvm_core::Matrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory csv write");
    for row in rows {
        w.write_record(&row).expect("in-memory csv write");
    }
    w.into_inner().expect("in-memory csv flush")
}

/// `component,eigenvalue,rate,cumulative`, one row per component.
pub fn scree_csv(report: &ContributionReport) -> Vec<u8> {
    csv_bytes(
        &["component", "eigenvalue", "rate", "cumulative"],
        (0..report.eigenvalues.len()).map(|k| {
            vec![
                (k + 1).to_string(),
                report.eigenvalues[k].to_string(),
                report.rates[k].to_string(),
                report.cumulative[k].to_string(),
            ]
        }),
    )
}

/// `instrument,pc1,pc2`.
pub fn biplot_csv(instruments: &[String], loadings: &Matrix) -> Vec<u8> {
    csv_bytes(
        &["instrument", "pc1", "pc2"],
        instruments.iter().enumerate().map(|(i, id)| {
            let r = loadings.row(i);
            vec![id.clone(), r[0].to_string(), r[1].to_string()]
        }),
    )
}

pub const MODEL_FORMAT: &str = "pcasvm-model";
pub const MODEL_FORMAT_VERSION: u32 = 1;

/// PCA step applied to the constituent block before the classifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Projection {
    pub pca: PcaModel,
    pub components: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum StoredModel {
    Svm(SvmModel),
    Mlp(MlpModel),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub format: String,
    pub version: u32,
    pub kind: ModelKind,
    #[serde(default)]
    pub iteration: Option<usize>,
    #[serde(default)]
    pub projection: Option<Projection>,
    pub model: StoredModel,
}

impl ModelDocument {
    pub fn new(
        kind: ModelKind,
        iteration: Option<usize>,
        projection: Option<Projection>,
        model: StoredModel,
    ) -> Self {
        Self {
            format: MODEL_FORMAT.into(),
            version: MODEL_FORMAT_VERSION,
            kind,
            iteration,
            projection,
            model,
        }
    }

    pub fn to_json(&self) -> Vec<u8> {
        let mut out = serde_json::to_vec_pretty(self).expect("model documents serialize");
        out.push(b'\n');
        out
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        let doc: ModelDocument = serde_json::from_slice(bytes)
            .map_err(|e| Error::Format(format!("model document: {e}")))?;
        if doc.format != MODEL_FORMAT {
            return Err(Error::Format(format!(
                "not a model document (format `{}`)",
                doc.format
            )));
        }
        if doc.version != MODEL_FORMAT_VERSION {
            return Err(Error::Format(format!(
                "unsupported model version {} (expected {MODEL_FORMAT_VERSION})",
                doc.version
            )));
        }
        doc.check_shapes()?;
        Ok(doc)
    }

    // derived Deserialize does not tie matrix dimensions to their buffers
    fn check_shapes(&self) -> Result<()> {
        let ok = |m: &Matrix| m.as_slice().len() == m.rows() * m.cols();
        let fine = match &self.model {
            StoredModel::Svm(s) => {
                ok(&s.support_vectors)
                    && s.dual_coefs.len() == s.support_vectors.rows()
                    && s.kernel.validate().is_ok()
            }
            StoredModel::Mlp(m) => {
                ok(&m.w1) && m.b1.len() == m.w1.rows() && m.w2.len() == m.w1.rows()
            }
        } && self.projection.as_ref().map_or(true, |p| {
            let n = p.pca.n_inputs;
            ok(&p.pca.eigenvectors)
                && p.pca.eigenvectors.rows() == n
                && p.pca.eigenvectors.cols() == n
                && p.pca.mean.len() == n
                && p.components >= 1
                && p.components <= n
        });
        if fine {
            Ok(())
        } else {
            Err(Error::Format(
                "model document has inconsistent dimensions".into(),
            ))
        }
    }
}
