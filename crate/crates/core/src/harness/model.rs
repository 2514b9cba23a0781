use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::compressor::CompressionReport;
use crate::error::{Error, Result};
use crate::identity_approx::Activation;
use crate::network::{Layer, Network};
use crate::structmat::{MatrixKind, StructuredMatrix};

pub const FORMAT_NAME: &str = "structnet-model";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActivationRecord {
    pub name: String,
    pub smooth_point: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slope: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerRecord {
    pub kind: String,
    pub rows: usize,
    pub cols: usize,
    pub params: Vec<f64>,
    pub bias: Vec<f64>,
    pub activation: Option<ActivationRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRecord {
    pub mode: String,
    pub eps: f64,
    pub achieved_error: f64,
    pub tuning_error: f64,
    pub factorization_error: f64,
    pub factor_counts: Vec<usize>,
    pub h_values: Vec<f64>,
    pub reconstruction_errors: Vec<f64>,
    pub validation_points: usize,
}

impl From<&CompressionReport> for ReportRecord {
    fn from(r: &CompressionReport) -> Self {
        ReportRecord {
            mode: r.mode.name().into(),
            eps: r.eps,
            achieved_error: r.achieved_error,
            tuning_error: r.tuning_error,
            factorization_error: r.factorization_error,
            factor_counts: r.factor_counts.clone(),
            h_values: r.h_values.clone(),
            reconstruction_errors: r.reconstruction_errors.clone(),
            validation_points: r.validation_points,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format: String,
    pub version: u32,
    pub input_dim: usize,
    pub output_dim: usize,
    pub layers: Vec<LayerRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<ReportRecord>,
}

impl ModelFile {
    pub fn from_network(net: &Network, report: Option<&CompressionReport>) -> Self {
        ModelFile {
            format: FORMAT_NAME.into(),
            version: FORMAT_VERSION,
            input_dim: net.input_dim(),
            output_dim: net.output_dim(),
            layers: net
                .layers()
                .iter()
                .map(|l| LayerRecord {
                    kind: l.weight().kind().name().into(),
                    rows: l.output_dim(),
                    cols: l.input_dim(),
                    params: l.weight().params().to_vec(),
                    bias: l.bias().to_vec(),
                    activation: l.activation().map(|a| ActivationRecord {
                        name: a.name().into(),
                        smooth_point: a.smooth_point(),
                        slope: match a {
                            Activation::LeakyRelu { slope } => Some(slope),
                            _ => None,
                        },
                    }),
                })
                .collect(),
            report: report.map(ReportRecord::from),
        }
    }

    pub fn to_network(&self) -> Result<Network> {
        if self.format != FORMAT_NAME {
            return Err(Error::Format(format!("not a model file (format {:?})", self.format)));
        }
        if self.version != FORMAT_VERSION {
            return Err(Error::Version { found: self.version, expected: FORMAT_VERSION });
        }
        let layers = self
            .layers
            .iter()
            .enumerate()
            .map(|(i, rec)| {
                let kind = MatrixKind::parse(&rec.kind)
                    .ok_or_else(|| Error::Format(format!("layer {i}: unknown matrix kind {:?}", rec.kind)))?;
                let weight = StructuredMatrix::from_params(kind, rec.rows, rec.cols, rec.params.clone())
                    .map_err(|e| Error::Format(format!("layer {i}: {e}")))?;
                let activation = rec.activation.as_ref().map(|a| parse_activation(a, i)).transpose()?;
                Layer::new(weight, rec.bias.clone(), activation).map_err(|e| Error::Format(format!("layer {i}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        let net = Network::new(layers).map_err(|e| Error::Format(e.to_string()))?;
        if net.input_dim() != self.input_dim || net.output_dim() != self.output_dim {
            return Err(Error::Format("declared dimensions do not match the layers".into()));
        }
        Ok(net)
    }
}

fn parse_activation(rec: &ActivationRecord, layer: usize) -> Result<Activation> {
    let mut act = Activation::parse(&rec.name)
        .ok_or_else(|| Error::Format(format!("layer {layer}: unknown activation {:?}", rec.name)))?;
    if let (Activation::LeakyRelu { slope }, Some(s)) = (&mut act, rec.slope) {
        *slope = s;
    }
    if act.smooth_point() != rec.smooth_point {
        return Err(Error::Format(format!(
            "layer {layer}: {} smooth point {} does not match {}",
            rec.name,
            rec.smooth_point,
            act.smooth_point()
        )));
    }
    Ok(act)
}

pub fn save_model(net: &Network, report: Option<&CompressionReport>, path: &Path) -> Result<()> {
    let json = serde_json::to_string_pretty(&ModelFile::from_network(net, report))
        .map_err(|e| Error::Format(e.to_string()))?;
    fs::write(path, json + "\n")?;
    Ok(())
}

pub fn load_model_file(path: &Path) -> Result<ModelFile> {
    let text = fs::read_to_string(path)?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    // check the version before the full schema so newer files get a clear error
    if let Some(v) = value.get("version").and_then(serde_json::Value::as_u64) {
        if v != u64::from(FORMAT_VERSION) {
            return Err(Error::Version { found: v as u32, expected: FORMAT_VERSION });
        }
    }
    serde_json::from_value(value).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

pub fn load_model(path: &Path) -> Result<Network> {
    load_model_file(path)?.to_network()
}
