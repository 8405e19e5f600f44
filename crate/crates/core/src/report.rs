//! Measured output sizes next to their entropy bounds.
//!
//! Reports render as line-oriented `key value` text or as a flat JSON
//! object with the same keys.

use serde::Serialize;
use serde_json::{Map, Value};

use crate::entropy::OrderEntropy;
use crate::footprint::FootprintReport;
use crate::mtf::mtf_bound_bits;

/// `(1/ε) (H + 2 log2(H + 1) + 3) m + n^ℓ k (⌈log2 n⌉ + 2) + ℓ ⌈log2 n⌉`
/// with `ε = min(1, log2(k + 1) / log2 n)`.
pub fn footprint_bound_bits(report: &FootprintReport, h: f64) -> f64 {
    let n = f64::from(report.alphabet_size);
    let k = f64::from(report.capacity);
    let width = f64::from(report.raw_width);
    let epsilon = ((k + 1.0).log2() / n.log2()).min(1.0);
    let per_symbol = (h + 2.0 * (h + 1.0).log2() + 3.0) / epsilon;
    let contexts = n.powi(report.order as i32);
    per_symbol * report.symbols as f64 + contexts * k * (width + 2.0) + report.order as f64 * width
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CodecName {
    Footprint,
    Mtf,
}

impl CodecName {
    pub fn as_str(&self) -> &'static str {
        match self {
            CodecName::Footprint => "footprint",
            CodecName::Mtf => "mtf",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub codec: CodecName,
    /// `H_0..H_ℓ` of the coded symbol string.
    pub entropies: Vec<OrderEntropy>,
    pub header_bytes: u64,
    pub payload_bytes: u64,
    pub padding_bits: u32,
    pub payload_bits: u64,
    pub bits_per_symbol: f64,
    pub epsilon_eff: f64,
    pub bound_bits: f64,
    pub pass: bool,
    pub footprint: FootprintReport,
}

impl BoundReport {
    /// Fills in the derived fields from a finished run.
    pub fn new(
        codec: CodecName,
        entropies: Vec<OrderEntropy>,
        footprint: FootprintReport,
        header_bytes: u64,
        padding_bits: u32,
    ) -> Self {
        let payload_bits = footprint.payload_bits;
        let payload_bytes = payload_bits.div_ceil(8);
        let m = footprint.symbols;
        let entropy_at = |order: usize| {
            entropies.iter().find(|e| e.order == order).map_or(0.0, |e| e.bits)
        };
        let (bound_bits, epsilon_eff) = match codec {
            CodecName::Footprint => {
                let eps = (f64::from(footprint.capacity) + 1.0).log2()
                    / f64::from(footprint.alphabet_size).log2();
                (footprint_bound_bits(&footprint, entropy_at(footprint.order)), eps)
            }
            CodecName::Mtf => (mtf_bound_bits(entropy_at(0), m, footprint.alphabet_size), 1.0),
        };
        Self {
            codec,
            bits_per_symbol: if m == 0 { 0.0 } else { payload_bits as f64 / m as f64 },
            pass: payload_bits as f64 <= bound_bits,
            entropies,
            header_bytes,
            payload_bytes,
            padding_bits,
            payload_bits,
            epsilon_eff,
            bound_bits,
            footprint,
        }
    }

    /// Flat key/value view shared by the text and JSON renderings.
    pub fn fields(&self) -> Vec<(String, Value)> {
        let f = &self.footprint;
        let mut out: Vec<(String, Value)> = vec![
            ("codec".into(), self.codec.as_str().into()),
            ("n".into(), f.alphabet_size.into()),
            ("order".into(), f.order.into()),
            ("capacity".into(), f.capacity.into()),
            ("raw_width".into(), f.raw_width.into()),
            ("symbols".into(), f.symbols.into()),
        ];
        for e in &self.entropies {
            out.push((format!("h{}", e.order), e.bits.into()));
        }
        out.extend([
            ("header_bytes".into(), self.header_bytes.into()),
            ("payload_bytes".into(), self.payload_bytes.into()),
            ("padding_bits".into(), self.padding_bits.into()),
            ("payload_bits".into(), self.payload_bits.into()),
            ("bits_per_symbol".into(), self.bits_per_symbol.into()),
            ("epsilon_eff".into(), self.epsilon_eff.into()),
            ("bound_bits".into(), self.bound_bits.into()),
            ("bound_constants".into(), "pinned".into()),
            ("pass".into(), self.pass.into()),
            ("model_bits_actual".into(), f.model_bits_actual.into()),
            ("model_bits_budget".into(), f.model_bits_budget.into()),
            ("index_overhead_bits".into(), f.index_overhead_bits.into()),
            ("allocated_lists".into(), f.allocated_lists.into()),
            ("raw_prefix_bits".into(), f.raw_prefix_bits.into()),
            ("hit_bits".into(), f.hit_bits.into()),
            ("miss_bits".into(), f.miss_bits.into()),
            ("hits".into(), f.hits.into()),
            ("misses".into(), f.misses.into()),
        ]);
        out
    }

    pub fn to_text(&self) -> String {
        let mut text = String::new();
        for (key, value) in self.fields() {
            let value = match value {
                Value::String(s) => s,
                other => other.to_string(),
            };
            text.push_str(&key);
            text.push(' ');
            text.push_str(&value);
            text.push('\n');
        }
        text
    }

    pub fn to_json(&self) -> String {
        let map: Map<String, Value> = self.fields().into_iter().collect();
        serde_json::to_string_pretty(&Value::Object(map)).expect("report is valid JSON")
    }
}

/// Parses `key value` lines back into pairs. Blank lines are skipped.
pub fn parse_text(text: &str) -> Vec<(String, String)> {
    text.lines()
        .filter_map(|line| {
            let (k, v) = line.split_once(' ')?;
            Some((k.to_string(), v.trim().to_string()))
        })
        .collect()
}
