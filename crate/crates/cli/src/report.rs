//! JSON values and fixed-width text barcharts.

use finex_core::approx::{BoundCheck, Extended};
use finex_core::prob::format_fraction;
use finex_core::{Exact, LabelDistribution, Prob};
use serde_json::{json, Value};

const BAR_WIDTH: usize = 40;

/// Serialization of probabilities: `"p/q"` strings for rationals, numbers
/// for floats.
pub trait JsonProb: Prob {
    fn json(&self) -> Value;

    fn text(&self) -> String;
}

impl JsonProb for Exact {
    fn json(&self) -> Value {
        Value::String(format_fraction(self))
    }

    fn text(&self) -> String {
        format!("{:.4} ({})", Prob::to_f64(self), format_fraction(self))
    }
}

impl JsonProb for f64 {
    fn json(&self) -> Value {
        serde_json::Number::from_f64(*self).map_or(Value::Null, Value::Number)
    }

    fn text(&self) -> String {
        format!("{self:.4}")
    }
}

pub fn vector<P: JsonProb>(values: &[P]) -> Value {
    Value::Array(values.iter().map(JsonProb::json).collect())
}

pub fn dist<P: JsonProb>(d: &LabelDistribution<P>) -> Value {
    vector(d.probs())
}

pub fn extended<P: JsonProb>(x: &Extended<P>) -> Value {
    match x {
        Extended::Finite(p) => p.json(),
        Extended::Infinite => json!("inf"),
    }
}

pub fn extended_text<P: JsonProb>(x: &Extended<P>) -> String {
    match x {
        Extended::Finite(p) => p.text(),
        Extended::Infinite => "inf".into(),
    }
}

pub fn certificate(name: &str, check: BoundCheck) -> Value {
    json!({ "name": name, "status": check })
}

/// Horizontal barchart, bars scaled so the largest value spans the full width.
pub fn barchart(title: &str, axis: &str, rows: &[(String, f64, String)]) -> String {
    let label_width = rows.iter().map(|(l, _, _)| l.chars().count()).max().unwrap_or(0);
    let max = rows.iter().map(|(_, v, _)| *v).fold(0.0, f64::max);
    let mut out = format!("{title}\n");
    for (label, value, shown) in rows {
        let len = if max > 0.0 {
            (value / max * BAR_WIDTH as f64).round() as usize
        } else {
            0
        };
        out.push_str(&format!(
            "{label:>label_width$} | {}{} {shown}\n",
            "#".repeat(len),
            " ".repeat(BAR_WIDTH - len)
        ));
    }
    let pad = " ".repeat(label_width);
    out.push_str(&format!("{pad} +{}\n", "-".repeat(BAR_WIDTH + 1)));
    out.push_str(&format!("{pad}   {axis}\n"));
    out
}

pub fn survey_chart(n: u64, labels: &[String], counts: &[u64]) -> String {
    let rows: Vec<_> = labels
        .iter()
        .zip(counts)
        .map(|(l, &c)| (l.clone(), c as f64, c.to_string()))
        .collect();
    barchart(&format!("Survey of size {n}"), "Number", &rows)
}

pub fn prediction_chart<P: JsonProb>(n: u64, labels: &[String], values: &[P]) -> String {
    let rows: Vec<_> = labels
        .iter()
        .zip(values)
        .map(|(l, v)| (l.clone(), v.to_f64(), v.text()))
        .collect();
    barchart(
        &format!("Prediction based on a survey of size {n}"),
        "Proportion of the electorate",
        &rows,
    )
}
