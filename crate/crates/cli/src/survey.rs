//! Survey CSV ingestion.

use std::collections::BTreeSet;

use anyhow::{anyhow, bail, Context, Result};
use finex_core::{Histogram, LabelSet};

/// One respondent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SurveyRow {
    pub label: usize,
    pub group: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurveyDataset {
    pub labels: LabelSet,
    pub rows: Vec<SurveyRow>,
}

impl SurveyDataset {
    pub fn n(&self) -> u64 {
        self.rows.len() as u64
    }

    pub fn k(&self) -> usize {
        self.labels.k()
    }

    pub fn histogram(&self) -> Histogram {
        self.histogram_where(|_| true)
    }

    pub fn has_groups(&self) -> bool {
        self.rows.iter().any(|r| r.group.is_some())
    }

    /// Distinct group ids in order of first appearance.
    pub fn group_ids(&self) -> Vec<String> {
        let mut seen = Vec::new();
        for g in self.rows.iter().filter_map(|r| r.group.as_ref()) {
            if !seen.contains(g) {
                seen.push(g.clone());
            }
        }
        seen
    }

    pub fn group_histogram(&self, id: &str) -> Histogram {
        self.histogram_where(|r| r.group.as_deref() == Some(id))
    }

    fn histogram_where(&self, keep: impl Fn(&SurveyRow) -> bool) -> Histogram {
        let mut counts = vec![0u64; self.k()];
        for r in self.rows.iter().filter(|r| keep(r)) {
            counts[r.label] += 1;
        }
        Histogram::new(counts)
    }
}

/// Label names, one per line or comma-separated; blank entries are skipped.
pub fn parse_label_list(text: &str) -> Result<Vec<String>> {
    let names: Vec<String> = text
        .lines()
        .flat_map(|l| l.split(','))
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(String::from)
        .collect();
    if names.is_empty() {
        bail!("label list is empty");
    }
    Ok(names)
}

/// Parses a CSV with header `label` and optional `group`.
///
/// With an explicit label list every answer must be one of its entries;
/// otherwise the labels are the distinct answers in lexicographic order.
pub fn parse_survey(csv_text: &str, labels: Option<Vec<String>>) -> Result<SurveyDataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(csv_text.as_bytes());
    let headers = reader.headers().context("reading CSV header")?.clone();
    if headers.is_empty() || headers.iter().all(str::is_empty) {
        bail!("empty survey");
    }
    let mut label_col = None;
    let mut group_col = None;
    for (i, h) in headers.iter().enumerate() {
        let slot = match h {
            "label" => &mut label_col,
            "group" => &mut group_col,
            other => bail!("line 1: unexpected column '{other}' (expected label[,group])"),
        };
        if slot.replace(i).is_some() {
            bail!("line 1: duplicate column '{h}'");
        }
    }
    let label_col = label_col.ok_or_else(|| anyhow!("line 1: missing 'label' column"))?;

    let mut raw = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| match e.position() {
            Some(p) => anyhow!("line {}: {e}", p.line()),
            None => anyhow!("{e}"),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let label = record.get(label_col).unwrap_or_default();
        if label.is_empty() {
            bail!("line {line}: empty label");
        }
        let group = match group_col {
            Some(c) => {
                let g = record.get(c).unwrap_or_default();
                if g.is_empty() {
                    bail!("line {line}: empty group");
                }
                Some(g.to_string())
            }
            None => None,
        };
        raw.push((line, label.to_string(), group));
    }
    if raw.is_empty() {
        bail!("empty survey");
    }

    let names = match labels {
        Some(names) => names,
        None => raw
            .iter()
            .map(|(_, l, _)| l.clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect(),
    };
    let labels = LabelSet::new(names)?;
    let rows = raw
        .into_iter()
        .map(|(line, label, group)| {
            let label = labels
                .index_of(&label)
                .ok_or_else(|| anyhow!("line {line}: unknown label '{label}'"))?;
            Ok(SurveyRow { label, group })
        })
        .collect::<Result<_>>()?;
    Ok(SurveyDataset { labels, rows })
}
