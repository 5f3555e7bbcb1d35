//! CorLoc evaluation.
//!
//! An image counts as correctly localized when the best Jaccard overlap over
//! all (predicted, ground-truth) box pairs is strictly greater than 0.5.
//! CorLoc for a category is the percentage of its images localized
//! correctly; the overall figure is the unweighted mean over categories.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fusion::ResultDocument;
use crate::geometry::{jaccard, BoundingBox};
use crate::rows;

/// Jaccard overlap an image must exceed to count as localized.
pub const LOCALIZATION_THRESHOLD: f64 = 0.5;

/// Cell of a CorLoc table: an optional row group (e.g. camera and
/// illumination) and the object category.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CategoryKey {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub group: Vec<String>,
    pub name: String,
}

impl CategoryKey {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            group: Vec::new(),
            name: name.into(),
        }
    }

    pub fn grouped(group: Vec<String>, name: impl Into<String>) -> Self {
        Self {
            group,
            name: name.into(),
        }
    }

    pub fn label(&self) -> String {
        if self.group.is_empty() {
            self.name.clone()
        } else {
            format!("{}/{}", self.group.join("/"), self.name)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub image_id: String,
    pub key: CategoryKey,
    pub boxes: Vec<BoundingBox>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub image_id: String,
    pub key: CategoryKey,
    pub best_jaccard: f64,
    pub localized: bool,
}

/// Largest Jaccard overlap over all prediction x truth pairs; 0 when either
/// side is empty.
pub fn best_jaccard(predicted: &[BoundingBox], truth: &[BoundingBox]) -> f64 {
    predicted
        .iter()
        .flat_map(|p| truth.iter().map(move |t| jaccard(p, t)))
        .fold(0.0, f64::max)
}

pub fn score_boxes(image_id: &str, predicted: &[BoundingBox], truth: &GroundTruth) -> Result<EvalRecord> {
    if image_id != truth.image_id {
        return Err(Error::IdMismatch {
            result: image_id.to_string(),
            truth: truth.image_id.clone(),
        });
    }
    let best = best_jaccard(predicted, &truth.boxes);
    Ok(EvalRecord {
        image_id: image_id.to_string(),
        key: truth.key.clone(),
        best_jaccard: best,
        localized: best > LOCALIZATION_THRESHOLD,
    })
}

pub fn score_image(result: &ResultDocument, truth: &GroundTruth) -> Result<EvalRecord> {
    score_boxes(&result.image, &result.boxes, truth)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CategoryScore {
    pub key: CategoryKey,
    /// Image and hit counts; absent for reports built from published percentages.
    pub images: Option<usize>,
    pub localized: Option<usize>,
    /// Percentage in [0, 100].
    pub corloc: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    /// Column titles for the parts of [`CategoryKey::group`].
    pub group_labels: Vec<String>,
    pub categories: Vec<CategoryScore>,
    /// Unweighted mean of the category percentages.
    pub average: f64,
}

fn mean(values: impl ExactSizeIterator<Item = f64>) -> f64 {
    let n = values.len();
    if n == 0 {
        return 0.0;
    }
    values.sum::<f64>() / n as f64
}

impl EvalReport {
    /// Report over already-computed percentages, in the given order.
    pub fn from_percentages(group_labels: Vec<String>, cells: Vec<(CategoryKey, f64)>) -> Self {
        let categories: Vec<CategoryScore> = cells
            .into_iter()
            .map(|(key, corloc)| CategoryScore {
                key,
                images: None,
                localized: None,
                corloc,
            })
            .collect();
        let average = mean(categories.iter().map(|c| c.corloc));
        Self {
            group_labels,
            categories,
            average,
        }
    }
}

/// CorLoc per category, with categories in sorted key order.
pub fn corloc(records: &[EvalRecord]) -> Result<EvalReport> {
    let mut keys: Vec<CategoryKey> = records.iter().map(|r| r.key.clone()).collect();
    keys.sort();
    keys.dedup();
    corloc_over(&keys, records, Vec::new())
}

/// CorLoc over a declared list of categories, reported in that order.
///
/// Fails if a declared category has no records or a record belongs to an
/// undeclared category.
pub fn corloc_over(
    categories: &[CategoryKey],
    records: &[EvalRecord],
    group_labels: Vec<String>,
) -> Result<EvalReport> {
    let mut tally: BTreeMap<&CategoryKey, (usize, usize)> = categories.iter().map(|k| (k, (0, 0))).collect();
    for r in records {
        let slot = tally
            .get_mut(&r.key)
            .ok_or_else(|| Error::InvalidConfig(format!("record for undeclared category `{}`", r.key.label())))?;
        slot.0 += 1;
        slot.1 += usize::from(r.localized);
    }
    let mut scores = Vec::with_capacity(categories.len());
    for key in categories {
        let (images, localized) = tally[key];
        if images == 0 {
            return Err(Error::EmptyCategory(key.label()));
        }
        scores.push(CategoryScore {
            key: key.clone(),
            images: Some(images),
            localized: Some(localized),
            corloc: 100.0 * localized as f64 / images as f64,
        });
    }
    let average = mean(scores.iter().map(|c| c.corloc));
    Ok(EvalReport {
        group_labels,
        categories: scores,
        average,
    })
}

/// Formats a non-negative value to one decimal, rounding halves up.
///
/// The value is first snapped to 1e-9 so binary noise in values such as
/// `0.15` cannot push a decimal half downwards.
pub fn format_tenths(value: f64) -> String {
    let nanos = (value * 1e9).round() as i128;
    let tenths = (nanos + 50_000_000).div_euclid(100_000_000);
    let sign = if tenths < 0 { "-" } else { "" };
    format!("{sign}{}.{}", tenths.abs() / 10, tenths.abs() % 10)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Csv,
    Markdown,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "markdown" | "md" => Ok(Self::Markdown),
            _ => Err(Error::InvalidConfig(format!("unknown report format `{s}`"))),
        }
    }
}

fn first_seen<T: PartialEq + Clone>(items: impl Iterator<Item = T>) -> Vec<T> {
    let mut out: Vec<T> = Vec::new();
    for it in items {
        if !out.contains(&it) {
            out.push(it);
        }
    }
    out
}

fn render_markdown(report: &EvalReport, label: &str) -> String {
    let mut s = String::new();
    let names = first_seen(report.categories.iter().map(|c| c.key.name.clone()));
    let groups = first_seen(report.categories.iter().map(|c| c.key.group.clone()));
    let grouped = groups.iter().any(|g| !g.is_empty());

    if !grouped {
        let _ = writeln!(s, "| Method | {} | Average |", names.join(" | "));
        let _ = writeln!(s, "|{}", "---|".repeat(names.len() + 2));
        let cells: Vec<String> = report.categories.iter().map(|c| format_tenths(c.corloc)).collect();
        let _ = writeln!(
            s,
            "| {label} | {} | {} |",
            cells.join(" | "),
            format_tenths(report.average)
        );
        return s;
    }

    // one row per group, one column per category
    let depth = groups.iter().map(Vec::len).max().unwrap_or(0);
    let mut header: Vec<String> = (0..depth)
        .map(|i| report.group_labels.get(i).cloned().unwrap_or_default())
        .collect();
    header.extend(names.iter().cloned());
    let _ = writeln!(s, "| {} |", header.join(" | "));
    let _ = writeln!(s, "|{}", "---|".repeat(header.len()));
    for g in &groups {
        let mut row: Vec<String> = (0..depth).map(|i| g.get(i).cloned().unwrap_or_default()).collect();
        for n in &names {
            let cell = report
                .categories
                .iter()
                .find(|c| &c.key.group == g && &c.key.name == n)
                .map_or_else(|| "-".to_string(), |c| format_tenths(c.corloc));
            row.push(cell);
        }
        let _ = writeln!(s, "| {} |", row.join(" | "));
    }
    let _ = writeln!(s, "\n{label} average: {}", format_tenths(report.average));
    s
}

fn csv_field(v: &str) -> String {
    if v.contains([',', '"', '\n']) {
        format!("\"{}\"", v.replace('"', "\"\""))
    } else {
        v.to_string()
    }
}

fn render_csv(report: &EvalReport) -> String {
    let depth = report.categories.iter().map(|c| c.key.group.len()).max().unwrap_or(0);
    let mut s = String::new();
    let mut header: Vec<String> = (0..depth)
        .map(|i| {
            report
                .group_labels
                .get(i)
                .map_or_else(|| format!("group{}", i + 1), |l| l.to_lowercase())
        })
        .collect();
    header.extend(["category", "images", "localized", "corloc"].map(String::from));
    let _ = writeln!(s, "{}", header.join(","));
    let opt = |v: Option<usize>| v.map_or_else(String::new, |n| n.to_string());
    for c in &report.categories {
        let mut row: Vec<String> = (0..depth)
            .map(|i| csv_field(c.key.group.get(i).map_or("", String::as_str)))
            .collect();
        row.push(csv_field(&c.key.name));
        row.push(opt(c.images));
        row.push(opt(c.localized));
        row.push(format_tenths(c.corloc));
        let _ = writeln!(s, "{}", row.join(","));
    }
    let mut avg: Vec<String> = vec![String::new(); depth];
    avg.extend([
        "Average".to_string(),
        String::new(),
        String::new(),
        format_tenths(report.average),
    ]);
    let _ = writeln!(s, "{}", avg.join(","));
    s
}

/// Deterministic text rendering of a report. Markdown mirrors the published
/// table layouts (categories as columns, one row per group); CSV has one row
/// per cell followed by an `Average` row.
pub fn render_report(report: &EvalReport, format: ReportFormat, label: &str) -> String {
    match format {
        ReportFormat::Markdown => render_markdown(report, label),
        ReportFormat::Csv => render_csv(report),
    }
}

/// Reads `image_id,category,x1,y1,x2,y2` rows, one box per row. A header row
/// naming those columns and `#` comment lines are skipped. Rows for the same
/// image are combined; they must agree on the category. Output is sorted by
/// image id.
pub fn load_ground_truth(path: &Path) -> Result<Vec<GroundTruth>> {
    let text = rows::read_text(path)?;
    let mut by_id: BTreeMap<String, GroundTruth> = BTreeMap::new();
    for (n, row) in rows::rows(&text).enumerate() {
        let err = |msg: String| rows::parse_error(path, row.line, msg);
        let fields = &row.fields;
        if n == 0 && fields.first() == Some(&"image_id") {
            continue;
        }
        if fields.len() != 6 {
            return Err(err(format!("expected 6 fields, found {}", fields.len())));
        }
        let (id, category) = (fields[0], fields[1]);
        if id.is_empty() || category.is_empty() {
            return Err(err("image_id and category must be non-empty".into()));
        }
        let mut c = [0u32; 4];
        for (slot, field) in c.iter_mut().zip(&fields[2..]) {
            *slot = field
                .parse()
                .map_err(|_| err(format!("invalid coordinate `{field}`")))?;
        }
        let bbox = BoundingBox::new(c[0], c[1], c[2], c[3]).map_err(|e| err(e.to_string()))?;
        let entry = by_id.entry(id.to_string()).or_insert_with(|| GroundTruth {
            image_id: id.to_string(),
            key: CategoryKey::new(category),
            boxes: Vec::new(),
        });
        if entry.key.name != category {
            return Err(err(format!(
                "image `{id}` listed under `{}` and `{category}`",
                entry.key.name
            )));
        }
        entry.boxes.push(bbox);
    }
    Ok(by_id.into_values().collect())
}
