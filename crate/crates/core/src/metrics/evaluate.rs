use std::collections::HashMap;
use std::fmt::Write as _;

use super::correlation::{kendall, pearson, spearman, SeriesPair, Undefined};
use crate::distortions::{Family, Manifest, MAX_LEVEL};
use crate::error::{Error, Result};

/// Coefficients of one (image, family) series against levels `0..=5`.
#[derive(Clone, Debug, PartialEq)]
pub struct Correlations {
    pub pearson: Result<f64, Undefined>,
    pub kendall: Result<f64, Undefined>,
    pub spearman: Result<f64, Undefined>,
}

impl Correlations {
    pub fn of(pair: &SeriesPair) -> Self {
        Correlations {
            pearson: pearson(pair),
            kendall: kendall(pair),
            spearman: spearman(pair),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum GroupOutcome {
    /// Scores at levels `0..=5`, with the pristine score at level 0.
    Scored {
        scores: Vec<f64>,
        correlations: Correlations,
    },
    /// Excluded from every mean.
    Incomplete { reason: String },
}

#[derive(Clone, Debug, PartialEq)]
pub struct GroupResult {
    pub image_id: String,
    pub family: Family,
    pub outcome: GroupOutcome,
}

/// Mean of the defined values of one coefficient.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CoefficientMean {
    pub mean: Option<f64>,
    pub defined: usize,
    pub undefined: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvaluationReport {
    pub groups: Vec<GroupResult>,
    pub pearson: CoefficientMean,
    pub kendall: CoefficientMean,
    pub spearman: CoefficientMean,
    pub incomplete: usize,
    /// Mean score at each level over complete groups, per family.
    pub level_means: Vec<(Family, Vec<f64>)>,
    /// Mean seconds spent scoring one image, when known.
    pub seconds_per_image: Option<f64>,
}

impl EvaluationReport {
    /// Families whose mean score does not strictly increase with level.
    pub fn non_monotone_families(&self) -> Vec<Family> {
        self.level_means
            .iter()
            .filter(|(_, m)| m.is_empty() || m.windows(2).any(|w| !(w[1] > w[0])))
            .map(|(f, _)| *f)
            .collect()
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["image_id", "family", "pearson", "kendall", "spearman", "status"])?;
        let cell = |r: &Result<f64, Undefined>| r.map(|v| v.to_string()).unwrap_or_default();
        for g in &self.groups {
            let (p, k, s, status) = match &g.outcome {
                GroupOutcome::Scored { correlations: c, .. } => {
                    let notes: Vec<String> = [&c.pearson, &c.kendall, &c.spearman]
                        .iter()
                        .filter_map(|r| r.err().map(|u| u.to_string()))
                        .collect();
                    let status = if notes.is_empty() { "ok".to_string() } else { notes.join("; ") };
                    (cell(&c.pearson), cell(&c.kendall), cell(&c.spearman), status)
                }
                GroupOutcome::Incomplete { reason } => {
                    (String::new(), String::new(), String::new(), format!("incomplete: {reason}"))
                }
            };
            w.write_record([g.image_id.as_str(), g.family.as_str(), &p, &k, &s, &status])?;
        }
        let mean = |m: &CoefficientMean| m.mean.map(|v| v.to_string()).unwrap_or_default();
        let status = format!(
            "groups={} incomplete={} undefined={}/{}/{}",
            self.groups.len(),
            self.incomplete,
            self.pearson.undefined,
            self.kendall.undefined,
            self.spearman.undefined
        );
        w.write_record([
            "MEAN",
            "all",
            &mean(&self.pearson),
            &mean(&self.kendall),
            &mean(&self.spearman),
            &status,
        ])?;
        w.into_inner()
            .map_err(|e| Error::Config(format!("report buffer: {e}")))
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let fmt = |m: &CoefficientMean| match m.mean {
            Some(v) => format!("{v:.4} ({} groups, {} undefined)", m.defined, m.undefined),
            None => format!("undefined ({} undefined)", m.undefined),
        };
        let _ = writeln!(out, "groups evaluated: {}", self.groups.len() - self.incomplete);
        let _ = writeln!(out, "groups incomplete: {}", self.incomplete);
        let _ = writeln!(out, "mean pearson:  {}", fmt(&self.pearson));
        let _ = writeln!(out, "mean kendall:  {}", fmt(&self.kendall));
        let _ = writeln!(out, "mean spearman: {}", fmt(&self.spearman));
        for (family, means) in &self.level_means {
            let values: Vec<String> = means.iter().map(|v| format!("{v:.4}")).collect();
            let _ = writeln!(out, "mean score by level, {family}: [{}]", values.join(", "));
        }
        if let Some(s) = self.seconds_per_image {
            let _ = writeln!(out, "seconds per scored image: {s:.3}");
        }
        for g in &self.groups {
            if let GroupOutcome::Incomplete { reason } = &g.outcome {
                let _ = writeln!(out, "incomplete {} / {}: {reason}", g.image_id, g.family);
            }
        }
        out
    }
}

/// Correlates score with level for every (image, distortion family) group of
/// a scored manifest.
pub fn evaluate(manifest: &Manifest) -> EvaluationReport {
    let mut image_order: Vec<&str> = Vec::new();
    let mut cells: HashMap<(&str, Family, u8), Vec<Option<f64>>> = HashMap::new();
    for row in &manifest.rows {
        if !image_order.contains(&row.image_id.as_str()) {
            image_order.push(&row.image_id);
        }
        cells
            .entry((&row.image_id, row.family, row.level))
            .or_default()
            .push(row.score);
    }

    let mut groups = Vec::new();
    for id in &image_order {
        for family in Family::DISTORTIONS {
            let outcome = match group_scores(&cells, id, family) {
                Ok(scores) => {
                    let levels = (0..=MAX_LEVEL).map(f64::from).collect();
                    match SeriesPair::new(levels, scores.clone()) {
                        Ok(pair) => GroupOutcome::Scored {
                            correlations: Correlations::of(&pair),
                            scores,
                        },
                        Err(e) => GroupOutcome::Incomplete {
                            reason: e.to_string(),
                        },
                    }
                }
                Err(reason) => GroupOutcome::Incomplete { reason },
            };
            groups.push(GroupResult {
                image_id: id.to_string(),
                family,
                outcome,
            });
        }
    }

    let coefficient = |pick: fn(&Correlations) -> &Result<f64, Undefined>| {
        let mut m = CoefficientMean::default();
        let mut sum = 0.0;
        for g in &groups {
            if let GroupOutcome::Scored { correlations, .. } = &g.outcome {
                match pick(correlations) {
                    Ok(v) => {
                        sum += v;
                        m.defined += 1;
                    }
                    Err(_) => m.undefined += 1,
                }
            }
        }
        m.mean = (m.defined > 0).then(|| sum / m.defined as f64);
        m
    };

    let level_means = Family::DISTORTIONS
        .iter()
        .map(|&family| {
            let series: Vec<&Vec<f64>> = groups
                .iter()
                .filter(|g| g.family == family)
                .filter_map(|g| match &g.outcome {
                    GroupOutcome::Scored { scores, .. } => Some(scores),
                    _ => None,
                })
                .collect();
            let means = if series.is_empty() {
                Vec::new()
            } else {
                (0..=MAX_LEVEL as usize)
                    .map(|l| series.iter().map(|s| s[l]).sum::<f64>() / series.len() as f64)
                    .collect()
            };
            (family, means)
        })
        .collect();

    EvaluationReport {
        pearson: coefficient(|c| &c.pearson),
        kendall: coefficient(|c| &c.kendall),
        spearman: coefficient(|c| &c.spearman),
        incomplete: groups
            .iter()
            .filter(|g| matches!(g.outcome, GroupOutcome::Incomplete { .. }))
            .count(),
        groups,
        level_means,
        seconds_per_image: None,
    }
}

fn group_scores(
    cells: &HashMap<(&str, Family, u8), Vec<Option<f64>>>,
    id: &str,
    family: Family,
) -> std::result::Result<Vec<f64>, String> {
    let mut scores = Vec::with_capacity(MAX_LEVEL as usize + 1);
    for level in 0..=MAX_LEVEL {
        let key = if level == 0 {
            (id, Family::Pristine, 0)
        } else {
            (id, family, level)
        };
        let label = if level == 0 { "pristine".to_string() } else { format!("level {level}") };
        match cells.get(&key).map(Vec::as_slice) {
            None | Some([]) => return Err(format!("missing {label}")),
            Some([Some(s)]) => scores.push(*s),
            Some([None]) => return Err(format!("{label} has no score")),
            Some(_) => return Err(format!("duplicate rows for {label}")),
        }
    }
    Ok(scores)
}
