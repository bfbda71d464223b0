use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::Path;

use chrono::Datelike;
use serde::{Deserialize, Serialize};

use super::artifacts::*;
use super::config::PipelineConfig;
use super::stages::{artifact, parse_opt, read_corpus, read_tsv, TermsFile};
use crate::citemetrics::CitationGraph;
use crate::corpus::PaperRecord;
use crate::error::{Error, Result};
use crate::novelty::{read_metrics, read_term_stats, write_metrics, MetricsRow, TermKind};
use crate::stats::{
    average_marginal_effect, bucket_indicators, classification_metrics, describe, fit_glm, mann_whitney,
    match_case_control, percentile_buckets, reuse_citation_analysis, sample_terms, std_dev, top_cited_indicator,
    variance_decomposition, DesignMatrix, Family, GlmOptions, MatchKey, MatchResult, ReuseCitationConfig,
    TermReuseSample, BUCKET_LABELS,
};

/// Columns that hold non-negative counts and take the log1p transform.
pub const COUNT_COLUMNS: [&str; 15] = [
    "new_word",
    "new_phrase",
    "new_word_comb",
    "new_phrase_comb",
    "new_word_reuse",
    "new_phrase_reuse",
    "new_word_comb_reuse",
    "new_phrase_comb_reuse",
    "word_count",
    "phrase_count",
    "n_refs",
    "n_ref_journals",
    "citations",
    "wang",
    "novelty_language",
];

const TEXT_METRICS: [&str; 8] = [
    "new_word",
    "new_phrase",
    "new_word_comb",
    "new_phrase_comb",
    "new_word_reuse",
    "new_phrase_reuse",
    "new_word_comb_reuse",
    "new_phrase_comb_reuse",
];

const OPTIONAL_METRICS: [&str; 4] = ["semantic_distance", "uzzi", "wang", "cd"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MissingPolicy {
    /// Absent values become 0 with a `<column>_missing` indicator.
    #[default]
    ZeroFill,
    /// Rows with any absent value are dropped.
    Drop,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sample {
    #[default]
    All,
    /// Cases and their matched controls.
    Matched,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub name: String,
    pub outcome: String,
    pub covariates: Vec<String>,
    #[serde(default)]
    pub fixed_effects: Vec<String>,
    pub family: Family,
    #[serde(default)]
    pub sample: Sample,
    #[serde(default = "yes")]
    pub transform: bool,
    #[serde(default = "yes")]
    pub ame: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PlotSpec {
    /// Outcome share per percentile bucket of each metric, within
    /// (subfield, year) groups.
    Buckets {
        name: String,
        metrics: Vec<String>,
        outcome: String,
        #[serde(default)]
        invert: Vec<String>,
    },
    /// Mean of a column by field and year.
    FieldYear { name: String, column: String },
}

impl PlotSpec {
    pub fn name(&self) -> &str {
        match self {
            PlotSpec::Buckets { name, .. } | PlotSpec::FieldYear { name, .. } => name,
        }
    }
}

/// What the stats and plotdata stages compute.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisSpec {
    pub descriptives: Vec<String>,
    pub variance: Vec<String>,
    pub mann_whitney: Vec<String>,
    pub novelty_language: Vec<String>,
    pub missing: MissingPolicy,
    pub reuse_citation: bool,
    pub models: Vec<ModelSpec>,
    pub plots: Vec<PlotSpec>,
}

fn strings(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| s.to_string()).collect()
}

impl Default for AnalysisSpec {
    fn default() -> Self {
        let all_metrics: Vec<String> = TEXT_METRICS.iter().chain(&OPTIONAL_METRICS).map(|s| s.to_string()).collect();
        AnalysisSpec {
            descriptives: all_metrics.clone(),
            variance: strings(&TEXT_METRICS),
            mann_whitney: all_metrics.clone(),
            novelty_language: strings(&TEXT_METRICS),
            missing: MissingPolicy::ZeroFill,
            reuse_citation: true,
            models: vec![
                ModelSpec {
                    name: "prize_logit".into(),
                    outcome: "prize".into(),
                    covariates: strings(&["new_word", "new_phrase", "new_word_reuse", "new_phrase_reuse"]),
                    fixed_effects: Vec::new(),
                    family: Family::Logit,
                    sample: Sample::Matched,
                    transform: true,
                    ame: true,
                },
                ModelSpec {
                    name: "citations_poisson".into(),
                    outcome: "citations".into(),
                    covariates: strings(&["new_word", "new_phrase", "new_word_comb", "new_phrase_comb", "n_refs"]),
                    fixed_effects: strings(&["field"]),
                    family: Family::Poisson,
                    sample: Sample::All,
                    transform: true,
                    ame: false,
                },
                ModelSpec {
                    name: "top_cited_lpm".into(),
                    outcome: "top_cited_95".into(),
                    covariates: strings(&["new_phrase", "new_phrase_reuse", "semantic_distance"]),
                    fixed_effects: Vec::new(),
                    family: Family::Identity,
                    sample: Sample::All,
                    transform: true,
                    ame: true,
                },
            ],
            plots: vec![
                PlotSpec::Buckets {
                    name: "buckets_top_cited".into(),
                    metrics: all_metrics,
                    outcome: "top_cited_99".into(),
                    invert: strings(&["uzzi"]),
                },
                PlotSpec::FieldYear {
                    name: "field_year_new_phrase".into(),
                    column: "new_phrase".into(),
                },
            ],
        }
    }
}

impl AnalysisSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn for_config(cfg: &PipelineConfig) -> Result<Self> {
        match &cfg.analysis {
            Some(p) => Self::from_toml(&std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?),
            None => Ok(Self::default()),
        }
    }
}

/// Per-paper values by column name, in corpus order, plus group labels.
pub struct Table {
    pub ids: Vec<String>,
    pub columns: BTreeMap<String, Vec<Option<f64>>>,
    pub labels: BTreeMap<&'static str, Vec<String>>,
}

impl Table {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn column(&self, name: &str) -> Result<&[Option<f64>]> {
        self.columns
            .get(name)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::UnknownColumn(name.to_string()))
    }

    pub fn label(&self, name: &str) -> Result<&[String]> {
        self.labels
            .get(name)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::UnknownColumn(name.to_string()))
    }

    /// Builds the table from a full metrics file, the corpus, citation
    /// counts, novelty-language flags and optional case labels.
    pub fn build(
        rows: &[MetricsRow],
        records: &[PaperRecord],
        citations: &[f64],
        novelty_language: &[f64],
        cases: Option<&HashSet<String>>,
    ) -> Result<Self> {
        if rows.len() != records.len() || rows.iter().zip(records).any(|(m, r)| m.paper_id != r.paper_id) {
            return Err(Error::StreamMismatch("metrics rows do not follow the corpus".into()));
        }
        let mut columns: BTreeMap<String, Vec<Option<f64>>> = BTreeMap::new();
        for name in crate::novelty::METRICS_COLUMNS.iter().skip(1) {
            let col = rows.iter().map(|r| r.value(name)).collect::<Result<_>>()?;
            columns.insert(name.to_string(), col);
        }
        columns.insert("citations".into(), citations.iter().map(|&c| Some(c)).collect());
        columns.insert("novelty_language".into(), novelty_language.iter().map(|&c| Some(c)).collect());
        columns.insert("year".into(), records.iter().map(|r| Some(r.year() as f64)).collect());
        if let Some(cases) = cases {
            columns.insert(
                "prize".into(),
                records.iter().map(|r| Some(cases.contains(&r.paper_id) as u8 as f64)).collect(),
            );
        }
        let label = |f: &dyn Fn(&PaperRecord) -> String| records.iter().map(f).collect::<Vec<_>>();
        let mut labels = BTreeMap::new();
        labels.insert("venue", label(&|r| r.venue_id.clone()));
        labels.insert("year", label(&|r| r.year().to_string()));
        labels.insert("subfield", label(&|r| r.subfield_id.map(|v| v.to_string()).unwrap_or_default()));
        labels.insert("field", label(&|r| r.field_id.map(|v| v.to_string()).unwrap_or_default()));
        let groups: Vec<(String, i32)> = records
            .iter()
            .map(|r| (r.subfield_id.map(|v| v.to_string()).unwrap_or_default(), r.pub_date.year()))
            .collect();
        for pct in [95u32, 99] {
            let flags = top_cited_indicator(citations, &groups, pct as f64);
            columns.insert(
                format!("top_cited_{pct}"),
                flags.into_iter().map(|f| Some(f as u8 as f64)).collect(),
            );
        }
        Ok(Table {
            ids: records.iter().map(|r| r.paper_id.clone()).collect(),
            columns,
            labels,
        })
    }
}

fn transformed(name: &str, v: f64, transform: bool) -> f64 {
    if transform && COUNT_COLUMNS.contains(&name) {
        v.max(0.0).ln_1p()
    } else {
        v
    }
}

/// Merges the per-stage outputs into the complete metrics table.
pub fn merge_metrics(out: &Path) -> Result<Vec<MetricsRow>> {
    let mut rows = read_metrics(&artifact(out, METRICS))?;
    let (_, sem) = read_tsv(&artifact(out, SEMDIST))?;
    let (_, cit) = read_tsv(&artifact(out, CITATIONS))?;
    if sem.len() != rows.len() || cit.len() != rows.len() {
        return Err(Error::StreamMismatch(format!(
            "{} metrics rows, {} semantic rows, {} citation rows",
            rows.len(),
            sem.len(),
            cit.len()
        )));
    }
    for (i, row) in rows.iter_mut().enumerate() {
        let line = i + 2;
        if sem[i][0] != row.paper_id || cit[i][0] != row.paper_id {
            return Err(Error::StreamMismatch(format!("paper order differs at {}", row.paper_id)));
        }
        row.semantic_distance = parse_opt(&sem[i][1], line)?;
        let count = |s: &str| {
            s.parse::<u64>().map_err(|_| Error::Malformed {
                line,
                message: format!("bad count {s:?}"),
            })
        };
        row.n_refs = count(&cit[i][1])?;
        row.n_ref_journals = count(&cit[i][2])?;
        row.uzzi = parse_opt(&cit[i][4], line)?;
        row.wang = parse_opt(&cit[i][5], line)?;
        row.cd = parse_opt(&cit[i][6], line)?;
    }
    Ok(rows)
}

fn column_f64(out: &Path, file: &str, col: usize) -> Result<Vec<f64>> {
    let (_, rows) = read_tsv(&artifact(out, file))?;
    rows.iter()
        .enumerate()
        .map(|(i, r)| Ok(parse_opt(&r[col], i + 2)?.unwrap_or(0.0)))
        .collect()
}

fn read_cases(cfg: &PipelineConfig) -> Result<Option<HashSet<String>>> {
    let Some(p) = &cfg.cases else { return Ok(None) };
    let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
    Ok(Some(
        text.lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(String::from)
            .collect(),
    ))
}

/// Loads everything the analyses need.
pub fn load_table(cfg: &PipelineConfig, out: &Path) -> Result<(Table, Vec<PaperRecord>, Option<HashSet<String>>)> {
    let records = read_corpus(out)?;
    let rows = read_metrics(&artifact(out, METRICS_FULL))?;
    let citations = column_f64(out, CITATIONS, 3)?;
    let flags = column_f64(out, NOVELTY_LANGUAGE, 1)?;
    let cases = read_cases(cfg)?;
    let table = Table::build(&rows, &records, &citations, &flags, cases.as_ref())?;
    Ok((table, records, cases))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelReport {
    pub name: String,
    pub family: Family,
    pub outcome: String,
    pub n: usize,
    pub coefficients: BTreeMap<String, f64>,
    pub se_classical: BTreeMap<String, f64>,
    pub se_robust: BTreeMap<String, f64>,
    pub dropped: Vec<String>,
    pub loglik: f64,
    pub pseudo_r2: Option<f64>,
    pub converged: bool,
    pub iterations: usize,
    pub separation: bool,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub auc: Option<f64>,
    /// Percentage-point change per one standard deviation.
    pub ame: BTreeMap<String, f64>,
}

/// Fits one model on the chosen rows.
pub fn run_model(spec: &ModelSpec, table: &Table, rows: &[usize], missing: MissingPolicy) -> Result<ModelReport> {
    let outcome = table.column(&spec.outcome)?;
    let covs: Vec<&[Option<f64>]> = spec.covariates.iter().map(|c| table.column(c)).collect::<Result<_>>()?;
    let fe: Vec<&[String]> = spec.fixed_effects.iter().map(|f| table.label(f)).collect::<Result<_>>()?;
    let keep: Vec<usize> = rows
        .iter()
        .copied()
        .filter(|&i| outcome[i].is_some())
        .filter(|&i| missing == MissingPolicy::ZeroFill || covs.iter().all(|c| c[i].is_some()))
        .collect();
    let y: Vec<f64> = keep.iter().map(|&i| outcome[i].unwrap()).collect();
    let mut columns = Vec::new();
    for (name, col) in spec.covariates.iter().zip(&covs) {
        let vals = keep
            .iter()
            .map(|&i| col[i].map_or(0.0, |v| transformed(name, v, spec.transform)))
            .collect();
        columns.push((name.clone(), vals));
        if keep.iter().any(|&i| col[i].is_none()) {
            columns.push((format!("{name}_missing"), keep.iter().map(|&i| col[i].is_none() as u8 as f64).collect()));
        }
    }
    let mut design = DesignMatrix::from_columns(y.clone(), columns, true)?;
    for (name, labels) in spec.fixed_effects.iter().zip(&fe) {
        let l: Vec<String> = keep.iter().map(|&i| labels[i].clone()).collect();
        design.add_fixed_effects(name, &l)?;
    }
    let fit = fit_glm(&design, spec.family, &GlmOptions::default())?;
    let named = |v: &[f64]| fit.names.iter().cloned().zip(v.iter().copied()).collect::<BTreeMap<_, _>>();
    let (precision, recall, auc) = if spec.family == Family::Logit {
        let pred = fit.predict(&design);
        let labels: Vec<bool> = y.iter().map(|&v| v == 1.0).collect();
        let m = classification_metrics(&pred, &labels, 0.5);
        (m.precision, m.recall, m.auc)
    } else {
        (None, None, None)
    };
    let mut ame = BTreeMap::new();
    if spec.ame {
        for name in &spec.covariates {
            let c = design.column(name).expect("covariate column");
            let values: Vec<f64> = design.x.column(c).iter().copied().collect();
            let sd = std_dev(&values);
            ame.insert(name.clone(), 100.0 * average_marginal_effect(&fit, &design, name, sd)?);
        }
    }
    Ok(ModelReport {
        name: spec.name.clone(),
        family: spec.family,
        outcome: spec.outcome.clone(),
        n: fit.n,
        coefficients: named(&fit.coefficients),
        se_classical: named(&fit.se_classical),
        se_robust: named(&fit.se_robust),
        dropped: fit.dropped.clone(),
        loglik: fit.loglik,
        pseudo_r2: fit.pseudo_r2,
        converged: fit.converged,
        iterations: fit.iterations,
        separation: fit.separation,
        precision,
        recall,
        auc,
        ame,
    })
}

fn present(col: &[Option<f64>], rows: &[usize]) -> Vec<f64> {
    rows.iter().filter_map(|&i| col[i]).collect()
}

fn write_group_comparison(
    path: &Path,
    table: &Table,
    metrics: &[String],
    a: &[usize],
    b: &[usize],
    labels: [&str; 2],
) -> Result<()> {
    let header = [
        "metric".to_string(),
        format!("n_{}", labels[0]),
        format!("n_{}", labels[1]),
        format!("mean_{}", labels[0]),
        format!("mean_{}", labels[1]),
        format!("u_{}", labels[0]),
        "z".to_string(),
        "p".to_string(),
    ];
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut w = TsvWriter::create(path, &header)?;
    for m in metrics {
        let col = table.column(m)?;
        let x: Vec<f64> = present(col, a).into_iter().map(|v| transformed(m, v, true)).collect();
        let y: Vec<f64> = present(col, b).into_iter().map(|v| transformed(m, v, true)).collect();
        let mean = |v: &[f64]| (!v.is_empty()).then(|| crate::stats::mean(v));
        let mw = mann_whitney(&x, &y);
        w.row(&[
            m.clone(),
            x.len().to_string(),
            y.len().to_string(),
            cell(mean(&x)),
            cell(mean(&y)),
            cell(mw.map(|r| r.u_x)),
            cell(mw.and_then(|r| r.z)),
            cell(mw.and_then(|r| r.p_two_sided)),
        ])?;
    }
    w.finish()
}

/// Merged metrics plus every configured analysis.
pub fn stats_stage(cfg: &PipelineConfig, out: &Path) -> Result<()> {
    let spec = AnalysisSpec::for_config(cfg)?;
    let merged = merge_metrics(out)?;
    write_metrics(&artifact(out, METRICS_FULL), &merged)?;
    let (table, records, cases) = load_table(cfg, out)?;
    let dir = out.join(ANALYSIS_DIR);
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let all: Vec<usize> = (0..table.len()).collect();

    let mut w = TsvWriter::create(
        &dir.join("descriptives.tsv"),
        &["metric", "n", "mean", "std", "min", "p25", "p50", "p75", "p95", "p99", "max", "skew"],
    )?;
    for m in &spec.descriptives {
        let v = present(table.column(m)?, &all);
        match describe(&v) {
            Ok(d) => w.row(&[
                m.clone(),
                d.n.to_string(),
                d.mean.to_string(),
                d.std.to_string(),
                d.min.to_string(),
                d.p25.to_string(),
                d.p50.to_string(),
                d.p75.to_string(),
                d.p95.to_string(),
                d.p99.to_string(),
                d.max.to_string(),
                cell(d.skew),
            ])?,
            Err(_) => w.row(&[m.as_str(), "0", "", "", "", "", "", "", "", "", "", ""])?,
        }
    }
    w.finish()?;

    let mut w = TsvWriter::create(
        &dir.join("variance.tsv"),
        &["metric", "grouping", "between", "by_year", "residual"],
    )?;
    for m in &spec.variance {
        let col = table.column(m)?;
        let rows: Vec<usize> = all.iter().copied().filter(|&i| col[i].is_some()).collect();
        let vals: Vec<f64> = rows.iter().map(|&i| col[i].unwrap()).collect();
        let years: Vec<&String> = rows.iter().map(|&i| &table.label("year").unwrap()[i]).collect();
        for grouping in ["subfield", "venue"] {
            let g: Vec<&String> = rows.iter().map(|&i| &table.label(grouping).unwrap()[i]).collect();
            let s = variance_decomposition(&vals, &g, &years)?;
            w.row(&[
                m.clone(),
                grouping.to_string(),
                cell(s.map(|s| s.between_g1)),
                cell(s.map(|s| s.g1_by_g2)),
                cell(s.map(|s| s.residual)),
            ])?;
        }
    }
    w.finish()?;

    let flags = table.column("novelty_language")?;
    let flagged: Vec<usize> = all.iter().copied().filter(|&i| flags[i] == Some(1.0)).collect();
    let plain: Vec<usize> = all.iter().copied().filter(|&i| flags[i] != Some(1.0)).collect();
    write_group_comparison(
        &dir.join("novelty_language.tsv"),
        &table,
        &spec.novelty_language,
        &flagged,
        &plain,
        ["flagged", "unflagged"],
    )?;

    let matched = match &cases {
        Some(cases) => Some(case_control(cfg, &records, cases, &dir)?),
        None => None,
    };
    if let Some(m) = &matched {
        let pos: HashMap<&str, usize> = table.ids.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
        let case_rows: Vec<usize> = m.pairs.iter().map(|p| pos[p.case_id.as_str()]).collect();
        let control_rows: Vec<usize> = m.pairs.iter().map(|p| pos[p.control_id.as_str()]).collect();
        write_group_comparison(
            &dir.join("mann_whitney.tsv"),
            &table,
            &spec.mann_whitney,
            &case_rows,
            &control_rows,
            ["case", "control"],
        )?;
    }

    for model in &spec.models {
        let rows: Vec<usize> = match (model.sample, &matched) {
            (Sample::All, _) => all.clone(),
            (Sample::Matched, Some(m)) => {
                let pos: HashMap<&str, usize> =
                    table.ids.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
                m.pairs
                    .iter()
                    .flat_map(|p| [pos[p.case_id.as_str()], pos[p.control_id.as_str()]])
                    .collect()
            }
            (Sample::Matched, None) => continue,
        };
        let report = run_model(model, &table, &rows, spec.missing)?;
        write_json(&dir.join(format!("model_{}.json", model.name)), &report)?;
    }

    if spec.reuse_citation {
        reuse_stage(cfg, out, &records, &dir)?;
    }
    Ok(())
}

fn case_control(
    cfg: &PipelineConfig,
    records: &[PaperRecord],
    cases: &HashSet<String>,
    dir: &Path,
) -> Result<MatchResult> {
    let case_keys: Vec<MatchKey> = records
        .iter()
        .filter(|r| cases.contains(&r.paper_id))
        .map(MatchKey::of)
        .collect();
    let pool: Vec<MatchKey> = records
        .iter()
        .filter(|r| !cases.contains(&r.paper_id))
        .map(MatchKey::of)
        .collect();
    let result = match_case_control(&case_keys, &pool, cfg.matching_seed);
    #[derive(Serialize)]
    struct Out<'a> {
        cases_listed: usize,
        cases_in_corpus: usize,
        #[serde(flatten)]
        result: &'a MatchResult,
    }
    write_json(
        &dir.join("matching.json"),
        &Out {
            cases_listed: cases.len(),
            cases_in_corpus: case_keys.len(),
            result: &result,
        },
    )?;
    Ok(result)
}

fn reuse_stage(cfg: &PipelineConfig, out: &Path, records: &[PaperRecord], dir: &Path) -> Result<()> {
    let stats = read_term_stats(&artifact(out, TERM_STATS))?;
    let sampled = sample_terms(&stats, cfg.reuse.sample_terms, cfg.reuse.min_reuse, cfg.reuse.seed);
    let mut wanted: HashMap<(TermKind, &str), usize> = HashMap::new();
    for (i, t) in sampled.iter().enumerate() {
        wanted.insert((t.kind, t.term.as_str()), i);
    }
    let mut reusers: Vec<Vec<String>> = vec![Vec::new(); sampled.len()];
    let kinds: HashSet<TermKind> = sampled.iter().map(|t| t.kind).collect();
    let file = TermsFile::new(artifact(out, TERMS));
    for line in file.lines()? {
        let line = line?;
        let mut hit = |kind: TermKind, key: &str| {
            if let Some(&i) = wanted.get(&(kind, key)) {
                if sampled[i].pioneer_id != line.id {
                    reusers[i].push(line.id.clone());
                }
            }
        };
        let t = &line.terms;
        if kinds.contains(&TermKind::Word) {
            t.words().for_each(|w| hit(TermKind::Word, w));
        }
        if kinds.contains(&TermKind::Phrase) {
            t.phrases.iter().for_each(|p| hit(TermKind::Phrase, p));
        }
        if kinds.contains(&TermKind::WordPair) {
            t.word_pair_strs().for_each(|(a, b)| hit(TermKind::WordPair, &format!("{a}|{b}")));
        }
        if kinds.contains(&TermKind::PhrasePair) {
            t.phrase_pair_strs().for_each(|(a, b)| hit(TermKind::PhrasePair, &format!("{a}|{b}")));
        }
    }
    let samples: Vec<TermReuseSample> = sampled
        .iter()
        .zip(reusers)
        .map(|(t, r)| TermReuseSample {
            kind: t.kind,
            term: t.term.clone(),
            pioneer_id: t.pioneer_id.clone(),
            reuser_ids: r,
        })
        .collect();
    let graph = CitationGraph::build(records);
    let keys: Vec<MatchKey> = records.iter().map(MatchKey::of).collect();
    let rc = ReuseCitationConfig {
        seed: cfg.reuse.seed,
        max_gap: cfg.reuse.max_gap,
    };
    let result = reuse_citation_analysis(&samples, &graph, &keys, &rc)?;
    write_json(&dir.join("reuse_citation.json"), &result)
}

pub const BUCKET_PLOT_COLUMNS: [&str; 6] = ["metric", "bucket", "n", "predicted_pct", "lower_pct", "upper_pct"];

/// Writes one tidy TSV per plot spec.
pub fn emit_plot_data(table: &Table, plots: &[PlotSpec], dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for plot in plots {
        let path = dir.join(format!("{}.tsv", plot.name()));
        match plot {
            PlotSpec::Buckets {
                metrics,
                outcome,
                invert,
                ..
            } => {
                let y = table.column(outcome)?;
                let cols: Vec<&[Option<f64>]> = metrics.iter().map(|m| table.column(m)).collect::<Result<_>>()?;
                let mut w = TsvWriter::create(&path, &BUCKET_PLOT_COLUMNS)?;
                for (m, col) in metrics.iter().zip(cols) {
                    bucket_rows(&mut w, table, m, col, y, invert.contains(m))?;
                }
                w.finish()?;
            }
            PlotSpec::FieldYear { column, .. } => {
                let col = table.column(column)?;
                let fields = table.label("field")?;
                let years = table.label("year")?;
                let mut cells: BTreeMap<(&str, &str), (f64, usize)> = BTreeMap::new();
                for i in 0..table.len() {
                    if let Some(v) = col[i] {
                        let e = cells.entry((fields[i].as_str(), years[i].as_str())).or_insert((0.0, 0));
                        e.0 += v;
                        e.1 += 1;
                    }
                }
                let mut w = TsvWriter::create(&path, &["field", "year", "n", "mean"])?;
                for ((f, y), (s, n)) in cells {
                    w.row(&[f.to_string(), y.to_string(), n.to_string(), (s / n as f64).to_string()])?;
                }
                w.finish()?;
            }
        }
    }
    Ok(())
}

fn bucket_rows(
    w: &mut TsvWriter,
    table: &Table,
    metric: &str,
    col: &[Option<f64>],
    outcome: &[Option<f64>],
    invert: bool,
) -> Result<()> {
    let rows: Vec<usize> = (0..table.len()).filter(|&i| col[i].is_some() && outcome[i].is_some()).collect();
    if rows.is_empty() {
        return Ok(());
    }
    let values: Vec<f64> = rows.iter().map(|&i| col[i].unwrap()).collect();
    let subfields = table.label("subfield")?;
    let years = table.label("year")?;
    let groups: Vec<(&str, &str)> = rows.iter().map(|&i| (subfields[i].as_str(), years[i].as_str())).collect();
    let buckets = percentile_buckets(&values, &groups, invert);
    let indicators = bucket_indicators(&buckets);
    let y: Vec<f64> = rows.iter().map(|&i| outcome[i].unwrap()).collect();
    let columns = BUCKET_LABELS
        .iter()
        .zip(&indicators)
        .map(|(l, ind)| (l.to_string(), ind.iter().map(|&b| b as f64).collect()))
        .collect();
    let design = DesignMatrix::from_columns(y, columns, false)?;
    let fit = fit_glm(&design, Family::Identity, &GlmOptions::default())?;
    for (b, label) in BUCKET_LABELS.iter().enumerate() {
        let n = indicators[b].iter().filter(|&&x| x == 1).count();
        let est = fit.names.iter().position(|x| x == label).map(|k| {
            let (p, se) = (fit.coefficients[k], fit.se_robust[k]);
            (100.0 * p, 100.0 * (p - 1.96 * se), 100.0 * (p + 1.96 * se))
        });
        w.row(&[
            metric.to_string(),
            label.to_string(),
            n.to_string(),
            cell(est.map(|e| e.0)),
            cell(est.map(|e| e.1)),
            cell(est.map(|e| e.2)),
        ])?;
    }
    Ok(())
}

pub fn plotdata_stage(cfg: &PipelineConfig, out: &Path) -> Result<()> {
    let spec = AnalysisSpec::for_config(cfg)?;
    let (table, _, _) = load_table(cfg, out)?;
    emit_plot_data(&table, &spec.plots, &out.join(PLOTS_DIR))
}
