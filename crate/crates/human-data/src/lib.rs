//! Human guessing-game data: cohort ingestion, validation and summaries.
//!
//! The canonical external input is a two-column CSV (`cohort,guess`) with
//! student and expert rows, as collected in the two-player one-shot
//! guessing-game experiments of the behavioural literature. That dataset is
//! not redistributable, so the crate also ships a deterministic synthetic
//! fixture generator whose output matches the published summary statistics
//! of the two cohorts; the generated fixture is committed under `data/`.

pub mod fixture;

use game_core::GameSpec;
use serde::{Deserialize, Serialize};
use stat_lab::{mean, sample_sd, skewness, zero_rate};
use std::fmt;
use std::io::BufRead;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("line {line}: expected header 'cohort,guess', got {got:?}")]
    BadHeader { line: usize, got: String },
    #[error("line {line}: malformed row {row:?}: {detail}")]
    MalformedRow {
        line: usize,
        row: String,
        detail: String,
    },
    #[error("line {line}: unknown cohort label {label:?}")]
    UnknownCohort { line: usize, label: String },
    #[error("line {line}: guess {guess} outside the action range [{low}, {high}]")]
    OutOfRange {
        line: usize,
        guess: i64,
        low: i64,
        high: i64,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CohortLabel {
    Student,
    Expert,
    Pooled,
    Agent(String),
}

impl fmt::Display for CohortLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CohortLabel::Student => write!(f, "student"),
            CohortLabel::Expert => write!(f, "expert"),
            CohortLabel::Pooled => write!(f, "pooled"),
            CohortLabel::Agent(id) => write!(f, "agent:{id}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleSource {
    ExternalCsv,
    SyntheticFixture,
    Simulation,
}

/// A labelled collection of integer guesses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortSample {
    pub label: CohortLabel,
    pub guesses: Vec<i64>,
    pub source: SampleSource,
}

impl CohortSample {
    pub fn new(label: CohortLabel, guesses: Vec<i64>, source: SampleSource) -> Self {
        Self {
            label,
            guesses,
            source,
        }
    }

    /// The multiset union of two cohorts.
    pub fn pooled(a: &CohortSample, b: &CohortSample) -> CohortSample {
        let mut guesses = a.guesses.clone();
        guesses.extend_from_slice(&b.guesses);
        CohortSample {
            label: CohortLabel::Pooled,
            guesses,
            source: a.source,
        }
    }

    pub fn as_f64(&self) -> Vec<f64> {
        self.guesses.iter().map(|g| *g as f64).collect()
    }

    pub fn summarize(&self) -> CohortSummary {
        summarize(self)
    }
}

/// Descriptive summary of a cohort. `sd` and `skewness` are `None` when
/// the sample is too small or degenerate for them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortSummary {
    pub n: usize,
    pub mean: f64,
    pub sd: Option<f64>,
    pub skewness: Option<f64>,
    pub zero_rate: f64,
    pub min: Option<i64>,
    pub max: Option<i64>,
}

pub fn summarize(sample: &CohortSample) -> CohortSummary {
    let xs = sample.as_f64();
    CohortSummary {
        n: sample.guesses.len(),
        mean: mean(&xs).unwrap_or(f64::NAN),
        sd: sample_sd(&xs).ok(),
        skewness: skewness(&xs).ok(),
        zero_rate: zero_rate(&sample.guesses).unwrap_or(f64::NAN),
        min: sample.guesses.iter().min().copied(),
        max: sample.guesses.iter().max().copied(),
    }
}

/// Load and validate the `cohort,guess` CSV. Any malformed row, unknown
/// cohort label or out-of-range guess fails the load with its line number.
pub fn load_human_csv(
    path: impl AsRef<Path>,
    spec: &GameSpec,
) -> Result<(CohortSample, CohortSample), DataError> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| DataError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let reader = std::io::BufReader::new(file);
    parse_human_csv(reader, spec, SampleSource::ExternalCsv)
}

pub(crate) fn parse_human_csv<R: BufRead>(
    reader: R,
    spec: &GameSpec,
    source: SampleSource,
) -> Result<(CohortSample, CohortSample), DataError> {
    let mut students = Vec::new();
    let mut experts = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|source| DataError::Io {
            path: "<stream>".to_string(),
            source,
        })?;
        let trimmed = line.trim();
        if idx == 0 {
            if trimmed != "cohort,guess" {
                return Err(DataError::BadHeader {
                    line: line_no,
                    got: trimmed.to_string(),
                });
            }
            continue;
        }
        if trimmed.is_empty() {
            continue;
        }
        let (cohort, guess) = trimmed.split_once(',').ok_or_else(|| DataError::MalformedRow {
            line: line_no,
            row: trimmed.to_string(),
            detail: "missing comma".to_string(),
        })?;
        let guess: i64 = guess.trim().parse().map_err(|_| DataError::MalformedRow {
            line: line_no,
            row: trimmed.to_string(),
            detail: "guess is not an integer".to_string(),
        })?;
        if !spec.contains(guess) {
            return Err(DataError::OutOfRange {
                line: line_no,
                guess,
                low: spec.low(),
                high: spec.high(),
            });
        }
        match cohort.trim() {
            "student" => students.push(guess),
            "expert" => experts.push(guess),
            other => {
                return Err(DataError::UnknownCohort {
                    line: line_no,
                    label: other.to_string(),
                })
            }
        }
    }
    Ok((
        CohortSample::new(CohortLabel::Student, students, source),
        CohortSample::new(CohortLabel::Expert, experts, source),
    ))
}

/// Render two cohorts back to the CSV schema (students first, then
/// experts).
pub fn to_csv(student: &CohortSample, expert: &CohortSample) -> String {
    let mut out = String::from("cohort,guess\n");
    for g in &student.guesses {
        out.push_str(&format!("student,{g}\n"));
    }
    for g in &expert.guesses {
        out.push_str(&format!("expert,{g}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn spec() -> GameSpec {
        GameSpec::two_thirds_standard()
    }

    fn parse(text: &str) -> Result<(CohortSample, CohortSample), DataError> {
        parse_human_csv(Cursor::new(text), &spec(), SampleSource::ExternalCsv)
    }

    #[test]
    fn minimal_file_parses() {
        let (student, expert) = parse("cohort,guess\nstudent,50\nexpert,0\n").unwrap();
        assert_eq!(student.guesses, vec![50]);
        assert_eq!(expert.guesses, vec![0]);
    }

    #[test]
    fn out_of_range_row_reports_its_line() {
        match parse("cohort,guess\nstudent,50\nstudent,150\n") {
            Err(DataError::OutOfRange { line, guess, .. }) => {
                assert_eq!(line, 3);
                assert_eq!(guess, 150);
            }
            other => panic!("expected range error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_cohorts_and_bad_rows_report_their_lines() {
        assert!(matches!(
            parse("cohort,guess\nprofessor,3\n"),
            Err(DataError::UnknownCohort { line: 2, .. })
        ));
        assert!(matches!(
            parse("cohort,guess\nstudent,many\n"),
            Err(DataError::MalformedRow { line: 2, .. })
        ));
        assert!(matches!(
            parse("oops\n"),
            Err(DataError::BadHeader { line: 1, .. })
        ));
    }

    #[test]
    fn loader_round_trips_the_multiset() {
        let text = "cohort,guess\nstudent,5\nstudent,5\nstudent,93\nexpert,0\nexpert,22\n";
        let (student, expert) = parse(text).unwrap();
        let rendered = to_csv(&student, &expert);
        assert_eq!(rendered, text);
    }

    #[test]
    fn summaries_cover_the_edge_cases() {
        let zeros = CohortSample::new(
            CohortLabel::Student,
            vec![0, 0, 0, 0],
            SampleSource::Simulation,
        );
        let s = summarize(&zeros);
        assert_eq!(s.mean, 0.0);
        assert_eq!(s.zero_rate, 1.0);
        assert_eq!(s.skewness, None, "degenerate skewness is undefined");

        let symmetric = CohortSample::new(
            CohortLabel::Student,
            vec![10, 20, 30],
            SampleSource::Simulation,
        );
        assert_eq!(summarize(&symmetric).skewness, Some(0.0));

        let tiny = CohortSample::new(CohortLabel::Expert, vec![7], SampleSource::Simulation);
        let s = summarize(&tiny);
        assert_eq!(s.n, 1);
        assert_eq!(s.sd, None);
    }

    #[test]
    fn pooled_is_the_multiset_union() {
        let a = CohortSample::new(CohortLabel::Student, vec![1, 2], SampleSource::Simulation);
        let b = CohortSample::new(CohortLabel::Expert, vec![3], SampleSource::Simulation);
        let pooled = CohortSample::pooled(&a, &b);
        assert_eq!(pooled.guesses, vec![1, 2, 3]);
        assert_eq!(summarize(&pooled).n, 3);
    }
}
