//! Project directories: an items file plus append-only logs of issued
//! assignments and submitted responses.
//!
//! Each project lives in `<root>/<project_id>/`:
//!
//! - `project.json`: settings, written once at creation
//! - `items.jsonl`: the items to annotate, written once
//! - `assignments.jsonl`: one line per issued batch
//! - `responses.jsonl`: one line per submission, holding all its responses
//!
//! A submission is a single line, so it lands completely or not at all. A
//! torn final line (crash mid-write) is cut off on load.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use funcprobe_core::annotate::{simulate_responses, AnnotationItem, AnnotationResponse, AnnotatorProfile, ResponseValue};
use funcprobe_core::corpus::{DatasetRecord, Payload};
use funcprobe_core::hash::item_seed;
use funcprobe_core::task::{Label, Task};

use crate::{ServiceError, SCHEMA_VERSION};

const PROJECT_FILE: &str = "project.json";
const ITEMS_FILE: &str = "items.jsonl";
const ASSIGNMENTS_FILE: &str = "assignments.jsonl";
const RESPONSES_FILE: &str = "responses.jsonl";

fn now_ms() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis() as u64)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProjectSettings {
    pub schema_version: u32,
    pub project_id: String,
    pub task: Task,
    pub batch_size: usize,
    pub required_responses: usize,
    pub distinct_annotators: bool,
    /// Seeds the order in which items are handed out.
    pub seed: u64,
}

impl ProjectSettings {
    pub fn new(project_id: impl Into<String>, task: Task) -> Self {
        ProjectSettings {
            schema_version: SCHEMA_VERSION,
            project_id: project_id.into(),
            task,
            batch_size: task.format().batch_size(),
            required_responses: 3,
            distinct_annotators: true,
            seed: 0,
        }
    }

    fn validate(&self) -> Result<(), ServiceError> {
        let id_ok = !self.project_id.is_empty()
            && self.project_id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_');
        if !id_ok {
            return Err(ServiceError::BadRequest(format!(
                "project id `{}` must be non-empty ASCII letters, digits, '-' or '_'",
                self.project_id
            )));
        }
        let expected = self.task.format().batch_size();
        if self.batch_size != expected {
            return Err(ServiceError::BadRequest(format!(
                "{} items are shown {expected} at a time, not {}",
                self.task, self.batch_size
            )));
        }
        if self.required_responses == 0 {
            return Err(ServiceError::BadRequest("required_responses must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    pub assignment_id: String,
    pub annotator_id: String,
    pub item_ids: Vec<String>,
    pub issued_at: u64,
    #[serde(default)]
    pub completed: bool,
}

/// One item's judgment inside a submission.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubmittedValue {
    pub item_id: String,
    pub value: ResponseValue,
}

/// A line of the response log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct SubmissionLine {
    schema_version: u32,
    /// Absent for imported (simulated) responses.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    assignment_id: Option<String>,
    submitted_at: u64,
    responses: Vec<AnnotationResponse>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelProgress {
    pub total: usize,
    pub complete: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Progress {
    pub schema_version: u32,
    pub project_id: String,
    pub total: usize,
    /// Items holding the required number of responses.
    pub complete: usize,
    /// Items with some responses, or handed out in an open assignment.
    pub in_flight: usize,
    pub untouched: usize,
    pub responses: usize,
    /// Completion per expected label (acceptability projects).
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub per_label: BTreeMap<Label, LabelProgress>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProjectSummary {
    pub project_id: String,
    pub task: Task,
    pub items: usize,
    pub batch_size: usize,
}

/// An append-only newline-delimited file.
#[derive(Debug)]
struct Log {
    path: PathBuf,
    file: File,
}

impl Log {
    /// Open for appending, returning the records already present. A final
    /// line that does not parse is treated as a torn write and cut off.
    fn open<T: DeserializeOwned>(path: PathBuf) -> Result<(Self, Vec<T>), ServiceError> {
        let raw = match fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Vec::new(),
            Err(e) => return Err(ServiceError::io(&path, e)),
        };
        let mut records = Vec::new();
        let mut good = 0;
        let mut start = 0;
        let mut line_no = 0;
        while start < raw.len() {
            line_no += 1;
            let end = raw[start..].iter().position(|&b| b == b'\n').map(|i| start + i);
            let line = &raw[start..end.unwrap_or(raw.len())];
            let parsed = if line.iter().all(u8::is_ascii_whitespace) {
                None
            } else {
                match serde_json::from_slice::<T>(line) {
                    Ok(r) => Some(Ok(r)),
                    Err(e) => Some(Err(e)),
                }
            };
            match (parsed, end) {
                (Some(Ok(r)), Some(_)) => records.push(r),
                (None, Some(_)) => {}
                // Complete record without newline, or unparsable tail: either way the
                // writer died before finishing the line.
                (Some(Ok(_)) | Some(Err(_)) | None, None) => break,
                (Some(Err(e)), Some(_)) => {
                    let rest_blank = raw[end.unwrap() + 1..].iter().all(u8::is_ascii_whitespace);
                    if !rest_blank {
                        return Err(ServiceError::Corrupt { path, line: line_no, message: e.to_string() });
                    }
                    break;
                }
            }
            start = end.expect("loop breaks on a missing newline") + 1;
            good = start;
        }
        let file = OpenOptions::new().create(true).append(true).open(&path).map_err(|e| ServiceError::io(&path, e))?;
        if good < raw.len() {
            log::warn!("{}: dropping {} bytes of incomplete trailing record", path.display(), raw.len() - good);
            file.set_len(good as u64).map_err(|e| ServiceError::io(&path, e))?;
        }
        Ok((Log { path, file }, records))
    }

    fn append<T: Serialize>(&mut self, record: &T) -> Result<(), ServiceError> {
        let mut line = serde_json::to_vec(record).expect("log records serialize");
        line.push(b'\n');
        self.file.write_all(&line).map_err(|e| ServiceError::io(&self.path, e))?;
        self.file.sync_data().map_err(|e| ServiceError::io(&self.path, e))
    }
}

/// A project's settings, items and replayed logs.
#[derive(Debug)]
pub struct Project {
    pub settings: ProjectSettings,
    items: Vec<AnnotationItem>,
    index: HashMap<String, usize>,
    assignments: BTreeMap<String, Assignment>,
    /// Annotators who answered each item, in response order.
    answered: Vec<Vec<String>>,
    /// Items handed to each annotator in any assignment.
    held: HashMap<String, HashSet<usize>>,
    responses: Vec<AnnotationResponse>,
    assignment_log: Log,
    response_log: Log,
}

fn write_new(path: &Path, body: &[u8]) -> Result<(), ServiceError> {
    let mut f = OpenOptions::new().write(true).create_new(true).open(path).map_err(|e| ServiceError::io(path, e))?;
    f.write_all(body).and_then(|_| f.sync_all()).map_err(|e| ServiceError::io(path, e))
}

impl Project {
    /// Create the project directory and its items file.
    pub fn create(root: &Path, settings: ProjectSettings, items: Vec<AnnotationItem>) -> Result<Self, ServiceError> {
        settings.validate()?;
        if items.is_empty() {
            return Err(ServiceError::BadRequest("a project needs at least one item".into()));
        }
        let mut seen = HashSet::new();
        for it in &items {
            if it.task != settings.task {
                return Err(ServiceError::format(&it.item_id, format!("item belongs to {}, not {}", it.task, settings.task)));
            }
            if !seen.insert(it.item_id.as_str()) {
                return Err(ServiceError::format(&it.item_id, "duplicate item id"));
            }
        }
        let dir = root.join(&settings.project_id);
        if dir.exists() {
            return Err(ServiceError::ProjectExists(settings.project_id.clone()));
        }
        fs::create_dir_all(&dir).map_err(|e| ServiceError::io(&dir, e))?;
        let mut body = Vec::new();
        for it in &items {
            serde_json::to_writer(&mut body, it).expect("items serialize");
            body.push(b'\n');
        }
        write_new(&dir.join(ITEMS_FILE), &body)?;
        // Settings last: a directory without them is an unfinished creation.
        let meta = serde_json::to_vec_pretty(&settings).expect("settings serialize");
        write_new(&dir.join(PROJECT_FILE), &meta)?;
        Self::open(&dir)
    }

    /// Load a project directory, replaying both logs.
    pub fn open(dir: &Path) -> Result<Self, ServiceError> {
        let meta_path = dir.join(PROJECT_FILE);
        let raw = fs::read(&meta_path).map_err(|e| ServiceError::io(&meta_path, e))?;
        let settings: ProjectSettings = serde_json::from_slice(&raw)
            .map_err(|e| ServiceError::Corrupt { path: meta_path.clone(), line: 1, message: e.to_string() })?;
        if settings.schema_version != SCHEMA_VERSION {
            return Err(ServiceError::SchemaVersion(settings.schema_version));
        }
        let items_path = dir.join(ITEMS_FILE);
        let raw = fs::read_to_string(&items_path).map_err(|e| ServiceError::io(&items_path, e))?;
        let items = raw
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| {
                serde_json::from_str::<AnnotationItem>(l).map_err(|e| ServiceError::Corrupt {
                    path: items_path.clone(),
                    line: i + 1,
                    message: e.to_string(),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let index = items.iter().enumerate().map(|(i, it)| (it.item_id.clone(), i)).collect();
        let (assignment_log, issued) = Log::open::<Assignment>(dir.join(ASSIGNMENTS_FILE))?;
        let (response_log, submissions) = Log::open::<SubmissionLine>(dir.join(RESPONSES_FILE))?;
        let mut p = Project {
            answered: vec![Vec::new(); items.len()],
            settings,
            items,
            index,
            assignments: BTreeMap::new(),
            held: HashMap::new(),
            responses: Vec::new(),
            assignment_log,
            response_log,
        };
        for a in issued {
            p.record_assignment(a);
        }
        for s in submissions {
            p.record_submission(s);
        }
        Ok(p)
    }

    fn record_assignment(&mut self, a: Assignment) {
        let held = self.held.entry(a.annotator_id.clone()).or_default();
        held.extend(a.item_ids.iter().filter_map(|id| self.index.get(id).copied()));
        self.assignments.insert(a.assignment_id.clone(), a);
    }

    fn record_submission(&mut self, s: SubmissionLine) {
        if let Some(a) = s.assignment_id.as_ref().and_then(|id| self.assignments.get_mut(id)) {
            a.completed = true;
        }
        for r in s.responses {
            if let Some(&i) = self.index.get(&r.item_id) {
                self.answered[i].push(r.annotator_id.clone());
            }
            self.responses.push(r);
        }
    }

    pub fn id(&self) -> &str {
        &self.settings.project_id
    }

    pub fn items(&self) -> &[AnnotationItem] {
        &self.items
    }

    pub fn responses(&self) -> &[AnnotationResponse] {
        &self.responses
    }

    pub fn assignment(&self, id: &str) -> Option<&Assignment> {
        self.assignments.get(id)
    }

    pub fn summary(&self) -> ProjectSummary {
        ProjectSummary {
            project_id: self.id().to_string(),
            task: self.settings.task,
            items: self.items.len(),
            batch_size: self.settings.batch_size,
        }
    }

    fn open_holds(&self) -> Vec<usize> {
        let mut counts = vec![0; self.items.len()];
        for a in self.assignments.values().filter(|a| !a.completed) {
            for id in &a.item_ids {
                if let Some(&i) = self.index.get(id) {
                    counts[i] += 1;
                }
            }
        }
        counts
    }

    /// Hand out up to one batch of items that still need responses and that
    /// this annotator has not seen. `None` once nothing is left for them.
    pub fn next_batch(&mut self, annotator_id: &str) -> Result<Option<Assignment>, ServiceError> {
        if annotator_id.trim().is_empty() {
            return Err(ServiceError::BadRequest("annotator id must not be empty".into()));
        }
        let holds = self.open_holds();
        let mine = self.held.get(annotator_id);
        let required = self.settings.required_responses;
        let mut eligible: Vec<usize> = (0..self.items.len())
            .filter(|&i| self.answered[i].len() < required)
            .filter(|&i| {
                !self.settings.distinct_annotators
                    || (mine.is_none_or(|m| !m.contains(&i)) && !self.answered[i].iter().any(|a| a == annotator_id))
            })
            .collect();
        if eligible.is_empty() {
            return Ok(None);
        }
        // Least-covered items first; a seeded hash breaks ties so batches mix
        // sources instead of following file order.
        eligible.sort_by_key(|&i| {
            (self.answered[i].len() + holds[i], item_seed(self.settings.seed, &self.items[i].item_id))
        });
        eligible.truncate(self.settings.batch_size);
        let seq = self.assignments.len() + 1;
        let assignment = Assignment {
            assignment_id: format!("{}-{seq:06}", self.id()),
            annotator_id: annotator_id.to_string(),
            item_ids: eligible.iter().map(|&i| self.items[i].item_id.clone()).collect(),
            issued_at: now_ms(),
            completed: false,
        };
        self.assignment_log.append(&assignment)?;
        self.record_assignment(assignment.clone());
        Ok(Some(assignment))
    }

    /// Record one judgment per item of an open assignment.
    pub fn submit(&mut self, assignment_id: &str, values: &[SubmittedValue]) -> Result<usize, ServiceError> {
        let a = self.assignments.get(assignment_id).ok_or_else(|| ServiceError::UnknownAssignment(assignment_id.into()))?;
        if a.completed {
            return Err(ServiceError::AlreadySubmitted(assignment_id.into()));
        }
        let format = self.settings.task.format();
        let expected: HashSet<&str> = a.item_ids.iter().map(String::as_str).collect();
        let mut seen = HashSet::new();
        for v in values {
            if !expected.contains(v.item_id.as_str()) {
                return Err(ServiceError::format(&v.item_id, "item is not part of this assignment"));
            }
            if !seen.insert(v.item_id.as_str()) {
                return Err(ServiceError::format(&v.item_id, "item answered twice"));
            }
            if let ResponseValue::Likert(n) = v.value {
                if !(1..=5).contains(&n) {
                    return Err(ServiceError::format(&v.item_id, format!("Likert score {n} is outside 1..=5")));
                }
            }
            if !v.value.fits(format) {
                return Err(ServiceError::format(&v.item_id, format!("`{}` is not a valid {format} response", v.value)));
            }
        }
        if let Some(missing) = a.item_ids.iter().find(|id| !seen.contains(id.as_str())) {
            return Err(ServiceError::format(missing, "no response for this item"));
        }
        let base = self.responses.len() as u64;
        let annotator = a.annotator_id.clone();
        // Responses follow the assignment's item order.
        let by_item: HashMap<&str, ResponseValue> = values.iter().map(|v| (v.item_id.as_str(), v.value)).collect();
        let responses: Vec<AnnotationResponse> = a
            .item_ids
            .iter()
            .enumerate()
            .map(|(k, id)| AnnotationResponse {
                annotator_id: annotator.clone(),
                item_id: id.clone(),
                value: by_item[id.as_str()],
                timestamp: base + k as u64,
            })
            .collect();
        let line = SubmissionLine {
            schema_version: SCHEMA_VERSION,
            assignment_id: Some(assignment_id.to_string()),
            submitted_at: now_ms(),
            responses,
        };
        self.response_log.append(&line)?;
        let n = line.responses.len();
        self.record_submission(line);
        Ok(n)
    }

    /// Append responses produced outside the assignment flow, such as
    /// simulated annotators. Timestamps are renumbered after existing ones.
    pub fn import_responses(&mut self, mut responses: Vec<AnnotationResponse>) -> Result<usize, ServiceError> {
        let format = self.settings.task.format();
        for r in &responses {
            if !self.index.contains_key(&r.item_id) {
                return Err(ServiceError::format(&r.item_id, "unknown item"));
            }
            if !r.value.fits(format) {
                return Err(ServiceError::format(&r.item_id, format!("`{}` is not a valid {format} response", r.value)));
            }
        }
        let base = self.responses.len() as u64;
        responses.sort_by_key(|r| r.timestamp);
        for (k, r) in responses.iter_mut().enumerate() {
            r.timestamp = base + k as u64;
        }
        let line = SubmissionLine { schema_version: SCHEMA_VERSION, assignment_id: None, submitted_at: now_ms(), responses };
        self.response_log.append(&line)?;
        let n = line.responses.len();
        self.record_submission(line);
        Ok(n)
    }

    /// Three synthetic responses per item from `profile`, appended to the log.
    pub fn simulate(&mut self, profile: &AnnotatorProfile, seed: u64) -> Result<usize, ServiceError> {
        let responses = simulate_responses(&self.items, profile, seed)?;
        self.import_responses(responses)
    }

    pub fn progress(&self) -> Progress {
        let holds = self.open_holds();
        let required = self.settings.required_responses;
        let mut p = Progress {
            schema_version: SCHEMA_VERSION,
            project_id: self.id().to_string(),
            total: self.items.len(),
            complete: 0,
            in_flight: 0,
            untouched: 0,
            responses: self.responses.len(),
            per_label: BTreeMap::new(),
        };
        let acceptability = self.settings.task.format().is_acceptability();
        for (i, item) in self.items.iter().enumerate() {
            let n = self.answered[i].len();
            let done = n >= required;
            if done {
                p.complete += 1;
            } else if n > 0 || holds[i] > 0 {
                p.in_flight += 1;
            } else {
                p.untouched += 1;
            }
            if let (true, Some(label)) = (acceptability, item.expected_label) {
                let e = p.per_label.entry(label).or_default();
                e.total += 1;
                e.complete += usize::from(done);
            }
        }
        debug_assert_eq!(p.complete + p.in_flight + p.untouched, p.total);
        p
    }
}

/// Items to annotate from dataset records.
pub fn items_from_dataset(records: &[DatasetRecord]) -> Vec<AnnotationItem> {
    records.iter().map(AnnotationItem::from).collect()
}

/// What an annotator is shown: no expected label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatchItem {
    pub item_id: String,
    #[serde(flatten)]
    pub payload: Payload,
}

impl From<&AnnotationItem> for BatchItem {
    fn from(it: &AnnotationItem) -> Self {
        BatchItem { item_id: it.item_id.clone(), payload: it.payload.clone() }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum AnyResponseLine {
    Submission(SubmissionLine),
    Single(AnnotationResponse),
}

/// Read a response log: either a project's `responses.jsonl` or a plain
/// file of one response per line. A torn final line is skipped.
pub fn read_responses(path: &Path) -> Result<Vec<AnnotationResponse>, ServiceError> {
    let raw = fs::read_to_string(path).map_err(|e| ServiceError::io(path, e))?;
    let lines: Vec<&str> = raw.lines().collect();
    let mut out = Vec::new();
    for (i, line) in lines.iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<AnyResponseLine>(line) {
            Ok(AnyResponseLine::Submission(s)) => out.extend(s.responses),
            Ok(AnyResponseLine::Single(r)) => out.push(r),
            Err(_) if lines[i + 1..].iter().all(|l| l.trim().is_empty()) && !raw.ends_with('\n') => {
                log::warn!("{}: skipping incomplete final line {}", path.display(), i + 1);
            }
            Err(e) => {
                return Err(ServiceError::Corrupt { path: path.to_path_buf(), line: i + 1, message: e.to_string() })
            }
        }
    }
    Ok(out)
}

/// Write responses one per line.
pub fn write_responses(path: &Path, responses: &[AnnotationResponse]) -> Result<(), ServiceError> {
    let mut body = Vec::new();
    for r in responses {
        serde_json::to_writer(&mut body, r).expect("responses serialize");
        body.push(b'\n');
    }
    fs::write(path, body).map_err(|e| ServiceError::io(path, e))
}

/// Project ids with a settings file under `root`, sorted.
pub fn list_project_dirs(root: &Path) -> Result<Vec<PathBuf>, ServiceError> {
    let entries = match fs::read_dir(root) {
        Ok(e) => e,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(ServiceError::io(root, e)),
    };
    let mut dirs: Vec<PathBuf> = entries
        .filter_map(Result::ok)
        .map(|e| e.path())
        .filter(|p| p.join(PROJECT_FILE).is_file())
        .collect();
    dirs.sort();
    Ok(dirs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn items(n: usize) -> Vec<AnnotationItem> {
        (0..n)
            .map(|i| AnnotationItem {
                item_id: format!("wh-{i}"),
                task: Task::Wh,
                payload: Payload::Single { text: format!("Sentence {i}.") },
                expected_label: Some(if i % 2 == 0 { Label::Natural } else { Label::Unnatural }),
            })
            .collect()
    }

    fn answer(p: &mut Project, a: &Assignment, v: ResponseValue) -> usize {
        let vals: Vec<SubmittedValue> = a.item_ids.iter().map(|id| SubmittedValue { item_id: id.clone(), value: v }).collect();
        p.submit(&a.assignment_id, &vals).unwrap()
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(48))]

        // Any interleaving of requests and submissions keeps annotators
        // distinct per item, partitions progress, and survives a reopen.
        #[test]
        fn random_traffic_invariants(ops in proptest::collection::vec((0usize..4, proptest::bool::ANY), 1..60)) {
            let dir = tempfile::tempdir().unwrap();
            let mut p = Project::create(dir.path(), ProjectSettings::new("p", Task::Wh), items(11)).unwrap();
            let mut open: Vec<Assignment> = Vec::new();
            for (who, finish) in ops {
                if finish && !open.is_empty() {
                    let a = open.remove(who % open.len());
                    answer(&mut p, &a, ResponseValue::Natural);
                } else if let Some(a) = p.next_batch(&format!("ann-{who}")).unwrap() {
                    open.push(a);
                }
            }
            let mut seen = std::collections::HashSet::new();
            for r in p.responses() {
                proptest::prop_assert!(seen.insert((r.annotator_id.clone(), r.item_id.clone())));
            }
            let g = p.progress();
            proptest::prop_assert_eq!(g.complete + g.in_flight + g.untouched, g.total);
            let again = Project::open(&dir.path().join("p")).unwrap();
            proptest::prop_assert_eq!(again.responses(), p.responses());
        }
    }

    #[test]
    fn batches_and_exhaustion() {
        let dir = tempfile::tempdir().unwrap();
        let mut p = Project::create(dir.path(), ProjectSettings::new("p", Task::Wh), items(7)).unwrap();
        let a = p.next_batch("ann").unwrap().unwrap();
        assert_eq!(a.item_ids.len(), 5);
        assert_eq!(answer(&mut p, &a, ResponseValue::Natural), 5);
        let b = p.next_batch("ann").unwrap().unwrap();
        assert_eq!(b.item_ids.len(), 2);
        assert!(b.item_ids.iter().all(|id| !a.item_ids.contains(id)));
        answer(&mut p, &b, ResponseValue::Unnatural);
        assert!(p.next_batch("ann").unwrap().is_none());
    }

    #[test]
    fn settings_checked() {
        let dir = tempfile::tempdir().unwrap();
        let mut s = ProjectSettings::new("p", Task::Wh);
        s.batch_size = 6;
        assert!(matches!(Project::create(dir.path(), s, items(3)), Err(ServiceError::BadRequest(_))));
        let s = ProjectSettings::new("../x", Task::Wh);
        assert!(Project::create(dir.path(), s, items(3)).is_err());
        let s = ProjectSettings::new("p", Task::Eos);
        assert!(matches!(Project::create(dir.path(), s, items(3)), Err(ServiceError::Format { .. })));
    }

    #[test]
    fn replay_matches_live_state() {
        let dir = tempfile::tempdir().unwrap();
        let mut p = Project::create(dir.path(), ProjectSettings::new("p", Task::Wh), items(12)).unwrap();
        for who in ["a", "b", "c", "a"] {
            let asg = p.next_batch(who).unwrap().unwrap();
            answer(&mut p, &asg, ResponseValue::Natural);
        }
        p.next_batch("d").unwrap().unwrap();
        let live = p.progress();
        drop(p);
        let p = Project::open(&dir.path().join("p")).unwrap();
        assert_eq!(p.progress(), live);
        assert_eq!(p.responses().len(), 20);
    }
}
