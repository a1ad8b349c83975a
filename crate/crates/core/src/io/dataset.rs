//! Long-format dataset files.
//!
//! ```text
//! # categories = 7
//! # recovery_threshold = 1
//! # horizon = 28
//! # recode = 0:1, 1:1, 2:1, 3:2, 4:3, 5:4, 6:5, 7:6, 8:7
//! subject_id,arm,day,score
//! S001,0,1,4
//! ```
//!
//! Header keys are optional (defaults: 7 categories, recovery threshold 1,
//! horizon = last day in the file). `recode` maps the file's scores onto
//! `1..=categories`. Other `#` lines without `=` are comments.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::trajectory::{Arm, TrialDataset, Trajectory};

const COLUMNS: [&str; 4] = ["subject_id", "arm", "day", "score"];

#[derive(Debug, Default)]
struct Header {
    categories: Option<u16>,
    recovery_threshold: Option<u16>,
    horizon: Option<u32>,
    recode: Option<HashMap<i64, u16>>,
}

fn data_err(line: u64, msg: impl std::fmt::Display) -> Error {
    Error::Data(format!("line {line}: {msg}"))
}

fn parse_header(text: &str) -> Result<Header> {
    let mut h = Header::default();
    for (i, raw) in text.lines().enumerate() {
        let line = (i + 1) as u64;
        let Some(body) = raw.trim_start().strip_prefix('#') else {
            continue;
        };
        let Some((key, value)) = body.split_once('=') else {
            continue;
        };
        let (key, value) = (key.trim(), value.trim());
        let num = |v: &str| v.parse::<u32>().map_err(|_| data_err(line, format!("'{key}' needs an integer, got '{v}'")));
        match key {
            "categories" => {
                h.categories = Some(
                    u16::try_from(num(value)?).map_err(|_| data_err(line, "categories out of range"))?,
                )
            }
            "recovery_threshold" => {
                h.recovery_threshold = Some(
                    u16::try_from(num(value)?).map_err(|_| data_err(line, "recovery_threshold out of range"))?,
                )
            }
            "horizon" => h.horizon = Some(num(value)?),
            "recode" => {
                let mut map = HashMap::new();
                for pair in value.split(',').map(str::trim).filter(|p| !p.is_empty()) {
                    let (from, to) = pair
                        .split_once(':')
                        .ok_or_else(|| data_err(line, format!("recode entry '{pair}' is not 'from:to'")))?;
                    let from = from
                        .trim()
                        .parse::<i64>()
                        .map_err(|_| data_err(line, format!("bad recode source '{from}'")))?;
                    let to = to
                        .trim()
                        .parse::<u16>()
                        .map_err(|_| data_err(line, format!("bad recode target '{to}'")))?;
                    if map.insert(from, to).is_some() {
                        return Err(data_err(line, format!("recode maps {from} twice")));
                    }
                }
                h.recode = Some(map);
            }
            other => return Err(data_err(line, format!("unknown header key '{other}'"))),
        }
    }
    Ok(h)
}

/// Parses dataset text.
pub fn parse_dataset(text: &str) -> Result<TrialDataset> {
    let header = parse_header(text)?;
    let categories = header.categories.unwrap_or(7);
    let threshold = header.recovery_threshold.unwrap_or(1);
    if categories < 2 {
        return Err(Error::Data("categories must be at least 2".into()));
    }

    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| Error::Data(format!("cannot read column header: {e}")))?.clone();
    let mut index = [0usize; 4];
    for (slot, name) in index.iter_mut().zip(COLUMNS) {
        *slot = headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Data(format!("missing column '{name}'")))?;
    }
    if let Some(extra) = headers.iter().find(|h| !COLUMNS.contains(h)) {
        return Err(Error::Data(format!("unexpected column '{extra}'")));
    }

    struct Subject {
        arm: Arm,
        arm_line: u64,
        days: BTreeMap<u32, (u16, u64)>,
    }
    let mut order: Vec<String> = Vec::new();
    let mut subjects: HashMap<String, Subject> = HashMap::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            data_err(line, e)
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |i: usize| record.get(index[i]).unwrap_or("");
        let id = field(0);
        if id.is_empty() {
            return Err(data_err(line, "empty subject_id"));
        }
        let arm = match field(1) {
            "0" => Arm::Control,
            "1" => Arm::Treatment,
            other => return Err(data_err(line, format!("arm must be 0 or 1, got '{other}'"))),
        };
        let day: u32 = field(2)
            .parse()
            .ok()
            .filter(|&d| d >= 1)
            .ok_or_else(|| data_err(line, format!("day must be a positive integer, got '{}'", field(2))))?;
        let raw: i64 = field(3)
            .parse()
            .map_err(|_| data_err(line, format!("score must be an integer, got '{}'", field(3))))?;
        let score = match &header.recode {
            Some(map) => *map
                .get(&raw)
                .ok_or_else(|| data_err(line, format!("score {raw} has no recode entry")))?,
            None => u16::try_from(raw).unwrap_or(0),
        };
        if score < 1 || score > categories {
            return Err(data_err(line, format!("score {score} outside 1..={categories}")));
        }
        let subject = subjects.entry(id.to_string()).or_insert_with(|| {
            order.push(id.to_string());
            Subject {
                arm,
                arm_line: line,
                days: BTreeMap::new(),
            }
        });
        if subject.arm != arm {
            return Err(data_err(
                line,
                format!("subject {id} changes arm (set on line {})", subject.arm_line),
            ));
        }
        if let Some((_, first)) = subject.days.insert(day, (score, line)) {
            return Err(data_err(line, format!("subject {id} has day {day} twice (first on line {first})")));
        }
    }

    let last_day = subjects
        .values()
        .filter_map(|s| s.days.keys().next_back().copied())
        .max()
        .unwrap_or(0);
    let horizon = header.horizon.unwrap_or(last_day);
    if horizon == 0 {
        return Err(Error::Data("dataset has no observations".into()));
    }
    let mut trajectories = Vec::with_capacity(order.len());
    for id in order {
        let s = &subjects[&id];
        if let Some((&day, &(_, line))) = s.days.iter().find(|(&d, _)| d > horizon) {
            return Err(data_err(line, format!("day {day} is past the horizon {horizon}")));
        }
        let t = Trajectory::from_observations(
            id.clone(),
            s.arm,
            categories,
            horizon,
            s.days.iter().map(|(&d, &(v, _))| (d, v)),
        )?;
        if let Some(day) = t.relapse_day(threshold) {
            log::warn!("subject {id}: score worsens on day {day} after reaching recovery; kept as recorded");
        }
        if let Some((at, s)) = t.absorbed_at() {
            if let Some((day, _)) = t.recorded_days().find(|&(d, v)| d > at && v != s) {
                log::warn!("subject {id}: leaves absorbing category {} on day {day}; kept as recorded", s.value());
            }
        }
        trajectories.push(t);
    }
    let dataset = TrialDataset::new(trajectories, horizon, categories, threshold).map_err(|e| Error::Data(e.to_string()))?;
    let (nc, nt) = (dataset.arm_size(Arm::Control), dataset.arm_size(Arm::Treatment));
    if nc == 0 || nt == 0 {
        return Err(Error::Data(format!("an arm is empty (control {nc}, treatment {nt})")));
    }
    let recorded: usize = dataset.trajectories().iter().map(|t| t.recorded_days().count()).sum();
    let grid = dataset.len() * horizon as usize;
    log::info!(
        "loaded {} subjects (control {nc}, treatment {nt}); {} of {grid} subject-days unrecorded",
        dataset.len(),
        grid - recorded
    );
    Ok(dataset)
}

pub fn load_dataset(path: &Path) -> Result<TrialDataset> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_dataset(&text).map_err(|e| match e {
        Error::Data(msg) => Error::Data(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Renders a dataset in the format read by [`parse_dataset`]; recorded
/// days only.
pub fn format_dataset(dataset: &TrialDataset) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# categories = {}", dataset.categories());
    let _ = writeln!(out, "# recovery_threshold = {}", dataset.recovery_threshold());
    let _ = writeln!(out, "# horizon = {}", dataset.horizon_days());
    out.push_str("subject_id,arm,day,score\n");
    for t in dataset.trajectories() {
        for (day, s) in t.recorded_days() {
            let _ = writeln!(out, "{},{},{day},{}", t.subject_id(), t.arm().indicator(), s.value());
        }
    }
    out
}

pub fn write_dataset(dataset: &TrialDataset, path: &Path) -> Result<()> {
    std::fs::write(path, format_dataset(dataset)).map_err(|e| Error::io(path, e))
}
