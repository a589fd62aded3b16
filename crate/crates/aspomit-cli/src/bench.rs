//! Benchmark harness: runs blocker pipelines over a set of instances and
//! reports one CSV row per (instance, mode), averaged over seeds.
//!
//! Two pipeline shapes exist. `topdown` runs the greedy minimal-blocker
//! search directly on the full program. `bottomup:PERCENT:STRATEGY` first
//! omits PERCENT of the object groups picked by STRATEGY, refines that
//! abstraction until it is unsatisfiable, and only then shrinks the kept
//! part. Per-run failures land in the `error` column instead of aborting
//! the other runs.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use aspomit::driver::{self, AbsRefOptions, BadomitObjective};
use aspomit::{Atom, OmissionSet, Program};

pub const CSV_HEADER: &str =
    "instance,mode,atoms,init_ratio,final_ratio,refs,t_absref,blocker_ratio,t_blocker,error";

/// One benchmark pipeline configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Mode {
    TopDown { order: String },
    BottomUp { percent: u32, strategy: String },
}

impl Mode {
    /// Parses `topdown`, `topdown:ORDER`, or `bottomup:PERCENT:STRATEGY`.
    pub fn parse(spec: &str) -> Result<Mode, String> {
        let mut parts = spec.split(':');
        match parts.next() {
            Some("topdown") => {
                let order = parts.collect::<Vec<_>>().join(":");
                let order = if order.is_empty() {
                    "input".to_string()
                } else {
                    order
                };
                driver::probe_order(&order).map_err(|e| e.to_string())?;
                Ok(Mode::TopDown { order })
            }
            Some("bottomup") => {
                let percent: u32 = parts
                    .next()
                    .ok_or_else(|| format!("`{spec}`: expected bottomup:PERCENT:STRATEGY"))?
                    .parse()
                    .map_err(|_| format!("`{spec}`: PERCENT must be a number"))?;
                if percent == 0 || percent > 100 {
                    return Err(format!("`{spec}`: PERCENT must be in 1..=100"));
                }
                let strategy = parts
                    .next()
                    .ok_or_else(|| format!("`{spec}`: expected bottomup:PERCENT:STRATEGY"))?
                    .to_string();
                driver::omission_strategy(&strategy).map_err(|e| e.to_string())?;
                if parts.next().is_some() {
                    return Err(format!("`{spec}`: trailing mode arguments"));
                }
                Ok(Mode::BottomUp { percent, strategy })
            }
            _ => Err(format!(
                "unknown mode `{spec}`; expected topdown[:ORDER] or bottomup:PERCENT:STRATEGY"
            )),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Mode::TopDown { order } if order == "input" => "topdown".to_string(),
            Mode::TopDown { order } => format!("topdown:{order}"),
            Mode::BottomUp { percent, strategy } => format!("bottomup:{percent}:{strategy}"),
        }
    }
}

/// A resolved benchmark instance: program plus the object groups bottom-up
/// modes select their initial omission from.
#[derive(Debug, Clone)]
pub struct BenchInstance {
    pub name: String,
    pub program: Program,
    pub groups: BTreeMap<String, Vec<Atom>>,
}

impl BenchInstance {
    /// Wraps a program whose atoms have no natural grouping: every atom is
    /// its own group.
    pub fn with_singleton_groups(name: impl Into<String>, program: Program) -> BenchInstance {
        let groups = program
            .universe()
            .iter()
            .map(|a| (a.text().to_string(), vec![a.clone()]))
            .collect();
        BenchInstance {
            name: name.into(),
            program,
            groups,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub modes: Vec<Mode>,
    pub seeds: Vec<u64>,
    pub objective: BadomitObjective,
    pub type4: bool,
    pub jobs: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            modes: vec![Mode::TopDown {
                order: "input".to_string(),
            }],
            seeds: vec![1],
            objective: BadomitObjective::default(),
            type4: false,
            jobs: 1,
        }
    }
}

/// Measurements of a single (instance, mode, seed) run; `None` fields do
/// not apply to the mode or were lost to the recorded error.
#[derive(Debug, Clone, Default)]
struct RunOutcome {
    init_count: Option<f64>,
    final_count: Option<f64>,
    refs: Option<f64>,
    t_absref: Option<f64>,
    blocker_count: Option<f64>,
    t_blocker: Option<f64>,
    blocker: Option<BTreeSet<Atom>>,
    error: Option<String>,
}

/// One CSV row: per-seed numbers averaged, errors and blockers kept for
/// inspection.
#[derive(Debug, Clone)]
pub struct BenchRow {
    pub instance: String,
    pub mode: String,
    pub atoms: usize,
    pub init_count: Option<f64>,
    pub final_count: Option<f64>,
    pub refs: Option<f64>,
    pub t_absref: Option<f64>,
    pub blocker_count: Option<f64>,
    pub t_blocker: Option<f64>,
    /// Distinct per-seed error messages.
    pub errors: Vec<String>,
    /// Per-seed blockers of the successful runs.
    pub blockers: Vec<BTreeSet<Atom>>,
}

#[derive(Debug, Clone)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
}

impl BenchReport {
    pub fn errored_rows(&self) -> usize {
        self.rows.iter().filter(|r| !r.errors.is_empty()).count()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for row in &self.rows {
            let cells = [
                csv_field(&row.instance),
                csv_field(&row.mode),
                row.atoms.to_string(),
                ratio(row.init_count, row.atoms),
                ratio(row.final_count, row.atoms),
                number(row.refs),
                seconds(row.t_absref),
                ratio(row.blocker_count, row.atoms),
                seconds(row.t_blocker),
                csv_field(&row.errors.join("; ")),
            ];
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

fn csv_field(text: &str) -> String {
    if text.contains(',') || text.contains('"') || text.contains('\n') {
        format!("\"{}\"", text.replace('"', "\"\""))
    } else {
        text.to_string()
    }
}

/// Counts render without a trailing `.0`; seed averages keep one decimal.
fn number(value: Option<f64>) -> String {
    match value {
        None => String::new(),
        Some(v) if (v - v.round()).abs() < 1e-9 => format!("{}", v.round() as i64),
        Some(v) => format!("{v:.1}"),
    }
}

fn ratio(count: Option<f64>, atoms: usize) -> String {
    match count {
        None => String::new(),
        Some(_) => format!("{}/{atoms}", number(count)),
    }
}

fn seconds(value: Option<f64>) -> String {
    value.map(|v| format!("{v:.3}")).unwrap_or_default()
}

fn run_one(instance: &BenchInstance, mode: &Mode, seed: u64, config: &BenchConfig) -> RunOutcome {
    let mut outcome = RunOutcome::default();
    match mode {
        Mode::TopDown { order } => {
            let order = match driver::probe_order(order) {
                Ok(o) => o,
                Err(e) => {
                    outcome.error = Some(e.to_string());
                    return outcome;
                }
            };
            match driver::compute_min_blocker(
                &instance.program,
                &OmissionSet::default(),
                order.as_ref(),
            ) {
                Ok(res) => {
                    outcome.blocker_count = Some(res.blocker.len() as f64);
                    outcome.t_blocker = Some(res.stats.wall_time.as_secs_f64());
                    outcome.blocker = Some(res.blocker);
                }
                Err(e) => outcome.error = Some(e.to_string()),
            }
        }
        Mode::BottomUp { percent, strategy } => {
            let strategy = match driver::omission_strategy(strategy) {
                Ok(s) => s,
                Err(e) => {
                    outcome.error = Some(e.to_string());
                    return outcome;
                }
            };
            let order = driver::probe_order("input").expect("input order exists");
            let opts = AbsRefOptions {
                objective: config.objective,
                type4: config.type4,
                max_iterations: None,
            };
            match driver::bottom_up_blocker(
                &instance.program,
                &instance.groups,
                *percent,
                strategy.as_ref(),
                seed,
                &opts,
                order.as_ref(),
            ) {
                Ok(res) => {
                    outcome.init_count = Some(res.initial_omission.len() as f64);
                    outcome.final_count = Some(res.absref.final_omission.len() as f64);
                    outcome.refs = Some(res.absref.refinement_steps as f64);
                    outcome.t_absref = Some(res.absref_time.as_secs_f64());
                    outcome.blocker_count = Some(res.blocker.blocker.len() as f64);
                    outcome.t_blocker = Some(res.blocker.stats.wall_time.as_secs_f64());
                    outcome.blocker = Some(res.blocker.blocker);
                }
                Err(e) => outcome.error = Some(e.to_string()),
            }
        }
    }
    outcome
}

fn average(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let present: Vec<f64> = values.flatten().collect();
    if present.is_empty() {
        None
    } else {
        Some(present.iter().sum::<f64>() / present.len() as f64)
    }
}

/// Runs every (instance, mode, seed) combination, `config.jobs` at a time,
/// and aggregates per (instance, mode).
pub fn run_bench(instances: &[BenchInstance], config: &BenchConfig) -> BenchReport {
    let tasks: Vec<(usize, usize, u64)> = instances
        .iter()
        .enumerate()
        .flat_map(|(i, _)| {
            config
                .modes
                .iter()
                .enumerate()
                .flat_map(move |(m, _)| config.seeds.iter().map(move |&seed| (i, m, seed)))
        })
        .collect();
    let mut outcomes: Vec<Option<RunOutcome>> = vec![None; tasks.len()];
    let workers = config.jobs.max(1).min(tasks.len().max(1));
    if workers <= 1 {
        for (slot, &(i, m, seed)) in tasks.iter().enumerate() {
            outcomes[slot] = Some(run_one(&instances[i], &config.modes[m], seed, config));
        }
    } else {
        let next = AtomicUsize::new(0);
        let shared = Mutex::new(&mut outcomes);
        std::thread::scope(|scope| {
            for _ in 0..workers {
                scope.spawn(|| loop {
                    let slot = next.fetch_add(1, Ordering::SeqCst);
                    if slot >= tasks.len() {
                        break;
                    }
                    let (i, m, seed) = tasks[slot];
                    let outcome = run_one(&instances[i], &config.modes[m], seed, config);
                    shared.lock().expect("no panics while holding the lock")[slot] = Some(outcome);
                });
            }
        });
    }
    let mut rows = Vec::new();
    for (i, instance) in instances.iter().enumerate() {
        for (m, mode) in config.modes.iter().enumerate() {
            let per_seed: Vec<&RunOutcome> = tasks
                .iter()
                .zip(&outcomes)
                .filter(|(&(ti, tm, _), _)| ti == i && tm == m)
                .map(|(_, o)| o.as_ref().expect("all tasks ran"))
                .collect();
            let mut errors: Vec<String> = Vec::new();
            for o in &per_seed {
                if let Some(e) = &o.error {
                    if !errors.contains(e) {
                        errors.push(e.clone());
                    }
                }
            }
            rows.push(BenchRow {
                instance: instance.name.clone(),
                mode: mode.label(),
                atoms: instance.program.universe().len(),
                init_count: average(per_seed.iter().map(|o| o.init_count)),
                final_count: average(per_seed.iter().map(|o| o.final_count)),
                refs: average(per_seed.iter().map(|o| o.refs)),
                t_absref: average(per_seed.iter().map(|o| o.t_absref)),
                blocker_count: average(per_seed.iter().map(|o| o.blocker_count)),
                t_blocker: average(per_seed.iter().map(|o| o.t_blocker)),
                errors,
                blockers: per_seed.iter().filter_map(|o| o.blocker.clone()).collect(),
            });
        }
    }
    rows.sort_by(|a, b| {
        (a.instance.as_str(), a.mode.as_str()).cmp(&(b.instance.as_str(), b.mode.as_str()))
    });
    BenchReport { rows }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn mode_specs_round_trip() {
        assert_eq!(Mode::parse("topdown").unwrap().label(), "topdown");
        assert_eq!(
            Mode::parse("topdown:least-occurring").unwrap().label(),
            "topdown:least-occurring"
        );
        assert_eq!(
            Mode::parse("topdown:seed:4").unwrap().label(),
            "topdown:seed:4"
        );
        assert_eq!(
            Mode::parse("bottomup:30:random").unwrap().label(),
            "bottomup:30:random"
        );
        assert!(Mode::parse("bottomup:0:random").is_err());
        assert!(Mode::parse("bottomup:30").is_err());
        assert!(Mode::parse("bottomup:30:random:extra").is_err());
        assert!(Mode::parse("sideways").is_err());
        assert!(Mode::parse("topdown:sideways").is_err());
    }

    #[test]
    fn empty_instance_list_yields_a_header_only_csv() {
        let report = run_bench(&[], &BenchConfig::default());
        assert_eq!(report.to_csv(), format!("{CSV_HEADER}\n"));
        assert_eq!(report.errored_rows(), 0);
    }

    #[test]
    fn satisfiable_instances_error_instead_of_aborting() {
        let toggle = fixtures::load("toggle").unwrap();
        let unsat = fixtures::load("toggle-unsat").unwrap();
        let instances = vec![
            BenchInstance::with_singleton_groups("toggle", toggle.program),
            BenchInstance::with_singleton_groups("toggle-unsat", unsat.program),
        ];
        let report = run_bench(&instances, &BenchConfig::default());
        assert_eq!(report.rows.len(), 2);
        assert_eq!(report.errored_rows(), 1);
        let bad = &report.rows[0];
        assert_eq!(bad.instance, "toggle");
        assert!(!bad.errors.is_empty());
        assert!(bad.blocker_count.is_none());
        let good = &report.rows[1];
        assert_eq!(good.instance, "toggle-unsat");
        assert!(good.errors.is_empty());
        assert_eq!(good.blocker_count, Some(1.0));
        assert_eq!(good.blockers[0].len(), 1);
    }

    #[test]
    fn parallel_and_sequential_runs_agree() {
        let f = fixtures::load("non2col9-k2").unwrap();
        let instance = BenchInstance {
            name: "nine".to_string(),
            program: f.program,
            groups: f.groups.unwrap(),
        };
        let mut config = BenchConfig {
            modes: vec![
                Mode::parse("topdown").unwrap(),
                Mode::parse("bottomup:50:random").unwrap(),
            ],
            seeds: vec![1, 2],
            ..BenchConfig::default()
        };
        let sequential = run_bench(std::slice::from_ref(&instance), &config);
        config.jobs = 4;
        let parallel = run_bench(std::slice::from_ref(&instance), &config);
        assert_eq!(sequential.rows.len(), parallel.rows.len());
        for (a, b) in sequential.rows.iter().zip(&parallel.rows) {
            assert_eq!(a.instance, b.instance);
            assert_eq!(a.mode, b.mode);
            assert_eq!(a.blocker_count, b.blocker_count);
            assert_eq!(a.init_count, b.init_count);
            assert_eq!(a.blockers, b.blockers);
            assert_eq!(a.errors, b.errors);
        }
    }

    #[test]
    fn csv_cells_follow_the_column_semantics() {
        let f = fixtures::load("non2col9-k2").unwrap();
        let instance = BenchInstance {
            name: "nine".to_string(),
            program: f.program,
            groups: f.groups.unwrap(),
        };
        let config = BenchConfig {
            modes: vec![
                Mode::parse("topdown").unwrap(),
                Mode::parse("bottomup:50:leastOccurring").unwrap(),
            ],
            ..BenchConfig::default()
        };
        let report = run_bench(std::slice::from_ref(&instance), &config);
        let csv = report.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines.len(), 3);
        let bottomup: Vec<&str> = lines[1].split(',').collect();
        assert_eq!(bottomup[0], "nine");
        assert_eq!(bottomup[1], "bottomup:50:leastOccurring");
        assert_eq!(bottomup[2], "27");
        assert!(bottomup[3].ends_with("/27") && !bottomup[3].starts_with('/'));
        assert!(bottomup[7].ends_with("/27"));
        let topdown: Vec<&str> = lines[2].split(',').collect();
        assert_eq!(topdown[1], "topdown");
        assert_eq!(topdown[3], "");
        assert_eq!(topdown[4], "");
        assert_eq!(topdown[5], "");
        assert_eq!(topdown[6], "");
        assert_eq!(topdown[7], "9/27");
        assert_eq!(topdown[9], "");
    }

    #[test]
    fn csv_fields_with_commas_are_quoted() {
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
        assert_eq!(csv_field("plain"), "plain");
        assert_eq!(number(Some(10.5)), "10.5");
        assert_eq!(number(Some(9.0)), "9");
        assert_eq!(ratio(Some(9.0), 27), "9/27");
        assert_eq!(ratio(None, 27), "");
    }
}
