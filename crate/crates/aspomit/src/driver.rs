//! Top-level procedures built on abstraction, solving and debugging: the
//! abstract-and-refine loop, top-down and bottom-up minimal blocker search,
//! minimal put-back sets, blocker verification, and the pluggable
//! initial-omission and probe-order strategies.

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::abstraction::{self, AbstractionError, Verdict};
use crate::debugger::{self, DebugError, DebugOptions, DebugProgram, DebugReport};
use crate::program::{Atom, Interpretation, OmissionSet, Program};
use crate::solver::{self, Objective, SolveError, SolveRequest};

#[derive(Debug, Error)]
pub enum DriverError {
    #[error("refinement did not settle within {0} iterations")]
    IterationLimitExceeded(usize),
    #[error("the starting abstraction is satisfiable; blocker search needs an unsatisfiable one")]
    PreconditionUnsat,
    #[error("program is satisfiable, so it has no blocker set")]
    ProgramSatisfiable,
    #[error("no object groups to select from")]
    EmptyGroups,
    #[error("{0} is not a spurious abstract answer set")]
    NotSpurious(String),
    #[error("unknown omission strategy `{0}`")]
    UnknownStrategy(String),
    #[error("unknown probe order `{0}`")]
    UnknownOrder(String),
    #[error(transparent)]
    Abstraction(#[from] AbstractionError),
    #[error(transparent)]
    Debug(#[from] DebugError),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

/// How hard each refinement iteration pushes on the number of blamed atoms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BadomitObjective {
    /// Accept any debug answer set blaming at most ⌈|A|/divisor⌉ atoms;
    /// falls back to full minimization when that cap is unsatisfiable.
    Bound(usize),
    /// Always minimize the number of blamed atoms.
    Minimize,
}

impl Default for BadomitObjective {
    fn default() -> Self {
        BadomitObjective::Bound(2)
    }
}

impl BadomitObjective {
    /// Accepts `minimize`, `bound2`, `bound5`, `bound10`.
    pub fn parse(text: &str) -> Option<BadomitObjective> {
        match text {
            "minimize" => Some(BadomitObjective::Minimize),
            "bound2" => Some(BadomitObjective::Bound(2)),
            "bound5" => Some(BadomitObjective::Bound(5)),
            "bound10" => Some(BadomitObjective::Bound(10)),
            _ => None,
        }
    }

    fn cap(self, omitted: usize) -> Option<usize> {
        match self {
            BadomitObjective::Bound(divisor) => Some(omitted.div_ceil(divisor.max(1))),
            BadomitObjective::Minimize => None,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct AbsRefOptions {
    pub objective: BadomitObjective,
    /// Also blame atoms omitted from dropped rules of already-blamed heads.
    pub type4: bool,
    /// Safety valve; refinement terminates within |A_init| iterations on
    /// its own because every refinement puts at least one atom back.
    pub max_iterations: Option<usize>,
}

/// One satisfiability probe of the shrinking abstraction.
#[derive(Debug, Clone, Serialize)]
pub struct TraceStep {
    #[serde(rename = "omittedCount")]
    pub omitted_count: usize,
    pub badomits: Vec<String>,
    pub verdict: &'static str,
    /// The abstract answer set examined; absent on the final `unsat` step.
    #[serde(skip)]
    pub interpretation: Option<Interpretation>,
}

#[derive(Serialize)]
struct TraceDocument<'a> {
    iterations: &'a [TraceStep],
}

/// Serializes a refinement trace as JSON; deterministic for a fixed input
/// and seed, so repeated runs are byte-identical.
pub fn trace_json(trace: &[TraceStep]) -> String {
    serde_json::to_string_pretty(&TraceDocument { iterations: trace })
        .expect("trace serialization cannot fail")
}

#[derive(Debug, Clone)]
pub enum AbsRefOutcome {
    /// The final abstraction has no answer set, hence neither has the
    /// original program.
    UnsatReached,
    /// The first abstract answer set of the final abstraction is the
    /// projection of a real answer set.
    ConcreteFound {
        abstract_witness: Interpretation,
        concrete_witness: Interpretation,
    },
}

#[derive(Debug, Clone)]
pub struct AbsRefResult {
    /// omit(Π, A_final).
    pub final_program: Program,
    pub final_omission: OmissionSet,
    pub outcome: AbsRefOutcome,
    pub refinement_steps: usize,
    pub trace: Vec<TraceStep>,
}

fn restrict_to_universe(program: &Program, omission: &OmissionSet) -> OmissionSet {
    let set = OmissionSet::new(
        omission
            .atoms()
            .iter()
            .filter(|a| program.universe_contains(a))
            .cloned(),
    );
    if omission.includes_bottom() {
        set.with_bottom()
    } else {
        set
    }
}

/// Solves the debug program under the configured blame objective. A
/// verdict-free probe runs first: it succeeds exactly when the abstract
/// answer set is concrete, in which case the bounded search could otherwise
/// return an avoidably-blaming answer set.
fn debug_under_objective(
    dp: &DebugProgram,
    objective: BadomitObjective,
) -> Result<DebugReport, DriverError> {
    let probe = SolveRequest::new(dp.program.clone())
        .with_objective(dp.markers.clone(), Objective::Bound(0))
        .with_limit(1);
    if let Some(raw) = solver::solve(&probe)?.raw_answer_sets.into_iter().next() {
        return Ok(DebugReport::from_answer_set(raw)?);
    }
    let minimize = || {
        SolveRequest::new(dp.program.clone())
            .with_objective(dp.markers.clone(), Objective::Minimize)
            .with_limit(1)
    };
    let result = match objective.cap(dp.omitted.len()) {
        Some(cap) => {
            let bounded = SolveRequest::new(dp.program.clone())
                .with_objective(dp.markers.clone(), Objective::Bound(cap))
                .with_limit(1);
            let result = solver::solve(&bounded)?;
            if result.raw_answer_sets.is_empty() {
                solver::solve(&minimize())?
            } else {
                result
            }
        }
        None => solver::solve(&minimize())?,
    };
    let raw = result
        .raw_answer_sets
        .into_iter()
        .next()
        .ok_or(DebugError::NoAnswerSet)?;
    Ok(DebugReport::from_answer_set(raw)?)
}

/// The abstract-and-refine loop: while the abstraction has answer sets, take
/// the first one, debug it, and either report it as concrete (no blame) or
/// put the blamed atoms back and retry. Ends with an unsatisfiable
/// abstraction or a verified concrete witness.
pub fn abs_ref(
    program: &Program,
    initial: &OmissionSet,
    opts: &AbsRefOptions,
) -> Result<AbsRefResult, DriverError> {
    let mut omission = restrict_to_universe(program, initial);
    let mut trace = Vec::new();
    let mut refinement_steps = 0usize;
    loop {
        if let Some(limit) = opts.max_iterations {
            if refinement_steps > limit {
                return Err(DriverError::IterationLimitExceeded(limit));
            }
        }
        let abstract_program = abstraction::omit(program, &omission);
        let first = solver::solve(&SolveRequest::new(abstract_program.clone()).with_limit(1))?;
        let Some(interp) = first.answer_sets.into_iter().next() else {
            trace.push(TraceStep {
                omitted_count: omission.len(),
                badomits: Vec::new(),
                verdict: "unsat",
                interpretation: None,
            });
            return Ok(AbsRefResult {
                final_program: abstract_program,
                final_omission: omission,
                outcome: AbsRefOutcome::UnsatReached,
                refinement_steps,
                trace,
            });
        };
        let dp = debugger::build_debug_program(
            program,
            &omission,
            &interp,
            DebugOptions { type4: opts.type4 },
        )?;
        let report = debug_under_objective(&dp, opts.objective)?;
        let blamed: BTreeSet<Atom> = report
            .bad_omissions
            .iter()
            .map(|b| b.atom.clone())
            .collect();
        if blamed.is_empty() {
            trace.push(TraceStep {
                omitted_count: omission.len(),
                badomits: Vec::new(),
                verdict: "concrete",
                interpretation: Some(interp.clone()),
            });
            let classification = abstraction::classify(program, &omission, &interp)?;
            debug_assert_eq!(classification.verdict, Verdict::Concrete);
            let concrete_witness = classification
                .witness
                .expect("a verdict-free debug answer set implies a concrete witness");
            return Ok(AbsRefResult {
                final_program: abstract_program,
                final_omission: omission,
                outcome: AbsRefOutcome::ConcreteFound {
                    abstract_witness: interp,
                    concrete_witness,
                },
                refinement_steps,
                trace,
            });
        }
        trace.push(TraceStep {
            omitted_count: omission.len(),
            badomits: blamed.iter().map(|a| a.text().to_string()).collect(),
            verdict: "spurious",
            interpretation: Some(interp),
        });
        let remaining = OmissionSet::new(
            omission
                .atoms()
                .iter()
                .filter(|a| !blamed.contains(*a))
                .cloned(),
        );
        omission = if omission.includes_bottom() {
            remaining.with_bottom()
        } else {
            remaining
        };
        refinement_steps += 1;
    }
}

/// Orders candidate atoms for the greedy blocker probes.
pub trait ProbeOrder {
    fn name(&self) -> &str;
    fn order(&self, program: &Program, candidates: &[Atom]) -> Vec<Atom>;
}

struct InputOrder;

impl ProbeOrder for InputOrder {
    fn name(&self) -> &str {
        "input"
    }

    fn order(&self, _program: &Program, candidates: &[Atom]) -> Vec<Atom> {
        candidates.to_vec()
    }
}

/// Number of body occurrences of every universe atom, counting each literal.
fn body_occurrences(program: &Program) -> BTreeMap<Atom, usize> {
    let mut counts: BTreeMap<Atom, usize> =
        program.universe().iter().map(|a| (a.clone(), 0)).collect();
    for r in program.rules() {
        for a in r.body_atoms() {
            if let Some(c) = counts.get_mut(a) {
                *c += 1;
            }
        }
    }
    counts
}

struct LeastOccurringOrder;

impl ProbeOrder for LeastOccurringOrder {
    fn name(&self) -> &str {
        "least-occurring"
    }

    fn order(&self, program: &Program, candidates: &[Atom]) -> Vec<Atom> {
        let counts = body_occurrences(program);
        let mut ordered = candidates.to_vec();
        ordered.sort_by_key(|a| {
            (
                counts.get(a).copied().unwrap_or(0),
                program.atom_id(a).unwrap_or(usize::MAX),
            )
        });
        ordered
    }
}

struct SeededOrder(u64);

impl ProbeOrder for SeededOrder {
    fn name(&self) -> &str {
        "seed"
    }

    fn order(&self, _program: &Program, candidates: &[Atom]) -> Vec<Atom> {
        let mut ordered = candidates.to_vec();
        let mut rng = ChaCha8Rng::seed_from_u64(self.0);
        ordered.shuffle(&mut rng);
        ordered
    }
}

/// Looks up a probe order by name: `input`, `least-occurring`, or `seed:N`.
pub fn probe_order(spec: &str) -> Result<Box<dyn ProbeOrder>, DriverError> {
    match spec {
        "input" => return Ok(Box::new(InputOrder)),
        "least-occurring" => return Ok(Box::new(LeastOccurringOrder)),
        _ => {}
    }
    if let Some(seed) = spec.strip_prefix("seed:") {
        if let Ok(n) = seed.parse::<u64>() {
            return Ok(Box::new(SeededOrder(n)));
        }
    }
    Err(DriverError::UnknownOrder(spec.to_string()))
}

#[derive(Debug, Clone, Default)]
pub struct BlockerStats {
    /// Abstraction satisfiability checks performed, the precondition
    /// included.
    pub probes: usize,
    pub wall_time: Duration,
}

#[derive(Debug, Clone)]
pub struct BlockerResult {
    /// The kept atoms C whose induced abstraction is unsatisfiable.
    pub blocker: BTreeSet<Atom>,
    /// The blocker rule set omit(Π, 𝒜 \ C).
    pub blocker_rules: Program,
    /// Certificate that removing any single blocker atom re-admits answer
    /// sets.
    pub minimal: bool,
    pub stats: BlockerStats,
}

/// Greedy minimal-blocker search: starting from an unsatisfiable
/// abstraction, omit every further atom whose omission preserves
/// unsatisfiability, probing in the given order. The kept complement is a
/// minimal blocker: each kept atom's omission was probed satisfiable, and
/// satisfiability persists under further omission because answer sets
/// project through.
pub fn compute_min_blocker(
    program: &Program,
    start: &OmissionSet,
    order: &dyn ProbeOrder,
) -> Result<BlockerResult, DriverError> {
    let begin = Instant::now();
    let start = restrict_to_universe(program, start);
    let mut probes = 1usize;
    if solver::is_satisfiable(&abstraction::omit(program, &start))? {
        return Err(DriverError::PreconditionUnsat);
    }
    let keep_bottom = |set: OmissionSet| {
        if start.includes_bottom() {
            set.with_bottom()
        } else {
            set
        }
    };
    let candidates: Vec<Atom> = program
        .universe()
        .iter()
        .filter(|a| !start.contains(a))
        .cloned()
        .collect();
    let mut omitted: BTreeSet<Atom> = start.atoms().clone();
    for alpha in order.order(program, &candidates) {
        let mut trial = omitted.clone();
        trial.insert(alpha.clone());
        let trial_set = keep_bottom(OmissionSet::new(trial.iter().cloned()));
        probes += 1;
        if !solver::is_satisfiable(&abstraction::omit(program, &trial_set))? {
            omitted = trial;
        }
    }
    let final_omission = keep_bottom(OmissionSet::new(omitted.iter().cloned()));
    let blocker: BTreeSet<Atom> = program
        .universe()
        .iter()
        .filter(|a| !omitted.contains(a))
        .cloned()
        .collect();
    let blocker_rules = abstraction::omit(program, &final_omission);
    Ok(BlockerResult {
        blocker,
        blocker_rules,
        minimal: true,
        stats: BlockerStats {
            probes,
            wall_time: begin.elapsed(),
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockerCheck {
    pub is_blocker: bool,
    /// `None` when minimality was not requested.
    pub is_minimal: Option<bool>,
}

/// Checks that omitting everything outside `blocker` yields an
/// unsatisfiable abstraction, and optionally that no single-atom-smaller
/// subset does too.
pub fn verify_blocker(
    program: &Program,
    blocker: &BTreeSet<Atom>,
    check_minimal: bool,
) -> Result<BlockerCheck, DriverError> {
    let outside = |keep: &BTreeSet<Atom>| {
        OmissionSet::new(
            program
                .universe()
                .iter()
                .filter(|a| !keep.contains(*a))
                .cloned(),
        )
    };
    let is_blocker = !solver::is_satisfiable(&abstraction::omit(program, &outside(blocker)))?;
    if !check_minimal {
        return Ok(BlockerCheck {
            is_blocker,
            is_minimal: None,
        });
    }
    if !is_blocker {
        return Ok(BlockerCheck {
            is_blocker: false,
            is_minimal: Some(false),
        });
    }
    for c in blocker {
        let mut smaller = blocker.clone();
        smaller.remove(c);
        if !solver::is_satisfiable(&abstraction::omit(program, &outside(&smaller)))? {
            return Ok(BlockerCheck {
                is_blocker: true,
                is_minimal: Some(false),
            });
        }
    }
    Ok(BlockerCheck {
        is_blocker: true,
        is_minimal: Some(true),
    })
}

/// Picks object groups for the initial omission.
pub trait OmissionStrategy {
    fn name(&self) -> &str;
    /// Returns `take` group names out of the name-sorted group map.
    fn pick(
        &self,
        program: &Program,
        groups: &BTreeMap<String, Vec<Atom>>,
        take: usize,
        seed: u64,
    ) -> Vec<String>;
}

struct RandomGroups;

impl OmissionStrategy for RandomGroups {
    fn name(&self) -> &str {
        "random"
    }

    fn pick(
        &self,
        _program: &Program,
        groups: &BTreeMap<String, Vec<Atom>>,
        take: usize,
        seed: u64,
    ) -> Vec<String> {
        let mut names: Vec<String> = groups.keys().cloned().collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        names.shuffle(&mut rng);
        names.truncate(take);
        names
    }
}

struct LeastOccurringGroups;

impl OmissionStrategy for LeastOccurringGroups {
    fn name(&self) -> &str {
        "leastOccurring"
    }

    fn pick(
        &self,
        program: &Program,
        groups: &BTreeMap<String, Vec<Atom>>,
        take: usize,
        _seed: u64,
    ) -> Vec<String> {
        let counts = body_occurrences(program);
        let mut names: Vec<String> = groups.keys().cloned().collect();
        names.sort_by_key(|name| {
            groups[name]
                .iter()
                .map(|a| counts.get(a).copied().unwrap_or(0))
                .sum::<usize>()
        });
        names.truncate(take);
        names
    }
}

/// Looks up an initial-omission strategy by name: `random` or
/// `leastOccurring`.
pub fn omission_strategy(name: &str) -> Result<Box<dyn OmissionStrategy>, DriverError> {
    match name {
        "random" => Ok(Box::new(RandomGroups)),
        "leastOccurring" | "least-occurring" => Ok(Box::new(LeastOccurringGroups)),
        _ => Err(DriverError::UnknownStrategy(name.to_string())),
    }
}

/// Builds the initial omission by selecting ⌈percent·|groups|/100⌉ object
/// groups with the given strategy and omitting all of their atoms.
pub fn initial_omission(
    program: &Program,
    groups: &BTreeMap<String, Vec<Atom>>,
    percent: u32,
    strategy: &dyn OmissionStrategy,
    seed: u64,
) -> Result<OmissionSet, DriverError> {
    if groups.is_empty() {
        return Err(DriverError::EmptyGroups);
    }
    let take = ((percent as usize) * groups.len()).div_ceil(100);
    let chosen = strategy.pick(program, groups, take.min(groups.len()), seed);
    Ok(OmissionSet::new(
        chosen.iter().flat_map(|g| groups[g].iter().cloned()),
    ))
}

#[derive(Debug, Clone)]
pub struct BottomUpResult {
    pub initial_omission: OmissionSet,
    pub absref: AbsRefResult,
    pub absref_time: Duration,
    pub blocker: BlockerResult,
}

/// Bottom-up blocker search: refine an initial omission until the
/// abstraction is unsatisfiable, then shrink the kept part greedily. Errors
/// with [`DriverError::ProgramSatisfiable`] when refinement bottoms out on a
/// concrete answer set instead.
pub fn bottom_up_blocker(
    program: &Program,
    groups: &BTreeMap<String, Vec<Atom>>,
    percent: u32,
    strategy: &dyn OmissionStrategy,
    seed: u64,
    opts: &AbsRefOptions,
    order: &dyn ProbeOrder,
) -> Result<BottomUpResult, DriverError> {
    let initial = initial_omission(program, groups, percent, strategy, seed)?;
    let begin = Instant::now();
    let absref = abs_ref(program, &initial, opts)?;
    let absref_time = begin.elapsed();
    match &absref.outcome {
        AbsRefOutcome::ConcreteFound { .. } => Err(DriverError::ProgramSatisfiable),
        AbsRefOutcome::UnsatReached => {
            let blocker = compute_min_blocker(program, &absref.final_omission, order)?;
            Ok(BottomUpResult {
                initial_omission: initial,
                absref,
                absref_time,
                blocker,
            })
        }
    }
}

/// Greedy minimal put-back search for a spurious abstract answer set Î:
/// grow the set of atoms allowed to stay omitted while the refined
/// abstraction keeps rejecting Î; everything else must be put back. The
/// result is subset-minimal: each returned atom was probed to re-admit an
/// answer set projecting to Î, and re-admission persists under further
/// omission.
pub fn minimal_put_back(
    program: &Program,
    omission: &OmissionSet,
    interp: &Interpretation,
) -> Result<BTreeSet<Atom>, DriverError> {
    let omission = restrict_to_universe(program, omission);
    let classification = abstraction::classify(program, &omission, interp)?;
    if classification.verdict != Verdict::Spurious {
        return Err(DriverError::NotSpurious(interp.display()));
    }
    let kept = omission.kept(program.universe());
    let keep_bottom = |set: OmissionSet| {
        if omission.includes_bottom() {
            set.with_bottom()
        } else {
            set
        }
    };
    let eliminates = |staying: &BTreeSet<Atom>| -> Result<bool, DriverError> {
        let refined = abstraction::omit(
            program,
            &keep_bottom(OmissionSet::new(staying.iter().cloned())),
        );
        let pinned =
            abstraction::extend_with_rules(&refined, abstraction::build_query(interp, &kept));
        Ok(!solver::is_satisfiable(&pinned)?)
    };
    let mut staying: BTreeSet<Atom> = BTreeSet::new();
    for alpha in program.universe() {
        if !omission.contains(alpha) {
            continue;
        }
        let mut trial = staying.clone();
        trial.insert(alpha.clone());
        if eliminates(&trial)? {
            staying = trial;
        }
    }
    Ok(omission.atoms().difference(&staying).cloned().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse;

    fn atom(t: &str) -> Atom {
        Atom::new(t)
    }

    fn atoms(ts: &[&str]) -> BTreeSet<Atom> {
        ts.iter().map(Atom::new).collect()
    }

    fn interp(ts: &[&str]) -> Interpretation {
        Interpretation::from_atoms(ts.iter().map(Atom::new))
    }

    fn omission(ts: &[&str]) -> OmissionSet {
        OmissionSet::new(ts.iter().map(Atom::new))
    }

    fn pi_ex() -> Program {
        parse("c :- not d.\nd :- not c.\na :- not b, c.\nb :- d.\n").unwrap()
    }

    fn pi_ex_prime() -> Program {
        parse("c :- not d.\nd :- not c.\na :- not b, c.\nb :- not b.\n").unwrap()
    }

    fn singleton_groups(program: &Program) -> BTreeMap<String, Vec<Atom>> {
        program
            .universe()
            .iter()
            .map(|a| (a.text().to_string(), vec![a.clone()]))
            .collect()
    }

    #[test]
    fn absref_identity_abstraction_is_concrete_immediately() {
        let result = abs_ref(&pi_ex(), &OmissionSet::default(), &AbsRefOptions::default()).unwrap();
        assert_eq!(result.refinement_steps, 0);
        let AbsRefOutcome::ConcreteFound {
            abstract_witness,
            concrete_witness,
        } = &result.outcome
        else {
            panic!("expected a concrete witness, got {:?}", result.outcome);
        };
        assert_eq!(abstract_witness, concrete_witness);
        let expected: Vec<Interpretation> = vec![interp(&["c", "a"]), interp(&["d", "b"])];
        assert!(expected.contains(abstract_witness));
        assert_eq!(result.trace.len(), 1);
        assert_eq!(result.trace[0].verdict, "concrete");
    }

    #[test]
    fn absref_detects_unsatisfiability_without_refining() {
        let result = abs_ref(&pi_ex_prime(), &omission(&["d"]), &AbsRefOptions::default()).unwrap();
        assert!(matches!(result.outcome, AbsRefOutcome::UnsatReached));
        assert_eq!(result.refinement_steps, 0);
        assert_eq!(result.trace.len(), 1);
        assert_eq!(result.trace[0].verdict, "unsat");
        assert_eq!(result.trace[0].omitted_count, 1);
        assert!(!solver::is_satisfiable(&result.final_program).unwrap());
    }

    #[test]
    fn absref_terminates_within_initial_omission_size() {
        let result = abs_ref(&pi_ex(), &omission(&["b", "d"]), &AbsRefOptions::default()).unwrap();
        assert!(result.refinement_steps <= 2);
        assert!(matches!(
            result.outcome,
            AbsRefOutcome::ConcreteFound { .. }
        ));
        if let AbsRefOutcome::ConcreteFound {
            abstract_witness,
            concrete_witness,
        } = &result.outcome
        {
            let verdict =
                abstraction::classify(&pi_ex(), &result.final_omission, abstract_witness).unwrap();
            assert_eq!(verdict.verdict, Verdict::Concrete);
            assert!(solver::is_answer_set(&pi_ex(), concrete_witness));
        }
    }

    #[test]
    fn absref_traces_are_reproducible() {
        let a = abs_ref(&pi_ex(), &omission(&["b", "d"]), &AbsRefOptions::default()).unwrap();
        let b = abs_ref(&pi_ex(), &omission(&["b", "d"]), &AbsRefOptions::default()).unwrap();
        assert_eq!(trace_json(&a.trace), trace_json(&b.trace));
        assert!(trace_json(&a.trace).contains("\"iterations\""));
    }

    #[test]
    fn absref_respects_iteration_limit() {
        let opts = AbsRefOptions {
            max_iterations: Some(0),
            ..AbsRefOptions::default()
        };
        let p = parse("a :- b.\nb :- not c, a.\n").unwrap();
        // The abstraction of Π by {a} admits the spurious {b}, so at least
        // one refinement is needed; a zero-iteration budget must error out
        // if the first pick is spurious, or find ∅ concrete first.
        match abs_ref(&p, &omission(&["a"]), &opts) {
            Ok(result) => {
                assert!(matches!(
                    result.outcome,
                    AbsRefOutcome::ConcreteFound { .. }
                ))
            }
            Err(DriverError::IterationLimitExceeded(0)) => {}
            Err(other) => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn top_down_blocker_finds_the_odd_loop_atom() {
        let order = probe_order("input").unwrap();
        let result =
            compute_min_blocker(&pi_ex_prime(), &OmissionSet::default(), order.as_ref()).unwrap();
        assert_eq!(result.blocker, atoms(&["b"]));
        assert!(result.minimal);
        assert!(!solver::is_satisfiable(&result.blocker_rules).unwrap());
        // 1 precondition probe + 4 atom probes.
        assert_eq!(result.stats.probes, 5);
        let check = verify_blocker(&pi_ex_prime(), &result.blocker, true).unwrap();
        assert!(check.is_blocker);
        assert_eq!(check.is_minimal, Some(true));
    }

    #[test]
    fn blocker_search_requires_an_unsatisfiable_start() {
        let order = probe_order("input").unwrap();
        let err =
            compute_min_blocker(&pi_ex(), &OmissionSet::default(), order.as_ref()).unwrap_err();
        assert!(matches!(err, DriverError::PreconditionUnsat));
    }

    #[test]
    fn verify_blocker_matches_known_answers() {
        let p = pi_ex_prime();
        let check = verify_blocker(&p, &atoms(&["b"]), true).unwrap();
        assert_eq!((check.is_blocker, check.is_minimal), (true, Some(true)));
        let check = verify_blocker(&p, &atoms(&["a", "b", "c"]), true).unwrap();
        assert_eq!((check.is_blocker, check.is_minimal), (true, Some(false)));
        let check = verify_blocker(&p, &BTreeSet::new(), true).unwrap();
        assert!(!check.is_blocker);
        let unchecked = verify_blocker(&p, &atoms(&["b"]), false).unwrap();
        assert_eq!(unchecked.is_minimal, None);
    }

    #[test]
    fn probe_orders_cover_registry_and_determinism() {
        let p = parse("a :- b, c.\nd :- b.\n:- c.\n").unwrap();
        let candidates: Vec<Atom> = p.universe().to_vec();
        let input = probe_order("input").unwrap();
        assert_eq!(input.order(&p, &candidates), candidates);
        // Body occurrences: a 0, b 2, c 2, d 0; ties break by universe
        // position (a before d, b before c).
        let least = probe_order("least-occurring").unwrap();
        assert_eq!(
            least.order(&p, &candidates),
            vec![atom("a"), atom("d"), atom("b"), atom("c")]
        );
        let seeded = probe_order("seed:7").unwrap();
        assert_eq!(seeded.order(&p, &candidates), seeded.order(&p, &candidates));
        assert!(probe_order("seed:x").is_err());
        assert!(matches!(
            probe_order("alphabetical"),
            Err(DriverError::UnknownOrder(_))
        ));
    }

    #[test]
    fn initial_omission_selects_groups_by_percent() {
        let p = pi_ex();
        let groups = singleton_groups(&p);
        let random = omission_strategy("random").unwrap();
        let none = initial_omission(&p, &groups, 0, random.as_ref(), 1).unwrap();
        assert!(none.is_empty());
        let all = initial_omission(&p, &groups, 100, random.as_ref(), 1).unwrap();
        assert_eq!(all.atoms(), &atoms(&["a", "b", "c", "d"]));
        let half = initial_omission(&p, &groups, 50, random.as_ref(), 1).unwrap();
        assert_eq!(half.len(), 2);
        let again = initial_omission(&p, &groups, 50, random.as_ref(), 1).unwrap();
        assert_eq!(half, again);
        assert!(matches!(
            initial_omission(&p, &BTreeMap::new(), 50, random.as_ref(), 1),
            Err(DriverError::EmptyGroups)
        ));
    }

    #[test]
    fn least_occurring_strategy_prefers_rare_atoms() {
        let p = parse("a :- b, c.\nd :- b.\n:- c.\n").unwrap();
        let mut groups = BTreeMap::new();
        groups.insert("g1".to_string(), vec![atom("b"), atom("c")]);
        groups.insert("g2".to_string(), vec![atom("a"), atom("d")]);
        let strategy = omission_strategy("leastOccurring").unwrap();
        let picked = initial_omission(&p, &groups, 50, strategy.as_ref(), 0).unwrap();
        assert_eq!(picked.atoms(), &atoms(&["a", "d"]));
        assert!(matches!(
            omission_strategy("mostOccurring"),
            Err(DriverError::UnknownStrategy(_))
        ));
    }

    #[test]
    fn bottom_up_blocker_agrees_with_top_down() {
        let p = pi_ex_prime();
        let groups = singleton_groups(&p);
        let strategy = omission_strategy("random").unwrap();
        let order = probe_order("input").unwrap();
        let result = bottom_up_blocker(
            &p,
            &groups,
            100,
            strategy.as_ref(),
            0,
            &AbsRefOptions::default(),
            order.as_ref(),
        )
        .unwrap();
        assert_eq!(result.blocker.blocker, atoms(&["b"]));
        assert!(matches!(result.absref.outcome, AbsRefOutcome::UnsatReached));
        let check = verify_blocker(&p, &result.blocker.blocker, true).unwrap();
        assert_eq!((check.is_blocker, check.is_minimal), (true, Some(true)));
    }

    #[test]
    fn bottom_up_blocker_rejects_satisfiable_programs() {
        let p = pi_ex();
        let groups = singleton_groups(&p);
        let strategy = omission_strategy("random").unwrap();
        let order = probe_order("input").unwrap();
        let err = bottom_up_blocker(
            &p,
            &groups,
            100,
            strategy.as_ref(),
            0,
            &AbsRefOptions::default(),
            order.as_ref(),
        )
        .unwrap_err();
        assert!(matches!(err, DriverError::ProgramSatisfiable));
    }

    #[test]
    fn put_back_of_trivially_spurious_answer_set_is_everything() {
        let pb = minimal_put_back(&pi_ex(), &omission(&["b", "d"]), &interp(&["c"])).unwrap();
        assert_eq!(pb, atoms(&["b", "d"]));
    }

    #[test]
    fn put_back_can_be_a_singleton() {
        let p = parse("a :- b.\nb :- not c, a.\n").unwrap();
        let pb = minimal_put_back(&p, &omission(&["a"]), &interp(&["b"])).unwrap();
        assert_eq!(pb, atoms(&["a"]));
    }

    #[test]
    fn put_back_rejects_concrete_answer_sets() {
        let err =
            minimal_put_back(&pi_ex(), &omission(&["b", "d"]), &interp(&["c", "a"])).unwrap_err();
        assert!(matches!(err, DriverError::NotSpurious(_)));
    }

    #[test]
    fn put_back_is_subset_minimal() {
        // For every returned atom, putting back everything except that atom
        // must re-admit an abstract answer set projecting to Î.
        let p = pi_ex();
        let a = omission(&["b", "d"]);
        let target = interp(&["c"]);
        let pb = minimal_put_back(&p, &a, &target).unwrap();
        let kept = a.kept(p.universe());
        for skip in &pb {
            let staying: BTreeSet<Atom> = a
                .atoms()
                .iter()
                .filter(|x| !pb.contains(*x) || *x == skip)
                .cloned()
                .collect();
            let refined = abstraction::omit(&p, &OmissionSet::new(staying.iter().cloned()));
            let pinned =
                abstraction::extend_with_rules(&refined, abstraction::build_query(&target, &kept));
            assert!(
                solver::is_satisfiable(&pinned).unwrap(),
                "dropping {skip:?} from the put-back set should re-admit Î"
            );
        }
    }

    #[test]
    fn badomit_objective_parses_and_caps() {
        assert_eq!(
            BadomitObjective::parse("minimize"),
            Some(BadomitObjective::Minimize)
        );
        assert_eq!(
            BadomitObjective::parse("bound5"),
            Some(BadomitObjective::Bound(5))
        );
        assert_eq!(BadomitObjective::parse("bound3"), None);
        assert_eq!(BadomitObjective::Bound(2).cap(5), Some(3));
        assert_eq!(BadomitObjective::Bound(10).cap(5), Some(1));
        assert_eq!(BadomitObjective::Minimize.cap(5), None);
    }
}
