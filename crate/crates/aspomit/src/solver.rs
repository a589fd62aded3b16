//! Answer-set engines for ground normal programs with choice rules and
//! double negation.
//!
//! Three engines sit behind a common trait and are selected by name:
//!
//! - `builtin`: deterministic chronological backtracking (atom ids ascending,
//!   false branch first) with unit propagation, verifying every total
//!   candidate against the GL reduct;
//! - `bruteforce`: subset enumeration over the pre-expansion universe,
//!   capped at [`BRUTE_FORCE_ATOM_CAP`] atoms — the oracle the builtin
//!   engine is tested against;
//! - `external`: adapter for an external solver process (env var
//!   `ASPOMIT_SOLVER`), used for differential testing.
//!
//! Answer sets are reported with generated `__` atoms stripped; the raw
//! (pre-stripping) sets are kept alongside for callers that need tag atoms.

use crate::parser::{serialize, SerializeStyle};
use crate::program::{Atom, Head, Interpretation, Program, Rule};
use std::collections::{BTreeSet, HashSet};
use std::io::Read;
use std::io::Write as _;
use std::time::{Duration, Instant};
use thiserror::Error;

/// Atom cap for the brute-force engine (2^24 subsets is already generous).
pub const BRUTE_FORCE_ATOM_CAP: usize = 24;

/// Default wall-clock budget for one external solver call.
pub const DEFAULT_EXTERNAL_TIMEOUT: Duration = Duration::from_secs(60);

#[derive(Debug, Error)]
pub enum SolveError {
    #[error(
        "universe too large for exhaustive enumeration: {atoms} atoms exceed the cap of {cap}"
    )]
    UniverseTooLarge { atoms: usize, cap: usize },
    #[error("external solver failure: {0}")]
    ExternalSolverFailure(String),
    #[error("unknown solver engine `{0}`")]
    UnknownEngine(String),
}

/// Cardinality objective over the request's marked atoms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Objective {
    /// Plain enumeration.
    #[default]
    None,
    /// Keep only answer sets I with |I ∩ marked| ≤ k (hard bound during
    /// search).
    Bound(usize),
    /// Keep only answer sets of minimal |I ∩ marked| (branch and bound).
    Minimize,
}

#[derive(Debug, Clone)]
pub struct SolveRequest {
    pub program: Program,
    /// Maximum number of (deduplicated) answer sets to report; 0 = all.
    pub limit: usize,
    /// Atoms counted by the objective.
    pub marked: BTreeSet<Atom>,
    pub objective: Objective,
    /// Engine name; see [`EngineRegistry::standard`].
    pub engine: String,
}

impl SolveRequest {
    pub fn new(program: Program) -> Self {
        SolveRequest {
            program,
            limit: 0,
            marked: BTreeSet::new(),
            objective: Objective::None,
            engine: "builtin".into(),
        }
    }

    pub fn with_limit(mut self, limit: usize) -> Self {
        self.limit = limit;
        self
    }

    pub fn with_objective(mut self, marked: BTreeSet<Atom>, objective: Objective) -> Self {
        self.marked = marked;
        self.objective = objective;
        self
    }

    pub fn with_engine(mut self, engine: impl Into<String>) -> Self {
        self.engine = engine.into();
        self
    }
}

#[derive(Debug, Clone, Default)]
pub struct SolveStats {
    /// Branching decisions taken by the builtin engine.
    pub decisions: u64,
    /// Answer-set verifications (reduct + least-model checks).
    pub reduct_checks: u64,
    pub wall_time: Duration,
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    /// Deduplicated answer sets with generated atoms stripped, in first
    /// discovery order.
    pub answer_sets: Vec<Interpretation>,
    /// Every verified answer set before stripping and deduplication, in
    /// discovery order. The first raw set strips to the first reported one.
    pub raw_answer_sets: Vec<Interpretation>,
    /// True when the search space was fully explored (not cut off by
    /// `limit`).
    pub exhausted: bool,
    pub stats: SolveStats,
}

impl SolveResult {
    pub fn is_satisfiable(&self) -> bool {
        !self.answer_sets.is_empty()
    }
}

pub trait SolverEngine {
    fn name(&self) -> &str;
    fn enumerate(&self, req: &SolveRequest) -> Result<SolveResult, SolveError>;
}

/// Name-indexed engine collection; runtime engine selection goes through
/// here.
pub struct EngineRegistry {
    engines: Vec<Box<dyn SolverEngine>>,
}

impl EngineRegistry {
    pub fn empty() -> Self {
        EngineRegistry {
            engines: Vec::new(),
        }
    }

    /// The stock registry: `builtin`, `bruteforce`, `external`.
    pub fn standard() -> Self {
        let mut r = Self::empty();
        r.register(Box::new(BuiltinEngine));
        r.register(Box::new(BruteForceEngine));
        r.register(Box::new(ExternalEngine::from_env()));
        r
    }

    pub fn register(&mut self, engine: Box<dyn SolverEngine>) {
        self.engines.push(engine);
    }

    pub fn get(&self, name: &str) -> Option<&dyn SolverEngine> {
        self.engines
            .iter()
            .find(|e| e.name() == name)
            .map(|e| e.as_ref())
    }

    pub fn names(&self) -> Vec<&str> {
        self.engines.iter().map(|e| e.name()).collect()
    }
}

/// Runs a request on the standard registry.
pub fn solve(req: &SolveRequest) -> Result<SolveResult, SolveError> {
    let registry = EngineRegistry::standard();
    let engine = registry
        .get(&req.engine)
        .ok_or_else(|| SolveError::UnknownEngine(req.engine.clone()))?;
    engine.enumerate(req)
}

/// True iff the program has at least one answer set (builtin engine,
/// limit 1).
pub fn is_satisfiable(program: &Program) -> Result<bool, SolveError> {
    Ok(solve(&SolveRequest::new(program.clone()).with_limit(1))?.is_satisfiable())
}

/// Enumerates all answer sets with the builtin engine.
pub fn all_answer_sets(program: &Program) -> Result<Vec<Interpretation>, SolveError> {
    Ok(solve(&SolveRequest::new(program.clone()))?.answer_sets)
}

/// The complement atom ᾱ introduced when expanding the choice rule {α} ← B.
pub fn complement_atom(alpha: &Atom) -> Atom {
    Atom::new(format!("__c({})", alpha.text()))
}

/// Complement atom for `alpha` guaranteed fresh for `program`. Tool-built
/// programs (for example generated debugging programs) can already contain
/// `__c(α)` as an ordinary atom with rules of its own; reusing that name
/// for the expansion complement would wire the bookkeeping atom into those
/// rules. Numbered fallbacks `__c2(α)`, `__c3(α)`, … avoid the capture.
pub fn fresh_complement(program: &Program, alpha: &Atom) -> Atom {
    let base = complement_atom(alpha);
    if !program.universe_contains(&base) {
        return base;
    }
    (2u32..)
        .map(|k| Atom::new(format!("__c{k}({})", alpha.text())))
        .find(|cand| !program.universe_contains(cand))
        .expect("numbered complement names are unbounded")
}

/// Replaces each choice rule {α} ← B by the pair α ← B, not ᾱ and
/// ᾱ ← B, not α with ᾱ = `__c(α)` (or a numbered variant when that atom is
/// taken). Plain rules pass through; the output has no Choice heads.
/// Complement rules are named after their source with a `__c` suffix.
pub fn expand_choices(program: &Program) -> Program {
    debug_assert!(!program.has_disjunctive_heads());
    let mut rules = Vec::new();
    for r in program.rules() {
        match &r.head {
            Head::Choice(alpha) => {
                let compl = fresh_complement(program, alpha);
                let mut neg_a = r.neg_body().to_vec();
                neg_a.push(compl.clone());
                rules.push(Rule::new(
                    0,
                    r.name.clone(),
                    Head::Plain(alpha.clone()),
                    r.pos_body().to_vec(),
                    neg_a,
                    r.negneg_body().to_vec(),
                ));
                let mut neg_c = r.neg_body().to_vec();
                neg_c.push(alpha.clone());
                rules.push(Rule::new(
                    0,
                    format!("{}__c", r.name),
                    Head::Plain(compl),
                    r.pos_body().to_vec(),
                    neg_c,
                    r.negneg_body().to_vec(),
                ));
            }
            _ => rules.push(r.clone()),
        }
    }
    Program::from_rules(rules).with_universe(program.universe().iter().cloned())
}

/// The GL reduct Π^I extended to double negation: delete every rule with
/// negBody ∩ I ≠ ∅ or negnegBody ⊄ I, strip negBody and negnegBody from the
/// survivors.
pub fn gl_reduct(program: &Program, interp: &Interpretation) -> Program {
    debug_assert!(!program.has_choice_heads() && !program.has_disjunctive_heads());
    let rules = program
        .rules()
        .iter()
        .filter(|r| {
            r.neg_body().iter().all(|a| !interp.contains(a))
                && r.negneg_body().iter().all(|a| interp.contains(a))
        })
        .map(|r| {
            Rule::new(
                0,
                r.name.clone(),
                r.head.clone(),
                r.pos_body().to_vec(),
                Vec::new(),
                Vec::new(),
            )
        })
        .collect();
    Program::from_rules(rules).with_universe(program.universe().iter().cloned())
}

/// Least model of the definite part of a positive program (Bottom-headed
/// rules are ignored; callers check constraints separately).
pub fn least_model(program: &Program) -> Interpretation {
    debug_assert!(!program.has_choice_heads() && !program.has_disjunctive_heads());
    let mut derived: HashSet<&Atom> = HashSet::new();
    loop {
        let mut changed = false;
        for r in program.rules() {
            let Head::Plain(h) = &r.head else { continue };
            if derived.contains(h) {
                continue;
            }
            debug_assert!(r.neg_body().is_empty() && r.negneg_body().is_empty());
            if r.pos_body().iter().all(|a| derived.contains(a)) {
                derived.insert(h);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    Interpretation::from_atoms(derived.into_iter().cloned())
}

/// Answer-set check for a program without choice heads (post-expansion):
/// I must be a model of every rule and the least model of the definite part
/// of the reduct must equal I exactly.
pub fn is_answer_set_expanded(program: &Program, interp: &Interpretation) -> bool {
    debug_assert!(!program.has_choice_heads() && !program.has_disjunctive_heads());
    for r in program.rules() {
        if r.body_satisfied(interp) {
            match &r.head {
                Head::Bottom => return false,
                Head::Plain(h) => {
                    if !interp.contains(h) {
                        return false;
                    }
                }
                _ => unreachable!(),
            }
        }
    }
    least_model(&gl_reduct(program, interp)) == *interp
}

/// Answer-set check for programs that may contain choice rules. `interp`
/// ranges over the pre-expansion universe; the truth of each complement
/// atom `__c(α)` is forced (true iff α is false and some choice body for α
/// holds), so no completion search is needed.
pub fn is_answer_set(program: &Program, interp: &Interpretation) -> bool {
    if interp.iter().any(|a| !program.universe_contains(a)) {
        return false;
    }
    let expanded = expand_choices(program);
    let mut full = interp.clone();
    for r in program.rules() {
        if let Head::Choice(alpha) = &r.head {
            if !interp.contains(alpha) && r.body_satisfied(interp) {
                full.insert(fresh_complement(program, alpha));
            }
        }
    }
    is_answer_set_expanded(&expanded, &full)
}

// ---------------------------------------------------------------------------
// Compiled search representation shared by the builtin and brute-force
// engines.

struct CompiledRule {
    head: Option<usize>,
    pos: Vec<usize>,
    neg: Vec<usize>,
    negneg: Vec<usize>,
}

struct Compiled {
    atoms: Vec<Atom>,
    rules: Vec<CompiledRule>,
    /// Per atom: ids of rules with that atom as head.
    head_rules: Vec<Vec<usize>>,
    /// Per atom: ids of rules mentioning the atom (head or body), for
    /// incremental propagation.
    occurrences: Vec<Vec<usize>>,
    marked: Vec<bool>,
}

impl Compiled {
    fn new(program: &Program, marked: &BTreeSet<Atom>) -> Self {
        let atoms: Vec<Atom> = program.universe().to_vec();
        let mut head_rules = vec![Vec::new(); atoms.len()];
        let mut occurrences = vec![Vec::new(); atoms.len()];
        let mut rules = Vec::with_capacity(program.rules().len());
        let idx = |a: &Atom| program.atom_id(a).expect("atom in universe");
        for r in program.rules() {
            let head = match &r.head {
                Head::Bottom => None,
                Head::Plain(h) => Some(idx(h)),
                _ => unreachable!("compiled programs are expanded"),
            };
            let id = rules.len();
            let mut touched: Vec<usize> = Vec::new();
            if let Some(h) = head {
                head_rules[h].push(id);
                touched.push(h);
            }
            let pos: Vec<usize> = r.pos_body().iter().map(&idx).collect();
            let neg: Vec<usize> = r.neg_body().iter().map(&idx).collect();
            let negneg: Vec<usize> = r.negneg_body().iter().map(&idx).collect();
            touched.extend(pos.iter().chain(neg.iter()).chain(negneg.iter()).copied());
            touched.sort_unstable();
            touched.dedup();
            for a in touched {
                occurrences[a].push(id);
            }
            rules.push(CompiledRule {
                head,
                pos,
                neg,
                negneg,
            });
        }
        let marked = atoms.iter().map(|a| marked.contains(a)).collect();
        Compiled {
            atoms,
            rules,
            head_rules,
            occurrences,
            marked,
        }
    }

    fn interpretation(&self, assign: &[i8]) -> Interpretation {
        Interpretation::from_atoms(
            assign
                .iter()
                .enumerate()
                .filter(|(_, &v)| v == 1)
                .map(|(i, _)| self.atoms[i].clone()),
        )
    }

    /// Model check plus reduct least-model check on a total assignment.
    fn verify(&self, assign: &[i8]) -> bool {
        for r in &self.rules {
            let sat = r.pos.iter().all(|&a| assign[a] == 1)
                && r.neg.iter().all(|&a| assign[a] == 0)
                && r.negneg.iter().all(|&a| assign[a] == 1);
            if sat {
                match r.head {
                    None => return false,
                    Some(h) => {
                        if assign[h] != 1 {
                            return false;
                        }
                    }
                }
            }
        }
        let mut derived = vec![false; self.atoms.len()];
        loop {
            let mut changed = false;
            for r in &self.rules {
                let Some(h) = r.head else { continue };
                if derived[h] {
                    continue;
                }
                if r.neg.iter().all(|&a| assign[a] == 0)
                    && r.negneg.iter().all(|&a| assign[a] == 1)
                    && r.pos.iter().all(|&a| derived[a])
                {
                    derived[h] = true;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        (0..self.atoms.len()).all(|i| derived[i] == (assign[i] == 1))
    }
}

enum BodyStatus {
    Satisfied,
    Falsified,
    /// `last` is the one unassigned literal when `unassigned == 1`:
    /// (atom, value that satisfies the literal).
    Open {
        unassigned: usize,
        last: (usize, bool),
    },
}

fn body_status(rule: &CompiledRule, assign: &[i8]) -> BodyStatus {
    let mut unassigned = 0;
    let mut last = (0, false);
    let literals = rule
        .pos
        .iter()
        .map(|&a| (a, true))
        .chain(rule.neg.iter().map(|&a| (a, false)))
        .chain(rule.negneg.iter().map(|&a| (a, true)));
    for (a, want) in literals {
        match assign[a] {
            -1 => {
                unassigned += 1;
                last = (a, want);
            }
            v => {
                if (v == 1) != want {
                    return BodyStatus::Falsified;
                }
            }
        }
    }
    if unassigned == 0 {
        BodyStatus::Satisfied
    } else {
        BodyStatus::Open { unassigned, last }
    }
}

struct Decision {
    trail_mark: usize,
    atom: usize,
    tried_true: bool,
}

struct Searcher<'a> {
    c: &'a Compiled,
    assign: Vec<i8>,
    trail: Vec<usize>,
    /// Number of trail entries whose consequences are already propagated.
    propagated: usize,
    decisions: Vec<Decision>,
    marked_true: usize,
    bound: usize,
    stats: SolveStats,
}

enum LeafFlow {
    Continue,
    /// Shrink the branch-and-bound limit to this value and continue.
    Tighten(usize),
    Stop,
}

impl<'a> Searcher<'a> {
    fn new(c: &'a Compiled, bound: usize) -> Self {
        Searcher {
            c,
            assign: vec![-1; c.atoms.len()],
            trail: Vec::new(),
            propagated: 0,
            decisions: Vec::new(),
            marked_true: 0,
            bound,
            stats: SolveStats::default(),
        }
    }

    fn set(&mut self, atom: usize, value: bool) -> bool {
        match self.assign[atom] {
            -1 => {
                self.assign[atom] = value as i8;
                self.trail.push(atom);
                if value && self.c.marked[atom] {
                    self.marked_true += 1;
                    if self.marked_true > self.bound {
                        return false;
                    }
                }
                true
            }
            v => v == value as i8,
        }
    }

    fn unwind(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let atom = self.trail.pop().unwrap();
            if self.assign[atom] == 1 && self.c.marked[atom] {
                self.marked_true -= 1;
            }
            self.assign[atom] = -1;
        }
        self.propagated = self.propagated.min(mark);
    }

    /// Rule-level inference: a satisfied body forces its head (conflict on
    /// ⊥); a rule whose head must stay underivable (⊥, or head assigned
    /// false) with exactly one open literal forces that literal blocked; a
    /// falsified body may leave the head unsupportable.
    fn infer_rule(&mut self, ri: usize) -> bool {
        let rule = &self.c.rules[ri];
        match body_status(rule, &self.assign) {
            BodyStatus::Satisfied => match rule.head {
                None => false,
                Some(h) => self.set(h, true),
            },
            BodyStatus::Falsified => match rule.head {
                Some(h) => self.check_support(h),
                None => true,
            },
            BodyStatus::Open { unassigned, last } => {
                let must_block = match rule.head {
                    None => true,
                    Some(h) => self.assign[h] == 0,
                };
                if must_block && unassigned == 1 {
                    let (atom, want) = last;
                    self.set(atom, !want)
                } else {
                    true
                }
            }
        }
    }

    /// An atom with every defining body falsified cannot be true in any
    /// answer set (true atoms must be supported).
    fn check_support(&mut self, h: usize) -> bool {
        if self.assign[h] == 0 {
            return true;
        }
        let c = self.c;
        let supportable = c.head_rules[h].iter().any(|&ri| {
            !matches!(
                body_status(&c.rules[ri], &self.assign),
                BodyStatus::Falsified
            )
        });
        if supportable {
            true
        } else {
            self.set(h, false)
        }
    }

    /// Processes unpropagated trail entries to fixpoint, revisiting only
    /// rules that mention a newly assigned atom.
    fn propagate(&mut self) -> bool {
        if self.marked_true > self.bound {
            return false;
        }
        let c = self.c;
        while self.propagated < self.trail.len() {
            let atom = self.trail[self.propagated];
            self.propagated += 1;
            for &ri in &c.occurrences[atom] {
                if !self.infer_rule(ri) {
                    return false;
                }
            }
        }
        true
    }

    /// One-time closure of the empty assignment: facts fire, unsupported
    /// atoms go false, single-literal constraints propagate.
    fn propagate_root(&mut self) -> bool {
        for ri in 0..self.c.rules.len() {
            if !self.infer_rule(ri) {
                return false;
            }
        }
        for a in 0..self.c.atoms.len() {
            if !self.check_support(a) {
                return false;
            }
        }
        self.propagate()
    }

    fn pick(&self) -> Option<usize> {
        self.assign.iter().position(|&v| v == -1)
    }

    /// Returns false only when halted early by the leaf callback.
    fn run(&mut self, mut on_leaf: impl FnMut(&mut SolveStats, &[i8], usize) -> LeafFlow) -> bool {
        if !self.propagate_root() {
            return true;
        }
        loop {
            match self.pick() {
                Some(atom) => {
                    self.decisions.push(Decision {
                        trail_mark: self.trail.len(),
                        atom,
                        tried_true: false,
                    });
                    self.stats.decisions += 1;
                    if !(self.set(atom, false) && self.propagate()) && !self.backtrack() {
                        return true;
                    }
                }
                None => {
                    match on_leaf(&mut self.stats, &self.assign, self.marked_true) {
                        LeafFlow::Continue => {}
                        LeafFlow::Tighten(b) => self.bound = self.bound.min(b),
                        LeafFlow::Stop => return false,
                    }
                    if !self.backtrack() {
                        return true;
                    }
                }
            }
        }
    }

    /// Returns false when the whole space is exhausted.
    fn backtrack(&mut self) -> bool {
        while let Some(d) = self.decisions.pop() {
            self.unwind(d.trail_mark);
            if !d.tried_true {
                self.decisions.push(Decision {
                    trail_mark: d.trail_mark,
                    atom: d.atom,
                    tried_true: true,
                });
                self.stats.decisions += 1;
                if self.set(d.atom, true) && self.propagate() {
                    return true;
                }
                self.decisions.pop();
                self.unwind(d.trail_mark);
            }
        }
        false
    }
}

/// Shared post-processing: strip, deduplicate, order by first discovery.
struct Collector {
    limit: usize,
    seen: HashSet<Interpretation>,
    answer_sets: Vec<Interpretation>,
    raw_answer_sets: Vec<Interpretation>,
}

impl Collector {
    fn new(limit: usize) -> Self {
        Collector {
            limit,
            seen: HashSet::new(),
            answer_sets: Vec::new(),
            raw_answer_sets: Vec::new(),
        }
    }

    /// Returns true when the limit has been reached.
    fn push(&mut self, raw: Interpretation) -> bool {
        let stripped = raw.strip_generated();
        self.raw_answer_sets.push(raw);
        if self.seen.insert(stripped.clone()) {
            self.answer_sets.push(stripped);
        }
        self.limit > 0 && self.answer_sets.len() >= self.limit
    }
}

pub struct BuiltinEngine;

impl SolverEngine for BuiltinEngine {
    fn name(&self) -> &str {
        "builtin"
    }

    fn enumerate(&self, req: &SolveRequest) -> Result<SolveResult, SolveError> {
        let start = Instant::now();
        let expanded = expand_choices(&req.program);
        let compiled = Compiled::new(&expanded, &req.marked);
        let initial_bound = match req.objective {
            Objective::Bound(k) => k,
            _ => usize::MAX,
        };
        let mut searcher = Searcher::new(&compiled, initial_bound);
        let result = match req.objective {
            Objective::Minimize => {
                let mut leaves: Vec<(Interpretation, usize)> = Vec::new();
                let mut best = usize::MAX;
                let exhausted = searcher.run(|stats, assign, cost| {
                    stats.reduct_checks += 1;
                    if compiled.verify(assign) {
                        leaves.push((compiled.interpretation(assign), cost));
                        if cost < best {
                            best = cost;
                            return LeafFlow::Tighten(best);
                        }
                    }
                    LeafFlow::Continue
                });
                let mut collector = Collector::new(0);
                for (raw, cost) in leaves {
                    if cost == best {
                        collector.push(raw);
                    }
                }
                if req.limit > 0 {
                    collector.answer_sets.truncate(req.limit);
                }
                (collector, exhausted)
            }
            _ => {
                let mut collector = Collector::new(req.limit);
                let exhausted = searcher.run(|stats, assign, _cost| {
                    stats.reduct_checks += 1;
                    if compiled.verify(assign) && collector.push(compiled.interpretation(assign)) {
                        return LeafFlow::Stop;
                    }
                    LeafFlow::Continue
                });
                (collector, exhausted)
            }
        };
        let (collector, exhausted) = result;
        let mut stats = searcher.stats.clone();
        stats.wall_time = start.elapsed();
        Ok(SolveResult {
            answer_sets: collector.answer_sets,
            raw_answer_sets: collector.raw_answer_sets,
            exhausted,
            stats,
        })
    }
}

pub struct BruteForceEngine;

impl SolverEngine for BruteForceEngine {
    fn name(&self) -> &str {
        "bruteforce"
    }

    fn enumerate(&self, req: &SolveRequest) -> Result<SolveResult, SolveError> {
        let start = Instant::now();
        let universe = req.program.universe();
        if universe.len() > BRUTE_FORCE_ATOM_CAP {
            return Err(SolveError::UniverseTooLarge {
                atoms: universe.len(),
                cap: BRUTE_FORCE_ATOM_CAP,
            });
        }
        let expanded = expand_choices(&req.program);
        let compiled = Compiled::new(&expanded, &req.marked);
        let orig_ids: Vec<usize> = universe
            .iter()
            .map(|a| expanded.atom_id(a).expect("expansion keeps the universe"))
            .collect();
        // Choice completion data: (head, body literal lists, complement id),
        // all as indices into the expanded assignment.
        struct ChoiceInfo {
            alpha: usize,
            pos: Vec<usize>,
            neg: Vec<usize>,
            negneg: Vec<usize>,
            compl: usize,
        }
        let choices: Vec<ChoiceInfo> = req
            .program
            .rules()
            .iter()
            .filter_map(|r| match &r.head {
                Head::Choice(alpha) => Some(ChoiceInfo {
                    alpha: expanded.atom_id(alpha).unwrap(),
                    pos: r
                        .pos_body()
                        .iter()
                        .map(|a| expanded.atom_id(a).unwrap())
                        .collect(),
                    neg: r
                        .neg_body()
                        .iter()
                        .map(|a| expanded.atom_id(a).unwrap())
                        .collect(),
                    negneg: r
                        .negneg_body()
                        .iter()
                        .map(|a| expanded.atom_id(a).unwrap())
                        .collect(),
                    compl: expanded
                        .atom_id(&fresh_complement(&req.program, alpha))
                        .unwrap(),
                }),
                _ => None,
            })
            .collect();
        let mut stats = SolveStats::default();
        let mut leaves: Vec<(Interpretation, usize)> = Vec::new();
        let n = universe.len();
        let mut cut_off = false;
        let mut collector = Collector::new(match req.objective {
            Objective::Minimize => 0,
            _ => req.limit,
        });
        for mask in 0u64..(1u64 << n) {
            let mut assign = vec![0i8; compiled.atoms.len()];
            for (bit, &id) in orig_ids.iter().enumerate() {
                if mask & (1 << bit) != 0 {
                    assign[id] = 1;
                }
            }
            for ch in &choices {
                if assign[ch.alpha] == 0
                    && ch.pos.iter().all(|&a| assign[a] == 1)
                    && ch.neg.iter().all(|&a| assign[a] == 0)
                    && ch.negneg.iter().all(|&a| assign[a] == 1)
                {
                    assign[ch.compl] = 1;
                }
            }
            stats.reduct_checks += 1;
            if !compiled.verify(&assign) {
                continue;
            }
            let cost = (0..compiled.atoms.len())
                .filter(|&i| compiled.marked[i] && assign[i] == 1)
                .count();
            match req.objective {
                Objective::None => {}
                Objective::Bound(k) => {
                    if cost > k {
                        continue;
                    }
                }
                Objective::Minimize => {
                    leaves.push((compiled.interpretation(&assign), cost));
                    continue;
                }
            }
            if collector.push(compiled.interpretation(&assign)) {
                cut_off = mask + 1 < (1u64 << n);
                break;
            }
        }
        if req.objective == Objective::Minimize {
            if let Some(best) = leaves.iter().map(|(_, c)| *c).min() {
                for (raw, cost) in leaves {
                    if cost == best {
                        collector.push(raw);
                    }
                }
            }
            if req.limit > 0 {
                collector.answer_sets.truncate(req.limit);
            }
        }
        stats.wall_time = start.elapsed();
        Ok(SolveResult {
            answer_sets: collector.answer_sets,
            raw_answer_sets: collector.raw_answer_sets,
            exhausted: !cut_off,
            stats,
        })
    }
}

/// Adapter for an external answer-set solver.
///
/// Protocol: the expanded program is written to the child's stdin in
/// canonical `.lp` syntax; the child prints one answer set per line as
/// space-separated atom names (an empty line is the empty answer set) and
/// exits 0. Anything else — bad exit status, unparseable atoms, sets that
/// fail verification, or a timeout — is an [`SolveError::ExternalSolverFailure`].
pub struct ExternalEngine {
    command: Option<Vec<String>>,
    timeout: Duration,
}

impl ExternalEngine {
    /// Resolves the command from `ASPOMIT_SOLVER` at call time.
    pub fn from_env() -> Self {
        ExternalEngine {
            command: None,
            timeout: DEFAULT_EXTERNAL_TIMEOUT,
        }
    }

    /// Fixed command line (whitespace-split), bypassing the environment.
    pub fn with_command(command: &str) -> Self {
        ExternalEngine {
            command: Some(command.split_whitespace().map(String::from).collect()),
            timeout: DEFAULT_EXTERNAL_TIMEOUT,
        }
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }

    fn command(&self) -> Result<Vec<String>, SolveError> {
        let parts = match &self.command {
            Some(parts) => parts.clone(),
            None => std::env::var("ASPOMIT_SOLVER")
                .map_err(|_| {
                    SolveError::ExternalSolverFailure(
                        "ASPOMIT_SOLVER is not set; configure the external solver command".into(),
                    )
                })?
                .split_whitespace()
                .map(String::from)
                .collect(),
        };
        if parts.is_empty() {
            return Err(SolveError::ExternalSolverFailure(
                "empty external solver command".into(),
            ));
        }
        Ok(parts)
    }

    fn run_child(&self, input: &str) -> Result<String, SolveError> {
        let parts = self.command()?;
        let fail = |msg: String| SolveError::ExternalSolverFailure(msg);
        let mut child = std::process::Command::new(&parts[0])
            .args(&parts[1..])
            .stdin(std::process::Stdio::piped())
            .stdout(std::process::Stdio::piped())
            .stderr(std::process::Stdio::null())
            .spawn()
            .map_err(|e| fail(format!("failed to launch `{}`: {e}", parts[0])))?;
        {
            let mut stdin = child.stdin.take().expect("piped stdin");
            stdin
                .write_all(input.as_bytes())
                .map_err(|e| fail(format!("failed to write program: {e}")))?;
        }
        let mut stdout = child.stdout.take().expect("piped stdout");
        let reader = std::thread::spawn(move || {
            let mut out = String::new();
            stdout.read_to_string(&mut out).map(|_| out)
        });
        let deadline = Instant::now() + self.timeout;
        let status = loop {
            match child.try_wait() {
                Ok(Some(status)) => break status,
                Ok(None) => {
                    if Instant::now() > deadline {
                        let _ = child.kill();
                        let _ = child.wait();
                        return Err(fail(format!("timed out after {:.0?}", self.timeout)));
                    }
                    std::thread::sleep(Duration::from_millis(5));
                }
                Err(e) => return Err(fail(format!("wait failed: {e}"))),
            }
        };
        let output = reader
            .join()
            .map_err(|_| fail("output reader panicked".into()))?
            .map_err(|e| fail(format!("failed to read output: {e}")))?;
        if !status.success() {
            return Err(fail(format!("solver exited with {status}")));
        }
        Ok(output)
    }
}

fn plausible_atom_token(tok: &str) -> bool {
    let mut depth = 0i32;
    for c in tok.chars() {
        match c {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth < 0 {
                    return false;
                }
            }
            c if c.is_ascii_alphanumeric() || c == '_' || c == ',' || c == '"' => {}
            _ => return false,
        }
    }
    depth == 0
        && tok
            .chars()
            .next()
            .is_some_and(|c| c.is_ascii_lowercase() || c == '_')
}

impl SolverEngine for ExternalEngine {
    fn name(&self) -> &str {
        "external"
    }

    fn enumerate(&self, req: &SolveRequest) -> Result<SolveResult, SolveError> {
        let start = Instant::now();
        let expanded = expand_choices(&req.program);
        let text = serialize(&expanded, SerializeStyle::Canonical);
        let output = self.run_child(&text)?;
        let fail = |msg: String| SolveError::ExternalSolverFailure(msg);
        let mut raws = Vec::new();
        for line in output.lines() {
            let mut set = Interpretation::empty();
            for tok in line.split_whitespace() {
                if !plausible_atom_token(tok) {
                    return Err(fail(format!("unparseable atom token `{tok}`")));
                }
                let atom = Atom::new(tok);
                if !expanded.universe_contains(&atom) {
                    return Err(fail(format!("atom `{tok}` is not in the program")));
                }
                set.insert(atom);
            }
            if !is_answer_set_expanded(&expanded, &set) {
                return Err(fail(format!(
                    "claimed answer set {} fails verification",
                    set.display()
                )));
            }
            raws.push(set);
        }
        // Objectives and limit are applied after the fact; the protocol has
        // no way to push them into the child.
        let cost = |i: &Interpretation| i.iter().filter(|a| req.marked.contains(a)).count();
        let kept: Vec<Interpretation> = match req.objective {
            Objective::None => raws,
            Objective::Bound(k) => raws.into_iter().filter(|i| cost(i) <= k).collect(),
            Objective::Minimize => {
                let best = raws.iter().map(&cost).min();
                match best {
                    Some(best) => raws.into_iter().filter(|i| cost(i) == best).collect(),
                    None => Vec::new(),
                }
            }
        };
        let mut collector = Collector::new(req.limit);
        let mut stats = SolveStats::default();
        for raw in kept {
            stats.reduct_checks += 1;
            if collector.push(raw) {
                break;
            }
        }
        stats.wall_time = start.elapsed();
        Ok(SolveResult {
            answer_sets: collector.answer_sets,
            raw_answer_sets: collector.raw_answer_sets,
            exhausted: true,
            stats,
        })
    }
}
