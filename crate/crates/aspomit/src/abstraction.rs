//! The omission operator omit(Π, A) and everything built directly on it:
//! the spuriousness query, classification of abstract answer sets,
//! faithfulness checks, and disjunction splitting.
//!
//! Omission maps every omitted atom to ⊤ and projects it away. Per rule:
//! untouched rules are kept; a touched rule whose head atom survives is
//! weakened to a choice over the remaining body; rules headed by an omitted
//! atom and touched constraints are dropped. The result over-approximates:
//! every answer set of Π projects to an answer set of omit(Π, A).

use crate::program::{Atom, Head, Interpretation, OmissionSet, Program, Rule};
use crate::solver::{self, SolveError, SolveRequest, BRUTE_FORCE_ATOM_CAP};
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AbstractionError {
    #[error("{0} is not an answer set of the abstract program")]
    NotAnAbstractAnswerSet(String),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

/// How one abstract rule relates to its source rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleProvenance {
    /// Syntactically identical to the source rule.
    Kept { source: usize },
    /// Head turned into a choice and/or body literals removed.
    Weakened { source: usize },
}

#[derive(Debug, Clone)]
pub struct AbstractionOutcome {
    /// omit(Π, A), universe Ā, rule names inherited from the sources.
    pub abstract_program: Program,
    /// Indexed by abstract rule id.
    pub provenance: Vec<RuleProvenance>,
    /// Source ids of dropped rules (head omitted, or touched constraint).
    pub omitted_rules: BTreeSet<usize>,
    /// Source ids of weakened rules (the touched-but-surviving set).
    pub changed_rules: BTreeSet<usize>,
    /// Non-fatal oddities, e.g. omitted atoms outside the universe.
    pub warnings: Vec<String>,
}

enum OmitOutcome {
    Kept(Rule),
    Weakened(Rule),
    Dropped,
}

fn omit_rule_cases(rule: &Rule, omission: &OmissionSet) -> OmitOutcome {
    debug_assert!(!matches!(rule.head, Head::Disjunction(_)));
    let head_omitted = match rule.head.atom() {
        Some(h) => omission.contains(h),
        None => omission.includes_bottom(),
    };
    if head_omitted {
        return OmitOutcome::Dropped;
    }
    let touched = rule.body_atoms().any(|a| omission.contains(a));
    if !touched {
        return OmitOutcome::Kept(rule.clone());
    }
    let filter = |atoms: &[Atom]| -> Vec<Atom> {
        atoms
            .iter()
            .filter(|a| !omission.contains(a))
            .cloned()
            .collect()
    };
    match &rule.head {
        Head::Bottom => OmitOutcome::Dropped,
        Head::Disjunction(_) => unreachable!("disjunctive heads are split before omission"),
        Head::Plain(h) | Head::Choice(h) => OmitOutcome::Weakened(Rule::new(
            rule.id,
            rule.name.clone(),
            Head::Choice(h.clone()),
            filter(rule.pos_body()),
            filter(rule.neg_body()),
            filter(rule.negneg_body()),
        )),
    }
}

/// Omission of a single rule: `None` when the rule is dropped.
pub fn omit_rule(rule: &Rule, omission: &OmissionSet) -> Option<Rule> {
    match omit_rule_cases(rule, omission) {
        OmitOutcome::Kept(r) | OmitOutcome::Weakened(r) => Some(r),
        OmitOutcome::Dropped => None,
    }
}

/// omit(Π, A) with full bookkeeping. Omitted atoms outside the universe are
/// ignored with a warning.
pub fn omit_program(program: &Program, omission: &OmissionSet) -> AbstractionOutcome {
    let mut warnings = Vec::new();
    let unknown: Vec<&Atom> = omission
        .atoms()
        .iter()
        .filter(|a| !program.universe_contains(a))
        .collect();
    for a in &unknown {
        warnings.push(format!(
            "omitted atom `{a}` is not in the universe; ignored"
        ));
    }
    let effective = if unknown.is_empty() {
        omission.clone()
    } else {
        let filtered = OmissionSet::new(
            omission
                .atoms()
                .iter()
                .filter(|a| program.universe_contains(a))
                .cloned(),
        );
        if omission.includes_bottom() {
            filtered.with_bottom()
        } else {
            filtered
        }
    };
    let mut rules = Vec::new();
    let mut provenance = Vec::new();
    let mut omitted_rules = BTreeSet::new();
    let mut changed_rules = BTreeSet::new();
    for r in program.rules() {
        match omit_rule_cases(r, &effective) {
            OmitOutcome::Kept(new) => {
                provenance.push(RuleProvenance::Kept { source: r.id });
                rules.push(new);
            }
            OmitOutcome::Weakened(new) => {
                provenance.push(RuleProvenance::Weakened { source: r.id });
                changed_rules.insert(r.id);
                rules.push(new);
            }
            OmitOutcome::Dropped => {
                omitted_rules.insert(r.id);
            }
        }
    }
    let kept_atoms: Vec<Atom> = program
        .universe()
        .iter()
        .filter(|a| !effective.contains(a))
        .cloned()
        .collect();
    AbstractionOutcome {
        abstract_program: Program::from_rules(rules).with_universe(kept_atoms),
        provenance,
        omitted_rules,
        changed_rules,
        warnings,
    }
}

/// omit(Π, A) without the bookkeeping.
pub fn omit(program: &Program, omission: &OmissionSet) -> Program {
    omit_program(program, omission).abstract_program
}

/// The query program Q_Î^Ā: constraints pinning every kept atom to its
/// value in Î. Π ∪ Q is unsatisfiable iff Î is spurious.
pub fn build_query(interp: &Interpretation, kept: &BTreeSet<Atom>) -> Vec<Rule> {
    debug_assert!(interp.iter().all(|a| kept.contains(a)));
    let mut rules = Vec::new();
    for alpha in interp.iter() {
        rules.push(Rule::new(
            0,
            format!("q{}", rules.len() + 1),
            Head::Bottom,
            Vec::new(),
            vec![alpha.clone()],
            Vec::new(),
        ));
    }
    for alpha in kept {
        if !interp.contains(alpha) {
            rules.push(Rule::new(
                0,
                format!("q{}", rules.len() + 1),
                Head::Bottom,
                vec![alpha.clone()],
                Vec::new(),
                Vec::new(),
            ));
        }
    }
    rules
}

/// Appends extra rules (fresh names required) to a program.
pub fn extend_with_rules(program: &Program, extra: Vec<Rule>) -> Program {
    let rules: Vec<Rule> = program.rules().iter().cloned().chain(extra).collect();
    Program::from_rules(rules).with_universe(program.universe().iter().cloned())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Concrete,
    Spurious,
}

#[derive(Debug, Clone)]
pub struct Classification {
    pub verdict: Verdict,
    /// A full answer set of Π projecting to Î; present iff Concrete.
    pub witness: Option<Interpretation>,
}

/// Checks that Î really is an abstract answer set, then decides whether it
/// is the projection of some answer set of Π by solving Π ∪ Q_Î^Ā.
pub fn classify(
    program: &Program,
    omission: &OmissionSet,
    interp: &Interpretation,
) -> Result<Classification, AbstractionError> {
    let abstract_program = omit(program, omission);
    if !solver::is_answer_set(&abstract_program, interp) {
        return Err(AbstractionError::NotAnAbstractAnswerSet(interp.display()));
    }
    let kept = omission.kept(program.universe());
    let query = build_query(interp, &kept);
    let pinned = extend_with_rules(program, query);
    let result = solver::solve(&SolveRequest::new(pinned).with_limit(1))?;
    match result.answer_sets.into_iter().next() {
        Some(witness) => Ok(Classification {
            verdict: Verdict::Concrete,
            witness: Some(witness),
        }),
        None => Ok(Classification {
            verdict: Verdict::Spurious,
            witness: None,
        }),
    }
}

/// True iff AS(omit(Π, A)) equals the Ā-projections of AS(Π) exactly, i.e.
/// the abstraction has no spurious answer sets. Guarded by the enumeration
/// cap because both sides are enumerated in full.
pub fn is_faithful(program: &Program, omission: &OmissionSet) -> Result<bool, SolveError> {
    if program.universe().len() > BRUTE_FORCE_ATOM_CAP {
        return Err(SolveError::UniverseTooLarge {
            atoms: program.universe().len(),
            cap: BRUTE_FORCE_ATOM_CAP,
        });
    }
    let kept = omission.kept(program.universe());
    let concrete: BTreeSet<Interpretation> = solver::all_answer_sets(program)?
        .into_iter()
        .map(|i| i.project(&kept))
        .collect();
    let abstracted: BTreeSet<Interpretation> = solver::all_answer_sets(&omit(program, omission))?
        .into_iter()
        .collect();
    Ok(concrete == abstracted)
}

/// Refinement-safe faithfulness: faithful for every A′ ⊆ A. An unsatisfiable
/// abstraction short-circuits to true (no answer sets to be spurious, and
/// further put-backs stay unsatisfiable); otherwise all 2^|A| subsets are
/// checked, guarded at |A| ≤ 12.
pub fn is_refinement_safe_faithful(
    program: &Program,
    omission: &OmissionSet,
) -> Result<bool, SolveError> {
    if !solver::is_satisfiable(&omit(program, omission))? {
        return Ok(true);
    }
    let atoms: Vec<Atom> = omission.atoms().iter().cloned().collect();
    if atoms.len() > 12 {
        return Err(SolveError::UniverseTooLarge {
            atoms: atoms.len(),
            cap: 12,
        });
    }
    for mask in 0u32..(1u32 << atoms.len()) {
        let subset = OmissionSet::new(
            atoms
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, a)| a.clone()),
        );
        if !is_faithful(program, &subset)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Splits every disjunctive head a₁ | … | aₖ ← B into k choice rules
/// {aᵢ} ← B. The result over-approximates the original: AS(Π) ⊆ AS(Π′).
pub fn split_disjunctive(program: &Program) -> Program {
    let mut rules = Vec::new();
    for r in program.rules() {
        match &r.head {
            Head::Disjunction(disjuncts) => {
                for (i, d) in disjuncts.iter().enumerate() {
                    rules.push(Rule::new(
                        0,
                        format!("{}_{}", r.name, i + 1),
                        Head::Choice(d.clone()),
                        r.pos_body().to_vec(),
                        r.neg_body().to_vec(),
                        r.negneg_body().to_vec(),
                    ));
                }
            }
            _ => rules.push(r.clone()),
        }
    }
    Program::from_rules(rules).with_universe(program.universe().iter().cloned())
}
