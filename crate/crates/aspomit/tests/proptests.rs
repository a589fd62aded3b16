//! Shrinkable randomized checks: text-format round trips, body semantics
//! against a truth-table oracle, and small-scale abstraction laws.

use std::collections::BTreeSet;

use proptest::prelude::*;

use aspomit::abstraction;
use aspomit::parser::{self, SerializeStyle};
use aspomit::program::{Atom, Head, Interpretation, OmissionSet, Program};
use aspomit::solver;

const POOL: [&str; 6] = ["a", "b", "c", "d", "e", "f"];

fn atom_at(i: usize) -> Atom {
    Atom::new(POOL[i % POOL.len()])
}

fn head_strategy() -> impl Strategy<Value = Head> {
    prop_oneof![
        4 => (0..POOL.len()).prop_map(|i| Head::Plain(atom_at(i))),
        2 => (0..POOL.len()).prop_map(|i| Head::Choice(atom_at(i))),
        1 => Just(Head::Bottom),
        1 => proptest::sample::subsequence(POOL.to_vec(), 2..=3)
            .prop_map(|names| Head::Disjunction(names.into_iter().map(Atom::new).collect())),
    ]
}

fn part_strategy() -> impl Strategy<Value = Vec<Atom>> {
    proptest::collection::vec(0..POOL.len(), 0..=2)
        .prop_map(|ids| ids.into_iter().map(atom_at).collect())
}

type Shape = (Head, Vec<Atom>, Vec<Atom>, Vec<Atom>);

fn rule_strategy() -> impl Strategy<Value = Shape> {
    (
        head_strategy(),
        part_strategy(),
        part_strategy(),
        part_strategy(),
    )
        .prop_map(|(head, pos, neg, negneg)| {
            // A bodyless constraint has no textual form; give it a body.
            if head == Head::Bottom && pos.is_empty() && neg.is_empty() && negneg.is_empty() {
                (head, vec![Atom::new("a")], neg, negneg)
            } else {
                (head, pos, neg, negneg)
            }
        })
}

fn program_strategy() -> impl Strategy<Value = Program> {
    proptest::collection::vec(rule_strategy(), 0..=10).prop_map(Program::new)
}

fn interpretation_strategy() -> impl Strategy<Value = Interpretation> {
    proptest::sample::subsequence(POOL.to_vec(), 0..=POOL.len())
        .prop_map(|names| Interpretation::from_atoms(names.into_iter().map(Atom::new)))
}

proptest! {
    #[test]
    fn canonical_text_round_trips(program in program_strategy()) {
        let text = parser::serialize(&program, SerializeStyle::Canonical);
        let back = parser::parse(&text).unwrap();
        prop_assert!(back.same_program(&program), "round trip changed:\n{text}");
    }

    #[test]
    fn annotated_text_parses_to_the_same_program(program in program_strategy()) {
        let text = parser::serialize(&program, SerializeStyle::Annotated);
        let back = parser::parse(&text).unwrap();
        prop_assert!(back.same_program(&program));
    }

    #[test]
    fn body_satisfaction_matches_the_truth_table(
        shape in rule_strategy(),
        interp in interpretation_strategy(),
    ) {
        let program = Program::new(vec![shape]);
        let rule = &program.rules()[0];
        let expected = rule.pos_body().iter().all(|a| interp.contains(a))
            && rule.neg_body().iter().all(|a| !interp.contains(a))
            && rule.negneg_body().iter().all(|a| interp.contains(a));
        prop_assert_eq!(rule.body_satisfied(&interp), expected);
    }

    #[test]
    fn empty_omission_is_identity(program in program_strategy()) {
        let normal = abstraction::split_disjunctive(&program);
        prop_assert!(abstraction::omit(&normal, &OmissionSet::default()).same_program(&normal));
    }

    #[test]
    fn total_omission_empties_the_program(program in program_strategy()) {
        let normal = abstraction::split_disjunctive(&program);
        let total = OmissionSet::new(normal.universe().iter().cloned()).with_bottom();
        prop_assert!(abstraction::omit(&normal, &total).is_empty());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn projections_of_answer_sets_survive_omission(
        program in program_strategy(),
        picked in proptest::sample::subsequence(POOL.to_vec(), 0..=POOL.len()),
    ) {
        let normal = abstraction::split_disjunctive(&program);
        let omission = OmissionSet::new(
            picked
                .into_iter()
                .map(Atom::new)
                .filter(|a| normal.universe_contains(a)),
        );
        let abstracted = abstraction::omit(&normal, &omission);
        let kept: BTreeSet<Atom> = omission.kept(normal.universe());
        for answer in solver::all_answer_sets(&normal).unwrap() {
            let projected = answer.project(&kept);
            prop_assert!(
                solver::is_answer_set(&abstracted, &projected),
                "lost {} under omission of {:?}",
                projected.display(),
                omission.atoms()
            );
        }
    }
}
