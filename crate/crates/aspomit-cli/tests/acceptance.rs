//! Acceptance gate: one test per numbered criterion. Each test prints a
//! single PASS line (visible with `--nocapture`) stating what it verified;
//! a failing criterion fails its test.
//!
//! The deep property suites live with the core crate
//! (`crates/aspomit/tests`); criteria 3 and 4 re-validate their headline
//! claims here on an independently seeded corpus so this target alone
//! certifies the build.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use aspomit::abstraction::{self, Verdict};
use aspomit::debugger::{self, BadOmission, DebugOptions, TypeTag};
use aspomit::driver::{self, AbsRefOptions, AbsRefOutcome};
use aspomit::solver::{self, SolveRequest};
use aspomit::{Atom, Head, Interpretation, OmissionSet, Program};

use aspomit_cli::bench::{self, BenchConfig, BenchInstance, Mode};
use aspomit_cli::fixtures;
use aspomit_cli::gcolor::{self, GraphInstance};

fn atom(text: &str) -> Atom {
    Atom::new(text)
}

fn omission(names: &[&str]) -> OmissionSet {
    OmissionSet::new(names.iter().map(Atom::new))
}

fn interp(names: &[&str]) -> Interpretation {
    Interpretation::from_atoms(names.iter().map(Atom::new))
}

fn fixture_program(name: &str) -> Program {
    fixtures::load(name).expect("fixture exists").program
}

fn answer_set_family(program: &Program) -> BTreeSet<Interpretation> {
    solver::all_answer_sets(program)
        .expect("enumeration succeeds")
        .into_iter()
        .collect()
}

#[test]
fn acceptance_1_worked_example_goldens() {
    let start = Instant::now();

    let toggle = fixture_program("toggle");
    let expected: BTreeSet<Interpretation> =
        BTreeSet::from([interp(&["a", "c"]), interp(&["b", "d"])]);
    assert_eq!(
        answer_set_family(&toggle),
        expected,
        "answer sets of toggle"
    );

    let omit_bd = omission(&["b", "d"]);
    let abstracted = abstraction::omit(&toggle, &omit_bd);
    let expected_abs: BTreeSet<Interpretation> =
        BTreeSet::from([interp(&[]), interp(&["c"]), interp(&["a", "c"])]);
    assert_eq!(
        answer_set_family(&abstracted),
        expected_abs,
        "abstract answer sets after omitting {{b, d}}"
    );

    let cls = abstraction::classify(&toggle, &omit_bd, &interp(&["c"])).unwrap();
    assert_eq!(cls.verdict, Verdict::Spurious, "{{c}} is spurious");
    let put_back = driver::minimal_put_back(&toggle, &omit_bd, &interp(&["c"])).unwrap();
    assert_eq!(
        put_back,
        BTreeSet::from([atom("b"), atom("d")]),
        "only the trivial put-back set eliminates {{c}}"
    );

    assert!(
        abstraction::is_faithful(&toggle, &omission(&["a", "c"])).unwrap(),
        "omitting {{a, c}} is faithful"
    );

    let unsat = fixture_program("toggle-unsat");
    let order = driver::probe_order("input").unwrap();
    let blocker =
        driver::compute_min_blocker(&unsat, &OmissionSet::default(), order.as_ref()).unwrap();
    assert_eq!(blocker.blocker, BTreeSet::from([atom("b")]));

    let support = fixture_program("spurious-support");
    let report = debugger::debug(
        &support,
        &omission(&["a", "d"]),
        &interp(&["b"]),
        DebugOptions::default(),
    )
    .unwrap();
    assert_eq!(
        report.bad_omissions,
        BTreeSet::from([BadOmission::new("a", TypeTag::Type2)])
    );

    let positive_loop = fixture_program("positive-loop");
    let report = debugger::debug(
        &positive_loop,
        &omission(&["a"]),
        &interp(&["b"]),
        DebugOptions::default(),
    )
    .unwrap();
    assert_eq!(
        report.bad_omissions,
        BTreeSet::from([BadOmission::new("a", TypeTag::Type3)])
    );

    let odd_loop = fixture_program("odd-loop");
    let report = debugger::debug(
        &odd_loop,
        &omission(&["a", "b"]),
        &interp(&["c"]),
        DebugOptions::default(),
    )
    .unwrap();
    assert_eq!(
        report.bad_omissions,
        BTreeSet::from([
            BadOmission::new("a", TypeTag::Type3),
            BadOmission::new("b", TypeTag::Type3),
        ])
    );

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 1, "goldens took {elapsed:?}");
    println!(
        "criterion 1 PASS: worked-example goldens (answer sets, abstraction, \
         classification, put-back, faithfulness, blocker, three debug verdicts) in {elapsed:?}"
    );
}

fn coloring_atoms(nodes: &[u32], colors: &[&str]) -> BTreeSet<Atom> {
    let mut set = BTreeSet::new();
    for &n in nodes {
        for c in colors {
            set.insert(atom(&format!("chosenColor({n},{c})")));
        }
        set.insert(atom(&format!("colored({n})")));
    }
    set
}

#[test]
fn acceptance_2_coloring_blockers_reproduce() {
    let start = Instant::now();
    let order = driver::probe_order("input").unwrap();

    let nine = fixtures::load("non2col9-k2").unwrap();
    assert!(
        !solver::is_satisfiable(&nine.program).unwrap(),
        "the 9-node 2-coloring is unsatisfiable"
    );
    let blocker =
        driver::compute_min_blocker(&nine.program, &OmissionSet::default(), order.as_ref())
            .unwrap();
    assert_eq!(
        blocker.blocker,
        coloring_atoms(&[1, 2, 3], &["red", "green"]),
        "minimal blocker covers exactly the triangle nodes"
    );
    let golden = fixture_program("non2col9-k2-blocker");
    assert_eq!(
        blocker.blocker_rules.shape_multiset(),
        golden.shape_multiset(),
        "blocker rule set matches the expected 24 rules up to rule order"
    );

    let eight = fixtures::load("non3col8-k3").unwrap();
    assert!(!solver::is_satisfiable(&eight.program).unwrap());
    let blocker8 =
        driver::compute_min_blocker(&eight.program, &OmissionSet::default(), order.as_ref())
            .unwrap();
    assert_eq!(
        blocker8.blocker,
        coloring_atoms(&[1, 2, 3, 4], &["red", "green", "blue"]),
        "minimal blocker covers exactly the clique nodes"
    );

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 60, "reproduction took {elapsed:?}");
    println!(
        "criterion 2 PASS: 9-node and 8-node coloring blockers reproduce \
         (triangle and clique atoms, 24-rule set match) in {elapsed:?}"
    );
}

const POOL: [&str; 10] = ["a", "b", "c", "d", "e", "f", "g", "h", "i", "j"];
const CORPUS_SIZE: u64 = 210;

fn pick_part(rng: &mut ChaCha8Rng, atoms: usize, max: usize) -> Vec<Atom> {
    let take = rng.gen_range(0..=max);
    let set: BTreeSet<usize> = (0..take).map(|_| rng.gen_range(0..atoms)).collect();
    set.into_iter().map(|i| Atom::new(POOL[i])).collect()
}

fn random_program(rng: &mut ChaCha8Rng) -> Program {
    let atoms = rng.gen_range(2..=10);
    let rules = rng.gen_range(1..=15);
    let mut shapes = Vec::new();
    for _ in 0..rules {
        let head = match rng.gen_range(0..100) {
            0..=14 => Head::Bottom,
            15..=34 => Head::Choice(Atom::new(POOL[rng.gen_range(0..atoms)])),
            _ => Head::Plain(Atom::new(POOL[rng.gen_range(0..atoms)])),
        };
        shapes.push((
            head,
            pick_part(rng, atoms, 2),
            pick_part(rng, atoms, 2),
            pick_part(rng, atoms, 1),
        ));
    }
    Program::new(shapes)
}

fn random_omission(rng: &mut ChaCha8Rng, program: &Program) -> OmissionSet {
    OmissionSet::new(
        program
            .universe()
            .iter()
            .filter(|_| rng.gen_bool(0.4))
            .cloned(),
    )
}

fn corpus() -> Vec<(Program, OmissionSet)> {
    (0..CORPUS_SIZE)
        .map(|id| {
            let mut rng = ChaCha8Rng::seed_from_u64(0xacce_0000 + id * 1013);
            let program = random_program(&mut rng);
            let omission = random_omission(&mut rng, &program);
            (program, omission)
        })
        .collect()
}

/// Abstract answer sets of omit(program, omission), capped.
fn abstract_answer_sets(
    program: &Program,
    omission: &OmissionSet,
    cap: usize,
) -> Vec<Interpretation> {
    let abstracted = abstraction::omit(program, omission);
    let result = solver::solve(&SolveRequest::new(abstracted).with_limit(cap)).unwrap();
    result.answer_sets
}

#[test]
fn acceptance_3_randomized_property_corpus() {
    let start = Instant::now();
    let corpus = corpus();
    let mut spurious = 0usize;
    let mut concrete = 0usize;
    for (case, (program, omission)) in corpus.iter().enumerate() {
        // Omission identities: the empty omission changes nothing and the
        // total omission (constraints included) leaves nothing.
        assert!(
            abstraction::omit(program, &OmissionSet::default()).same_program(program),
            "case {case}: empty omission must be the identity"
        );
        let total = OmissionSet::new(program.universe().iter().cloned()).with_bottom();
        assert!(
            abstraction::omit(program, &total).is_empty(),
            "case {case}: total omission must empty the program"
        );

        // Over-approximation: every answer set projects to an abstract one.
        let abstracted = abstraction::omit(program, omission);
        let kept = omission.kept(program.universe());
        let originals = solver::all_answer_sets(program).unwrap();
        for i in &originals {
            assert!(
                solver::is_answer_set(&abstracted, &i.project(&kept)),
                "case {case}: projection of {} must survive omission",
                i.display()
            );
        }

        // Unsatisfiable abstractions are refinement-safe: putting any
        // single atom back cannot re-admit answer sets.
        if !solver::is_satisfiable(&abstracted).unwrap() {
            for alpha in omission.atoms() {
                let smaller =
                    OmissionSet::new(omission.atoms().iter().filter(|a| *a != alpha).cloned());
                assert!(
                    !solver::is_satisfiable(&abstraction::omit(program, &smaller)).unwrap(),
                    "case {case}: put-back of {} re-admitted answer sets",
                    alpha.text()
                );
            }
        }

        // Verdicts: spurious abstract answer sets always carry blame,
        // concrete ones never do.
        for interp in abstract_answer_sets(program, omission, 8) {
            let cls = abstraction::classify(program, omission, &interp).unwrap();
            let report =
                debugger::debug(program, omission, &interp, DebugOptions::default()).unwrap();
            match cls.verdict {
                Verdict::Spurious => {
                    spurious += 1;
                    assert!(
                        !report.bad_omissions.is_empty(),
                        "case {case}: spurious {} got no blame",
                        interp.display()
                    );
                }
                Verdict::Concrete => {
                    concrete += 1;
                    assert!(
                        report.bad_omissions.is_empty(),
                        "case {case}: concrete {} was blamed",
                        interp.display()
                    );
                }
            }
        }
    }
    println!(
        "criterion 3 PASS: {} random programs, zero violations of over-approximation, \
         identities, refinement-safety of unsat abstractions, and blame presence \
         ({spurious} spurious / {concrete} concrete verdicts; exhaustive variants in the \
         core crate's property suites) in {:?}",
        corpus.len(),
        start.elapsed()
    );
}

#[test]
fn acceptance_4_solver_and_loop_oracles_agree() {
    let start = Instant::now();
    let corpus = corpus();
    for (case, (program, _)) in corpus.iter().enumerate() {
        let builtin: BTreeSet<Interpretation> = solver::solve(&SolveRequest::new(program.clone()))
            .unwrap()
            .answer_sets
            .into_iter()
            .collect();
        let brute: BTreeSet<Interpretation> =
            solver::solve(&SolveRequest::new(program.clone()).with_engine("bruteforce"))
                .unwrap()
                .answer_sets
                .into_iter()
                .collect();
        assert_eq!(builtin, brute, "case {case}: engines disagree");

        let normalized = debugger::normalize(program);
        assert_eq!(
            debugger::loop_pairs(&normalized),
            debugger::reference_loop_pairs(&normalized),
            "case {case}: loop-pair routes disagree"
        );
    }
    println!(
        "criterion 4 PASS: builtin and brute-force enumerations identical and both \
         loop-pair routes agree on all {} corpus programs in {:?}",
        corpus.len(),
        start.elapsed()
    );
}

#[test]
fn acceptance_5_refinement_terminates_deterministically() {
    let start = Instant::now();
    let mut inputs: Vec<(String, Program, OmissionSet)> = vec![
        (
            "toggle".into(),
            fixture_program("toggle"),
            omission(&["b", "d"]),
        ),
        (
            "spurious-support".into(),
            fixture_program("spurious-support"),
            omission(&["a", "d"]),
        ),
        (
            "positive-loop".into(),
            fixture_program("positive-loop"),
            omission(&["a"]),
        ),
        (
            "odd-loop".into(),
            fixture_program("odd-loop"),
            omission(&["a", "b"]),
        ),
        (
            "chain".into(),
            fixture_program("chain"),
            omission(&["a", "d"]),
        ),
    ];
    let nine = fixtures::load("non2col9-k2").unwrap();
    let groups = nine.groups.clone().unwrap();
    let strategy = driver::omission_strategy("random").unwrap();
    let initial =
        driver::initial_omission(&nine.program, &groups, 50, strategy.as_ref(), 3).unwrap();
    inputs.push(("non2col9-k2".into(), nine.program, initial));
    for (id, (program, omission)) in corpus().into_iter().take(60).enumerate() {
        inputs.push((format!("corpus-{id}"), program, omission));
    }

    let opts = AbsRefOptions::default();
    for (name, program, initial) in &inputs {
        let first = driver::abs_ref(program, initial, &opts).unwrap();
        assert!(
            first.refinement_steps <= initial.len(),
            "{name}: {} refinements exceed |A_init| = {}",
            first.refinement_steps,
            initial.len()
        );
        match &first.outcome {
            AbsRefOutcome::UnsatReached => {
                assert!(
                    !solver::is_satisfiable(program).unwrap(),
                    "{name}: unsat verdict wrong"
                );
            }
            AbsRefOutcome::ConcreteFound {
                abstract_witness,
                concrete_witness,
            } => {
                assert!(solver::is_answer_set(program, concrete_witness), "{name}");
                let kept = first.final_omission.kept(program.universe());
                assert_eq!(&concrete_witness.project(&kept), abstract_witness, "{name}");
            }
        }
        let second = driver::abs_ref(program, initial, &opts).unwrap();
        assert_eq!(
            driver::trace_json(&first.trace),
            driver::trace_json(&second.trace),
            "{name}: traces are not byte-identical"
        );
    }
    println!(
        "criterion 5 PASS: refinement stayed within |A_init| iterations and repeated runs \
         produced byte-identical JSON traces on {} inputs in {:?}",
        inputs.len(),
        start.elapsed()
    );
}

#[test]
fn acceptance_6_bench_substitute_with_verified_blockers() {
    let start = Instant::now();
    let mut instances: Vec<BenchInstance> = Vec::new();
    for name in ["toggle-unsat", "non2col9-k2", "non3col8-k3"] {
        let f = fixtures::load(name).unwrap();
        instances.push(match f.groups {
            Some(groups) => BenchInstance {
                name: name.to_string(),
                program: f.program,
                groups,
            },
            None => BenchInstance::with_singleton_groups(name, f.program),
        });
    }
    for i in 0..10u64 {
        let nodes = 8 + (i % 3) as u32;
        let edges = nodes as usize + 5 + (i % 4) as usize;
        let g = GraphInstance::random_unsatisfiable(nodes, edges, 2, 1000 + i).unwrap();
        let out = gcolor::generate_ground_coloring(&g);
        instances.push(BenchInstance {
            name: format!("gc-{:02}-n{nodes}", i),
            program: out.program,
            groups: out.groups,
        });
    }

    let config = BenchConfig {
        modes: vec![
            Mode::parse("topdown").unwrap(),
            Mode::parse("bottomup:50:random").unwrap(),
        ],
        seeds: vec![1, 2],
        jobs: 4,
        ..BenchConfig::default()
    };
    let report = bench::run_bench(&instances, &config);
    assert_eq!(report.errored_rows(), 0, "csv: {}", report.to_csv());
    assert_eq!(report.rows.len(), instances.len() * config.modes.len());

    let by_name: BTreeMap<&str, &Program> = instances
        .iter()
        .map(|i| (i.name.as_str(), &i.program))
        .collect();
    let mut verified = 0usize;
    for row in &report.rows {
        let program = by_name[row.instance.as_str()];
        assert!(
            !row.blockers.is_empty(),
            "{} {}: no blockers",
            row.instance,
            row.mode
        );
        for blocker in &row.blockers {
            let check = driver::verify_blocker(program, blocker, true).unwrap();
            assert!(
                check.is_blocker,
                "{} {}: not a blocker",
                row.instance, row.mode
            );
            assert_eq!(
                check.is_minimal,
                Some(true),
                "{} {}: blocker not minimal",
                row.instance,
                row.mode
            );
            verified += 1;
        }
    }

    let mut larger = Vec::new();
    for instance in &instances {
        let size_of = |mode: &str| {
            report
                .rows
                .iter()
                .find(|r| r.instance == instance.name && r.mode == mode)
                .and_then(|r| r.blocker_count)
                .expect("both modes ran")
        };
        let top = size_of("topdown");
        let bottom = size_of("bottomup:50:random");
        if bottom > top {
            larger.push(format!("{}: {bottom} vs {top}", instance.name));
        }
    }
    let trend = if larger.is_empty() {
        "bottom-up blockers never larger than top-down".to_string()
    } else {
        format!(
            "bottom-up larger than top-down on {} of {} instances ({})",
            larger.len(),
            instances.len(),
            larger.join(", ")
        )
    };
    println!(
        "criterion 6 PASS: bench over {} instances x2 modes x2 seeds, {verified} blockers \
         verified minimal; {trend}; in {:?}",
        instances.len(),
        start.elapsed()
    );
}
