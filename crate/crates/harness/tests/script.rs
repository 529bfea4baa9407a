use paysim_harness::verbs::{ArgKind, Bind, EXPECTS, VERBS};
use paysim_harness::{parse, ParseError, Script};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn value(kind: ArgKind, actors: &[String], rng: &mut ChaCha8Rng) -> String {
    let word = |rng: &mut ChaCha8Rng| {
        let n = rng.gen_range(1..8);
        (0..n).map(|_| *b"abcdefxyz_019".choose(rng).unwrap() as char).collect::<String>()
    };
    match kind {
        ArgKind::Int => rng.gen::<u32>().to_string(),
        ArgKind::SignedInt => rng.gen::<i32>().to_string(),
        ArgKind::Bool => rng.gen_bool(0.5).to_string(),
        ArgKind::Ints => {
            (0..rng.gen_range(1..4)).map(|_| rng.gen_range(0..100).to_string()).collect::<Vec<_>>().join(",")
        }
        ArgKind::Actor => actors.choose(rng).unwrap().clone(),
        ArgKind::Actors => {
            let n = rng.gen_range(1..=actors.len());
            actors.choose_multiple(rng, n).cloned().collect::<Vec<_>>().join(",")
        }
        ArgKind::Choice(options) => options.choose(rng).unwrap().to_string(),
        ArgKind::Name => word(rng),
        ArgKind::Party => {
            if rng.gen_bool(0.2) {
                "burn".into()
            } else {
                actors.choose(rng).unwrap().clone()
            }
        }
        ArgKind::Ref => {
            if rng.gen_bool(0.2) {
                format!("#{}", rng.gen_range(0..9))
            } else {
                word(rng)
            }
        }
        ArgKind::Text => format!("{}:{}", word(rng), word(rng)),
    }
}

/// Builds a schema-valid scenario from a seed.
fn random_script(seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut actors: Vec<String> = (0..rng.gen_range(1..5)).map(|i| format!("p{i}")).collect();
    let mut out = format!("# generated\ndescription=Generated run {seed}\nseed={}\n", rng.gen::<u64>());
    for a in &actors {
        out.push_str(&format!("actor {a}\n"));
    }
    let mut adopted = 0;
    for _ in 0..rng.gen_range(0..30) {
        let choice = rng.gen_range(0..VERBS.len() + EXPECTS.len() + 1);
        let (head, schema, bind) = if choice < VERBS.len() {
            let v = &VERBS[choice];
            (format!("{}.{}", actors.choose(&mut rng).unwrap(), v.name), v.args, v.bind)
        } else if choice < VERBS.len() + EXPECTS.len() {
            let e = &EXPECTS[choice - VERBS.len()];
            (format!("expect {}", e.name), e.args, Bind::None)
        } else {
            out.push_str(&format!("mine {}\n", rng.gen_range(0..20)));
            continue;
        };
        out.push_str(&head);
        let mut new_actor = None;
        for (key, kind, required) in schema {
            if !required && rng.gen_bool(0.5) {
                continue;
            }
            let v = if bind == Bind::Actor && *key == "as" {
                adopted += 1;
                let name = format!("stealth{adopted}");
                new_actor = Some(name.clone());
                name
            } else {
                value(*kind, &actors, &mut rng)
            };
            out.push_str(&format!(" {key}={v}"));
        }
        out.push('\n');
        actors.extend(new_actor);
    }
    out
}

fn same(a: &Script, b: &Script) -> bool {
    a.description == b.description
        && a.seed == b.seed
        && a.actors == b.actors
        && a.steps.len() == b.steps.len()
        && a.steps.iter().zip(&b.steps).all(|(x, y)| x.kind == y.kind && x.args == y.args)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn canonical_text_round_trips(seed in any::<u64>()) {
        let text = random_script(seed);
        let script = parse(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        let canonical = script.to_string();
        let again = parse(&canonical).map_err(|e| TestCaseError::fail(format!("{e}\n{canonical}")))?;
        prop_assert!(same(&script, &again), "{canonical}");
        prop_assert_eq!(again.to_string(), canonical);
    }

    #[test]
    fn parser_never_panics(text in "[a-z_.=# 0-9\n]{0,200}") {
        let _ = parse(&text);
    }
}

#[test]
fn errors_carry_line_numbers() {
    let cases = [
        ("seed=1\nactor a\na.fly x=1\n", 3, "unknown verb"),
        ("actor a\n\nb.mint class=c to=a\n", 3, "not declared"),
        ("actor a\na.mint class=c\n", 2, "missing argument `to`"),
        ("actor a\na.mint class=c to=a colour=red\n", 2, "unexpected argument"),
        ("actor a\na.mint class=c to=a amount=-1\n", 2, "non-negative"),
        ("actor a\na.burn class=c amount=1 method=fire\n", 2, "one of"),
        ("actor a\nactor a\n", 2, "declared twice"),
        ("seed=1\nseed=2\n", 2, "seed given twice"),
        ("actor a\na.mint class=c to\n", 2, "key=value"),
        ("actor a\nexpect nothing\n", 2, "unknown verb"),
        ("actor a\nexpect credential holder=ghost cred=x value=pass\n", 2, "not declared"),
    ];
    for (text, line, needle) in cases {
        let err = parse(text).unwrap_err();
        assert_eq!(err.line(), line, "{text:?}: {err}");
        assert!(err.to_string().contains(needle), "{text:?}: {err}");
    }
    assert!(matches!(parse("actor a\nb.spawn name=x symbol=y\n"), Err(ParseError::UndeclaredActor { .. })));
}
