use std::collections::BTreeMap;

use proptest::collection::vec;
use proptest::option;
use proptest::prelude::*;
use proptest::sample::select;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

use dslrepair::ansible::{parse_playbook, playbook_score};
use dslrepair::bash::{bash_score, parse_bash};
use dslrepair::metrics::{bleu, evaluate_corpus, EvalInput};
use dslrepair::reward::{compute_rewards, BatchItem};
use dslrepair::sql::{parse_sql, sql_score_text};
use dslrepair::ted::{zhang_shasha, PostorderTree, TedWorkspace};
use dslrepair::{Language, SemanticScore};

use crate::support;
use crate::Outcome;

const CASES: u32 = 10_000;

#[derive(Debug, Clone, PartialEq)]
struct Tree {
    label: u8,
    kids: Vec<Tree>,
}

impl Tree {
    fn size(&self) -> usize {
        1 + self.kids.iter().map(Tree::size).sum::<usize>()
    }
}

fn tree() -> impl Strategy<Value = Tree> {
    let leaf = (0u8..4).prop_map(|label| Tree { label, kids: Vec::new() });
    leaf.prop_recursive(4, 16, 3, |inner| {
        (0u8..4, vec(inner, 0..4)).prop_map(|(label, kids)| Tree { label, kids })
    })
}

fn ted(a: &Tree, b: &Tree) -> usize {
    let post = |t: &Tree| PostorderTree::build(t, |n| n.label, |n| &n.kids);
    zhang_shasha(&post(a), &post(b), &mut TedWorkspace::new())
}

fn bash_command() -> impl Strategy<Value = String> {
    let atom = (
        select(vec!["ls", "grep", "find", "wc", "cat", "sort", "head", "tail", "echo", "cut", "uniq"]),
        vec(select(vec!["-l", "-r", "-n", "-a", "-h", "-i", "-v"]), 0..3),
        vec(select(vec!["foo", "/tmp", "a.txt", ".", "'a b'", "\"$HOME\"", "*.log"]), 0..3),
    )
        .prop_map(|(p, flags, args)| {
            let mut words = vec![p.to_string()];
            words.extend(flags.into_iter().map(str::to_string));
            words.extend(args.into_iter().map(str::to_string));
            words.join(" ")
        });
    (atom.clone(), vec((select(vec![" | ", " && ", " || ", " ; "]), atom), 0..3), any::<bool>()).prop_map(
        |(first, rest, wrap)| {
            let mut s = first;
            for (c, a) in rest {
                s.push_str(c);
                s.push_str(&a);
            }
            if wrap {
                format!("({s})")
            } else {
                s
            }
        },
    )
}

fn sql_query() -> impl Strategy<Value = String> {
    let col = select(vec!["name", "age", "country", "capacity", "year"]);
    let item = prop_oneof![
        col.clone().prop_map(str::to_string),
        col.clone().prop_map(|c| format!("max({c})")),
        Just("count(*)".to_string()),
    ];
    let value = prop_oneof![(0u32..100).prop_map(|n| n.to_string()), select(vec!["'x'", "'France'"]).prop_map(str::to_string)];
    let cond = (col.clone(), select(vec!["=", ">", "<", ">=", "!="]), value)
        .prop_map(|(c, op, v)| format!("{c} {op} {v}"));
    let sub = (col.clone(), select(vec!["singer", "stadium"])).prop_map(|(c, t)| format!("{c} IN (SELECT {c} FROM {t})"));
    (
        any::<bool>(),
        vec(item, 1..4),
        select(vec!["singer", "stadium", "concert"]),
        option::of((cond.clone(), option::of(prop_oneof![cond, sub]))),
        option::of(col.clone()),
        option::of((col, any::<bool>())),
        option::of(1u32..10),
    )
        .prop_map(|(distinct, items, table, filter, group, order, limit)| {
            let mut s = format!("SELECT {}{} FROM {table}", if distinct { "DISTINCT " } else { "" }, items.join(", "));
            if let Some((a, b)) = filter {
                s.push_str(&format!(" WHERE {a}"));
                if let Some(b) = b {
                    s.push_str(&format!(" AND {b}"));
                }
            }
            if let Some(g) = group {
                s.push_str(&format!(" GROUP BY {g}"));
            }
            if let Some((o, desc)) = order {
                s.push_str(&format!(" ORDER BY {o}{}", if desc { " DESC" } else { "" }));
            }
            if let Some(l) = limit {
                s.push_str(&format!(" LIMIT {l}"));
            }
            s
        })
}

fn ansible_playbook() -> impl Strategy<Value = String> {
    let value = select(vec!["nginx", "present", "absent", "yes", "true", "no", "80", "/etc/app.conf", "'0644'"]);
    let task = (
        option::of(select(vec!["install", "restart it", "copy config"])),
        select(vec!["ansible.builtin.apt", "ansible.builtin.service", "ansible.builtin.copy", "file", "template"]),
        vec((select(vec!["name", "state", "dest", "src", "mode", "enabled", "port"]), value), 1..4),
        option::of(select(vec!["result", "out"])),
    )
        .prop_map(|(name, module, args, register)| {
            let args: BTreeMap<_, _> = args.into_iter().collect();
            let mut s = String::new();
            let mut first = true;
            let mut line = |l: String| {
                s.push_str(if first { "    - " } else { "      " });
                s.push_str(&l);
                s.push('\n');
                first = false;
            };
            if let Some(n) = name {
                line(format!("name: {n}"));
            }
            line(format!("{module}:"));
            for (k, v) in args {
                line(format!("  {k}: {v}"));
            }
            if let Some(r) = register {
                line(format!("register: {r}"));
            }
            s
        });
    let play = (select(vec!["all", "web", "db"]), option::of(any::<bool>()), vec(task, 1..4)).prop_map(
        |(hosts, become_, tasks)| {
            let mut s = format!("- hosts: {hosts}\n");
            if let Some(b) = become_ {
                s.push_str(&format!("  become: {b}\n"));
            }
            s.push_str("  tasks:\n");
            s.extend(tasks);
            s
        },
    );
    vec(play, 1..3).prop_map(|plays| plays.concat())
}

fn in_unit(x: f64) -> bool {
    (0.0..=1.0).contains(&x)
}

fn fail(msg: String) -> TestCaseError {
    TestCaseError::fail(msg)
}

fn check<S: Strategy>(name: &str, strategy: S, test: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Result<(), String> {
    let config = Config {
        cases: CASES,
        failure_persistence: None,
        max_shrink_iters: 2_000,
        ..Config::default()
    };
    TestRunner::new(config)
        .run(&strategy, test)
        .map_err(|e| format!("{name}: {e}"))
}

pub fn run() -> Outcome {
    let mut names = Vec::new();
    let mut prop = |name: &'static str, r: Result<(), String>| -> Result<(), String> {
        names.push(name);
        r
    };

    prop(
        "tree distance: identity, symmetry, bounds",
        check("ted axioms", (tree(), tree()), |(a, b)| {
            let d = ted(&a, &b);
            let (na, nb) = (a.size(), b.size());
            prop_assert_eq!(ted(&a, &a), 0);
            prop_assert_eq!(d, ted(&b, &a));
            prop_assert_eq!(d == 0, a == b);
            prop_assert!(na.abs_diff(nb) <= d && d <= na + nb);
            Ok(())
        }),
    )?;
    prop(
        "tree distance: triangle inequality",
        check("ted triangle", (tree(), tree(), tree()), |(a, b, c)| {
            prop_assert!(ted(&a, &c) <= ted(&a, &b) + ted(&b, &c));
            Ok(())
        }),
    )?;

    prop(
        "bash score in [0, 1], self score 1",
        check("bash range", (bash_command(), bash_command()), |(g, p)| {
            let (g, p) = (parse_bash(&g).map_err(|e| fail(e.to_string()))?, parse_bash(&p).map_err(|e| fail(e.to_string()))?);
            let s = bash_score(&g, &p).map_err(|e| fail(e.to_string()))?.value();
            prop_assert!(in_unit(s));
            prop_assert_eq!(bash_score(&g, &g).map_err(|e| fail(e.to_string()))?.value(), 1.0);
            Ok(())
        }),
    )?;
    prop(
        "sql score in [0, 1], self score 1",
        check("sql range", (sql_query(), sql_query()), |(g, p)| {
            let s = sql_score_text(&g, &p).map_err(|e| fail(format!("{e}: {g} / {p}")))?.value();
            prop_assert!(in_unit(s));
            prop_assert_eq!(sql_score_text(&g, &g).map_err(|e| fail(e.to_string()))?.value(), 1.0);
            Ok(())
        }),
    )?;
    prop(
        "ansible score in [0, 1], self score 1",
        check("ansible range", (ansible_playbook(), ansible_playbook()), |(g, p)| {
            let g = parse_playbook(&g).map_err(|e| fail(format!("{e}: {g}")))?;
            let p = parse_playbook(&p).map_err(|e| fail(format!("{e}: {p}")))?;
            let s = playbook_score(&g, &p).map_err(|e| fail(e.to_string()))?.value();
            prop_assert!(in_unit(s));
            prop_assert_eq!(playbook_score(&g, &g).map_err(|e| fail(e.to_string()))?.value(), 1.0);
            Ok(())
        }),
    )?;
    prop(
        "rewards in [0, 1]",
        check("reward range", vec((any::<bool>(), 0.0f64..=1.0), 1..64), |items| {
            let batch = compute_rewards(batch(&items)).map_err(|e| fail(e.to_string()))?;
            prop_assert!(in_unit(batch.pass_rate));
            prop_assert!(batch.rewards.iter().all(|&r| in_unit(r)));
            Ok(())
        }),
    )?;

    let token = select(vec!["ls", "-l", "grep", "foo", "|", "wc", "SELECT", "name", "FROM", "t"]).prop_map(str::to_string);
    let corpus = vec((vec(token.clone(), 1..8), vec(token, 1..8)), 1..6);
    prop(
        "BLEU invariant under corpus order",
        check("bleu permutation", shuffled(corpus), |(a, b)| {
            match (bleu(&a), bleu(&b)) {
                (Ok(x), Ok(y)) => prop_assert!((x - y).abs() <= 1e-12, "{} vs {}", x, y),
                (Err(_), Err(_)) => {}
                (x, y) => return Err(fail(format!("{x:?} vs {y:?}"))),
            }
            Ok(())
        }),
    )?;
    let res = support::resources();
    let inputs = vec((bash_command(), bash_command(), any::<bool>()), 1..6).prop_map(|v| {
        v.into_iter()
            .enumerate()
            .map(|(i, (p, g, broken))| EvalInput {
                id: format!("r{i}"),
                language: None,
                query: String::new(),
                prediction: if broken { format!("{p} |") } else { p },
                ground_truth: g,
                db_id: None,
            })
            .collect::<Vec<_>>()
    });
    prop(
        "pass rate and corpus aggregates invariant under order",
        check("eval permutation", shuffled(inputs), |(a, b)| {
            let (ra, _) = evaluate_corpus(&a, Language::Bash, &res).map_err(|e| fail(e.to_string()))?;
            let (rb, _) = evaluate_corpus(&b, Language::Bash, &res).map_err(|e| fail(e.to_string()))?;
            prop_assert_eq!(ra, rb);
            Ok(())
        }),
    )?;
    prop(
        "rewards follow their items under permutation",
        check("reward permutation", shuffled(vec((any::<bool>(), 0.0f64..=1.0), 1..64)), |(a, b)| {
            let (ba, bb) = (compute_rewards(batch(&a)).unwrap(), compute_rewards(batch(&b)).unwrap());
            prop_assert_eq!(ba.pass_rate, bb.pass_rate);
            let key = |x: &dslrepair::reward::RewardBatch| {
                let mut v: Vec<(bool, u64, u64)> = x
                    .items
                    .iter()
                    .zip(&x.rewards)
                    .map(|(i, r)| (i.passed, i.semantic.value().to_bits(), r.to_bits()))
                    .collect();
                v.sort();
                v
            };
            prop_assert_eq!(key(&ba), key(&bb));
            Ok(())
        }),
    )?;

    prop(
        "bash round trip",
        check("bash round trip", bash_command(), |text| {
            let a = parse_bash(&text).map_err(|e| fail(format!("{e}: {text}")))?;
            let printed = a.to_command_string();
            let b = parse_bash(&printed).map_err(|e| fail(format!("{e}: {printed}")))?;
            prop_assert_eq!(&a, &b);
            prop_assert_eq!(b.to_command_string(), printed);
            Ok(())
        }),
    )?;
    prop(
        "sql round trip",
        check("sql round trip", sql_query(), |text| {
            let a = parse_sql(&text).map_err(|e| fail(format!("{e}: {text}")))?;
            let printed = a.to_sql();
            let b = parse_sql(&printed).map_err(|e| fail(format!("{e}: {printed}")))?;
            prop_assert_eq!(&a, &b);
            prop_assert_eq!(b.to_sql(), printed);
            Ok(())
        }),
    )?;
    prop(
        "ansible round trip",
        check("ansible round trip", ansible_playbook(), |text| {
            let a = parse_playbook(&text).map_err(|e| fail(format!("{e}: {text}")))?;
            let printed = a.to_yaml_string();
            let b = parse_playbook(&printed).map_err(|e| fail(format!("{e}: {printed}")))?;
            prop_assert_eq!(&a, &b);
            prop_assert_eq!(b.to_yaml_string(), printed);
            Ok(())
        }),
    )?;

    Ok(format!("{} properties x {CASES} cases, 0 failures", names.len()))
}

fn batch(items: &[(bool, f64)]) -> Vec<BatchItem> {
    items
        .iter()
        .enumerate()
        .map(|(i, &(passed, s))| BatchItem {
            id: i.to_string(),
            passed,
            semantic: SemanticScore::new(s).unwrap(),
        })
        .collect()
}

/// A value alongside a shuffled copy.
fn shuffled<T: Clone + std::fmt::Debug + 'static>(
    s: impl Strategy<Value = Vec<T>>,
) -> impl Strategy<Value = (Vec<T>, Vec<T>)> {
    s.prop_flat_map(|v| (Just(v.clone()), Just(v).prop_shuffle()))
}
