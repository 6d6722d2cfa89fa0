//! Alias rewriting is done here on a token stream, independent of the
//! library's parser, so the scorer cannot agree with itself by construction.

use std::collections::{BTreeMap, HashMap};

use dslrepair::sql::sql_score_text;
use dslrepair::Language;

use crate::support;
use crate::Outcome;

const KEYWORDS: &[&str] = &[
    "select", "from", "where", "join", "on", "group", "by", "order", "having", "limit", "union", "intersect",
    "except", "as", "and", "or", "not", "in", "exists", "left", "right", "inner", "outer", "cross", "distinct",
    "like", "between", "is", "null", "desc", "asc", "all",
];

fn is_kw(t: &str) -> bool {
    KEYWORDS.contains(&t.to_ascii_lowercase().as_str())
}

fn is_ident(t: &str) -> bool {
    let mut c = t.chars();
    matches!(c.next(), Some(ch) if ch.is_ascii_alphabetic() || ch == '_')
        && c.all(|ch| ch.is_ascii_alphanumeric() || ch == '_')
        && !is_kw(t)
}

fn kw(t: &str, k: &str) -> bool {
    t.eq_ignore_ascii_case(k)
}

/// Identifiers keep their dotted qualifier (`T1.name` is one token).
fn tokenize(sql: &str) -> Vec<String> {
    let chars: Vec<char> = sql.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        if c.is_whitespace() {
            i += 1;
            continue;
        } else if c == '\'' || c == '"' {
            i += 1;
            while i < chars.len() && chars[i] != c {
                i += 1;
            }
            i += 1;
        } else if c.is_ascii_alphanumeric() || c == '_' {
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || "_.".contains(chars[i])) {
                i += 1;
            }
            // `T1.*`
            if chars[i - 1] == '.' && chars.get(i) == Some(&'*') {
                i += 1;
            }
        } else if "<>=!".contains(c) {
            while i < chars.len() && "<>=!".contains(chars[i]) {
                i += 1;
            }
        } else {
            i += 1;
        }
        out.push(chars[start..i.min(chars.len())].iter().collect());
    }
    out
}

fn join(tokens: &[String]) -> String {
    tokens.join(" ")
}

#[derive(Debug)]
struct TableRef {
    table: String,
    /// Index of the table token.
    at: usize,
    alias: Option<(String, usize)>,
    has_as: bool,
}

fn table_refs(t: &[String]) -> Vec<TableRef> {
    let mut out = Vec::new();
    for i in 1..t.len() {
        if !(kw(&t[i - 1], "from") || kw(&t[i - 1], "join")) || !is_ident(&t[i]) {
            continue;
        }
        let (alias, has_as) = match t.get(i + 1) {
            Some(a) if kw(a, "as") => (Some((t[i + 2].clone(), i + 2)), true),
            Some(a) if is_ident(a) => (Some((a.clone(), i + 1)), false),
            _ => (None, false),
        };
        out.push(TableRef { table: t[i].to_ascii_lowercase(), at: i, alias, has_as });
    }
    out
}

/// Every name introduced with an alias: tables, derived tables and columns.
fn alias_names(t: &[String]) -> Vec<String> {
    let mut names: Vec<String> = Vec::new();
    for r in table_refs(t) {
        if let Some((a, _)) = r.alias {
            names.push(a.to_ascii_lowercase());
        }
    }
    for i in 0..t.len().saturating_sub(1) {
        if kw(&t[i], "as") && is_ident(&t[i + 1]) {
            names.push(t[i + 1].to_ascii_lowercase());
        }
    }
    names.sort();
    names.dedup();
    names
}

/// Rewrite each part of identifier tokens through `f`; `None` keeps it.
fn map_parts(t: &[String], f: impl Fn(usize, usize, &str) -> Option<String>) -> Vec<String> {
    t.iter()
        .enumerate()
        .map(|(i, tok)| {
            if !tok.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_') {
                return tok.clone();
            }
            tok.split('.')
                .enumerate()
                .map(|(p, part)| f(i, p, part).unwrap_or_else(|| part.to_string()))
                .collect::<Vec<_>>()
                .join(".")
        })
        .collect()
}

fn rename(t: &[String]) -> Vec<String> {
    let fresh: HashMap<String, String> = alias_names(t)
        .into_iter()
        .enumerate()
        .map(|(k, a)| (a, format!("zz{k}_alias")))
        .collect();
    map_parts(t, |_, _, part| fresh.get(&part.to_ascii_lowercase()).cloned())
}

fn drop_as(t: &[String]) -> Vec<String> {
    t.iter().filter(|x| !kw(x, "as")).cloned().collect()
}

fn lower_keywords(t: &[String]) -> Vec<String> {
    t.iter().map(|x| if is_kw(x) { x.to_ascii_lowercase() } else { x.clone() }).collect()
}

/// Flip the case of alias references, leaving the definitions alone.
fn flip_reference_case(t: &[String]) -> Vec<String> {
    let names = alias_names(t);
    let defs: Vec<usize> = table_refs(t)
        .iter()
        .filter_map(|r| r.alias.as_ref().map(|a| a.1))
        .chain((1..t.len()).filter(|&i| kw(&t[i - 1], "as")))
        .collect();
    map_parts(t, |i, _, part| {
        if defs.contains(&i) || !names.contains(&part.to_ascii_lowercase()) {
            return None;
        }
        let lower = part.to_ascii_lowercase();
        Some(if part == lower { part.to_ascii_uppercase() } else { lower })
    })
}

/// Replace table aliases by the table name. Only when each alias always
/// names one table and each aliased table always uses one alias and never
/// appears bare.
fn remove_table_aliases(t: &[String]) -> Option<Vec<String>> {
    let refs = table_refs(t);
    let mut alias_to_table: BTreeMap<String, String> = BTreeMap::new();
    let mut table_to_alias: BTreeMap<String, String> = BTreeMap::new();
    for r in &refs {
        let Some((a, _)) = &r.alias else { continue };
        let a = a.to_ascii_lowercase();
        if alias_to_table.insert(a.clone(), r.table.clone()).is_some_and(|old| old != r.table) {
            return None;
        }
        if table_to_alias.insert(r.table.clone(), a.clone()).is_some_and(|old| old != a) {
            return None;
        }
    }
    if alias_to_table.is_empty() || refs.iter().any(|r| r.alias.is_none() && table_to_alias.contains_key(&r.table)) {
        return None;
    }
    let mut drop = vec![false; t.len()];
    for r in &refs {
        if let Some((_, at)) = &r.alias {
            drop[*at] = true;
            if r.has_as {
                drop[at - 1] = true;
            }
        }
    }
    let mapped = map_parts(t, |i, p, part| {
        let qualified = t[i].contains('.');
        (qualified && p == 0).then(|| alias_to_table.get(&part.to_ascii_lowercase()).cloned()).flatten()
    });
    Some(mapped.into_iter().zip(drop).filter(|(_, d)| !d).map(|(x, _)| x).collect())
}

/// Alias every table that is never aliased anywhere in the query.
fn add_table_aliases(t: &[String]) -> Option<Vec<String>> {
    let refs = table_refs(t);
    let aliased: Vec<&str> = refs.iter().filter(|r| r.alias.is_some()).map(|r| r.table.as_str()).collect();
    let mut fresh: BTreeMap<String, String> = BTreeMap::new();
    for r in refs.iter().filter(|r| r.alias.is_none() && !aliased.contains(&r.table.as_str())) {
        let n = fresh.len();
        fresh.entry(r.table.clone()).or_insert_with(|| format!("ta{n}"));
    }
    if fresh.is_empty() {
        return None;
    }
    let mapped = map_parts(t, |i, p, part| {
        let qualified = t[i].contains('.');
        (qualified && p == 0).then(|| fresh.get(&part.to_ascii_lowercase()).cloned()).flatten()
    });
    let mut out = Vec::new();
    for (i, tok) in mapped.into_iter().enumerate() {
        out.push(tok);
        if let Some(r) = refs.iter().find(|r| r.at == i && r.alias.is_none()) {
            if let Some(a) = fresh.get(&r.table) {
                out.extend(["AS".to_string(), a.clone()]);
            }
        }
    }
    Some(out)
}

/// Give an alias to every unaliased select item, except inside derived
/// tables whose column names the outer query depends on.
fn add_column_aliases(t: &[String]) -> Option<Vec<String>> {
    let mut insert_after: Vec<usize> = Vec::new();
    for s in 0..t.len() {
        if !kw(&t[s], "select") {
            continue;
        }
        let derived = s >= 2 && t[s - 1] == "(" && (kw(&t[s - 2], "from") || kw(&t[s - 2], "join"));
        if derived {
            continue;
        }
        let mut i = s + 1;
        if t.get(i).is_some_and(|x| kw(x, "distinct")) {
            i += 1;
        }
        let mut depth = 0i32;
        let mut item_start = i;
        loop {
            let end = i >= t.len() || (depth == 0 && (kw(&t[i], "from") || t[i] == ")" || t[i] == ","));
            if end {
                let item = &t[item_start..i];
                let starred = item.len() == 1 && (item[0] == "*" || item[0].ends_with(".*"));
                let has_alias = item.iter().any(|x| kw(x, "as"));
                if !item.is_empty() && !starred && !has_alias {
                    insert_after.push(i - 1);
                }
                if i < t.len() && t[i] == "," {
                    item_start = i + 1;
                } else {
                    break;
                }
            } else if t[i] == "(" {
                depth += 1;
            } else if t[i] == ")" {
                depth -= 1;
            }
            i += 1;
        }
    }
    if insert_after.is_empty() {
        return None;
    }
    let mut out = Vec::new();
    let mut k = 0;
    for (i, tok) in t.iter().enumerate() {
        out.push(tok.clone());
        if insert_after.contains(&i) {
            out.extend(["AS".to_string(), format!("ca{k}")]);
            k += 1;
        }
    }
    Some(out)
}

fn variants(query: &str) -> Vec<(&'static str, String)> {
    let t = tokenize(query);
    let mut v: Vec<(&'static str, Vec<String>)> = vec![
        ("rename", rename(&t)),
        ("drop AS", drop_as(&t)),
        ("rename, drop AS", drop_as(&rename(&t))),
        ("reference case", flip_reference_case(&t)),
        ("lowercase keywords, rename", lower_keywords(&rename(&t))),
    ];
    if let Some(x) = remove_table_aliases(&t) {
        v.push(("remove table aliases", x.clone()));
        v.push(("remove table aliases, drop AS", drop_as(&x)));
    }
    if let Some(x) = add_table_aliases(&t) {
        v.push(("add table aliases", x.clone()));
        if let Some(y) = add_column_aliases(&x) {
            v.push(("add table and column aliases", y));
        }
    }
    if let Some(x) = add_column_aliases(&t) {
        v.push(("add column aliases", x.clone()));
        v.push(("add column aliases, rename", rename(&x)));
    }
    let original = join(&t);
    let mut out: Vec<(&'static str, String)> = Vec::new();
    for (name, toks) in v {
        let s = join(&toks);
        if s != original && !out.iter().any(|(_, o)| *o == s) {
            out.push((name, s));
        }
    }
    out
}

pub fn run() -> Outcome {
    let rows = support::read_jsonl("alias_queries.jsonl");
    if rows.len() != 40 {
        return Err(format!("{} queries, expected 40", rows.len()));
    }
    let res = support::resources();
    let mut total = 0;
    for row in &rows {
        let id = row["id"].as_str().unwrap();
        let query = row["query"].as_str().unwrap();
        let db = row["db_id"].as_str();
        let vs = variants(query);
        if vs.len() < 2 {
            return Err(format!("{id}: only {} variants", vs.len()));
        }
        for (name, v) in vs {
            let report = res.validate(Language::Sql, &v, db).map_err(|e| e.to_string())?;
            if !report.passed {
                return Err(format!("{id} [{name}]: variant does not validate: {v}"));
            }
            let score = sql_score_text(query, &v).map_err(|e| format!("{id} [{name}]: {e}"))?;
            if score.value() != 1.0 {
                return Err(format!("{id} [{name}]: score {} for {v}", score.value()));
            }
            total += 1;
        }
    }
    Ok(format!("{total} variants of 40 queries, all score 1.0"))
}
