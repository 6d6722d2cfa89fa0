//! Canonical form for scoring: no column aliases, table aliases replaced by
//! table names, derived tables and their output columns named by position,
//! lowercase identifiers, sorted AND chains, single-quoted string literals.

use indexmap::IndexMap;

use super::ast::*;
use super::tree::expr_tree;
use super::SqlAst;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum NormalizeError {
    #[error("`{0}` is used as a table qualifier but no table or alias of that name is in scope")]
    UnboundAlias(String),
}

enum Binding {
    Table(String),
    /// `columns[k]` is the output name of column `k`, when it has one.
    Derived { name: String, columns: Vec<Option<String>> },
}

/// Names visible as column qualifiers in one SELECT.
#[derive(Default)]
struct Scope {
    bindings: Vec<(String, Binding)>,
}

fn derived_name(k: usize) -> String {
    format!("#derived{k}")
}

fn column_name(k: usize) -> String {
    format!("#{k}")
}

fn output_columns(q: &Query) -> Vec<Option<String>> {
    let mut body = &q.body;
    loop {
        match body {
            SetExpr::Select(s) => {
                return s
                    .items
                    .iter()
                    .map(|i| match (&i.alias, &i.expr) {
                        (Some(a), _) => Some(lower(a)),
                        (None, Expr::Column { name, .. }) => Some(lower(name)),
                        _ => None,
                    })
                    .collect()
            }
            SetExpr::Query(inner) => body = &inner.body,
            SetExpr::SetOp { left, .. } => body = left,
        }
    }
}

type Result<T> = std::result::Result<T, NormalizeError>;

pub fn normalize_sql(ast: &SqlAst) -> Result<SqlAst> {
    Ok(SqlAst {
        query: query(&ast.query, &mut Vec::new())?,
    })
}

fn query(q: &Query, scopes: &mut Vec<Scope>) -> Result<Query> {
    let (body, order_by) = set_expr(&q.body, scopes, Some(&q.order_by))?;
    Ok(Query {
        body,
        order_by: order_by.unwrap_or_default(),
        limit: q.limit.as_ref().map(|e| expr(e, scopes, &IndexMap::new())).transpose()?,
        offset: q.offset.as_ref().map(|e| expr(e, scopes, &IndexMap::new())).transpose()?,
    })
}

/// `order` is normalized in the scope of the leftmost SELECT, whose output
/// names the ORDER BY of a compound query refers to.
fn set_expr(s: &SetExpr, scopes: &mut Vec<Scope>, order: Option<&[OrderItem]>) -> Result<(SetExpr, Option<Vec<OrderItem>>)> {
    match s {
        SetExpr::Select(sel) => {
            let (sel, order) = select(sel, scopes, order)?;
            Ok((SetExpr::Select(Box::new(sel)), order))
        }
        SetExpr::Query(q) => {
            // A parenthesized operand's own ORDER BY stays inside it.
            let inner = query(q, scopes)?;
            let order = order.map(|o| order_items(o, scopes, &IndexMap::new())).transpose()?;
            Ok((SetExpr::Query(Box::new(inner)), order))
        }
        SetExpr::SetOp { op, all, left, right } => {
            let (left, order) = set_expr(left, scopes, order)?;
            let (right, _) = set_expr(right, scopes, None)?;
            Ok((
                SetExpr::SetOp {
                    op: *op,
                    all: *all,
                    left: Box::new(left),
                    right: Box::new(right),
                },
                order,
            ))
        }
    }
}

fn lower(s: &str) -> String {
    s.to_lowercase()
}

fn select(s: &Select, scopes: &mut Vec<Scope>, order: Option<&[OrderItem]>) -> Result<(Select, Option<Vec<OrderItem>>)> {
    // FROM first: derived tables see only outer scopes, then this scope
    // binds every factor for the rest of the SELECT.
    let mut scope = Scope::default();
    let mut factors = Vec::new();
    if let Some(from) = &s.from {
        for f in from.factors() {
            let nf = match f {
                TableFactor::Table { name, alias, pos } => {
                    let name = lower(name);
                    scope.bindings.push((alias.as_deref().map_or_else(|| name.clone(), lower), Binding::Table(name.clone())));
                    TableFactor::Table {
                        name,
                        alias: None,
                        pos: *pos,
                    }
                }
                TableFactor::Derived { query: q, alias } => {
                    let name = derived_name(factors.len());
                    if let Some(a) = alias {
                        let binding = Binding::Derived {
                            name: name.clone(),
                            columns: output_columns(q),
                        };
                        scope.bindings.push((lower(a), binding));
                    }
                    TableFactor::Derived {
                        query: Box::new(query(q, scopes)?),
                        alias: alias.as_ref().map(|_| name),
                    }
                }
            };
            factors.push(nf);
        }
    }
    scopes.push(scope);
    let result = select_in_scope(s, factors, scopes, order);
    scopes.pop();
    result
}

fn select_in_scope(
    s: &Select,
    factors: Vec<TableFactor>,
    scopes: &mut Vec<Scope>,
    order: Option<&[OrderItem]>,
) -> Result<(Select, Option<Vec<OrderItem>>)> {
    let none = IndexMap::new();
    let mut aliases: IndexMap<String, Expr> = IndexMap::new();
    let mut items = Vec::with_capacity(s.items.len());
    for item in &s.items {
        let e = expr(&item.expr, scopes, &none)?;
        if let Some(a) = &item.alias {
            aliases.entry(lower(a)).or_insert_with(|| e.clone());
        }
        items.push(SelectItem { expr: e, alias: None });
    }
    let from = match &s.from {
        None => None,
        Some(from) => {
            let mut factors = factors.into_iter();
            let first = factors.next().expect("one factor per FROM entry");
            let joins = from
                .joins
                .iter()
                .zip(factors)
                .map(|(j, factor)| {
                    Ok(Join {
                        kind: j.kind,
                        factor,
                        on: j.on.as_ref().map(|e| expr(e, scopes, &none)).transpose()?,
                    })
                })
                .collect::<Result<_>>()?;
            Some(From { first, joins })
        }
    };
    let sel = Select {
        distinct: s.distinct,
        items,
        from,
        where_: s.where_.as_ref().map(|e| expr(e, scopes, &none)).transpose()?,
        group_by: s.group_by.iter().map(|e| expr(e, scopes, &aliases)).collect::<Result<_>>()?,
        having: s.having.as_ref().map(|e| expr(e, scopes, &aliases)).transpose()?,
    };
    let order = order.map(|o| order_items(o, scopes, &aliases)).transpose()?;
    Ok((sel, order))
}

fn order_items(items: &[OrderItem], scopes: &mut Vec<Scope>, aliases: &IndexMap<String, Expr>) -> Result<Vec<OrderItem>> {
    items
        .iter()
        .map(|o| {
            Ok(OrderItem {
                expr: expr(&o.expr, scopes, aliases)?,
                desc: o.desc,
            })
        })
        .collect()
}

fn lookup<'s>(q: &str, scopes: &'s [Scope]) -> Result<&'s Binding> {
    let q = lower(q);
    for scope in scopes.iter().rev() {
        for (name, binding) in &scope.bindings {
            let hit = match binding {
                Binding::Table(t) => *name == q || *t == q,
                Binding::Derived { name: d, .. } => *name == q || *d == q,
            };
            if hit {
                return Ok(binding);
            }
        }
    }
    Err(NormalizeError::UnboundAlias(q))
}

fn qualifier(q: &str, scopes: &[Scope]) -> Result<String> {
    Ok(match lookup(q, scopes)? {
        Binding::Table(t) => t.clone(),
        Binding::Derived { name, .. } => name.clone(),
    })
}

/// A column of a derived table, named by position when it has an output name.
fn derived_column(binding: &Binding, column: &str) -> Option<(String, String)> {
    let Binding::Derived { name, columns } = binding else {
        return None;
    };
    let k = columns.iter().position(|c| c.as_deref() == Some(column))?;
    Some((name.clone(), column_name(k)))
}

fn column(table: Option<&str>, name: &str, pos: Pos, scopes: &[Scope]) -> Result<Expr> {
    let name = lower(name);
    let resolved = match table {
        Some(t) => {
            let binding = lookup(t, scopes)?;
            derived_column(binding, &name).or_else(|| Some((qualifier(t, scopes).ok()?, name.clone())))
        }
        // Unqualified names resolve against derived tables only when the
        // SELECT reads from nothing else.
        None => scopes.last().and_then(|s| match s.bindings.as_slice() {
            [(_, b @ Binding::Derived { .. })] => derived_column(b, &name),
            _ => None,
        }),
    };
    Ok(match resolved {
        Some((table, name)) => Expr::Column {
            table: Some(table),
            name,
            pos,
        },
        None => Expr::Column { table: None, name, pos },
    })
}

fn boxed(e: &Expr, scopes: &mut Vec<Scope>, aliases: &IndexMap<String, Expr>) -> Result<Box<Expr>> {
    expr(e, scopes, aliases).map(Box::new)
}

/// `aliases` maps select-list aliases (already normalized expressions) that
/// an unqualified column may refer to.
fn expr(e: &Expr, scopes: &mut Vec<Scope>, aliases: &IndexMap<String, Expr>) -> Result<Expr> {
    Ok(match e {
        Expr::Column { table: None, name, pos } => match aliases.get(&lower(name)) {
            Some(target) => target.clone(),
            None => column(None, name, *pos, scopes)?,
        },
        Expr::Column { table, name, pos } => column(table.as_deref(), name, *pos, scopes)?,
        Expr::Star { table, pos } => Expr::Star {
            table: table.as_deref().map(|t| qualifier(t, scopes)).transpose()?,
            pos: *pos,
        },
        Expr::Literal(Literal::String { value, .. }) => Expr::Literal(Literal::String {
            value: value.clone(),
            quote: '\'',
        }),
        Expr::Literal(l) => Expr::Literal(l.clone()),
        Expr::Binary {
            op: BinOp::And, ..
        }
        | Expr::And(_) => {
            let mut parts = Vec::new();
            flatten_and(e, &mut parts);
            let mut items = parts
                .into_iter()
                .map(|p| expr(p, scopes, aliases))
                .collect::<Result<Vec<_>>>()?;
            // Children are already canonical, so their serialization is too.
            items.sort_by_cached_key(|i| expr_tree(i).to_string());
            Expr::And(items)
        }
        Expr::Binary { op, left, right } => Expr::Binary {
            op: *op,
            left: boxed(left, scopes, aliases)?,
            right: boxed(right, scopes, aliases)?,
        },
        Expr::Not(inner) => Expr::Not(boxed(inner, scopes, aliases)?),
        Expr::Neg(inner) => Expr::Neg(boxed(inner, scopes, aliases)?),
        Expr::Function { name, distinct, args } => Expr::Function {
            name: lower(name),
            distinct: *distinct,
            args: args.iter().map(|a| expr(a, scopes, aliases)).collect::<Result<_>>()?,
        },
        Expr::InList { expr: x, list, negated } => Expr::InList {
            expr: boxed(x, scopes, aliases)?,
            list: list.iter().map(|a| expr(a, scopes, aliases)).collect::<Result<_>>()?,
            negated: *negated,
        },
        Expr::InSubquery { expr: x, query: q, negated } => Expr::InSubquery {
            expr: boxed(x, scopes, aliases)?,
            query: Box::new(query(q, scopes)?),
            negated: *negated,
        },
        Expr::Between {
            expr: x,
            low,
            high,
            negated,
        } => Expr::Between {
            expr: boxed(x, scopes, aliases)?,
            low: boxed(low, scopes, aliases)?,
            high: boxed(high, scopes, aliases)?,
            negated: *negated,
        },
        Expr::IsNull { expr: x, negated } => Expr::IsNull {
            expr: boxed(x, scopes, aliases)?,
            negated: *negated,
        },
        Expr::Exists { query: q, negated } => Expr::Exists {
            query: Box::new(query(q, scopes)?),
            negated: *negated,
        },
        Expr::Subquery(q) => Expr::Subquery(Box::new(query(q, scopes)?)),
    })
}

fn flatten_and<'e>(e: &'e Expr, out: &mut Vec<&'e Expr>) {
    match e {
        Expr::Binary {
            op: BinOp::And,
            left,
            right,
        } => {
            flatten_and(left, out);
            flatten_and(right, out);
        }
        Expr::And(items) => items.iter().for_each(|i| flatten_and(i, out)),
        other => out.push(other),
    }
}
