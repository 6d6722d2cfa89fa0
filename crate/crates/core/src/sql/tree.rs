//! Generic labelled tree view of a query, the input to edit distance.

use std::fmt::{self, Display, Formatter};

use serde::Serialize;

use super::ast::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum NodeKind {
    Query,
    Select,
    Alias,
    From,
    Join,
    On,
    Where,
    GroupBy,
    Having,
    OrderBy,
    OrderItem,
    Limit,
    Offset,
    Table,
    Column,
    Star,
    Literal,
    BinaryOp,
    Unary,
    Function,
    In,
    Between,
    IsNull,
    Exists,
    Subquery,
    SetOp,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Node {
    pub kind: NodeKind,
    pub label: String,
    pub children: Vec<Node>,
}

impl Node {
    fn leaf(kind: NodeKind, label: impl Into<String>) -> Node {
        Node {
            kind,
            label: label.into(),
            children: Vec::new(),
        }
    }

    fn with(kind: NodeKind, label: impl Into<String>, children: Vec<Node>) -> Node {
        Node {
            kind,
            label: label.into(),
            children,
        }
    }

    pub fn size(&self) -> usize {
        1 + self.children.iter().map(Node::size).sum::<usize>()
    }
}

/// S-expression form, e.g. `(Select:select (Column:name) ...)`.
impl Display for Node {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write!(f, "({:?}:{}", self.kind, self.label)?;
        for c in &self.children {
            write!(f, " {c}")?;
        }
        f.write_str(")")
    }
}

pub(crate) fn query_tree(q: &Query) -> Node {
    let mut tail = Vec::new();
    if !q.order_by.is_empty() {
        let items = q
            .order_by
            .iter()
            .map(|o| {
                let dir = match o.desc {
                    Some(true) => "desc",
                    Some(false) => "asc",
                    None => "",
                };
                Node::with(NodeKind::OrderItem, dir, vec![expr_tree(&o.expr)])
            })
            .collect();
        tail.push(Node::with(NodeKind::OrderBy, "order by", items));
    }
    if let Some(l) = &q.limit {
        tail.push(Node::with(NodeKind::Limit, "limit", vec![expr_tree(l)]));
    }
    if let Some(o) = &q.offset {
        tail.push(Node::with(NodeKind::Offset, "offset", vec![expr_tree(o)]));
    }
    let mut body = set_tree(&q.body);
    if tail.is_empty() {
        body
    } else if body.kind == NodeKind::Select {
        body.children.extend(tail);
        body
    } else {
        let mut children = vec![body];
        children.extend(tail);
        Node::with(NodeKind::Query, "query", children)
    }
}

fn set_tree(s: &SetExpr) -> Node {
    match s {
        SetExpr::Select(sel) => select_tree(sel),
        SetExpr::Query(q) => query_tree(q),
        SetExpr::SetOp { op, all, left, right } => {
            let label = if *all {
                format!("{} all", op.keyword())
            } else {
                op.keyword().to_string()
            };
            Node::with(NodeKind::SetOp, label, vec![set_tree(left), set_tree(right)])
        }
    }
}

fn select_tree(s: &Select) -> Node {
    let mut children: Vec<Node> = s
        .items
        .iter()
        .map(|item| {
            let e = expr_tree(&item.expr);
            match &item.alias {
                Some(a) => Node::with(NodeKind::Alias, a.clone(), vec![e]),
                None => e,
            }
        })
        .collect();
    if let Some(from) = &s.from {
        let mut kids = vec![factor_tree(&from.first)];
        for j in &from.joins {
            let mut jk = vec![factor_tree(&j.factor)];
            if let Some(on) = &j.on {
                jk.push(Node::with(NodeKind::On, "on", vec![expr_tree(on)]));
            }
            kids.push(Node::with(NodeKind::Join, j.kind.keyword(), jk));
        }
        children.push(Node::with(NodeKind::From, "from", kids));
    }
    if let Some(w) = &s.where_ {
        children.push(Node::with(NodeKind::Where, "where", vec![expr_tree(w)]));
    }
    if !s.group_by.is_empty() {
        children.push(Node::with(
            NodeKind::GroupBy,
            "group by",
            s.group_by.iter().map(expr_tree).collect(),
        ));
    }
    if let Some(h) = &s.having {
        children.push(Node::with(NodeKind::Having, "having", vec![expr_tree(h)]));
    }
    let label = if s.distinct { "select distinct" } else { "select" };
    Node::with(NodeKind::Select, label, children)
}

fn factor_tree(f: &TableFactor) -> Node {
    let (mut node, alias) = match f {
        TableFactor::Table { name, alias, .. } => (Node::leaf(NodeKind::Table, name.clone()), alias),
        TableFactor::Derived { query, alias } => (Node::with(NodeKind::Subquery, "subquery", vec![query_tree(query)]), alias),
    };
    if let Some(a) = alias {
        node.children.push(Node::leaf(NodeKind::Alias, a.clone()));
    }
    node
}

fn negatable(base: &str, negated: bool) -> String {
    if negated {
        format!("not {base}")
    } else {
        base.to_string()
    }
}

pub(crate) fn expr_tree(e: &Expr) -> Node {
    match e {
        Expr::Column { table, name, .. } => match table {
            Some(t) => Node::leaf(NodeKind::Column, format!("{t}.{name}")),
            None => Node::leaf(NodeKind::Column, name.clone()),
        },
        Expr::Star { table, .. } => match table {
            Some(t) => Node::leaf(NodeKind::Star, format!("{t}.*")),
            None => Node::leaf(NodeKind::Star, "*"),
        },
        Expr::Literal(l) => Node::leaf(NodeKind::Literal, l.to_string()),
        Expr::Binary { op, left, right } => Node::with(NodeKind::BinaryOp, op.symbol(), vec![expr_tree(left), expr_tree(right)]),
        Expr::And(items) => Node::with(NodeKind::BinaryOp, "and", items.iter().map(expr_tree).collect()),
        Expr::Not(inner) => Node::with(NodeKind::Unary, "not", vec![expr_tree(inner)]),
        Expr::Neg(inner) => Node::with(NodeKind::Unary, "-", vec![expr_tree(inner)]),
        Expr::Function { name, distinct, args } => {
            let label = if *distinct { format!("{name} distinct") } else { name.clone() };
            Node::with(NodeKind::Function, label, args.iter().map(expr_tree).collect())
        }
        Expr::InList { expr, list, negated } => {
            let mut kids = vec![expr_tree(expr)];
            kids.extend(list.iter().map(expr_tree));
            Node::with(NodeKind::In, negatable("in", *negated), kids)
        }
        Expr::InSubquery { expr, query, negated } => Node::with(
            NodeKind::In,
            negatable("in", *negated),
            vec![expr_tree(expr), Node::with(NodeKind::Subquery, "subquery", vec![query_tree(query)])],
        ),
        Expr::Between {
            expr,
            low,
            high,
            negated,
        } => Node::with(
            NodeKind::Between,
            negatable("between", *negated),
            vec![expr_tree(expr), expr_tree(low), expr_tree(high)],
        ),
        Expr::IsNull { expr, negated } => Node::with(
            NodeKind::IsNull,
            if *negated { "is not null" } else { "is null" },
            vec![expr_tree(expr)],
        ),
        Expr::Exists { query, negated } => Node::with(
            NodeKind::Exists,
            negatable("exists", *negated),
            vec![Node::with(NodeKind::Subquery, "subquery", vec![query_tree(query)])],
        ),
        Expr::Subquery(q) => Node::with(NodeKind::Subquery, "subquery", vec![query_tree(q)]),
    }
}
