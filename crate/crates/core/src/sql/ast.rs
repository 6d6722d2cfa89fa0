//! Typed syntax tree for the supported SELECT surface, with a canonical
//! SQL printer.

use std::fmt::{self, Display, Formatter, Write as _};

/// Source byte offset. Ignored by equality so trees from different texts
/// compare structurally.
#[derive(Debug, Clone, Copy, Default)]
pub struct Pos(pub usize);

impl PartialEq for Pos {
    fn eq(&self, _: &Pos) -> bool {
        true
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Query {
    pub body: SetExpr,
    pub order_by: Vec<OrderItem>,
    pub limit: Option<Expr>,
    pub offset: Option<Expr>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SetExpr {
    Select(Box<Select>),
    SetOp {
        op: SetOpKind,
        all: bool,
        left: Box<SetExpr>,
        right: Box<SetExpr>,
    },
    /// A parenthesized query used as a set operand.
    Query(Box<Query>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SetOpKind {
    Union,
    Intersect,
    Except,
}

impl SetOpKind {
    pub fn keyword(self) -> &'static str {
        match self {
            SetOpKind::Union => "union",
            SetOpKind::Intersect => "intersect",
            SetOpKind::Except => "except",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Select {
    pub distinct: bool,
    pub items: Vec<SelectItem>,
    pub from: Option<From>,
    pub where_: Option<Expr>,
    pub group_by: Vec<Expr>,
    pub having: Option<Expr>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectItem {
    pub expr: Expr,
    pub alias: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct From {
    pub first: TableFactor,
    pub joins: Vec<Join>,
}

impl From {
    pub fn factors(&self) -> impl Iterator<Item = &TableFactor> {
        std::iter::once(&self.first).chain(self.joins.iter().map(|j| &j.factor))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JoinKind {
    /// `a, b`
    Comma,
    Inner,
    Left,
    Right,
    Cross,
}

impl JoinKind {
    pub fn keyword(self) -> &'static str {
        match self {
            JoinKind::Comma => ",",
            JoinKind::Inner => "join",
            JoinKind::Left => "left join",
            JoinKind::Right => "right join",
            JoinKind::Cross => "cross join",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Join {
    pub kind: JoinKind,
    pub factor: TableFactor,
    pub on: Option<Expr>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TableFactor {
    Table {
        name: String,
        alias: Option<String>,
        pos: Pos,
    },
    Derived {
        query: Box<Query>,
        alias: Option<String>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderItem {
    pub expr: Expr,
    /// `None` when no direction keyword was written.
    pub desc: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Or,
    And,
    Eq,
    NotEq,
    Lt,
    LtEq,
    Gt,
    GtEq,
    Like,
    NotLike,
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Concat,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Or => "or",
            BinOp::And => "and",
            BinOp::Eq => "=",
            BinOp::NotEq => "!=",
            BinOp::Lt => "<",
            BinOp::LtEq => "<=",
            BinOp::Gt => ">",
            BinOp::GtEq => ">=",
            BinOp::Like => "like",
            BinOp::NotLike => "not like",
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Mod => "%",
            BinOp::Concat => "||",
        }
    }

    pub(crate) fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Eq | BinOp::NotEq | BinOp::Lt | BinOp::LtEq | BinOp::Gt | BinOp::GtEq | BinOp::Like | BinOp::NotLike => 4,
            BinOp::Add | BinOp::Sub => 5,
            BinOp::Mul | BinOp::Div | BinOp::Mod => 6,
            BinOp::Concat => 7,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Literal {
    Number(String),
    String { value: String, quote: char },
    Null,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Column {
        table: Option<String>,
        name: String,
        pos: Pos,
    },
    /// `*` or `t.*`
    Star { table: Option<String>, pos: Pos },
    Literal(Literal),
    Binary {
        op: BinOp,
        left: Box<Expr>,
        right: Box<Expr>,
    },
    /// Flattened, order-canonical conjunction; produced only by normalization.
    And(Vec<Expr>),
    Not(Box<Expr>),
    Neg(Box<Expr>),
    Function {
        name: String,
        distinct: bool,
        args: Vec<Expr>,
    },
    InList {
        expr: Box<Expr>,
        list: Vec<Expr>,
        negated: bool,
    },
    InSubquery {
        expr: Box<Expr>,
        query: Box<Query>,
        negated: bool,
    },
    Between {
        expr: Box<Expr>,
        low: Box<Expr>,
        high: Box<Expr>,
        negated: bool,
    },
    IsNull {
        expr: Box<Expr>,
        negated: bool,
    },
    Exists {
        query: Box<Query>,
        negated: bool,
    },
    Subquery(Box<Query>),
}

impl Expr {
    pub fn column(name: &str) -> Expr {
        Expr::Column {
            table: None,
            name: name.to_string(),
            pos: Pos::default(),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Binary { op, .. } => op.precedence(),
            Expr::And(_) => 2,
            Expr::Not(_) => 3,
            Expr::InList { .. } | Expr::InSubquery { .. } | Expr::Between { .. } | Expr::IsNull { .. } => 4,
            Expr::Neg(_) => 8,
            _ => 9,
        }
    }
}

pub(crate) const KEYWORDS: &[&str] = &[
    "all", "and", "as", "asc", "between", "by", "case", "cross", "desc", "distinct", "else", "end", "except", "exists",
    "from", "group", "having", "in", "inner", "intersect", "is", "join", "left", "like", "limit", "not", "null",
    "offset", "on", "or", "order", "outer", "right", "select", "then", "union", "using", "when", "where",
];

pub(crate) fn is_keyword(word: &str) -> bool {
    KEYWORDS.iter().any(|k| k.eq_ignore_ascii_case(word))
}

fn ident(name: &str) -> String {
    let plain = name.starts_with(|c: char| c.is_alphabetic() || c == '_')
        && name.chars().all(|c| c.is_alphanumeric() || c == '_' || c == '$')
        && !is_keyword(name);
    if plain {
        name.to_string()
    } else {
        format!("`{}`", name.replace('`', "``"))
    }
}

impl Display for Literal {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Number(n) => f.write_str(n),
            Literal::Null => f.write_str("NULL"),
            Literal::String { value, quote } => {
                let q = quote.to_string();
                write!(f, "{q}{}{q}", value.replace(*quote, &format!("{q}{q}")))
            }
        }
    }
}

impl Display for Query {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.body)?;
        if !self.order_by.is_empty() {
            f.write_str(" ORDER BY ")?;
            for (i, item) in self.order_by.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{}", item.expr)?;
                match item.desc {
                    Some(true) => f.write_str(" DESC")?,
                    Some(false) => f.write_str(" ASC")?,
                    None => {}
                }
            }
        }
        if let Some(limit) = &self.limit {
            write!(f, " LIMIT {limit}")?;
        }
        if let Some(offset) = &self.offset {
            write!(f, " OFFSET {offset}")?;
        }
        Ok(())
    }
}

impl Display for SetExpr {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            SetExpr::Select(s) => write!(f, "{s}"),
            SetExpr::Query(q) => write!(f, "({q})"),
            SetExpr::SetOp { op, all, left, right } => {
                write!(f, "{left} {}{} ", op.keyword().to_uppercase(), if *all { " ALL" } else { "" })?;
                // Set operators associate to the left.
                match **right {
                    SetExpr::SetOp { .. } => write!(f, "({right})"),
                    _ => write!(f, "{right}"),
                }
            }
        }
    }
}

impl Display for Select {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        f.write_str("SELECT ")?;
        if self.distinct {
            f.write_str("DISTINCT ")?;
        }
        for (i, item) in self.items.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}", item.expr)?;
            if let Some(a) = &item.alias {
                write!(f, " AS {}", ident(a))?;
            }
        }
        if let Some(from) = &self.from {
            write!(f, " FROM {}", from.first)?;
            for j in &from.joins {
                match j.kind {
                    JoinKind::Comma => write!(f, ", {}", j.factor)?,
                    k => write!(f, " {} {}", k.keyword().to_uppercase(), j.factor)?,
                }
                if let Some(on) = &j.on {
                    write!(f, " ON {on}")?;
                }
            }
        }
        if let Some(w) = &self.where_ {
            write!(f, " WHERE {w}")?;
        }
        if !self.group_by.is_empty() {
            f.write_str(" GROUP BY ")?;
            write_list(f, &self.group_by)?;
        }
        if let Some(h) = &self.having {
            write!(f, " HAVING {h}")?;
        }
        Ok(())
    }
}

impl Display for TableFactor {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        let alias = match self {
            TableFactor::Table { name, alias, .. } => {
                f.write_str(&ident(name))?;
                alias
            }
            TableFactor::Derived { query, alias } => {
                write!(f, "({query})")?;
                alias
            }
        };
        if let Some(a) = alias {
            write!(f, " AS {}", ident(a))?;
        }
        Ok(())
    }
}

fn write_list(f: &mut Formatter<'_>, items: &[Expr]) -> fmt::Result {
    for (i, e) in items.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{e}")?;
    }
    Ok(())
}

/// Write `e` as an operand of an operator with precedence `parent`,
/// parenthesizing when the parse would otherwise regroup it.
fn operand(f: &mut Formatter<'_>, e: &Expr, parent: u8, right: bool) -> fmt::Result {
    let p = e.precedence();
    if p < parent || (right && p == parent) || (p == parent && p == 4) {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl Display for Expr {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Column { table, name, .. } => {
                if let Some(t) = table {
                    write!(f, "{}.", ident(t))?;
                }
                f.write_str(&ident(name))
            }
            Expr::Star { table, .. } => match table {
                Some(t) => write!(f, "{}.*", ident(t)),
                None => f.write_str("*"),
            },
            Expr::Literal(l) => write!(f, "{l}"),
            Expr::Binary { op, left, right } => {
                let p = op.precedence();
                operand(f, left, p, false)?;
                write!(f, " {} ", op.symbol().to_uppercase())?;
                operand(f, right, p, true)
            }
            Expr::And(items) => {
                for (i, e) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" AND ")?;
                    }
                    operand(f, e, 2, i > 0)?;
                }
                Ok(())
            }
            Expr::Not(e) => {
                f.write_str("NOT ")?;
                operand(f, e, 3, false)
            }
            Expr::Neg(e) => {
                f.write_str("-")?;
                if matches!(**e, Expr::Neg(_)) {
                    write!(f, "({e})")
                } else {
                    operand(f, e, 8, false)
                }
            }
            Expr::Function { name, distinct, args } => {
                write!(f, "{}(", ident(name))?;
                if *distinct {
                    f.write_str("DISTINCT ")?;
                }
                write_list(f, args)?;
                f.write_str(")")
            }
            Expr::InList { expr, list, negated } => {
                operand(f, expr, 5, false)?;
                f.write_str(if *negated { " NOT IN (" } else { " IN (" })?;
                write_list(f, list)?;
                f.write_str(")")
            }
            Expr::InSubquery { expr, query, negated } => {
                operand(f, expr, 5, false)?;
                write!(f, "{}({query})", if *negated { " NOT IN " } else { " IN " })
            }
            Expr::Between {
                expr,
                low,
                high,
                negated,
            } => {
                operand(f, expr, 5, false)?;
                f.write_str(if *negated { " NOT BETWEEN " } else { " BETWEEN " })?;
                operand(f, low, 5, false)?;
                f.write_str(" AND ")?;
                operand(f, high, 5, false)
            }
            Expr::IsNull { expr, negated } => {
                operand(f, expr, 5, false)?;
                f.write_str(if *negated { " IS NOT NULL" } else { " IS NULL" })
            }
            Expr::Exists { query, negated } => {
                write!(f, "{}EXISTS ({query})", if *negated { "NOT " } else { "" })
            }
            Expr::Subquery(q) => write!(f, "({q})"),
        }
    }
}

/// Canonical SQL text of a query.
pub fn to_sql(q: &Query) -> String {
    let mut s = String::new();
    write!(s, "{q}").expect("writing to a String");
    s
}
