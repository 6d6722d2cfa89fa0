//! Syntax plus schema-reference checks.

use super::ast::*;
use super::parse_sql;
use super::schema::DatabaseSchema;
use crate::{Diagnostic, Span, ValidationReport};

pub fn validate_sql(text: &str, schema: &DatabaseSchema) -> ValidationReport {
    let ast = match parse_sql(text) {
        Ok(ast) => ast,
        Err(e) => return ValidationReport::from_diagnostics(vec![e.0]),
    };
    let mut v = Validator {
        text,
        schema,
        scopes: Vec::new(),
        diagnostics: Vec::new(),
    };
    v.query(&ast.query);
    ValidationReport::from_diagnostics(v.diagnostics)
}

enum Source {
    Table(String),
    /// Output column names of a derived table; `None` when it selects `*`.
    Derived(Option<Vec<String>>),
    /// A table missing from the schema; already reported, so any column resolves.
    Unknown,
}

struct Scope {
    bindings: Vec<(String, Source)>,
    aliases: Vec<String>,
}

struct Validator<'a> {
    text: &'a str,
    schema: &'a DatabaseSchema,
    scopes: Vec<Scope>,
    diagnostics: Vec<Diagnostic>,
}

fn output_columns(q: &Query) -> Option<Vec<String>> {
    let mut body = &q.body;
    let sel = loop {
        match body {
            SetExpr::Select(s) => break s,
            SetExpr::SetOp { left, .. } => body = left,
            SetExpr::Query(q) => return output_columns(q),
        }
    };
    sel.items
        .iter()
        .map(|item| match (&item.alias, &item.expr) {
            (Some(a), _) => Some(a.to_lowercase()),
            (None, Expr::Star { .. }) => None,
            (None, Expr::Column { name, .. }) => Some(name.to_lowercase()),
            (None, e) => Some(e.to_string().to_lowercase()),
        })
        .collect()
}

impl Validator<'_> {
    fn report(&mut self, code: &str, message: String, pos: Pos) {
        let d = Diagnostic::new(code, message).with_span(Span::at_offset(self.text, pos.0));
        self.diagnostics.push(d);
    }

    fn query(&mut self, q: &Query) {
        self.set_expr(&q.body, Some(&q.order_by));
        for e in q.limit.iter().chain(&q.offset) {
            self.expr(e);
        }
    }

    fn set_expr(&mut self, s: &SetExpr, order: Option<&[OrderItem]>) {
        match s {
            SetExpr::Select(sel) => self.select(sel, order.unwrap_or_default()),
            SetExpr::Query(q) => {
                self.query(q);
                for o in order.unwrap_or_default() {
                    self.expr(&o.expr);
                }
            }
            SetExpr::SetOp { left, right, .. } => {
                self.set_expr(left, order);
                self.set_expr(right, None);
            }
        }
    }

    fn select(&mut self, s: &Select, order: &[OrderItem]) {
        let mut bindings = Vec::new();
        if let Some(from) = &s.from {
            for f in from.factors() {
                match f {
                    TableFactor::Table { name, alias, pos } => {
                        let source = if self.schema.table(name).is_none() {
                            self.report("SQL_UNKNOWN_TABLE", format!("table `{name}` is not in the schema"), *pos);
                            Source::Unknown
                        } else {
                            Source::Table(name.to_lowercase())
                        };
                        let binding = alias.as_deref().unwrap_or(name).to_lowercase();
                        bindings.push((binding, source));
                    }
                    TableFactor::Derived { query, alias } => {
                        self.query(query);
                        if let Some(a) = alias {
                            bindings.push((a.to_lowercase(), Source::Derived(output_columns(query))));
                        }
                    }
                }
            }
        }
        let aliases = s.items.iter().filter_map(|i| i.alias.as_deref().map(str::to_lowercase)).collect();
        self.scopes.push(Scope { bindings, aliases });
        for item in &s.items {
            self.expr(&item.expr);
        }
        if let Some(from) = &s.from {
            for j in &from.joins {
                if let Some(on) = &j.on {
                    self.expr(on);
                }
            }
        }
        for e in s.where_.iter().chain(&s.group_by).chain(&s.having) {
            self.expr(e);
        }
        for o in order {
            self.expr(&o.expr);
        }
        self.scopes.pop();
    }

    fn source_has(&self, source: &Source, column: &str) -> bool {
        match source {
            Source::Table(t) => self.schema.has_column(t, column),
            Source::Derived(None) | Source::Unknown => true,
            Source::Derived(Some(cols)) => cols.iter().any(|c| c == column),
        }
    }

    /// Current scope, then enclosing scopes, then select-list aliases.
    fn resolve_unqualified(&self, column: &str) -> bool {
        let in_tables = self
            .scopes
            .iter()
            .rev()
            .any(|s| s.bindings.iter().any(|(_, src)| self.source_has(src, column)));
        in_tables || self.scopes.iter().rev().any(|s| s.aliases.iter().any(|a| a == column))
    }

    fn binding(&self, qualifier: &str) -> Option<&Source> {
        self.scopes
            .iter()
            .rev()
            .flat_map(|s| s.bindings.iter())
            .find(|(b, _)| b == qualifier)
            .map(|(_, src)| src)
    }

    fn qualified(&mut self, table: &str, column: Option<&str>, pos: Pos) {
        let q = table.to_lowercase();
        let Some(source) = self.binding(&q) else {
            let msg = if self.schema.table(&q).is_some() {
                format!("table `{table}` is not in the FROM clause")
            } else {
                format!("`{table}` is neither a table in the schema nor an alias in scope")
            };
            self.report("SQL_UNKNOWN_TABLE", msg, pos);
            return;
        };
        if let Some(c) = column {
            if !self.source_has(source, &c.to_lowercase()) {
                self.report("SQL_UNKNOWN_COLUMN", format!("column `{table}.{c}` does not exist"), pos);
            }
        }
    }

    fn expr(&mut self, e: &Expr) {
        match e {
            Expr::Column { table: Some(t), name, pos } => self.qualified(t, Some(name), *pos),
            Expr::Column { table: None, name, pos } => {
                if !self.resolve_unqualified(&name.to_lowercase()) {
                    self.report(
                        "SQL_UNKNOWN_COLUMN",
                        format!("column `{name}` is not in any table in scope"),
                        *pos,
                    );
                }
            }
            Expr::Star { table: Some(t), pos } => self.qualified(t, None, *pos),
            Expr::Star { table: None, .. } | Expr::Literal(_) => {}
            Expr::Binary { left, right, .. } => {
                self.expr(left);
                self.expr(right);
            }
            Expr::And(items) => items.iter().for_each(|i| self.expr(i)),
            Expr::Function { args, .. } => args.iter().for_each(|a| self.expr(a)),
            Expr::Not(x) | Expr::Neg(x) | Expr::IsNull { expr: x, .. } => self.expr(x),
            Expr::InList { expr, list, .. } => {
                self.expr(expr);
                list.iter().for_each(|i| self.expr(i));
            }
            Expr::InSubquery { expr, query, .. } => {
                self.expr(expr);
                self.query(query);
            }
            Expr::Between { expr, low, high, .. } => {
                self.expr(expr);
                self.expr(low);
                self.expr(high);
            }
            Expr::Exists { query, .. } | Expr::Subquery(query) => self.query(query),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schema() -> DatabaseSchema {
        DatabaseSchema::from_tables([
            ("users", vec![("id", "number"), ("name", "text"), ("city", "text")]),
            ("orders", vec![("id", "number"), ("user_id", "number"), ("total", "number")]),
        ])
    }

    fn codes(q: &str) -> Vec<String> {
        validate_sql(q, &schema()).diagnostics.into_iter().map(|d| d.code).collect()
    }

    #[test]
    fn minimal_cases() {
        assert!(validate_sql("SELECT name FROM users", &schema()).passed);
        let no_users = DatabaseSchema::from_tables([("orders", vec![("id", "number")])]);
        let r = validate_sql("SELECT name FROM users", &no_users);
        assert!(!r.passed);
        assert!(r.error_codes().contains(&"SQL_UNKNOWN_TABLE"));
        assert_eq!(codes("SELECT ghost FROM users"), ["SQL_UNKNOWN_COLUMN"]);
        assert_eq!(codes("SELECT FROM users"), ["SQL_SYNTAX"]);
    }

    #[test]
    fn joins_and_aliases() {
        assert!(codes(
            "SELECT T1.name, count(*) FROM users AS T1 JOIN orders AS T2 ON T1.id = T2.user_id \
             GROUP BY T1.id HAVING count(*) > 2 ORDER BY count(*) DESC LIMIT 1"
        )
        .is_empty());
        assert_eq!(codes("SELECT T1.total FROM users AS T1"), ["SQL_UNKNOWN_COLUMN"]);
        assert_eq!(codes("SELECT T3.name FROM users AS T1"), ["SQL_UNKNOWN_TABLE"]);
        assert_eq!(codes("SELECT orders.id FROM users"), ["SQL_UNKNOWN_TABLE"]);
    }

    #[test]
    fn ambiguous_unqualified_column_resolves() {
        assert!(codes("SELECT id FROM users JOIN orders ON users.id = orders.user_id").is_empty());
    }

    #[test]
    fn select_alias_and_star() {
        assert!(codes("SELECT count(*) AS n FROM orders GROUP BY user_id ORDER BY n").is_empty());
        assert!(codes("SELECT * FROM users").is_empty());
        assert!(codes("SELECT users.* FROM users").is_empty());
    }

    #[test]
    fn nested_scopes() {
        assert!(codes("SELECT name FROM users WHERE id IN (SELECT user_id FROM orders WHERE total > 10)").is_empty());
        assert!(codes("SELECT name FROM users AS u WHERE EXISTS (SELECT 1 FROM orders WHERE orders.user_id = u.id)").is_empty());
        assert!(codes("SELECT t.n FROM (SELECT name AS n FROM users) AS t").is_empty());
        assert_eq!(codes("SELECT t.name FROM (SELECT name AS n FROM users) AS t"), ["SQL_UNKNOWN_COLUMN"]);
        assert!(codes("SELECT name FROM users UNION SELECT city FROM users ORDER BY name").is_empty());
    }

    #[test]
    fn all_problems_reported_with_spans() {
        let spans = |q: &str| -> Vec<(String, usize)> {
            let r = validate_sql(q, &schema());
            r.diagnostics.iter().map(|d| (d.code.clone(), d.span.unwrap().column)).collect()
        };
        assert_eq!(
            spans("SELECT ghost, T9.name, spook FROM users"),
            [("SQL_UNKNOWN_COLUMN".into(), 8), ("SQL_UNKNOWN_TABLE".into(), 15), ("SQL_UNKNOWN_COLUMN".into(), 24)]
        );
        // Columns of an unknown table are not reported a second time.
        assert_eq!(spans("SELECT a, b FROM nowhere"), [("SQL_UNKNOWN_TABLE".into(), 18)]);
    }
}
